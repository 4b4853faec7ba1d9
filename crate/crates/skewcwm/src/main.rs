fn main() {
    std::process::exit(skewcwm::cli::run());
}
