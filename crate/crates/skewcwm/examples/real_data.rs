//! Full model selection on a user-supplied CSV, as run for the two
//! benchmark applications. The repository ships the column mappings but not
//! the data files.
//!
//! Usage:
//!   cargo run --release --example real_data -- <csv> <preset> [seed]
//! where <preset> is `ais` (RCC/WCC/Fe on BMI/SSF/Bfat/LBM, sex labels) or
//! `pulpfiber` (EM/SF on LFF/ZST).

use skewcwm::cli::{cmd_select, RunConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() < 3 {
        eprintln!("usage: real_data <csv> <ais|pulpfiber> [seed]");
        std::process::exit(1);
    }
    let seed = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = RunConfig {
        command: "select".into(),
        input: Some(args[1].clone()),
        responses: vec![],
        covariates: vec![],
        labels: None,
        models: vec!["all".into()],
        gmin: 1,
        gmax: 3,
        seed,
        tol: 1e-6,
        max_iter: 400,
        out: format!("out-{}", args[2]),
        preset: Some(args[2].clone()),
        replicates: 10,
        n: 400,
        standardize: false,
        mode: None,
    };
    if let Err(e) = cmd_select(&cfg) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
