//! The five component families on the line: normalization by quadrature and
//! the Monte Carlo variance-mean mixture identity.
//!
//! Run with: cargo run --release --example density_gallery

use nalgebra::{dmatrix, dvector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewcwm::dists::{sample_mixing_weight, ComponentBlock, DistKind};
use skewcwm::matcore::SpdMatrix;
use skewcwm::numint::integrate_real_line;

fn main() -> skewcwm::Result<()> {
    let kinds = [
        DistKind::Normal,
        DistKind::SkewT { nu: 5.0 },
        DistKind::GenHyperbolic { omega: 2.0, lambda: 0.5 },
        DistKind::VarianceGamma { gamma: 3.0 },
        DistKind::NormalInvGaussian { kappa: 1.5 },
    ];
    println!("{:<22} {:>14} {:>14}", "family", "integral", "MC identity");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for kind in kinds {
        let skew = if kind.family().is_skewed() { 0.8 } else { 0.0 };
        let block = ComponentBlock::new(
            dvector![0.3],
            SpdMatrix::new(dmatrix![1.2])?,
            dvector![skew],
            kind,
        )?;
        // total mass on the line
        let mass = integrate_real_line(|x| block.log_density(&dvector![x]).unwrap().exp(), 1e-10);

        // MC average of the conditional normal kernel over sampled W at x = 1.4
        let x = 1.4_f64;
        let target = block.log_density(&dvector![x])?.exp();
        let draws = 100_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let w = sample_mixing_weight(&kind, &mut rng);
            let r = x - 0.3 - w * skew;
            acc += (-(r * r) / (2.0 * w * 1.2)).exp()
                / (2.0 * std::f64::consts::PI * w * 1.2).sqrt();
        }
        let mc = acc / draws as f64;
        println!(
            "{:<22} {:>14.8} {:>8.5} vs {:.5}",
            format!("{kind:?}").split(' ').next().unwrap_or(""),
            mass,
            mc,
            target
        );
    }
    Ok(())
}
