//! Dataset-mixing score: a leave-one-out kNN classifier tries to tell
//! which domain each projected point came from. Its accuracy is compared
//! against a permutation baseline; a normalized score near zero means the
//! domains are statistically indistinguishable in the projection.
//!
//! Run with: cargo run --release --example mixing_score

use dapca::dataset::generate_toy;
use dapca::fit::{fit, FitConfig, Method};
use dapca::validate::mixing_score;
use dapca::ToyConfig;

fn main() -> dapca::Result<()> {
    let (source, target, _) = generate_toy(&ToyConfig::default())?;

    for (name, config) in [
        ("pca", FitConfig::new(Method::Pca, 2)),
        ("dapca", {
            let mut c = FitConfig::new(Method::Dapca, 2);
            c.gamma = 100.0;
            c
        }),
    ] {
        let model = fit(&source, Some(&target), &config)?;
        let ps = model.project(&source)?;
        let pt = model.project(&target)?;
        let (raw, normalized) = mixing_score(&ps, &pt, 20, 20, 0)?;
        println!("{name:>5}: origin-classifier accuracy {raw:.3}, normalized {normalized:+.3}");
    }

    Ok(())
}
