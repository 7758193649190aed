//! Reverse validation: estimate adaptation quality without any target
//! labels. The source is split in two; a forward fit predicts labels for
//! the target, then a reverse fit (target as the new labeled source)
//! predicts labels for the held-out source half. The agreement with the
//! known held-out labels is the self-consistency score.
//!
//! Run with: cargo run --release --example reverse_validation

use dapca::dataset::generate_toy;
use dapca::fit::{FitConfig, Method};
use dapca::validate::reverse_validate;
use dapca::ToyConfig;

fn main() -> dapca::Result<()> {
    let (source, target, _) = generate_toy(&ToyConfig::default())?;

    // Self-consistency tracks how well the two domains actually align:
    // weak cross-domain attraction leaves the reverse problem hard.
    for gamma in [1.0, 10.0, 100.0] {
        let mut config = FitConfig::new(Method::Dapca, 2);
        config.gamma = gamma;
        let score = reverse_validate(&source, &target, &config, 0.5, 5, 0)?;
        println!("gamma={gamma:>4}: self-consistency {score:.3}");
    }

    // A model whose forward predictions collapse to one class cannot be
    // scored; the error names the failing stage.
    let pca = FitConfig::new(Method::Pca, 2);
    match reverse_validate(&source, &target, &pca, 0.5, 5, 0) {
        Ok(score) => println!(" pca: self-consistency {score:.3}"),
        Err(e) => println!(" pca: {e}"),
    }

    Ok(())
}
