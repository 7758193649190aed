//! Semi-supervised PCA: supervised weights on a labeled source plus a
//! uniform repulsion block over an unlabeled target, so the components
//! also capture directions where the unlabeled data varies.
//!
//! Run with: cargo run --example semi_supervised

use dapca::dataset::generate_toy;
use dapca::eigen::abs_cosine;
use dapca::fit::{fit, FitConfig, Method};
use dapca::ToyConfig;

fn main() -> dapca::Result<()> {
    let (source, target, _) = generate_toy(&ToyConfig::default())?;

    let spca = fit(&source, None, &FitConfig::new(Method::Spca, 2))?;

    // beta scales the unlabeled block; beta -> 0 degenerates to SPCA.
    for beta in [0.0, 1.0, 10.0] {
        let mut config = FitConfig::new(Method::Sspca, 2);
        config.beta = beta;
        let model = fit(&source, Some(&target), &config)?;
        let agreement = abs_cosine(model.basis.column(0), spca.basis.column(0));
        println!(
            "beta={beta:>4}: eigenvalues {:.3?}, |cos(pc1, spca pc1)| = {agreement:.4}",
            model.eigenvalues.to_vec()
        );
    }

    Ok(())
}
