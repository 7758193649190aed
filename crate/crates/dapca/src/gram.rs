//! Assembly of the symmetric quadratic-form matrix `Q^W` for every method
//! variant. The accelerated paths work from per-class Gram matrices and
//! column-sum vectors, never materializing the dense `N×N` weight matrix;
//! [`gram_oracle`] evaluates the defining formula literally and is the
//! verification reference.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fit::KnnAssignment;
use crate::weights::{row_sum_constants, CrossWeightSpec, EffectiveBlockConstants, TargetBlockSpec};

/// The quadratic form `Q^W`, split into a constant part (source blocks,
/// target block, optional mean-attraction term) and a kNN-dependent cross
/// part. DAPCA iterations rebuild only the cross part.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    constant: Array2<f64>,
    cross: Array2<f64>,
}

impl GramMatrix {
    pub fn from_constant(constant: Array2<f64>) -> Self {
        let d = constant.nrows();
        GramMatrix {
            constant,
            cross: Array2::zeros((d, d)),
        }
    }

    pub fn constant(&self) -> &Array2<f64> {
        &self.constant
    }

    pub fn cross(&self) -> &Array2<f64> {
        &self.cross
    }

    pub fn with_cross(&self, cross: Array2<f64>) -> GramMatrix {
        GramMatrix {
            constant: self.constant.clone(),
            cross,
        }
    }

    /// `constant + cross`.
    pub fn total(&self) -> Array2<f64> {
        &self.constant + &self.cross
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }
}

fn outer(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Array2<f64> {
    let a2 = a.insert_axis(Axis(1));
    let b2 = b.insert_axis(Axis(0));
    a2.dot(&b2)
}

/// Per-class second-moment matrices `Gram(X^p) = Σ_{i∈p} x_i x_iᵀ` and
/// column sums `s_p`, accumulated in class-index order.
fn class_sums(
    source: &Dataset,
    class_idx: &[usize],
    n_classes: usize,
) -> (Vec<Array2<f64>>, Vec<Array1<f64>>) {
    let d = source.n_features();
    let mut grams = vec![Array2::zeros((d, d)); n_classes];
    let mut sums = vec![Array1::zeros(d); n_classes];
    for (i, row) in source.values().rows().into_iter().enumerate() {
        let p = class_idx[i];
        grams[p] += &outer(row, row);
        sums[p] += &row;
    }
    (grams, sums)
}

/// Supervised `Q^W` from the effective block constants, matching the dense
/// oracle with a zero-diagonal weight matrix exactly up to accumulation
/// error.
pub fn gram_supervised(source: &Dataset, d_eff: &EffectiveBlockConstants) -> Result<GramMatrix> {
    let labels = source.require_supervised()?;
    let class_idx = d_eff.class_indices(labels)?;
    let counts = source.class_counts();
    for (class, &count) in d_eff.classes().iter().zip(d_eff.class_counts()) {
        if counts.get(class) != Some(&count) {
            return Err(Error::SpecMismatch(format!(
                "class {class:?} count differs between labels and block constants"
            )));
        }
    }
    let n = d_eff.n_classes();
    let d = source.n_features();
    let (grams, sums) = class_sums(source, &class_idx, n);
    let w = row_sum_constants(d_eff);
    let dm = d_eff.matrix();

    let mut q = Array2::zeros((d, d));
    for p in 0..n {
        q.scaled_add(w[p], &grams[p]);
    }
    // Subtract Q2 = Σ_ij W_ij x_i x_jᵀ with the self-pair excluded:
    // within-class blocks contribute s_p s_pᵀ − Gram(X^p).
    for p in 0..n {
        q.scaled_add(-dm[[p, p]], &(&outer(sums[p].view(), sums[p].view()) - &grams[p]));
    }
    for p in 0..n {
        for r in (p + 1)..n {
            let spr = outer(sums[p].view(), sums[r].view());
            q.scaled_add(-dm[[p, r]], &(&spr + &spr.t()));
        }
    }
    Ok(GramMatrix::from_constant(q))
}

/// Uniform-weight `Q^W` (classical PCA): `N·ZᵀZ − s sᵀ`, i.e. `N²` times
/// the sample covariance.
pub fn gram_pca(data: &Dataset) -> GramMatrix {
    let z = data.values();
    let n = data.n_rows() as f64;
    let s = z.sum_axis(Axis(0));
    let q = z.t().dot(z) * n - outer(s.view(), s.view());
    GramMatrix::from_constant(q)
}

/// Semi-supervised `Q^W`: the supervised source part plus a uniform
/// repulsion block on the target; cross weights are zero.
pub fn gram_semi_supervised(
    source: &Dataset,
    target: Option<&Dataset>,
    d_eff: &EffectiveBlockConstants,
    t_spec: &TargetBlockSpec,
) -> Result<GramMatrix> {
    let base = gram_supervised(source, d_eff)?;
    let target = match target {
        Some(t) if t_spec.beta > 0.0 => t,
        _ => return Ok(base),
    };
    if target.n_features() != source.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "source has {} features, target has {}",
            source.n_features(),
            target.n_features()
        )));
    }
    let n_y = target.n_rows();
    if n_y < 2 {
        return Err(Error::InvalidConfig(
            "target block needs at least 2 target rows".into(),
        ));
    }
    let y = target.values();
    let g_y = y.t().dot(y);
    let s_y = y.sum_axis(Axis(0));
    let t = t_spec.per_pair_weight(n_y);
    // Row sum per target point is t (N_Y − 1) = β / N_Y.
    let mut q = base.constant().clone();
    q.scaled_add(t * (n_y as f64 - 1.0), &g_y);
    q.scaled_add(-t, &(&outer(s_y.view(), s_y.view()) - &g_y));
    Ok(GramMatrix::from_constant(q))
}

/// Supervised TCA: semi-supervised `Q^W` minus
/// `φ (μ_X − μ_Y)(μ_X − μ_Y)ᵀ`.
pub fn gram_stca(
    source: &Dataset,
    target: &Dataset,
    d_eff: &EffectiveBlockConstants,
    t_spec: &TargetBlockSpec,
    phi: f64,
) -> Result<GramMatrix> {
    if phi < 0.0 {
        return Err(Error::InvalidConfig("phi must be >= 0".into()));
    }
    if target.n_features() != source.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "source has {} features, target has {}",
            source.n_features(),
            target.n_features()
        )));
    }
    let base = gram_semi_supervised(source, Some(target), d_eff, t_spec)?;
    let mu_x = source.values().mean_axis(Axis(0)).expect("nonempty source");
    let mu_y = target.values().mean_axis(Axis(0)).expect("nonempty target");
    let diff = &mu_x - &mu_y;
    let mut q = base.constant().clone();
    q.scaled_add(-phi, &outer(diff.view(), diff.view()));
    Ok(GramMatrix::from_constant(q))
}

/// Cross part of `Q^W` from a kNN assignment: for every symmetrized pair
/// `(x_j, y_i)` with weight `w = −γ/(k N_Y)`, accumulate
/// `w (x_j x_jᵀ + y_i y_iᵀ − x_j y_iᵀ − y_i x_jᵀ)`. Pairs are accumulated
/// in (target-index, neighbor-rank) order.
pub fn gram_cross_term(
    source: &Dataset,
    target: &Dataset,
    assignment: &KnnAssignment,
    c_spec: &CrossWeightSpec,
) -> Result<Array2<f64>> {
    let d = source.n_features();
    if target.n_features() != d {
        return Err(Error::DimensionMismatch(format!(
            "source has {d} features, target has {}",
            target.n_features()
        )));
    }
    if assignment.n_target() != target.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} target rows, target has {}",
            assignment.n_target(),
            target.n_rows()
        )));
    }
    let mut q = Array2::zeros((d, d));
    if c_spec.gamma == 0.0 {
        return Ok(q);
    }
    let w = c_spec.per_pair_weight(target.n_rows());
    for (i, neighbors) in assignment.neighbors().iter().enumerate() {
        if neighbors.len() != c_spec.k {
            return Err(Error::SpecMismatch(format!(
                "target row {i} has {} neighbors, expected k={}",
                neighbors.len(),
                c_spec.k
            )));
        }
        let mut seen: Vec<usize> = Vec::with_capacity(neighbors.len());
        let y = target.values().row(i);
        for &j in neighbors {
            if j >= source.n_rows() {
                return Err(Error::NeighborOutOfRange {
                    index: j,
                    n: source.n_rows(),
                });
            }
            if seen.contains(&j) {
                return Err(Error::DuplicateNeighbor { row: i, index: j });
            }
            seen.push(j);
            let x = source.values().row(j);
            q.scaled_add(w, &outer(x, x));
            q.scaled_add(w, &outer(y, y));
            q.scaled_add(-w, &outer(x, y));
            q.scaled_add(-w, &outer(y, x));
        }
    }
    Ok(q)
}

/// Literal evaluation of the defining formula
/// `q_lm = Σ_i (Σ_r W_ir) z_il z_im − Σ_ij W_ij z_il z_jm`, equivalently
/// `Zᵀ (diag(W·1) − W) Z`. The dense-W diagonal cancels exactly.
/// Test-only reference; intended for `N ≤ 1000`.
pub fn gram_oracle(joined: &Array2<f64>, dense_w: &Array2<f64>) -> Result<Array2<f64>> {
    let n = joined.nrows();
    if dense_w.nrows() != n || dense_w.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "weight matrix is {}x{} for {n} rows",
            dense_w.nrows(),
            dense_w.ncols()
        )));
    }
    let scale = dense_w.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (dense_w[[i, j]] - dense_w[[j, i]]).abs() > 1e-12 * scale {
                return Err(Error::SpecMismatch("dense weight matrix must be symmetric".into()));
            }
        }
    }
    let row_sums = dense_w.sum_axis(Axis(1));
    let mut weighted = joined.clone();
    for (i, mut row) in weighted.rows_mut().into_iter().enumerate() {
        row *= row_sums[i];
    }
    let q = joined.t().dot(&weighted) - joined.t().dot(&dense_w.dot(joined));
    Ok(q)
}

/// Build the dense zero-diagonal weight matrix implied by block constants,
/// for oracle comparisons on small instances.
pub fn dense_weights_supervised(
    d_eff: &EffectiveBlockConstants,
    labels: &[String],
) -> Result<Array2<f64>> {
    let idx = d_eff.class_indices(labels)?;
    let n = labels.len();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[[i, j]] = d_eff.matrix()[[idx[i], idx[j]]];
            }
        }
    }
    Ok(w)
}
