//! User-level attraction/repulsion specifications and their reduction to
//! effective block-constant weight coefficients. The dense `N×N` weight
//! matrix is never materialized; everything downstream works from the
//! per-class-pair constants computed here.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Between-class repulsion specification: a common scalar, a per-class
/// vector `R` (with `δ_ij = |R_i − R_j|`), or a full symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum BetweenClass {
    Scalar(f64),
    PerClass(Vec<f64>),
    Matrix(Array2<f64>),
}

/// Within-class attraction magnitudes, stored as nonnegative numbers; the
/// attraction sign is applied internally.
#[derive(Debug, Clone, PartialEq)]
pub enum WithinClass {
    Scalar(f64),
    PerClass(Vec<f64>),
}

/// Class-pair repulsion/attraction specification.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSpec {
    pub between_class: BetweenClass,
    pub within_class_attraction: WithinClass,
}

impl DeltaSpec {
    /// Uniform repulsion 1 between classes, attraction `alpha` within.
    pub fn uniform(alpha: f64) -> Self {
        DeltaSpec {
            between_class: BetweenClass::Scalar(1.0),
            within_class_attraction: WithinClass::Scalar(alpha),
        }
    }
}

impl Default for DeltaSpec {
    fn default() -> Self {
        DeltaSpec::uniform(1.0)
    }
}

/// The effective block constants `D′`: for classes `p ≠ r`,
/// `D′_pr = δ_pr / (2 N_p N_r)`; on the diagonal,
/// `D′_rr = −α_r / (N_r (N_r − 1))`. Every off-diagonal dense weight between
/// a class-`p` and a class-`r` observation equals `D′_pr`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveBlockConstants {
    d_eff: Array2<f64>,
    class_counts: Vec<usize>,
    classes: Vec<String>,
}

impl EffectiveBlockConstants {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.d_eff
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Sorted class labels, indexing the rows/columns of [`Self::matrix`].
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Map each observation label to its class index.
    pub fn class_indices(&self, labels: &[String]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.classes
                    .binary_search(l)
                    .map_err(|_| Error::SpecMismatch(format!("unknown label {l:?}")))
            })
            .collect()
    }
}

fn delta_entry(spec: &BetweenClass, i: usize, j: usize) -> f64 {
    match spec {
        BetweenClass::Scalar(s) => *s,
        BetweenClass::PerClass(r) => (r[i] - r[j]).abs(),
        BetweenClass::Matrix(m) => m[[i, j]],
    }
}

/// Build the effective block constants from a [`DeltaSpec`] and observation
/// labels. Every class must have at least 2 members.
pub fn build_delta(spec: &DeltaSpec, labels: &[String]) -> Result<EffectiveBlockConstants> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.clone()).or_insert(0) += 1;
    }
    let classes: Vec<String> = counts.keys().cloned().collect();
    let class_counts: Vec<usize> = counts.values().copied().collect();
    let n = classes.len();
    for (label, &count) in classes.iter().zip(&class_counts) {
        if count < 2 {
            return Err(Error::ClassTooSmall {
                label: label.clone(),
                count,
            });
        }
    }

    match &spec.between_class {
        BetweenClass::Scalar(s) => {
            if *s < 0.0 {
                return Err(Error::SpecMismatch("scalar repulsion must be >= 0".into()));
            }
        }
        BetweenClass::PerClass(r) => {
            if r.len() != n {
                return Err(Error::SpecMismatch(format!(
                    "repulsion vector has {} entries for {n} classes",
                    r.len()
                )));
            }
        }
        BetweenClass::Matrix(m) => {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::SpecMismatch(format!(
                    "repulsion matrix is {}x{} for {n} classes",
                    m.nrows(),
                    m.ncols()
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    if (m[[i, j]] - m[[j, i]]).abs() > 0.0 {
                        return Err(Error::SpecMismatch("repulsion matrix must be symmetric".into()));
                    }
                    if i != j && m[[i, j]] < 0.0 {
                        return Err(Error::SpecMismatch(
                            "off-diagonal repulsion entries must be >= 0".into(),
                        ));
                    }
                }
            }
        }
    }
    let alpha = |r: usize| -> Result<f64> {
        let a = match &spec.within_class_attraction {
            WithinClass::Scalar(a) => *a,
            WithinClass::PerClass(v) => {
                if v.len() != n {
                    return Err(Error::SpecMismatch(format!(
                        "attraction vector has {} entries for {n} classes",
                        v.len()
                    )));
                }
                v[r]
            }
        };
        if a < 0.0 {
            return Err(Error::SpecMismatch("attraction magnitudes must be >= 0".into()));
        }
        Ok(a)
    };

    let mut d_eff = Array2::zeros((n, n));
    for p in 0..n {
        for r in 0..n {
            if p == r {
                let nr = class_counts[r] as f64;
                d_eff[[r, r]] = -alpha(r)? / (nr * (nr - 1.0));
            } else {
                let np = class_counts[p] as f64;
                let nr = class_counts[r] as f64;
                d_eff[[p, r]] = delta_entry(&spec.between_class, p, r) / (2.0 * np * nr);
            }
        }
    }
    Ok(EffectiveBlockConstants {
        d_eff,
        class_counts,
        classes,
    })
}

/// Per-class row-sum constants `w_p = Σ_{k≠p} D′_pk N_k + D′_pp (N_p − 1)`.
/// The diagonal term uses multiplicity `N_p − 1` so the self-pair never
/// contributes; each observation of class `p` has dense-W row sum `w_p`.
pub fn row_sum_constants(d_eff: &EffectiveBlockConstants) -> Vec<f64> {
    let n = d_eff.n_classes();
    (0..n)
        .map(|p| {
            let mut w = 0.0;
            for k in 0..n {
                let mult = if k == p {
                    d_eff.class_counts[k] as f64 - 1.0
                } else {
                    d_eff.class_counts[k] as f64
                };
                w += d_eff.d_eff[[p, k]] * mult;
            }
            w
        })
        .collect()
}

/// kNN cross-domain attraction: weight `−γ / (k N_Y)` per symmetrized
/// source–target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossWeightSpec {
    pub gamma: f64,
    pub k: usize,
}

impl CrossWeightSpec {
    pub fn new(gamma: f64, k: usize) -> Result<Self> {
        if gamma < 0.0 {
            return Err(Error::InvalidConfig("gamma must be >= 0".into()));
        }
        if k < 1 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        Ok(CrossWeightSpec { gamma, k })
    }

    /// Attraction, hence negative.
    pub fn per_pair_weight(&self, n_target: usize) -> f64 {
        -self.gamma / (self.k as f64 * n_target as f64)
    }
}

/// Uniform target-block repulsion: weight `β / (N_Y (N_Y − 1))` per
/// target–target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBlockSpec {
    pub beta: f64,
}

impl TargetBlockSpec {
    pub fn new(beta: f64) -> Result<Self> {
        if beta < 0.0 {
            return Err(Error::InvalidConfig("beta must be >= 0".into()));
        }
        Ok(TargetBlockSpec { beta })
    }

    pub fn per_pair_weight(&self, n_target: usize) -> f64 {
        self.beta / (n_target as f64 * (n_target as f64 - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn labels(spec: &[(&str, usize)]) -> Vec<String> {
        spec.iter()
            .flat_map(|(l, n)| std::iter::repeat(l.to_string()).take(*n))
            .collect()
    }

    #[test]
    fn scalar_two_class_hand_case() {
        let d = build_delta(&DeltaSpec::uniform(1.0), &labels(&[("a", 2), ("b", 2)])).unwrap();
        assert_abs_diff_eq!(
            d.matrix(),
            &array![[-0.5, 0.125], [0.125, -0.5]],
            epsilon = 1e-15
        );
        assert_eq!(d.class_counts(), &[2, 2]);
    }

    #[test]
    fn vector_repulsion_from_rank_differences() {
        let spec = DeltaSpec {
            between_class: BetweenClass::PerClass(vec![1.0, 2.0, 4.0]),
            within_class_attraction: WithinClass::Scalar(0.0),
        };
        let d = build_delta(&spec, &labels(&[("a", 2), ("b", 3), ("c", 4)])).unwrap();
        // delta_ij = |R_i - R_j| = (1, 3, 2) across the three pairs
        assert_abs_diff_eq!(d.matrix()[[0, 1]], 1.0 / (2.0 * 2.0 * 3.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.matrix()[[0, 2]], 3.0 / (2.0 * 2.0 * 4.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.matrix()[[1, 2]], 2.0 / (2.0 * 3.0 * 4.0), epsilon = 1e-15);
        for r in 0..3 {
            assert_eq!(d.matrix()[[r, r]], 0.0);
        }
    }

    #[test]
    fn single_class_attraction_only() {
        let d = build_delta(&DeltaSpec::uniform(1.0), &labels(&[("a", 3)])).unwrap();
        assert_eq!(d.matrix().dim(), (1, 1));
        assert_abs_diff_eq!(d.matrix()[[0, 0]], -1.0 / (3.0 * 2.0), epsilon = 1e-15);
    }

    #[test]
    fn rejects_small_class() {
        let err = build_delta(&DeltaSpec::default(), &labels(&[("a", 2), ("b", 1)])).unwrap_err();
        assert!(matches!(err, Error::ClassTooSmall { .. }));
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let spec = DeltaSpec {
            between_class: BetweenClass::Matrix(array![[0.0, 1.0], [2.0, 0.0]]),
            within_class_attraction: WithinClass::Scalar(0.0),
        };
        assert!(build_delta(&spec, &labels(&[("a", 2), ("b", 2)])).is_err());
    }

    #[test]
    fn rejects_wrongly_sized_vector() {
        let spec = DeltaSpec {
            between_class: BetweenClass::PerClass(vec![1.0]),
            within_class_attraction: WithinClass::Scalar(0.0),
        };
        assert!(build_delta(&spec, &labels(&[("a", 2), ("b", 2)])).is_err());
    }

    #[test]
    fn rejects_negative_attraction() {
        let spec = DeltaSpec {
            between_class: BetweenClass::Scalar(1.0),
            within_class_attraction: WithinClass::Scalar(-1.0),
        };
        assert!(build_delta(&spec, &labels(&[("a", 2), ("b", 2)])).is_err());
    }

    #[test]
    fn d_eff_symmetric_for_all_forms() {
        let lbls = labels(&[("a", 2), ("b", 3), ("c", 5)]);
        let specs = [
            DeltaSpec::uniform(2.0),
            DeltaSpec {
                between_class: BetweenClass::PerClass(vec![0.5, 3.0, 1.0]),
                within_class_attraction: WithinClass::PerClass(vec![1.0, 0.0, 2.0]),
            },
            DeltaSpec {
                between_class: BetweenClass::Matrix(array![
                    [0.0, 1.0, 2.0],
                    [1.0, 0.0, 0.5],
                    [2.0, 0.5, 0.0]
                ]),
                within_class_attraction: WithinClass::Scalar(1.0),
            },
        ];
        for spec in &specs {
            let d = build_delta(spec, &lbls).unwrap();
            let m = d.matrix();
            for p in 0..3 {
                for r in 0..3 {
                    assert_eq!(m[[p, r]], m[[r, p]]);
                    if p != r {
                        assert!(m[[p, r]] >= 0.0);
                    } else {
                        assert!(m[[p, r]] <= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn row_sums_hand_case() {
        let d = build_delta(&DeltaSpec::uniform(1.0), &labels(&[("a", 2), ("b", 2)])).unwrap();
        let w = row_sum_constants(&d);
        assert_abs_diff_eq!(w[0], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], -0.25, epsilon = 1e-15);
    }

    #[test]
    fn row_sums_all_zero_weights() {
        let spec = DeltaSpec {
            between_class: BetweenClass::Scalar(0.0),
            within_class_attraction: WithinClass::Scalar(0.0),
        };
        let d = build_delta(&spec, &labels(&[("a", 2), ("b", 4)])).unwrap();
        assert_eq!(row_sum_constants(&d), vec![0.0, 0.0]);
    }

    #[test]
    fn row_sums_single_block() {
        let d = build_delta(&DeltaSpec::uniform(2.0), &labels(&[("a", 4)])).unwrap();
        let c = d.matrix()[[0, 0]];
        assert_abs_diff_eq!(row_sum_constants(&d)[0], c * 3.0, epsilon = 1e-15);
    }

    /// Brute-force check: the implied dense block-constant W has row sums
    /// equal to the per-class constants.
    #[test]
    fn row_sums_match_dense_construction() {
        let lbls = labels(&[("a", 7), ("b", 13), ("c", 5)]);
        let spec = DeltaSpec {
            between_class: BetweenClass::PerClass(vec![1.0, 2.5, 0.5]),
            within_class_attraction: WithinClass::PerClass(vec![0.5, 1.5, 0.0]),
        };
        let d = build_delta(&spec, &lbls).unwrap();
        let idx = d.class_indices(&lbls).unwrap();
        let w = row_sum_constants(&d);
        let n = lbls.len();
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                if i != j {
                    sum += d.matrix()[[idx[i], idx[j]]];
                }
            }
            assert_abs_diff_eq!(sum, w[idx[i]], epsilon = 1e-12);
        }
    }

    #[test]
    fn cross_weight_sign_and_magnitude() {
        let c = CrossWeightSpec::new(1.0, 1).unwrap();
        assert_eq!(c.per_pair_weight(1), -1.0);
        let c = CrossWeightSpec::new(100.0, 5).unwrap();
        assert!(c.per_pair_weight(40) < 0.0);
        assert_abs_diff_eq!(c.per_pair_weight(40), -100.0 / 200.0, epsilon = 1e-15);
    }

    #[test]
    fn target_block_weight() {
        let t = TargetBlockSpec::new(3.0).unwrap();
        assert_abs_diff_eq!(t.per_pair_weight(4), 0.25, epsilon = 1e-15);
        assert!(TargetBlockSpec::new(-1.0).is_err());
    }
}
