//! Symmetric eigendecomposition of `Q^W`, component selection under the
//! non-negative-eigenvalue rule, data projection and model persistence.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fit::{FitConfig, FitDiagnostics, Method};

/// Relative zero threshold for the non-negative-eigenvalue rule.
pub const EIGENVALUE_ZERO_TOLERANCE: f64 = 1e-12;

/// Full spectrum of a symmetric matrix: eigenvalues in descending order and
/// the matching eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// Eigenvectors as columns, ordered to match [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &Array2<f64> {
        &self.eigenvectors
    }
}

/// Full symmetric eigendecomposition. Eigenvalues come back descending;
/// each eigenvector's sign is fixed so its largest-magnitude entry is
/// positive (ties: lowest index).
pub fn eig_sym(q_matrix: &Array2<f64>) -> Result<Spectrum> {
    let d = q_matrix.nrows();
    if q_matrix.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}",
            d,
            q_matrix.ncols()
        )));
    }
    if !q_matrix.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (q_matrix[[i, j]] + q_matrix[[j, i]]));
    let decomp = SymmetricEigen::new(m);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[b]
            .partial_cmp(&decomp.eigenvalues[a])
            .expect("finite eigenvalues")
    });

    let mut eigenvalues = Array1::zeros(d);
    let mut eigenvectors = Array2::zeros((d, d));
    for (out_col, &src_col) in order.iter().enumerate() {
        eigenvalues[out_col] = decomp.eigenvalues[src_col];
        let mut best = 0usize;
        for i in 1..d {
            if decomp.eigenvectors[(i, src_col)].abs() > decomp.eigenvectors[(best, src_col)].abs() {
                best = i;
            }
        }
        let sign = if decomp.eigenvectors[(best, src_col)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            eigenvectors[[i, out_col]] = sign * decomp.eigenvectors[(i, src_col)];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Leading components retained by [`select_components`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSelection {
    /// `d×q` orthonormal basis.
    pub basis: Array2<f64>,
    /// Eigenvalues of the retained components, descending.
    pub eigenvalues: Array1<f64>,
    /// How many requested components were dropped by the
    /// non-negative-eigenvalue rule.
    pub truncated: usize,
}

/// Keep the `min(q_requested, #{λ ≥ −τ·λ_max})` leading components, where
/// `τ` is [`EIGENVALUE_ZERO_TOLERANCE`]. Components with meaningfully
/// negative eigenvalues do not increase the objective and are discarded.
pub fn select_components(spectrum: &Spectrum, q_requested: usize) -> Result<ComponentSelection> {
    if q_requested < 1 {
        return Err(Error::InvalidConfig("q_requested must be >= 1".into()));
    }
    let lambda_max = spectrum.eigenvalues[0];
    if lambda_max < 0.0 {
        return Err(Error::AllNegativeSpectrum);
    }
    let threshold = -EIGENVALUE_ZERO_TOLERANCE * lambda_max;
    let eligible = spectrum
        .eigenvalues
        .iter()
        .take_while(|&&l| l >= threshold)
        .count();
    let q = q_requested.min(eligible);
    Ok(ComponentSelection {
        basis: spectrum.eigenvectors.slice(ndarray::s![.., ..q]).to_owned(),
        eigenvalues: spectrum.eigenvalues.slice(ndarray::s![..q]).to_owned(),
        truncated: q_requested.saturating_sub(q),
    })
}

/// A fitted projection: orthonormal basis, eigenvalues, method tag, the
/// configuration snapshot and fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    pub basis: Array2<f64>,
    pub eigenvalues: Array1<f64>,
    pub method: Method,
    pub fit_config: Option<FitConfig>,
    pub diagnostics: FitDiagnostics,
}

impl ProjectionModel {
    pub fn n_features(&self) -> usize {
        self.basis.nrows()
    }

    pub fn n_components(&self) -> usize {
        self.basis.ncols()
    }

    /// Project data into component space: `values · basis`.
    pub fn project(&self, data: &Dataset) -> Result<Array2<f64>> {
        project_matrix(&self.basis, data.values())
    }

    /// Serialize to a single file: `key=value` metadata lines, then basis
    /// rows as CSV (one row per input feature, one column per component).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("method={}\n", self.method));
        out.push_str(&format!("d={}\n", self.n_features()));
        out.push_str(&format!("q={}\n", self.n_components()));
        let eigs: Vec<String> = self.eigenvalues.iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("eigenvalues={}\n", eigs.join(",")));
        out.push_str(&format!("iterations={}\n", self.diagnostics.iterations));
        out.push_str(&format!("knn_stable={}\n", self.diagnostics.knn_stable));
        out.push_str(&format!("truncated={}\n", self.diagnostics.truncated));
        if let Some(cfg) = &self.fit_config {
            for (k, v) in cfg.to_key_values() {
                out.push_str(&format!("{k}={v}\n"));
            }
        }
        for i in 0..self.n_features() {
            let row: Vec<String> = (0..self.n_components())
                .map(|j| format!("{}", self.basis[[i, j]]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        file.write_all(out.as_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Inverse of [`Self::save`]. The configuration snapshot is restored
    /// from the metadata keys when present.
    pub fn load(path: &Path) -> Result<ProjectionModel> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let invalid = |reason: &str| Error::InvalidModel {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let mut meta: Vec<(String, String)> = Vec::new();
        let mut basis_rows: Vec<Vec<f64>> = Vec::new();
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                meta.push((k.to_string(), v.to_string()));
            } else {
                let row: std::result::Result<Vec<f64>, _> =
                    line.split(',').map(|c| c.trim().parse::<f64>()).collect();
                basis_rows.push(row.map_err(|_| invalid("unparseable basis row"))?);
            }
        }
        let get = |key: &str| meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let method: Method = get("method")
            .ok_or_else(|| invalid("missing method"))?
            .parse()
            .map_err(|e: String| invalid(&e))?;
        let d: usize = get("d")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| invalid("missing d"))?;
        let q: usize = get("q")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| invalid("missing q"))?;
        if basis_rows.len() != d || basis_rows.iter().any(|r| r.len() != q) {
            return Err(invalid("basis shape does not match metadata"));
        }
        let eigenvalues: Vec<f64> = get("eigenvalues")
            .ok_or_else(|| invalid("missing eigenvalues"))?
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| invalid("unparseable eigenvalues"))?;
        if eigenvalues.len() != q {
            return Err(invalid("eigenvalue count does not match q"));
        }
        let mut basis = Array2::zeros((d, q));
        for (i, row) in basis_rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                basis[[i, j]] = v;
            }
        }
        let diagnostics = FitDiagnostics {
            objective_trace: Vec::new(),
            iterations: get("iterations").and_then(|v| v.parse().ok()).unwrap_or(1),
            knn_stable: get("knn_stable").and_then(|v| v.parse().ok()).unwrap_or(false),
            truncated: get("truncated").and_then(|v| v.parse().ok()).unwrap_or(0),
        };
        let fit_config = FitConfig::from_key_values(&meta).ok();
        Ok(ProjectionModel {
            basis,
            eigenvalues: Array1::from(eigenvalues),
            method,
            fit_config,
            diagnostics,
        })
    }
}

/// Absolute cosine similarity between two vectors. Components are defined
/// up to sign, so matched bases are compared with `|cos| ≥ 1 − ε`.
pub fn abs_cosine(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(&b) / (na * nb)).abs()
}

/// `data · basis`, with a dimension check.
pub fn project_matrix(basis: &Array2<f64>, data: &Array2<f64>) -> Result<Array2<f64>> {
    if data.ncols() != basis.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} features, basis expects {}",
            data.ncols(),
            basis.nrows()
        )));
    }
    Ok(data.dot(basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng as _;
    use rand::SeedableRng as _;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_matrix_spectrum() {
        let q = array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let s = eig_sym(&q).unwrap();
        assert_abs_diff_eq!(s.eigenvalues(), &array![3.0, 2.0, 1.0], epsilon = 1e-12);
        // Axis-aligned eigenvectors, positive sign.
        assert_abs_diff_eq!(s.eigenvectors().column(0).to_owned(), array![1.0, 0.0, 0.0], epsilon = 1e-10);
        assert_abs_diff_eq!(s.eigenvectors().column(1).to_owned(), array![0.0, 0.0, 1.0], epsilon = 1e-10);
        assert_abs_diff_eq!(s.eigenvectors().column(2).to_owned(), array![0.0, 1.0, 0.0], epsilon = 1e-10);
    }

    #[test]
    fn identity_matrix_degenerate_spectrum() {
        let q = Array2::eye(4);
        let s = eig_sym(&q).unwrap();
        for &l in s.eigenvalues().iter() {
            assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
        }
        // Any orthonormal basis is acceptable; check residual + orthonormality.
        let e = s.eigenvectors();
        let gram = e.t().dot(e);
        assert_abs_diff_eq!(gram, Array2::eye(4), epsilon = 1e-10);
        for j in 0..4 {
            let col = e.column(j).to_owned();
            let resid = q.dot(&col) - &col * s.eigenvalues()[j];
            assert!(resid.iter().all(|v| v.abs() < 1e-8));
        }
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut q = Array2::zeros((10, 10));
        for i in 0..10 {
            for j in i..10 {
                let v = rng.gen_range(-3.0..3.0);
                q[[i, j]] = v;
                q[[j, i]] = v;
            }
        }
        let s = eig_sym(&q).unwrap();
        let lambda = Array2::from_diag(s.eigenvalues());
        let rebuilt = s.eigenvectors().dot(&lambda).dot(&s.eigenvectors().t());
        let err = (&rebuilt - &q).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-8, "reconstruction error {err}");
    }

    #[test]
    fn eig_rejects_non_finite() {
        let q = array![[1.0, f64::NAN], [f64::NAN, 1.0]];
        assert!(matches!(eig_sym(&q).unwrap_err(), Error::NonFinite));
    }

    #[test]
    fn select_truncates_negative_eigenvalues() {
        let q = Array2::from_diag(&array![5.0, 2.0, -1.0]);
        let s = eig_sym(&q).unwrap();
        let sel = select_components(&s, 3).unwrap();
        assert_eq!(sel.basis.ncols(), 2);
        assert_eq!(sel.truncated, 1);
    }

    #[test]
    fn select_no_truncation_needed() {
        let q = Array2::from_diag(&array![5.0, 2.0, 1.0]);
        let s = eig_sym(&q).unwrap();
        let sel = select_components(&s, 2).unwrap();
        assert_eq!(sel.basis.ncols(), 2);
        assert_eq!(sel.truncated, 0);
        assert_abs_diff_eq!(sel.eigenvalues, array![5.0, 2.0], epsilon = 1e-12);
    }

    #[test]
    fn select_all_negative_errors() {
        let q = Array2::from_diag(&array![-1.0, -2.0]);
        let s = eig_sym(&q).unwrap();
        assert!(matches!(
            select_components(&s, 1).unwrap_err(),
            Error::AllNegativeSpectrum
        ));
    }

    #[test]
    fn select_never_returns_negative_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let mut q = Array2::zeros((6, 6));
            for i in 0..6 {
                for j in i..6 {
                    let v = rng.gen_range(-2.0..2.0);
                    q[[i, j]] = v;
                    q[[j, i]] = v;
                }
            }
            let s = eig_sym(&q).unwrap();
            if let Ok(sel) = select_components(&s, 6) {
                let lmax = s.eigenvalues()[0];
                for &l in sel.eigenvalues.iter() {
                    assert!(l >= -EIGENVALUE_ZERO_TOLERANCE * lmax);
                }
            }
        }
    }

    #[test]
    fn project_identity_basis() {
        let data = Dataset::unlabeled(array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let out = project_matrix(&Array2::eye(2), data.values()).unwrap();
        assert_eq!(&out, data.values());
    }

    #[test]
    fn project_canonical_axis() {
        let data = array![[1.0, 2.0], [3.0, 4.0]];
        let basis = array![[1.0], [0.0]];
        let out = project_matrix(&basis, &data).unwrap();
        assert_eq!(out, array![[1.0], [3.0]]);
    }

    #[test]
    fn project_dimension_mismatch() {
        let data = array![[1.0, 2.0, 3.0]];
        let basis = Array2::eye(2);
        assert!(project_matrix(&basis, &data).is_err());
    }

    #[test]
    fn model_save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.csv");
        let model = ProjectionModel {
            basis: array![[0.6, 0.8], [0.8, -0.6], [0.0, 0.0]],
            eigenvalues: array![4.0, 1.5],
            method: Method::Spca,
            fit_config: Some(FitConfig::new(Method::Spca, 2)),
            diagnostics: FitDiagnostics {
                objective_trace: vec![5.5],
                iterations: 1,
                knn_stable: false,
                truncated: 0,
            },
        };
        model.save(&path).unwrap();
        let back = ProjectionModel::load(&path).unwrap();
        assert_eq!(back.basis, model.basis);
        assert_eq!(back.eigenvalues, model.eigenvalues);
        assert_eq!(back.method, Method::Spca);
        assert!(back.fit_config.is_some());
    }
}
