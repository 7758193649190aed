//! Model fitting: single-shot PCA/SPCA/SSPCA/STCA eigenproblems and the
//! iterative DAPCA loop alternating kNN source–target matching with
//! re-solving the weighted eigenproblem.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use ndarray::{s, Array1, Array2};

use crate::dataset::Dataset;
use crate::eigen::{eig_sym, project_matrix, select_components, ProjectionModel};
use crate::error::{Error, Result};
use crate::gram::{gram_cross_term, gram_pca, gram_semi_supervised, gram_stca, gram_supervised, GramMatrix};
use crate::weights::{build_delta, BetweenClass, CrossWeightSpec, DeltaSpec, TargetBlockSpec, WithinClass};

/// Method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pca,
    Spca,
    Sspca,
    Stca,
    Dapca,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Pca => "pca",
            Method::Spca => "spca",
            Method::Sspca => "sspca",
            Method::Stca => "stca",
            Method::Dapca => "dapca",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pca" => Ok(Method::Pca),
            "spca" => Ok(Method::Spca),
            "sspca" => Ok(Method::Sspca),
            "stca" => Ok(Method::Stca),
            "dapca" => Ok(Method::Dapca),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Space used for the first DAPCA kNN matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KnnSpace {
    /// Raw input variables.
    #[default]
    Raw,
    /// Projection onto classical principal components of the joined data.
    Pca,
}

impl fmt::Display for KnnSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KnnSpace::Raw => "raw",
            KnnSpace::Pca => "pca",
        })
    }
}

impl FromStr for KnnSpace {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "raw" => Ok(KnnSpace::Raw),
            "pca" => Ok(KnnSpace::Pca),
            other => Err(format!("unknown knn space {other:?}")),
        }
    }
}

/// Relative objective-increase threshold below which the DAPCA loop stops.
pub const OBJECTIVE_CONVERGENCE_TOLERANCE: f64 = 1e-9;

/// Full fit configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub method: Method,
    pub q_requested: usize,
    pub delta: DeltaSpec,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub k: usize,
    pub max_iterations: usize,
    pub knn_space: KnnSpace,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(method: Method, q_requested: usize) -> Self {
        FitConfig {
            method,
            q_requested,
            delta: DeltaSpec::default(),
            beta: 1.0,
            gamma: 1.0,
            phi: 1.0,
            k: 5,
            max_iterations: 30,
            knn_space: KnnSpace::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_requested < 1 {
            return Err(Error::InvalidConfig("q must be >= 1".into()));
        }
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma), ("phi", self.phi)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Flatten to `key=value` pairs for config echoes and model metadata.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let delta_between = match &self.delta.between_class {
            BetweenClass::Scalar(s) => format!("scalar:{s}"),
            BetweenClass::PerClass(v) => format!(
                "vector:{}",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            BetweenClass::Matrix(m) => {
                let rows: Vec<String> = m
                    .rows()
                    .into_iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                format!("matrix:{}", rows.join(";"))
            }
        };
        let delta_within = match &self.delta.within_class_attraction {
            WithinClass::Scalar(s) => format!("scalar:{s}"),
            WithinClass::PerClass(v) => format!(
                "vector:{}",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
        };
        vec![
            ("fit_method".into(), self.method.to_string()),
            ("fit_q".into(), self.q_requested.to_string()),
            ("delta_between".into(), delta_between),
            ("delta_within".into(), delta_within),
            ("beta".into(), self.beta.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("phi".into(), self.phi.to_string()),
            ("k".into(), self.k.to_string()),
            ("max_iter".into(), self.max_iterations.to_string()),
            ("knn_space".into(), self.knn_space.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    /// Rebuild a config from flattened pairs; missing keys fall back to the
    /// defaults of [`FitConfig::new`].
    pub fn from_key_values(pairs: &[(String, String)]) -> Result<FitConfig> {
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let method: Method = get("fit_method")
            .ok_or_else(|| Error::InvalidConfig("missing fit_method".into()))?
            .parse()
            .map_err(Error::InvalidConfig)?;
        let q: usize = get("fit_q")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::InvalidConfig("missing fit_q".into()))?;
        let mut cfg = FitConfig::new(method, q);
        let parse_list = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidConfig(format!("bad number {c:?}")))
                })
                .collect()
        };
        if let Some(v) = get("delta_between") {
            cfg.delta.between_class = if let Some(rest) = v.strip_prefix("scalar:") {
                BetweenClass::Scalar(rest.parse().map_err(|_| Error::InvalidConfig(format!("bad scalar {rest:?}")))?)
            } else if let Some(rest) = v.strip_prefix("vector:") {
                BetweenClass::PerClass(parse_list(rest)?)
            } else if let Some(rest) = v.strip_prefix("matrix:") {
                let rows: Vec<Vec<f64>> = rest
                    .split(';')
                    .map(|r| parse_list(r))
                    .collect::<Result<_>>()?;
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidConfig("delta matrix must be square".into()));
                }
                let mut m = Array2::zeros((n, n));
                for (i, row) in rows.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        m[[i, j]] = v;
                    }
                }
                BetweenClass::Matrix(m)
            } else {
                return Err(Error::InvalidConfig(format!("bad delta_between {v:?}")));
            };
        }
        if let Some(v) = get("delta_within") {
            cfg.delta.within_class_attraction = if let Some(rest) = v.strip_prefix("scalar:") {
                WithinClass::Scalar(rest.parse().map_err(|_| Error::InvalidConfig(format!("bad scalar {rest:?}")))?)
            } else if let Some(rest) = v.strip_prefix("vector:") {
                WithinClass::PerClass(parse_list(rest)?)
            } else {
                return Err(Error::InvalidConfig(format!("bad delta_within {v:?}")));
            };
        }
        macro_rules! num {
            ($key:literal, $field:expr) => {
                if let Some(v) = get($key) {
                    $field = v
                        .parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad {} {v:?}", $key)))?;
                }
            };
        }
        num!("beta", cfg.beta);
        num!("gamma", cfg.gamma);
        num!("phi", cfg.phi);
        num!("k", cfg.k);
        num!("max_iter", cfg.max_iterations);
        num!("seed", cfg.seed);
        if let Some(v) = get("knn_space") {
            cfg.knn_space = v.parse().map_err(Error::InvalidConfig)?;
        }
        Ok(cfg)
    }
}

/// Fit diagnostics: objective per iteration, iteration count, whether the
/// loop stopped because the kNN assignment stabilized, and how many
/// requested components were truncated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitDiagnostics {
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub knn_stable: bool,
    pub truncated: usize,
}

/// For each target row, its `k` nearest source rows sorted by ascending
/// distance (ties: lower source index), with the distances.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnAssignment {
    neighbors: Vec<Vec<usize>>,
    distances: Vec<Vec<f64>>,
}

impl KnnAssignment {
    pub fn new(neighbors: Vec<Vec<usize>>, distances: Vec<Vec<f64>>) -> Self {
        KnnAssignment { neighbors, distances }
    }

    pub fn n_target(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    fn index_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.neighbors.hash(&mut h);
        h.finish()
    }
}

/// Exact brute-force Euclidean kNN from each target row to the source rows.
pub fn knn_match(
    projected_source: &Array2<f64>,
    projected_target: &Array2<f64>,
    k: usize,
) -> Result<KnnAssignment> {
    let n_x = projected_source.nrows();
    if k > n_x {
        return Err(Error::KnnTooFewPoints { k, n: n_x });
    }
    if projected_source.ncols() != projected_target.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "source projection has {} columns, target has {}",
            projected_source.ncols(),
            projected_target.ncols()
        )));
    }
    let mut neighbors = Vec::with_capacity(projected_target.nrows());
    let mut distances = Vec::with_capacity(projected_target.nrows());
    for y in projected_target.rows() {
        let mut dists: Vec<(f64, usize)> = projected_source
            .rows()
            .into_iter()
            .enumerate()
            .map(|(j, x)| {
                let d2: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, j)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
        neighbors.push(dists[..k].iter().map(|&(_, j)| j).collect());
        distances.push(dists[..k].iter().map(|&(d2, _)| d2.sqrt()).collect());
    }
    Ok(KnnAssignment { neighbors, distances })
}

/// The weighted-pairs objective `trace(Eᵀ Q^W E)` for an orthonormal basis.
pub fn objective(model_basis: &Array2<f64>, gram: &GramMatrix) -> f64 {
    let q = gram.total();
    let qe = q.dot(model_basis);
    model_basis
        .columns()
        .into_iter()
        .zip(qe.columns())
        .map(|(e, v)| e.dot(&v))
        .sum()
}

fn require_target<'a>(target: Option<&'a Dataset>, method: Method) -> Result<&'a Dataset> {
    target.ok_or_else(|| Error::MissingInput(format!("method {method} requires a target dataset")))
}

fn check_dims(source: &Dataset, target: Option<&Dataset>) -> Result<()> {
    if let Some(t) = target {
        if t.n_features() != source.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "source has {} features, target has {}",
                source.n_features(),
                t.n_features()
            )));
        }
    }
    Ok(())
}

/// Fit a projection model. `target` is required for `stca` and `dapca`,
/// optional for `sspca`, and merged into the uniform-weight problem for
/// `pca` when present.
pub fn fit(source: &Dataset, target: Option<&Dataset>, config: &FitConfig) -> Result<ProjectionModel> {
    config.validate()?;
    check_dims(source, target)?;
    match config.method {
        Method::Pca => {
            let data = match target {
                Some(t) => Dataset::unlabeled(ndarray::concatenate(
                    ndarray::Axis(0),
                    &[source.values().view(), t.values().view()],
                )
                .expect("same width"))?,
                None => source.clone(),
            };
            single_shot(gram_pca(&data), config)
        }
        Method::Spca => {
            let labels = source.require_supervised()?;
            let d_eff = build_delta(&config.delta, labels)?;
            single_shot(gram_supervised(source, &d_eff)?, config)
        }
        Method::Sspca => {
            let labels = source.require_supervised()?;
            let d_eff = build_delta(&config.delta, labels)?;
            let t_spec = TargetBlockSpec::new(config.beta)?;
            single_shot(gram_semi_supervised(source, target, &d_eff, &t_spec)?, config)
        }
        Method::Stca => {
            let target = require_target(target, config.method)?;
            let labels = source.require_supervised()?;
            let d_eff = build_delta(&config.delta, labels)?;
            let t_spec = TargetBlockSpec::new(config.beta)?;
            single_shot(gram_stca(source, target, &d_eff, &t_spec, config.phi)?, config)
        }
        Method::Dapca => fit_dapca(source, require_target(target, config.method)?, config),
    }
}

fn single_shot(gram: GramMatrix, config: &FitConfig) -> Result<ProjectionModel> {
    let total = gram.total();
    if total.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidConfig(
            "pair weights produce a zero objective matrix; nothing to maximize".into(),
        ));
    }
    let spectrum = eig_sym(&total)?;
    let sel = select_components(&spectrum, config.q_requested)?;
    let obj = sel.eigenvalues.sum();
    Ok(ProjectionModel {
        basis: sel.basis,
        eigenvalues: sel.eigenvalues,
        method: config.method,
        fit_config: Some(config.clone()),
        diagnostics: FitDiagnostics {
            objective_trace: vec![obj],
            iterations: 1,
            knn_stable: false,
            truncated: sel.truncated,
        },
    })
}

fn fit_dapca(source: &Dataset, target: &Dataset, config: &FitConfig) -> Result<ProjectionModel> {
    let labels = source.require_supervised()?;
    let d_eff = build_delta(&config.delta, labels)?;
    let t_spec = TargetBlockSpec::new(config.beta)?;
    let c_spec = CrossWeightSpec::new(config.gamma, config.k)?;
    // The constant part (source blocks + target block) is assembled once;
    // iterations rebuild only the kNN cross part.
    let constant = gram_semi_supervised(source, Some(target), &d_eff, &t_spec)?;

    let (mut proj_source, mut proj_target) = match config.knn_space {
        KnnSpace::Raw => (source.values().clone(), target.values().clone()),
        KnnSpace::Pca => {
            let pca_cfg = FitConfig {
                method: Method::Pca,
                ..config.clone()
            };
            let pca = fit(source, Some(target), &pca_cfg)?;
            (pca.project(source)?, pca.project(target)?)
        }
    };

    let mut prev_assignment: Option<KnnAssignment> = None;
    let mut prev_objective: Option<f64> = None;
    let mut seen: HashSet<u64> = HashSet::new();
    let mut best: Option<(f64, Array2<f64>, Array1<f64>)> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut knn_stable = false;

    for _ in 0..config.max_iterations {
        let assignment = knn_match(&proj_source, &proj_target, config.k)?;
        if prev_assignment.as_ref() == Some(&assignment) {
            knn_stable = true;
            break;
        }
        if !seen.insert(assignment.index_hash()) {
            // Assignment cycle: floating point can revisit a previous state
            // without strictly increasing the objective. Keep the best
            // iterate seen so far.
            break;
        }
        let cross = gram_cross_term(source, target, &assignment, &c_spec)?;
        let gram = constant.with_cross(cross);
        let spectrum = eig_sym(&gram.total())?;
        // The alternating maximization needs a fixed projection dimension:
        // keep the q largest-eigenvalue components even when attraction
        // drives part (or all) of the spectrum negative. The non-negative
        // cap applies to the single-shot methods only; would-be truncations
        // are reported in the diagnostics instead.
        let q = config.q_requested.min(spectrum.eigenvalues().len());
        let basis = spectrum.eigenvectors().slice(s![.., ..q]).to_owned();
        let eigenvalues = spectrum.eigenvalues().slice(s![..q]).to_owned();
        let obj = eigenvalues.sum();
        trace.push(obj);
        if best.as_ref().map_or(true, |(b, _, _)| obj > *b) {
            best = Some((obj, basis.clone(), eigenvalues));
        }
        proj_source = project_matrix(&basis, source.values())?;
        proj_target = project_matrix(&basis, target.values())?;
        let converged = prev_objective
            .map(|po| (obj - po) < OBJECTIVE_CONVERGENCE_TOLERANCE * po.abs().max(1.0))
            .unwrap_or(false);
        prev_objective = Some(obj);
        prev_assignment = Some(assignment);
        if converged {
            break;
        }
    }

    let (_, basis, eigenvalues) = best.expect("max_iterations >= 1 guarantees one iterate");
    let threshold = -crate::eigen::EIGENVALUE_ZERO_TOLERANCE * eigenvalues[0].abs();
    let truncated = eigenvalues.iter().filter(|&&l| l < threshold).count();
    Ok(ProjectionModel {
        basis,
        eigenvalues,
        method: Method::Dapca,
        fit_config: Some(config.clone()),
        diagnostics: FitDiagnostics {
            iterations: trace.len(),
            objective_trace: trace,
            knn_stable,
            truncated,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::abs_cosine;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Axis};
    use rand::Rng as _;
    use rand::SeedableRng as _;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn knn_exact_match_is_first_neighbor() {
        let src = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]];
        let tgt = array![[1.0, 1.0]];
        let a = knn_match(&src, &tgt, 2).unwrap();
        assert_eq!(a.neighbors()[0][0], 1);
        assert_eq!(a.distances()[0][0], 0.0);
    }

    #[test]
    fn knn_tie_breaks_to_lower_index() {
        let src = array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]];
        let tgt = array![[0.0, 0.0]];
        let a = knn_match(&src, &tgt, 2).unwrap();
        // All three sources are equidistant; indices 0 and 1 win.
        assert_eq!(a.neighbors()[0], vec![0, 1]);
    }

    #[test]
    fn knn_matches_rescan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let src = Array2::from_shape_fn((50, 4), |_| rng.gen_range(-1.0..1.0));
        let tgt = Array2::from_shape_fn((30, 4), |_| rng.gen_range(-1.0..1.0));
        let k = 7;
        let a = knn_match(&src, &tgt, k).unwrap();
        for (i, y) in tgt.rows().into_iter().enumerate() {
            // Independent O(N_X) re-scan: count sources strictly closer.
            for (rank, &j) in a.neighbors()[i].iter().enumerate() {
                let dj: f64 = src.row(j).iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum();
                let closer = (0..src.nrows())
                    .filter(|&m| {
                        let dm: f64 =
                            src.row(m).iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum();
                        dm < dj || (dm == dj && m < j)
                    })
                    .count();
                assert_eq!(closer, rank, "target {i} rank {rank}");
            }
        }
    }

    #[test]
    fn knn_rejects_k_too_large() {
        let src = array![[0.0]];
        let tgt = array![[1.0]];
        assert!(matches!(
            knn_match(&src, &tgt, 2).unwrap_err(),
            Error::KnnTooFewPoints { .. }
        ));
    }

    #[test]
    fn objective_top_q_is_eigenvalue_sum() {
        let q = Array2::from_diag(&array![5.0, 3.0, 1.0]);
        let gram = GramMatrix::from_constant(q.clone());
        let spectrum = eig_sym(&q).unwrap();
        let sel = select_components(&spectrum, 2).unwrap();
        assert_abs_diff_eq!(objective(&sel.basis, &gram), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn objective_full_basis_is_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut q = Array2::zeros((5, 5));
        for i in 0..5 {
            for j in i..5 {
                let v = rng.gen_range(-1.0..1.0);
                q[[i, j]] = v;
                q[[j, i]] = v;
            }
        }
        let gram = GramMatrix::from_constant(q.clone());
        let trace: f64 = (0..5).map(|i| q[[i, i]]).sum();
        assert_abs_diff_eq!(objective(&Array2::eye(5), &gram), trace, epsilon = 1e-10);
    }

    #[test]
    fn objective_matches_pairwise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let n = 40;
        let d = 4;
        let z = Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0));
        let mut w = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(-1.0..1.0);
                w[[i, j]] = v;
                w[[j, i]] = v;
            }
        }
        let q = crate::gram::gram_oracle(&z, &w).unwrap();
        let gram = GramMatrix::from_constant(q);

        // Random orthonormal basis via QR.
        let raw = nalgebra::DMatrix::from_fn(d, 2, |_, _| rng.gen_range(-1.0..1.0));
        let qr = raw.qr();
        let qmat = qr.q();
        let basis = Array2::from_shape_fn((d, 2), |(i, j)| qmat[(i, j)]);

        let proj = z.dot(&basis);
        let mut pairwise = 0.0;
        for i in 0..n {
            for j in 0..n {
                let diff = &proj.row(i) - &proj.row(j);
                pairwise += 0.5 * w[[i, j]] * diff.iter().map(|v| v * v).sum::<f64>();
            }
        }
        let obj = objective(&basis, &gram);
        assert!(
            (obj - pairwise).abs() <= 1e-8 * pairwise.abs().max(1.0),
            "{obj} vs {pairwise}"
        );
    }

    fn toy() -> (Dataset, Dataset, Vec<String>) {
        crate::dataset::generate_toy(&crate::dataset::ToyConfig {
            n_source_class1: 60,
            n_source_class2: 30,
            n_target_class1: 60,
            n_target_class2: 10,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn dapca_gamma_zero_equals_sspca() {
        let (source, target, _) = toy();
        let mut cfg = FitConfig::new(Method::Dapca, 2);
        cfg.gamma = 0.0;
        let dapca = fit(&source, Some(&target), &cfg).unwrap();
        assert!(dapca.diagnostics.iterations <= 2);
        let sspca = fit(&source, Some(&target), &FitConfig::new(Method::Sspca, 2)).unwrap();
        for j in 0..2 {
            let c = abs_cosine(dapca.basis.column(j), sspca.basis.column(j));
            assert!(c >= 1.0 - 1e-8, "component {j}: |cos| = {c}");
        }
    }

    #[test]
    fn sspca_without_target_equals_spca() {
        let (source, _, _) = toy();
        let mut cfg = FitConfig::new(Method::Sspca, 2);
        cfg.beta = 0.0;
        let sspca = fit(&source, None, &cfg).unwrap();
        let spca = fit(&source, None, &FitConfig::new(Method::Spca, 2)).unwrap();
        // Identical objective matrices, hence identical truncation.
        assert_eq!(sspca.n_components(), spca.n_components());
        for j in 0..sspca.n_components() {
            assert!(abs_cosine(sspca.basis.column(j), spca.basis.column(j)) >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn single_class_spca_with_zero_weights_errors() {
        let values = array![[0.0, 0.0], [1.0, 0.2], [0.3, 1.0]];
        let source = Dataset::new(
            values,
            Some(vec!["a".into(), "a".into(), "a".into()]),
            None,
        )
        .unwrap();
        let mut cfg = FitConfig::new(Method::Spca, 1);
        cfg.delta = DeltaSpec {
            between_class: BetweenClass::Scalar(1.0),
            within_class_attraction: WithinClass::Scalar(0.0),
        };
        // Single class, alpha=0: every pair weight vanishes and Q^W is
        // identically zero. With alpha>0 the whole spectrum is negative
        // and component selection must fail.
        assert!(matches!(
            fit(&source, None, &cfg).unwrap_err(),
            Error::InvalidConfig(_)
        ));
        cfg.delta = DeltaSpec::uniform(1.0);
        assert!(matches!(
            fit(&source, None, &cfg).unwrap_err(),
            Error::AllNegativeSpectrum
        ));
    }

    #[test]
    fn dapca_objective_nondecreasing_and_deterministic() {
        let (source, target, _) = toy();
        let mut cfg = FitConfig::new(Method::Dapca, 2);
        cfg.gamma = 100.0;
        let a = fit(&source, Some(&target), &cfg).unwrap();
        let b = fit(&source, Some(&target), &cfg).unwrap();
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.diagnostics.objective_trace, b.diagnostics.objective_trace);
        let trace = &a.diagnostics.objective_trace;
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "objective decreased: {w:?}");
        }
        assert!(a.diagnostics.iterations <= 30);
    }

    #[test]
    fn dapca_translation_invariant_directions() {
        let (source, target, _) = toy();
        let shift = array![5.0, -3.0, 11.0];
        let source2 = Dataset::new(
            source.values() + &shift.view().insert_axis(Axis(0)),
            source.labels().map(|l| l.to_vec()),
            None,
        )
        .unwrap();
        let target2 =
            Dataset::unlabeled(target.values() + &shift.view().insert_axis(Axis(0))).unwrap();
        let mut cfg = FitConfig::new(Method::Dapca, 2);
        cfg.gamma = 100.0;
        let a = fit(&source, Some(&target), &cfg).unwrap();
        let b = fit(&source2, Some(&target2), &cfg).unwrap();
        for j in 0..2 {
            assert!(abs_cosine(a.basis.column(j), b.basis.column(j)) >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn config_key_value_round_trip() {
        let mut cfg = FitConfig::new(Method::Dapca, 3);
        cfg.delta = DeltaSpec {
            between_class: BetweenClass::PerClass(vec![1.0, 2.5]),
            within_class_attraction: WithinClass::Scalar(0.5),
        };
        cfg.gamma = 100.0;
        cfg.knn_space = KnnSpace::Pca;
        let pairs = cfg.to_key_values();
        let back = FitConfig::from_key_values(&pairs).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn missing_target_errors() {
        let (source, _, _) = toy();
        let cfg = FitConfig::new(Method::Dapca, 2);
        assert!(matches!(
            fit(&source, None, &cfg).unwrap_err(),
            Error::MissingInput(_)
        ));
    }
}
