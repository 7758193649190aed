//! Quantitative evaluation: balanced accuracy, direct validation against
//! hidden target labels, reverse validation (self-consistency), the
//! dataset-mixing score with permutation normalization, and the
//! domain-adaptation benefit.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fit::{fit, knn_match, FitConfig};

/// Aggregated validation results. Ranges: accuracies in `[0, 1]`, the
/// normalized mixing score in `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub balanced_accuracy: f64,
    pub per_class_recalls: Vec<(String, f64)>,
    pub self_consistency: Option<f64>,
    pub mixing_accuracy: f64,
    pub mixing_accuracy_normalized: f64,
    pub benefit_b: Option<f64>,
}

impl ValidationReport {
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("balanced_accuracy".into(), self.balanced_accuracy.to_string()),
            ("mixing_accuracy".into(), self.mixing_accuracy.to_string()),
            (
                "mixing_accuracy_normalized".into(),
                self.mixing_accuracy_normalized.to_string(),
            ),
        ];
        if let Some(sc) = self.self_consistency {
            out.push(("self_consistency".into(), sc.to_string()));
        }
        if let Some(b) = self.benefit_b {
            out.push(("benefit_b".into(), b.to_string()));
        }
        for (class, recall) in &self.per_class_recalls {
            out.push((format!("recall_{class}"), recall.to_string()));
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "balanced_accuracy,self_consistency,mixing_accuracy,mixing_accuracy_normalized,benefit_b"
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            self.balanced_accuracy,
            opt(self.self_consistency),
            self.mixing_accuracy,
            self.mixing_accuracy_normalized,
            opt(self.benefit_b)
        )
    }
}

/// Per-class recalls, in sorted class order.
pub fn per_class_recalls(
    true_labels: &[String],
    predicted_labels: &[String],
) -> Result<Vec<(String, f64)>> {
    if true_labels.len() != predicted_labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} true labels vs {} predictions",
            true_labels.len(),
            predicted_labels.len()
        )));
    }
    if true_labels.is_empty() {
        return Err(Error::MissingInput("no labels to score".into()));
    }
    let mut totals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (t, p) in true_labels.iter().zip(predicted_labels) {
        let entry = totals.entry(t.as_str()).or_insert((0, 0));
        entry.0 += 1;
        if t == p {
            entry.1 += 1;
        }
    }
    Ok(totals
        .into_iter()
        .map(|(class, (total, correct))| (class.to_string(), correct as f64 / total as f64))
        .collect())
}

/// Balanced accuracy: the mean of per-class recalls.
pub fn balanced_accuracy(true_labels: &[String], predicted_labels: &[String]) -> Result<f64> {
    let recalls = per_class_recalls(true_labels, predicted_labels)?;
    Ok(recalls.iter().map(|(_, r)| r).sum::<f64>() / recalls.len() as f64)
}

/// Majority-vote kNN classification. Ties between classes with equal votes
/// go to the class whose nearest member among the k is closest, then to
/// the lexicographically lower class identifier.
pub fn knn_classify(
    train_points: &Array2<f64>,
    train_labels: &[String],
    test_points: &Array2<f64>,
    k: usize,
) -> Result<Vec<String>> {
    if train_labels.len() != train_points.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} training rows",
            train_labels.len(),
            train_points.nrows()
        )));
    }
    let assignment = knn_match(train_points, test_points, k)?;
    let mut out = Vec::with_capacity(test_points.nrows());
    for (neighbors, distances) in assignment.neighbors().iter().zip(assignment.distances()) {
        out.push(vote(neighbors, distances, train_labels));
    }
    Ok(out)
}

fn vote(neighbors: &[usize], distances: &[f64], labels: &[String]) -> String {
    // (votes, nearest distance) per class; neighbors come sorted by distance.
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (&j, &d) in neighbors.iter().zip(distances) {
        let entry = tally.entry(labels[j].as_str()).or_insert((0, d));
        entry.0 += 1;
    }
    tally
        .into_iter()
        .max_by(|(ca, (va, da)), (cb, (vb, db))| {
            va.cmp(vb)
                .then(db.partial_cmp(da).expect("finite distances"))
                .then(cb.cmp(ca))
        })
        .map(|(c, _)| c.to_string())
        .expect("k >= 1")
}

/// Fit on `(source, target)` with `config`, classify the projected target
/// from the projected source, and score against the hidden target labels.
pub fn direct_validate(
    source: &Dataset,
    target: &Dataset,
    hidden_target_labels: &[String],
    config: &FitConfig,
    classifier_k: usize,
) -> Result<ValidationReport> {
    let model = fit(source, Some(target), config)?;
    let proj_source = model.project(source)?;
    let proj_target = model.project(target)?;
    let labels = source
        .labels()
        .ok_or_else(|| Error::MissingInput("source labels required".into()))?;
    let predicted = knn_classify(&proj_source, labels, &proj_target, classifier_k)?;
    let recalls = per_class_recalls(hidden_target_labels, &predicted)?;
    let ba = recalls.iter().map(|(_, r)| r).sum::<f64>() / recalls.len() as f64;
    let n_total = proj_source.nrows() + proj_target.nrows();
    let mixing_k = 20.min(n_total.saturating_sub(1)).max(1);
    let (mixing, mixing_norm) = mixing_score(&proj_source, &proj_target, mixing_k, 20, config.seed)?;
    Ok(ValidationReport {
        balanced_accuracy: ba,
        per_class_recalls: recalls,
        self_consistency: None,
        mixing_accuracy: mixing,
        mixing_accuracy_normalized: mixing_norm,
        benefit_b: None,
    })
}

/// Stratified, seeded split of a labeled dataset into `(kept, held_out)`
/// with `fraction` of each class kept.
fn stratified_split(
    source: &Dataset,
    fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, Vec<String>)> {
    let labels = source.require_supervised()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept_idx: Vec<usize> = Vec::new();
    let mut held_idx: Vec<usize> = Vec::new();
    for class in source.classes() {
        let mut idx: Vec<usize> = (0..source.n_rows()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_keep = (fraction * idx.len() as f64).round() as usize;
        if n_keep < 2 || idx.len() - n_keep < 2 {
            return Err(Error::ReverseValidation {
                stage: "split".into(),
                reason: format!(
                    "class {class:?} would keep {n_keep} of {} members; both parts need >= 2",
                    idx.len()
                ),
            });
        }
        kept_idx.extend(&idx[..n_keep]);
        held_idx.extend(&idx[n_keep..]);
    }
    let take = |idx: &[usize]| -> (Array2<f64>, Vec<String>) {
        let mut values = Array2::zeros((idx.len(), source.n_features()));
        let mut l = Vec::with_capacity(idx.len());
        for (row, &i) in idx.iter().enumerate() {
            values.row_mut(row).assign(&source.values().row(i));
            l.push(labels[i].clone());
        }
        (values, l)
    };
    let (kept_values, kept_labels) = take(&kept_idx);
    let (held_values, held_labels) = take(&held_idx);
    Ok((
        Dataset::new(kept_values, Some(kept_labels), None)?,
        Dataset::new(held_values, None, None)?,
        held_labels,
    ))
}

/// Reverse validation: adapt `X_L → Y`, predict labels for `Y`, then adapt
/// back `Y → X_T` with the predicted labels and score the held-out part of
/// the source. Requires no knowledge of true target labels.
pub fn reverse_validate(
    source: &Dataset,
    target: &Dataset,
    config: &FitConfig,
    split_fraction: f64,
    classifier_k: usize,
    seed: u64,
) -> Result<f64> {
    if !(0.0 < split_fraction && split_fraction < 1.0) {
        return Err(Error::InvalidConfig("split_fraction must be in (0, 1)".into()));
    }
    let (x_l, x_t, x_t_labels) = stratified_split(source, split_fraction, seed)?;

    let forward = fit(&x_l, Some(target), config)?;
    let predicted_y = knn_classify(
        &forward.project(&x_l)?,
        x_l.labels().expect("labeled split"),
        &forward.project(target)?,
        classifier_k,
    )?;

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &predicted_y {
        *counts.entry(l.as_str()).or_insert(0) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::ReverseValidation {
            stage: "forward prediction".into(),
            reason: "all target points were assigned a single class".into(),
        });
    }
    if let Some((class, count)) = counts.iter().find(|(_, &c)| c < 2) {
        return Err(Error::ReverseValidation {
            stage: "reverse fit".into(),
            reason: format!("predicted class {class:?} has only {count} member(s)"),
        });
    }

    let reverse_source = Dataset::new(target.values().clone(), Some(predicted_y), None)?;
    let reverse = fit(&reverse_source, Some(&x_t), config)?;
    let predicted_t = knn_classify(
        &reverse.project(&reverse_source)?,
        reverse_source.labels().expect("predicted labels"),
        &reverse.project(&x_t)?,
        classifier_k,
    )?;
    balanced_accuracy(&x_t_labels, &predicted_t)
}

/// Leave-one-out neighbor lists over the stacked point set. Points
/// co-located with the query are indistinguishable from it and are left
/// out along with the query itself; otherwise a zero-distance duplicate
/// of every point would make the origin classifier anti-predictive on
/// perfectly mixed data. Rows may hold fewer than `k` indices when few
/// distinct positions remain.
fn loo_neighbors(points: &Array2<f64>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = points.nrows();
    if k + 1 > n {
        return Err(Error::KnnTooFewPoints { k, n });
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut candidates: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let diff = &points.row(i) - &points.row(j);
                (diff.dot(&diff), j)
            })
            .filter(|&(d, _)| d > 0.0)
            .collect();
        candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        out.push(candidates.into_iter().take(k).map(|(_, j)| j).collect());
    }
    Ok(out)
}

fn loo_accuracy(neighbors: &[Vec<usize>], labels: &[bool]) -> f64 {
    let mut credit = 0.0;
    for (i, row) in neighbors.iter().enumerate() {
        let votes_true = row.iter().filter(|&&j| labels[j]).count();
        let votes_false = row.len() - votes_true;
        // Binary majority vote; an exact tie carries no information about
        // the origin and scores half a point either way.
        credit += match votes_true.cmp(&votes_false) {
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater if labels[i] => 1.0,
            std::cmp::Ordering::Less if !labels[i] => 1.0,
            _ => 0.0,
        };
    }
    credit / neighbors.len() as f64
}

/// Leave-one-out kNN accuracy of a dataset-of-origin classifier on the
/// projected source and target, and the permutation-normalized score
/// `(accuracy − baseline) / (1 − baseline)` clipped to `[−1, 1]`.
/// Lower raw accuracy means better mixing; a normalized value near zero
/// indicates theoretically maximal adaptation.
pub fn mixing_score(
    projected_source: &Array2<f64>,
    projected_target: &Array2<f64>,
    k: usize,
    n_permutations: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let n_x = projected_source.nrows();
    let n_y = projected_target.nrows();
    if n_x == 0 || n_y == 0 {
        return Err(Error::MissingInput("mixing score needs nonempty point sets".into()));
    }
    let stacked = ndarray::concatenate(
        ndarray::Axis(0),
        &[projected_source.view(), projected_target.view()],
    )
    .map_err(|_| Error::DimensionMismatch("projections have different widths".into()))?;
    let neighbors = loo_neighbors(&stacked, k)?;
    let origin: Vec<bool> = (0..n_x + n_y).map(|i| i < n_x).collect();
    let accuracy = loo_accuracy(&neighbors, &origin);

    let mut baseline = 0.0;
    for p in 0..n_permutations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(p as u64));
        let mut permuted = origin.clone();
        permuted.shuffle(&mut rng);
        baseline += loo_accuracy(&neighbors, &permuted);
    }
    baseline /= n_permutations.max(1) as f64;

    let denom = 1.0 - baseline;
    let normalized = if denom.abs() < 1e-12 {
        0.0
    } else {
        ((accuracy - baseline) / denom).clamp(-1.0, 1.0)
    };
    Ok((accuracy, normalized))
}

/// Domain-adaptation benefit `b = (A_DA − A_noDA) / (A_top − A_noDA)`:
/// the fraction of the gap to the label-trained ceiling recovered by
/// adaptation. May be negative or exceed 1.
pub fn benefit(a_da: f64, a_noda: f64, a_top: f64) -> Result<f64> {
    let denom = a_top - a_noda;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((a_da - a_noda) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_toy, ToyConfig};
    use crate::fit::Method;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng as _;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn ba_perfect_prediction() {
        let labels = s(&["a", "b", "a"]);
        assert_eq!(balanced_accuracy(&labels, &labels).unwrap(), 1.0);
    }

    #[test]
    fn ba_hand_case() {
        let truth = s(&["a", "a", "b", "b"]);
        let pred = s(&["a", "b", "b", "b"]);
        assert_abs_diff_eq!(balanced_accuracy(&truth, &pred).unwrap(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn ba_constant_predictor_on_unbalanced_classes() {
        let mut truth = vec!["a".to_string(); 90];
        truth.extend(vec!["b".to_string(); 10]);
        let pred = vec!["a".to_string(); 100];
        assert_abs_diff_eq!(balanced_accuracy(&truth, &pred).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn ba_invariant_to_relabeling() {
        let truth = s(&["a", "a", "b", "c", "c"]);
        let pred = s(&["a", "b", "b", "c", "a"]);
        let swap = |l: &str| match l {
            "a" => "z".to_string(),
            "b" => "a".to_string(),
            other => other.to_string(),
        };
        let truth2: Vec<String> = truth.iter().map(|l| swap(l)).collect();
        let pred2: Vec<String> = pred.iter().map(|l| swap(l)).collect();
        assert_eq!(
            balanced_accuracy(&truth, &pred).unwrap(),
            balanced_accuracy(&truth2, &pred2).unwrap()
        );
    }

    #[test]
    fn ba_rejects_length_mismatch() {
        assert!(balanced_accuracy(&s(&["a"]), &s(&["a", "b"])).is_err());
    }

    #[test]
    fn knn_classify_exact_point() {
        let train = array![[0.0, 0.0], [10.0, 10.0]];
        let labels = s(&["a", "b"]);
        let pred = knn_classify(&train, &labels, &array![[10.0, 10.0]], 1).unwrap();
        assert_eq!(pred, s(&["b"]));
    }

    #[test]
    fn knn_classify_separable_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut train = Array2::zeros((40, 2));
        let mut labels = Vec::new();
        for i in 0..40 {
            let offset = if i < 20 { 0.0 } else { 100.0 };
            train[[i, 0]] = offset + rng.gen_range(-1.0..1.0);
            train[[i, 1]] = rng.gen_range(-1.0..1.0);
            labels.push(if i < 20 { "a".to_string() } else { "b".to_string() });
        }
        let test = array![[0.5, 0.0], [99.5, 0.5]];
        let pred = knn_classify(&train, &labels, &test, 3).unwrap();
        assert_eq!(pred, s(&["a", "b"]));
    }

    #[test]
    fn knn_classify_matches_independent_vote() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let train = Array2::from_shape_fn((25, 3), |_| rng.gen_range(-1.0..1.0));
        let labels: Vec<String> = (0..25).map(|i| format!("c{}", i % 3)).collect();
        let test = Array2::from_shape_fn((10, 3), |_| rng.gen_range(-1.0..1.0));
        let k = 5;
        let pred = knn_classify(&train, &labels, &test, k).unwrap();
        let assignment = knn_match(&train, &test, k).unwrap();
        for (i, p) in pred.iter().enumerate() {
            // Re-derive the majority vote independently.
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for &j in &assignment.neighbors()[i] {
                *counts.entry(labels[j].as_str()).or_insert(0) += 1;
            }
            let max = counts.values().max().copied().unwrap();
            assert_eq!(counts[p.as_str()], max);
        }
    }

    #[test]
    fn knn_classify_tie_goes_to_nearest_class() {
        // Two votes each; class "b" owns the single nearest neighbor.
        let train = array![[1.0, 0.0], [5.0, 0.0], [2.0, 0.0], [4.0, 0.0]];
        let labels = s(&["a", "a", "b", "b"]);
        let pred = knn_classify(&train, &labels, &array![[2.1, 0.0]], 4).unwrap();
        assert_eq!(pred, s(&["b"]));
    }

    fn small_toy() -> (Dataset, Dataset, Vec<String>) {
        generate_toy(&ToyConfig {
            n_source_class1: 80,
            n_source_class2: 40,
            n_target_class1: 80,
            n_target_class2: 16,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn direct_validate_identical_target() {
        let (source, _, _) = small_toy();
        let target = Dataset::unlabeled(source.values().clone()).unwrap();
        let hidden = source.labels().unwrap().to_vec();
        let mut cfg = FitConfig::new(Method::Dapca, 2);
        cfg.gamma = 100.0;
        let report = direct_validate(&source, &target, &hidden, &cfg, 5).unwrap();
        assert!(report.balanced_accuracy >= 0.95, "BA = {}", report.balanced_accuracy);
    }

    #[test]
    fn reverse_validate_identical_target_is_self_consistent() {
        let (source, _, _) = small_toy();
        let target = Dataset::unlabeled(source.values().clone()).unwrap();
        let mut cfg = FitConfig::new(Method::Dapca, 2);
        cfg.gamma = 100.0;
        let sc = reverse_validate(&source, &target, &cfg, 0.5, 5, 7).unwrap();
        assert!((0.0..=1.0).contains(&sc));
        assert!(sc >= 0.9, "self-consistency = {sc}");
    }

    #[test]
    fn reverse_validate_rejects_bad_fraction() {
        let (source, target, _) = small_toy();
        let cfg = FitConfig::new(Method::Dapca, 2);
        assert!(reverse_validate(&source, &target, &cfg, 0.0, 5, 7).is_err());
        assert!(reverse_validate(&source, &target, &cfg, 1.0, 5, 7).is_err());
    }

    #[test]
    fn mixing_score_identical_point_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let points = Array2::from_shape_fn((60, 2), |_| rng.gen_range(-1.0..1.0));
        let (_, normalized) = mixing_score(&points, &points, 20, 20, 5).unwrap();
        assert!(normalized.abs() <= 0.1, "normalized = {normalized}");
    }

    #[test]
    fn mixing_score_separated_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let a = Array2::from_shape_fn((40, 2), |_| rng.gen_range(-1.0..1.0));
        let b = Array2::from_shape_fn((40, 2), |(_, j)| 1000.0 * (1 - j) as f64 + rng.gen_range(-1.0..1.0));
        let (acc, normalized) = mixing_score(&a, &b, 20, 20, 5).unwrap();
        assert!(acc > 0.99);
        assert!(normalized > 0.9);
    }

    #[test]
    fn mixing_score_near_zero_for_shuffled_origins() {
        // Shuffle which cloud each point "belongs" to before scoring: the
        // origin label carries no geometry, so the normalized score is ~0.
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let all: Vec<[f64; 2]> = (0..400)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let mut indices: Vec<usize> = (0..400).collect();
        indices.shuffle(&mut rng);
        let a = Array2::from_shape_fn((200, 2), |(i, j)| all[indices[i]][j]);
        let b = Array2::from_shape_fn((200, 2), |(i, j)| all[indices[200 + i]][j]);
        let (_, normalized) = mixing_score(&a, &b, 20, 30, 11).unwrap();
        assert!(normalized.abs() <= 0.1, "normalized = {normalized}");
    }

    #[test]
    fn benefit_arithmetic() {
        assert_abs_diff_eq!(benefit(0.9, 0.5, 1.0).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(benefit(0.5, 0.5, 1.0).unwrap(), 0.0);
        assert!(matches!(benefit(0.9, 0.7, 0.7).unwrap_err(), Error::ZeroDenominator));
    }

    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;
}
