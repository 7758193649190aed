//! Data model, CSV ingestion/persistence, centering and the seeded toy
//! benchmark generator.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// A dense numeric matrix of observations (rows) by features (columns),
/// with optional per-row class labels and feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    labels: Option<Vec<String>>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        values: Array2<f64>,
        labels: Option<Vec<String>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(ref l) = labels {
            if l.len() != values.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} rows",
                    l.len(),
                    values.nrows()
                )));
            }
        }
        if let Some(ref f) = feature_names {
            if f.len() != values.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "{} feature names for {} columns",
                    f.len(),
                    values.ncols()
                )));
            }
        }
        Ok(Dataset {
            values,
            labels,
            feature_names,
        })
    }

    pub fn unlabeled(values: Array2<f64>) -> Result<Self> {
        Self::new(values, None, None)
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Sorted unique labels and their counts. Empty when unlabeled.
    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        if let Some(ref labels) = self.labels {
            for l in labels {
                *counts.entry(l.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Sorted unique labels.
    pub fn classes(&self) -> Vec<String> {
        self.class_counts().into_keys().collect()
    }

    /// Require labels to be present and every class to have at least 2
    /// members (needed by the 1/(N_r(N_r−1)) weight normalizations).
    pub fn require_supervised(&self) -> Result<&[String]> {
        let labels = self
            .labels
            .as_deref()
            .ok_or_else(|| Error::MissingInput("labels required for supervised fit".into()))?;
        for (label, count) in self.class_counts() {
            if count < 2 {
                return Err(Error::ClassTooSmall { label, count });
            }
        }
        Ok(labels)
    }
}

/// Parse a label-column selector: header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Numeric strings select by index, anything else by header name.
    pub fn parse(s: &str) -> LabelColumn {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

fn looks_like_header(record: &csv::StringRecord) -> bool {
    record.iter().any(|cell| cell.parse::<f64>().is_err())
}

/// Load a CSV file into a [`Dataset`]. An optional single header row is
/// detected by the presence of non-numeric cells; `label_column` selects
/// the label column by header name or zero-based index.
pub fn load_csv(path: &Path, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::EmptyTable {
            path: path.to_path_buf(),
        });
    }

    let header: Option<Vec<String>> = if looks_like_header(&records[0]) {
        Some(records.remove(0).iter().map(str::to_string).collect())
    } else {
        None
    };
    if records.is_empty() {
        return Err(Error::EmptyTable {
            path: path.to_path_buf(),
        });
    }

    let width = records[0].len();
    for (i, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row: i,
                expected: width,
                found: rec.len(),
            });
        }
    }
    if let Some(ref h) = header {
        if h.len() != width {
            return Err(Error::RaggedRow {
                row: 0,
                expected: width,
                found: h.len(),
            });
        }
    }

    let label_index: Option<usize> = match label_column {
        None => None,
        Some(LabelColumn::Index(i)) => {
            if *i >= width {
                return Err(Error::LabelColumnNotFound(i.to_string()));
            }
            Some(*i)
        }
        Some(LabelColumn::Name(name)) => {
            let h = header
                .as_ref()
                .ok_or_else(|| Error::LabelColumnNotFound(name.clone()))?;
            Some(
                h.iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::LabelColumnNotFound(name.clone()))?,
            )
        }
    };

    let d = if label_index.is_some() { width - 1 } else { width };
    if d == 0 {
        return Err(Error::EmptyTable {
            path: path.to_path_buf(),
        });
    }
    let n = records.len();
    let mut values = Array2::zeros((n, d));
    let mut labels: Option<Vec<String>> = label_index.map(|_| Vec::with_capacity(n));
    for (i, rec) in records.iter().enumerate() {
        let mut col = 0usize;
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_index {
                labels.as_mut().unwrap().push(cell.to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::NonNumericCell {
                row: i,
                column: j,
                value: cell.to_string(),
            })?;
            values[[i, col]] = v;
            col += 1;
        }
    }

    let feature_names = header.map(|h| {
        h.iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != label_index)
            .map(|(_, c)| c.clone())
            .collect()
    });

    Dataset::new(values, labels, feature_names)
}

/// Write a [`Dataset`] as CSV. Numbers are serialized with Rust's shortest
/// round-trip formatting, so `load_csv(save_csv(d))` reproduces the values
/// exactly. The label column (if any) is written last under the header
/// `label`.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    let d = dataset.n_features();
    let mut header: Vec<String> = match dataset.feature_names() {
        Some(names) => names.to_vec(),
        None => (0..d).map(|j| format!("f{j}")).collect(),
    };
    if dataset.labels().is_some() {
        header.push("label".to_string());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..dataset.n_rows() {
        let mut cells: Vec<String> = (0..d).map(|j| format!("{}", dataset.values()[[i, j]])).collect();
        if let Some(labels) = dataset.labels() {
            cells.push(labels[i].clone());
        }
        out.push_str(&cells.join(","));
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

/// Subtract column means. Returns the centered dataset and the mean vector
/// that restores the original via addition.
pub fn center(dataset: &Dataset) -> (Dataset, Array1<f64>) {
    let n = dataset.n_rows() as f64;
    let mean = dataset.values().sum_axis(ndarray::Axis(0)) / n;
    let centered = dataset.values() - &mean.clone().insert_axis(ndarray::Axis(0));
    (
        Dataset {
            values: centered,
            labels: dataset.labels.clone(),
            feature_names: dataset.feature_names.clone(),
        },
        mean,
    )
}

/// Configuration for the 3D two-class toy benchmark: a labeled source with
/// two Gaussian clusters sharing a diagonal covariance, and a target drawn
/// from the same law then distorted by per-class shifts along coordinate 2,
/// a class-2 variance scaling, and a different class balance.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub seed: u64,
    pub n_source_class1: usize,
    pub n_source_class2: usize,
    pub n_target_class1: usize,
    pub n_target_class2: usize,
    pub class_means: [[f64; 3]; 2],
    pub shared_covariance_diagonal: [f64; 3],
    /// Shift applied to coordinate 2 (zero-based index 1) of target class 1.
    pub target_shift_class1: f64,
    /// Shift applied to coordinate 2 of target class 2.
    pub target_shift_class2: f64,
    /// Variance multiplier for target class 2.
    pub target_variance_scale_class2: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            seed: 42,
            n_source_class1: 400,
            n_source_class2: 200,
            n_target_class1: 400,
            n_target_class2: 40,
            class_means: [[0.0, 0.0, 0.0], [4.0, 0.0, 0.0]],
            shared_covariance_diagonal: [1.0, 1.0, 4.0],
            target_shift_class1: 3.0,
            target_shift_class2: 6.0,
            target_variance_scale_class2: 2.0,
        }
    }
}

impl ToyConfig {
    fn validate(&self) -> Result<()> {
        for (name, count) in [
            ("n_source_class1", self.n_source_class1),
            ("n_source_class2", self.n_source_class2),
            ("n_target_class1", self.n_target_class1),
            ("n_target_class2", self.n_target_class2),
        ] {
            if count < 2 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 2, got {count}")));
            }
        }
        if self.shared_covariance_diagonal.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidConfig(
                "covariance diagonal entries must be > 0".into(),
            ));
        }
        if self.target_variance_scale_class2 <= 0.0 {
            return Err(Error::InvalidConfig("variance scale must be > 0".into()));
        }
        Ok(())
    }
}

fn sample_cluster(
    rng: &mut ChaCha8Rng,
    n: usize,
    mean: &[f64; 3],
    var: &[f64; 3],
) -> Array2<f64> {
    let mut out = Array2::zeros((n, 3));
    let normals: Vec<Normal<f64>> = (0..3)
        .map(|j| Normal::new(mean[j], var[j].sqrt()).expect("finite parameters"))
        .collect();
    for i in 0..n {
        for j in 0..3 {
            out[[i, j]] = normals[j].sample(rng);
        }
    }
    out
}

fn vstack(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    ndarray::concatenate(ndarray::Axis(0), &[a.view(), b.view()]).expect("same width")
}

/// Generate the toy benchmark. Returns `(source, target, hidden_target_labels)`;
/// the hidden labels are for validation only and are not attached to the
/// target dataset. Deterministic given the config (seed included).
pub fn generate_toy(config: &ToyConfig) -> Result<(Dataset, Dataset, Vec<String>)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cov = &config.shared_covariance_diagonal;

    let src1 = sample_cluster(&mut rng, config.n_source_class1, &config.class_means[0], cov);
    let src2 = sample_cluster(&mut rng, config.n_source_class2, &config.class_means[1], cov);

    let mut tgt1 = sample_cluster(&mut rng, config.n_target_class1, &config.class_means[0], cov);
    for mut row in tgt1.rows_mut() {
        row[1] += config.target_shift_class1;
    }
    let scaled_cov = [
        cov[0] * config.target_variance_scale_class2,
        cov[1] * config.target_variance_scale_class2,
        cov[2] * config.target_variance_scale_class2,
    ];
    let mut tgt2 = sample_cluster(
        &mut rng,
        config.n_target_class2,
        &config.class_means[1],
        &scaled_cov,
    );
    for mut row in tgt2.rows_mut() {
        row[1] += config.target_shift_class2;
    }

    let source_labels: Vec<String> = std::iter::repeat("1".to_string())
        .take(config.n_source_class1)
        .chain(std::iter::repeat("2".to_string()).take(config.n_source_class2))
        .collect();
    let hidden_labels: Vec<String> = std::iter::repeat("1".to_string())
        .take(config.n_target_class1)
        .chain(std::iter::repeat("2".to_string()).take(config.n_target_class2))
        .collect();

    let source = Dataset::new(vstack(&src1, &src2), Some(source_labels), None)?;
    let target = Dataset::unlabeled(vstack(&tgt1, &tgt2))?;
    Ok((source, target, hidden_labels))
}
