//! Batch front end: generate toy data, fit projection models, transform
//! data, and run validation protocols and parameter sweeps. All output is
//! plain CSV or key-value text; every run writes a resolved-config echo
//! next to its outputs so results are reproducible from artifacts alone.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage or input error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dapca::dataset::{self, generate_toy, Dataset, LabelColumn, ToyConfig};
use dapca::error::Error;
use dapca::fit::{fit, FitConfig, KnnSpace, Method};
use dapca::validate::{
    direct_validate, mixing_score, reverse_validate, ValidationReport,
};
use dapca::weights::{BetweenClass, DeltaSpec, WithinClass};

#[derive(Parser)]
#[command(
    name = "dapca",
    about = "Supervised and domain-adaptation PCA toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the two-class 3D toy benchmark (source, target, hidden labels).
    Toygen(ToygenArgs),
    /// Fit a projection model and write it with per-iteration diagnostics.
    Fit(FitArgs),
    /// Project a dataset through a saved model.
    Transform(TransformArgs),
    /// Run direct and/or reverse validation, optionally over a parameter grid.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ToygenArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 400)]
    n_source_class1: usize,
    #[arg(long, default_value_t = 200)]
    n_source_class2: usize,
    #[arg(long, default_value_t = 400)]
    n_target_class1: usize,
    #[arg(long, default_value_t = 40)]
    n_target_class2: usize,
    /// Shift applied to coordinate 2 of target class 1.
    #[arg(long = "shift2-class1", default_value_t = 3.0)]
    shift2_class1: f64,
    /// Shift applied to coordinate 2 of target class 2.
    #[arg(long = "shift2-class2", default_value_t = 6.0)]
    shift2_class2: f64,
    /// Variance multiplier for target class 2.
    #[arg(long, default_value_t = 2.0)]
    variance_scale_class2: f64,
}

/// Model parameters shared by `fit` and `validate`. Unset flags fall back
/// to the config file, then to built-in defaults.
#[derive(Args, Clone)]
struct ModelFlags {
    /// One of pca, spca, sspca, stca, dapca.
    #[arg(long)]
    method: Option<String>,
    /// Number of components to keep.
    #[arg(long)]
    q: Option<usize>,
    /// Within-class attraction weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Between-class repulsion: a scalar, a comma-separated per-class
    /// vector, or a path to a CSV weight matrix.
    #[arg(long)]
    delta: Option<String>,
    /// Target-target attraction weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Source-target cross attraction weight.
    #[arg(long)]
    gamma: Option<f64>,
    /// Domain-mean repulsion weight (stca only).
    #[arg(long)]
    phi: Option<f64>,
    /// Neighbors per target point in the cross-domain matching.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Space for the first neighbor matching: raw or pca.
    #[arg(long = "knn-space")]
    knn_space: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key=value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    model: ModelFlags,
    /// Source dataset CSV.
    #[arg(long)]
    source: PathBuf,
    /// Unlabeled target dataset CSV.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Label column of the source CSV (name or zero-based index).
    #[arg(long)]
    labels: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Dataset CSV to project.
    #[arg(long)]
    source: PathBuf,
    /// Label column to strip before projecting, if any.
    #[arg(long)]
    labels: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Label column of the source CSV (name or zero-based index).
    #[arg(long)]
    labels: Option<String>,
    /// Hidden target labels (single-column CSV); enables direct validation.
    #[arg(long = "target-labels")]
    target_labels: Option<PathBuf>,
    /// Neighbors for the label classifier.
    #[arg(long = "classifier-k", default_value_t = 5)]
    classifier_k: usize,
    /// Neighbors for the dataset-mixing score.
    #[arg(long = "mixing-k", default_value_t = 20)]
    mixing_k: usize,
    /// Label permutations for the mixing baseline.
    #[arg(long, default_value_t = 20)]
    permutations: usize,
    /// Fraction of the source kept for the reverse-validation forward fit.
    #[arg(long = "split-fraction", default_value_t = 0.5)]
    split_fraction: f64,
    /// Parameter grid, e.g. `--sweep alpha=0.1,1,10 gamma=1,10,100`.
    #[arg(long, num_args = 1..)]
    sweep: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::AllNegativeSpectrum
        | Error::NonFinite
        | Error::KnnTooFewPoints { .. }
        | Error::DuplicateNeighbor { .. }
        | Error::NeighborOutOfRange { .. }
        | Error::ReverseValidation { .. }
        | Error::ZeroDenominator => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Toygen(args) => cmd_toygen(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(path: &Path, content: &str) -> Result<(), Error> {
    fs::write(path, content).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_config_echo(dir: &Path, pairs: &[(String, String)]) -> Result<(), Error> {
    let mut text = String::new();
    for (key, value) in pairs {
        text.push_str(&format!("{key}={value}\n"));
    }
    write_text(&dir.join("config_resolved.txt"), &text)
}

fn cmd_toygen(args: ToygenArgs) -> Result<(), Error> {
    let config = ToyConfig {
        seed: args.seed,
        n_source_class1: args.n_source_class1,
        n_source_class2: args.n_source_class2,
        n_target_class1: args.n_target_class1,
        n_target_class2: args.n_target_class2,
        target_shift_class1: args.shift2_class1,
        target_shift_class2: args.shift2_class2,
        target_variance_scale_class2: args.variance_scale_class2,
        ..Default::default()
    };
    let (source, target, hidden_labels) = generate_toy(&config)?;
    ensure_dir(&args.out)?;
    dataset::save_csv(&source, &args.out.join("source.csv"))?;
    dataset::save_csv(&target, &args.out.join("target.csv"))?;
    let mut labels_text = String::from("label\n");
    for l in &hidden_labels {
        labels_text.push_str(l);
        labels_text.push('\n');
    }
    write_text(&args.out.join("target_labels.csv"), &labels_text)?;
    write_config_echo(
        &args.out,
        &[
            ("subcommand".into(), "toygen".into()),
            ("seed".into(), config.seed.to_string()),
            ("n_source_class1".into(), config.n_source_class1.to_string()),
            ("n_source_class2".into(), config.n_source_class2.to_string()),
            ("n_target_class1".into(), config.n_target_class1.to_string()),
            ("n_target_class2".into(), config.n_target_class2.to_string()),
            ("shift2_class1".into(), config.target_shift_class1.to_string()),
            ("shift2_class2".into(), config.target_shift_class2.to_string()),
            (
                "variance_scale_class2".into(),
                config.target_variance_scale_class2.to_string(),
            ),
        ],
    )?;
    println!(
        "wrote source.csv ({} rows), target.csv ({} rows), target_labels.csv to {}",
        source.n_rows(),
        target.n_rows(),
        args.out.display()
    );
    Ok(())
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "config line {} is not key=value: {line:?}",
                i + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_from_map<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, Error> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            Error::InvalidConfig(format!("config key {key} has invalid value {raw:?}"))
        }),
    }
}

/// Between-class weights: a scalar, a comma-separated per-class vector,
/// or a path to a CSV matrix.
fn parse_between(spec: &str) -> Result<BetweenClass, Error> {
    if let Ok(x) = spec.parse::<f64>() {
        return Ok(BetweenClass::Scalar(x));
    }
    if spec.contains(',') {
        let parts: Result<Vec<f64>, _> = spec.split(',').map(str::parse).collect();
        if let Ok(values) = parts {
            return Ok(BetweenClass::PerClass(values));
        }
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::InvalidConfig(format!(
            "--delta is neither a number, a comma list, nor an existing file: {spec:?}"
        )));
    }
    let table = dataset::load_csv(path, None)?;
    Ok(BetweenClass::Matrix(table.values().clone()))
}

impl ModelFlags {
    /// Merge defaults, config-file entries, and explicit flags (highest
    /// precedence) into a complete fit configuration.
    fn resolve(&self, default_method: Option<Method>) -> Result<FitConfig, Error> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let method_name = self
            .method
            .clone()
            .or_else(|| file.get("method").cloned());
        let method = match (method_name, default_method) {
            (Some(name), _) => name
                .parse::<Method>()
                .map_err(Error::InvalidConfig)?,
            (None, Some(fallback)) => fallback,
            (None, None) => {
                return Err(Error::MissingInput(
                    "--method is required (pca, spca, sspca, stca, or dapca)".into(),
                ))
            }
        };
        let q = match self.q.or(parse_from_map(&file, "q")?) {
            Some(q) => q,
            None => {
                return Err(Error::MissingInput(
                    "--q (number of components) is required".into(),
                ))
            }
        };
        let mut config = FitConfig::new(method, q);
        let alpha = self.alpha.map_or_else(|| parse_from_map(&file, "alpha"), |v| Ok(Some(v)))?;
        let delta = self.delta.clone().or_else(|| file.get("delta").cloned());
        config.delta = DeltaSpec {
            between_class: match delta {
                Some(spec) => parse_between(&spec)?,
                None => BetweenClass::Scalar(1.0),
            },
            within_class_attraction: WithinClass::Scalar(alpha.unwrap_or(1.0)),
        };
        if let Some(v) = self.beta.or(parse_from_map(&file, "beta")?) {
            config.beta = v;
        }
        if let Some(v) = self.gamma.or(parse_from_map(&file, "gamma")?) {
            config.gamma = v;
        }
        if let Some(v) = self.phi.or(parse_from_map(&file, "phi")?) {
            config.phi = v;
        }
        if let Some(v) = self.k.or(parse_from_map(&file, "k")?) {
            config.k = v;
        }
        if let Some(v) = self.max_iter.or(parse_from_map(&file, "max_iter")?) {
            config.max_iterations = v;
        }
        let knn = self.knn_space.clone().or_else(|| file.get("knn_space").cloned());
        if let Some(name) = knn {
            config.knn_space = name.parse::<KnnSpace>().map_err(Error::InvalidConfig)?;
        }
        if let Some(v) = self.seed.or(parse_from_map(&file, "seed")?) {
            config.seed = v;
        }
        config.validate()?;
        Ok(config)
    }
}

fn load_input(path: &Path, labels: Option<&String>) -> Result<Dataset, Error> {
    let column = labels.map(|s| LabelColumn::parse(s));
    dataset::load_csv(path, column.as_ref())
}

fn load_label_file(path: &Path) -> Result<Vec<String>, Error> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .skip_while(|l| *l == "label")
        .map(str::to_string)
        .collect();
    if labels.is_empty() {
        return Err(Error::EmptyTable {
            path: path.to_path_buf(),
        });
    }
    Ok(labels)
}

fn cmd_fit(args: FitArgs) -> Result<(), Error> {
    let config = args.model.resolve(None)?;
    let source = load_input(&args.source, args.labels.as_ref())?;
    let target = match &args.target {
        Some(path) => Some(load_input(path, None)?),
        None => None,
    };
    let model = fit(&source, target.as_ref(), &config)?;
    ensure_dir(&args.out)?;
    model.save(&args.out.join("model.txt"))?;

    let mut diagnostics = String::from("iteration,objective\n");
    for (i, objective) in model.diagnostics.objective_trace.iter().enumerate() {
        diagnostics.push_str(&format!("{},{objective}\n", i + 1));
    }
    write_text(&args.out.join("diagnostics.csv"), &diagnostics)?;

    let mut echo = vec![
        ("subcommand".into(), "fit".into()),
        ("source".into(), args.source.display().to_string()),
    ];
    if let Some(t) = &args.target {
        echo.push(("target".into(), t.display().to_string()));
    }
    if let Some(l) = &args.labels {
        echo.push(("labels".into(), l.clone()));
    }
    echo.extend(config.to_key_values());
    write_config_echo(&args.out, &echo)?;

    println!(
        "fitted {} model: {} components of {} features, {} iteration(s)",
        model.method,
        model.n_components(),
        model.n_features(),
        model.diagnostics.iterations
    );
    Ok(())
}

fn cmd_transform(args: TransformArgs) -> Result<(), Error> {
    let model = dapca::ProjectionModel::load(&args.model)?;
    let data = load_input(&args.source, args.labels.as_ref())?;
    let projected = model.project(&data)?;
    let names: Vec<String> = (1..=projected.ncols()).map(|i| format!("pc{i}")).collect();
    let out_dataset = Dataset::new(projected, None, Some(names))?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            ensure_dir(dir)?;
        }
    }
    dataset::save_csv(&out_dataset, &args.out)?;
    let echo_dir = args.out.parent().unwrap_or(Path::new("."));
    write_config_echo(
        echo_dir,
        &[
            ("subcommand".into(), "transform".into()),
            ("model".into(), args.model.display().to_string()),
            ("source".into(), args.source.display().to_string()),
            ("out".into(), args.out.display().to_string()),
        ],
    )?;
    println!(
        "projected {} rows into {} components: {}",
        out_dataset.n_rows(),
        out_dataset.n_features(),
        args.out.display()
    );
    Ok(())
}

/// One `name=v1,v2,...` sweep token.
fn parse_sweep_token(token: &str) -> Result<(String, Vec<f64>), Error> {
    let (name, values) = token.split_once('=').ok_or_else(|| {
        Error::InvalidConfig(format!("sweep token {token:?} is not name=v1,v2,..."))
    })?;
    if name != "alpha" && name != "gamma" {
        return Err(Error::InvalidConfig(format!(
            "sweep supports alpha and gamma, not {name:?}"
        )));
    }
    let parsed: Result<Vec<f64>, _> = values.split(',').map(str::parse).collect();
    let parsed = parsed.map_err(|_| {
        Error::InvalidConfig(format!("sweep token {token:?} has a non-numeric value"))
    })?;
    if parsed.is_empty() {
        return Err(Error::InvalidConfig(format!("sweep token {token:?} is empty")));
    }
    Ok((name.to_string(), parsed))
}

fn validate_cell(
    source: &Dataset,
    target: &Dataset,
    hidden: Option<&[String]>,
    config: &FitConfig,
    args: &ValidateArgs,
) -> Result<(Option<ValidationReport>, f64), Error> {
    let report = match hidden {
        Some(labels) => {
            let mut report =
                direct_validate(source, target, labels, config, args.classifier_k)?;
            let model = fit(source, Some(target), config)?;
            let (mix, mix_norm) = mixing_score(
                &model.project(source)?,
                &model.project(target)?,
                args.mixing_k,
                args.permutations,
                config.seed,
            )?;
            report.mixing_accuracy = mix;
            report.mixing_accuracy_normalized = mix_norm;
            Some(report)
        }
        None => None,
    };
    let self_consistency = reverse_validate(
        source,
        target,
        config,
        args.split_fraction,
        args.classifier_k,
        config.seed,
    )?;
    Ok((report, self_consistency))
}

fn set_alpha(config: &mut FitConfig, alpha: f64) {
    config.delta.within_class_attraction = WithinClass::Scalar(alpha);
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Error> {
    let base_config = args.model.resolve(Some(Method::Dapca))?;
    let source = load_input(&args.source, args.labels.as_ref())?;
    let target = load_input(&args.target, None)?;
    let hidden = match &args.target_labels {
        Some(path) => Some(load_label_file(path)?),
        None => None,
    };
    if let Some(labels) = &hidden {
        if labels.len() != target.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} hidden labels for {} target rows",
                labels.len(),
                target.n_rows()
            )));
        }
    }
    ensure_dir(&args.out)?;

    let mut echo = vec![
        ("subcommand".into(), "validate".into()),
        ("source".into(), args.source.display().to_string()),
        ("target".into(), args.target.display().to_string()),
        ("classifier_k".into(), args.classifier_k.to_string()),
        ("mixing_k".into(), args.mixing_k.to_string()),
        ("permutations".into(), args.permutations.to_string()),
        ("split_fraction".into(), args.split_fraction.to_string()),
    ];
    if let Some(path) = &args.target_labels {
        echo.push(("target_labels".into(), path.display().to_string()));
    }
    if !args.sweep.is_empty() {
        echo.push(("sweep".into(), args.sweep.join(" ")));
    }
    echo.extend(base_config.to_key_values());
    write_config_echo(&args.out, &echo)?;

    if args.sweep.is_empty() {
        let (report, self_consistency) =
            validate_cell(&source, &target, hidden.as_deref(), &base_config, &args)?;
        let (csv, text) = match report {
            Some(mut report) => {
                report.self_consistency = Some(self_consistency);
                let csv = format!("{}\n{}\n", ValidationReport::csv_header(), report.csv_row());
                let text = report
                    .to_key_values()
                    .into_iter()
                    .map(|(k, v)| format!("{k}={v}\n"))
                    .collect();
                (csv, text)
            }
            None => (
                format!("self_consistency\n{self_consistency}\n"),
                format!("self_consistency={self_consistency}\n"),
            ),
        };
        write_text(&args.out.join("report.csv"), &csv)?;
        write_text(&args.out.join("report.txt"), &text)?;
        print!("{text}");
        return Ok(());
    }

    let grid: Result<Vec<_>, _> = args.sweep.iter().map(|t| parse_sweep_token(t)).collect();
    let grid = grid?;
    let mut cells: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for (name, values) in &grid {
        let mut next = Vec::new();
        for cell in &cells {
            for &v in values {
                let mut extended = cell.clone();
                extended.push((name.clone(), v));
                next.push(extended);
            }
        }
        cells = next;
    }

    let mut csv = String::new();
    let names: Vec<&str> = grid.iter().map(|(n, _)| n.as_str()).collect();
    csv.push_str(&names.join(","));
    csv.push(',');
    csv.push_str(ValidationReport::csv_header());
    csv.push('\n');
    for cell in &cells {
        let mut config = base_config.clone();
        for (name, value) in cell {
            match name.as_str() {
                "alpha" => set_alpha(&mut config, *value),
                "gamma" => config.gamma = *value,
                _ => unreachable!("validated in parse_sweep_token"),
            }
        }
        let (report, self_consistency) =
            validate_cell(&source, &target, hidden.as_deref(), &config, &args)?;
        let values: Vec<String> = cell.iter().map(|(_, v)| v.to_string()).collect();
        csv.push_str(&values.join(","));
        csv.push(',');
        match report {
            Some(mut report) => {
                report.self_consistency = Some(self_consistency);
                csv.push_str(&report.csv_row());
            }
            None => csv.push_str(&format!(",{self_consistency},,,")),
        }
        csv.push('\n');
    }
    write_text(&args.out.join("sweep.csv"), &csv)?;
    println!("wrote {} sweep rows to {}", cells.len(), args.out.join("sweep.csv").display());
    Ok(())
}
