//! `odrf`: fit, apply, benchmark and study oblique decision trees and forests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use odrf_core::data::{apply_scaler, fit_minmax, load_csv, read_feature_rows};
use odrf_core::eval::{benchmark, consistency_curve, BaseFn, TargetKind, TargetSpec};
use odrf_core::{
    Aggregation, Error, FittedModel, LeafBudget, Method, MethodConfig, ModelDocument, Predictor,
    QRule, ScalingMode, SplitConfig, Task,
};

#[derive(Parser, Debug)]
#[command(
    name = "odrf",
    version,
    about = "Oblique decision trees and random forests"
)]
struct Cli {
    /// Worker threads; `auto` uses every available core. Results do not depend on it.
    #[arg(long, global = true, default_value = "auto")]
    threads: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one model on a whole CSV file and save it as JSON.
    Fit(FitArgs),
    /// Apply a saved model to a CSV file.
    Predict(PredictArgs),
    /// Repeated random train/test partitions over several methods.
    Benchmark(BenchmarkArgs),
    /// L2 risk against a synthetic target as the sample size grows.
    Consistency(ConsistencyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TaskArg {
    Regression,
    Classification,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Regression => Task::Regression,
            TaskArg::Classification => Task::Classification,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AggregationArg {
    Vote,
    MeanThreshold,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScalingArg {
    TrainOnly,
    WholeData,
}

/// Tuning shared by every subcommand that fits models.
#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Leaf budget t_n: a positive integer or `auto` for ceil(n^0.8).
    #[arg(long = "t-n", default_value = "auto")]
    t_n: String,
    /// Pruning penalty per leaf: a number or `auto` for var(y)/sqrt(n) (1/sqrt(n) for classification).
    #[arg(long, default_value = "auto")]
    alpha: String,
    /// Trees per forest.
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Subset-size rule: practical, theory, axis, or fixed:<q>.
    #[arg(long = "q-rule", default_value = "practical")]
    q_rule: String,
    /// Random candidate subsets per node.
    #[arg(long, default_value_t = 10)]
    candidates: usize,
    /// Ridge penalty for the direction fit.
    #[arg(long = "ridge-lambda", default_value_t = 1e-6)]
    ridge_lambda: f64,
    /// Also score the best axis-aligned split at every node.
    #[arg(long = "cart-candidate", default_value_t = true, action = clap::ArgAction::Set)]
    cart_candidate: bool,
    /// Smallest gain accepted for a split.
    #[arg(long = "min-gain", default_value_t = 0.0)]
    min_gain: f64,
    /// Newton steps for the logistic direction fit.
    #[arg(long = "irls-steps", default_value_t = 5)]
    irls_steps: usize,
    /// Grow each forest tree on a bootstrap resample.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    bootstrap: bool,
    /// Forest classification rule.
    #[arg(long, value_enum, default_value = "vote")]
    aggregation: AggregationArg,
}

impl ModelArgs {
    fn config(&self, method: Method) -> Result<MethodConfig, CliError> {
        let leaf_budget = match self.t_n.as_str() {
            "auto" => LeafBudget::Auto,
            s => match s.parse::<usize>() {
                Ok(t) if t >= 1 => LeafBudget::Fixed(t),
                _ => {
                    return Err(CliError::Usage(format!(
                        "--t-n must be `auto` or a positive integer, got `{s}`"
                    )))
                }
            },
        };
        let alpha = match self.alpha.as_str() {
            "auto" => None,
            s => match s.parse::<f64>() {
                Ok(a) if a >= 0.0 && a.is_finite() => Some(a),
                _ => {
                    return Err(CliError::Usage(format!(
                        "--alpha must be `auto` or a number >= 0, got `{s}`"
                    )))
                }
            },
        };
        let q_rule: QRule = self.q_rule.parse().map_err(CliError::Usage)?;
        if self.trees == 0 {
            return Err(CliError::Usage("--trees must be at least 1".into()));
        }
        Ok(MethodConfig {
            method,
            trees: self.trees,
            leaf_budget,
            split: SplitConfig {
                n_candidates: self.candidates,
                q_rule,
                ridge_lambda: self.ridge_lambda,
                include_cart_candidate: self.cart_candidate,
                min_gain: self.min_gain,
                irls_steps: self.irls_steps,
            },
            alpha,
            bootstrap: self.bootstrap,
            aggregation: match self.aggregation {
                AggregationArg::Vote => Aggregation::Vote,
                AggregationArg::MeanThreshold => Aggregation::MeanThreshold,
            },
        })
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the target column.
    #[arg(long)]
    target: String,
    #[arg(long, value_enum, default_value = "regression")]
    task: TaskArg,
    /// Method: odt, pruned-odt, cart, odrf or pruned-odrf.
    #[arg(long, default_value = "odrf")]
    mode: String,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the model JSON.
    #[arg(long, default_value = "model.json")]
    output: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Model JSON written by `fit`.
    #[arg(long)]
    model: PathBuf,
    /// CSV containing the model's feature columns.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, value_enum, default_value = "regression")]
    task: TaskArg,
    /// Comma-separated methods: mean, cart, odt, pruned-odt, odrf, pruned-odrf.
    #[arg(long, default_value = "odrf,odt,cart")]
    methods: String,
    /// Random partitions.
    #[arg(long, default_value_t = 100)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fit the min-max scaler on the training part only, or on the whole file.
    #[arg(long, value_enum, default_value = "train-only")]
    scaling: ScalingArg,
    /// Output CSV; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    output: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct ConsistencyArgs {
    /// Target family: ridge or additive.
    #[arg(long = "target-kind", default_value = "ridge")]
    target_kind: String,
    /// Input dimension.
    #[arg(long, default_value_t = 5)]
    p: usize,
    /// Block size of the additive model.
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Ridge terms or additive blocks.
    #[arg(long, default_value_t = 1)]
    terms: usize,
    /// Base function: sigmoid, sine, quadratic or linear.
    #[arg(long, default_value = "sine")]
    base: String,
    #[arg(long, default_value_t = 4.0)]
    frequency: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.0)]
    intercept: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Use the normalized diagonal as the ridge direction instead of a random one.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    diagonal: bool,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long = "n", default_value = "250,500,1000,2000,4000")]
    n_values: String,
    /// Method: odt, pruned-odt, cart, odrf or pruned-odrf.
    #[arg(long, default_value = "odt")]
    method: String,
    /// Samples per size.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Monte-Carlo points for the risk estimate.
    #[arg(long = "n-mc", default_value_t = 20000)]
    n_mc: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    output: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BadConfig(msg) | Error::BadSpec(msg) => CliError::Usage(msg),
            e => CliError::Core(e),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_data_error() => 2,
            CliError::Core(_) | CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("odrf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = match cli.threads.as_str() {
        "auto" => 0,
        s => match s.parse::<usize>() {
            Ok(t) if t >= 1 => t,
            _ => {
                return Err(CliError::Usage(format!(
                    "--threads must be `auto` or a positive integer, got `{s}`"
                )))
            }
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::Consistency(a) => consistency(a),
    })
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    s.trim().parse().map_err(CliError::Usage)
}

fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))
    } else {
        fs::write(path, text).map_err(|e| {
            CliError::Core(Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })
    }
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let method = parse_method(&a.mode)?;
    if method == Method::Mean {
        return Err(CliError::Usage(
            "the mean baseline cannot be saved; use it in `benchmark`".into(),
        ));
    }
    let config = a.model.config(method)?;
    let raw = load_csv(&a.data, &a.target, a.task.into())?;
    let scaler = fit_minmax(&raw);
    let dataset = apply_scaler(&scaler, &raw)?;
    let model = config.fit(&dataset, &dataset.all_indices(), a.seed)?;

    let n = dataset.n_samples();
    let mut loss = 0.0;
    for i in 0..n {
        let x = dataset.row(i);
        let y = dataset.target(i);
        loss += match dataset.task() {
            Task::Regression => (model.predict(x)? - y).powi(2),
            Task::Classification => f64::from(u8::from(model.classify(x)? as f64 != y)),
        };
    }
    let loss_name = match dataset.task() {
        Task::Regression => "training_mse",
        Task::Classification => "training_error_rate",
    };
    let leaves: Vec<usize> = model.trees().iter().map(|t| t.leaf_count()).collect();
    let mean_leaves = leaves.iter().sum::<usize>() as f64 / leaves.len() as f64;
    println!("method={} n={} p={}", method, n, dataset.n_features());
    println!("{loss_name}={}", loss / n as f64);
    println!(
        "trees={} mean_leaves={mean_leaves} max_leaves={}",
        leaves.len(),
        leaves.iter().max().copied().unwrap_or(0)
    );

    let doc = ModelDocument::new(
        &model,
        &config,
        a.seed,
        &scaler,
        ScalingMode::TrainOnly,
        raw.feature_names.clone(),
        raw.target_name.clone(),
    )?;
    write_output(&a.output, &doc.to_json()?)
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.model).map_err(|e| {
        CliError::Core(Error::Io {
            path: a.model.clone(),
            source: e,
        })
    })?;
    let doc = ModelDocument::from_json(&text)?;
    let file = fs::File::open(&a.data).map_err(|e| {
        CliError::Core(Error::Io {
            path: a.data.clone(),
            source: e,
        })
    })?;
    let rows = read_feature_rows(file, &doc.scaling.feature_names)?;
    let scaler = doc.scaler();
    let model = doc.model();
    let mut out = String::new();
    match doc.task {
        Task::Regression => {
            out.push_str("prediction\n");
            for row in &rows {
                let v = model.predict(&scaler.scale_row(row)?)?;
                out.push_str(&format!("{v}\n"));
            }
        }
        Task::Classification => {
            out.push_str("class,vote_fraction\n");
            for row in &rows {
                let x = scaler.scale_row(row)?;
                let class = model.classify(&x)?;
                let votes = vote_fraction(&model, &x)?;
                out.push_str(&format!("{class},{votes}\n"));
            }
        }
    }
    write_output(&a.output, &out)
}

/// Share of trees whose leaf votes for class 1.
fn vote_fraction(model: &FittedModel, x: &[f64]) -> Result<f64, CliError> {
    match model {
        FittedModel::Forest(f) => Ok(f.vote_fraction(x)?),
        FittedModel::Tree(t) => Ok(f64::from(t.classify(x)?)),
        FittedModel::Mean { .. } => Err(CliError::Internal(
            "mean baseline in a model document".into(),
        )),
    }
}

fn run_benchmark(a: BenchmarkArgs) -> Result<(), CliError> {
    let methods = a
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_method(s).and_then(|m| a.model.config(m)))
        .collect::<Result<Vec<_>, _>>()?;
    let scaling = match a.scaling {
        ScalingArg::TrainOnly => ScalingMode::TrainOnly,
        ScalingArg::WholeData => ScalingMode::WholeData,
    };
    let result = benchmark(
        &a.data,
        &a.target,
        a.task.into(),
        &methods,
        a.repetitions,
        a.seed,
        scaling,
    )?;
    for m in &result.methods {
        eprintln!("{} mean {}={}", m.method, result.metric, m.mean);
    }
    write_output(&a.output, &result.to_csv())
}

fn consistency(a: ConsistencyArgs) -> Result<(), CliError> {
    let method = parse_method(&a.method)?;
    let config = a.model.config(method)?;
    let kind: TargetKind = a.target_kind.parse().map_err(CliError::Usage)?;
    let base: BaseFn = a.base.parse().map_err(CliError::Usage)?;
    let n_values = a
        .n_values
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad sample size `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec = TargetSpec {
        kind,
        p: a.p,
        terms: a.terms,
        q: if kind == TargetKind::RidgeSum {
            a.p
        } else {
            a.q
        },
        bases: vec![base],
        amplitude: a.amplitude,
        frequency: a.frequency,
        intercept: a.intercept,
        noise_sigma: a.noise,
        direction: (kind == TargetKind::RidgeSum && a.diagonal).then(|| vec![1.0; a.p]),
        task: Task::Regression,
    };
    let report = consistency_curve(&spec, &n_values, &config, a.reps, a.n_mc, a.seed)?;
    for (n, m) in report.n_values.iter().zip(&report.medians) {
        eprintln!("n={n} median_l2_risk={m}");
    }
    write_output(&a.output, &report.to_csv())
}
