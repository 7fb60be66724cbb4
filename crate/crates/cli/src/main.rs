//! `overparam`: generate structured datasets, train single optimizers,
//! verify the numerical kernels, and reproduce the accuracy/distance
//! tables.
//!
//! Exit codes: 0 success, 1 operational or verification failure, 2 bad
//! flags or config.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use overparam_core::counterexamples::{self, DecisionRule, GeneratorSpec};
use overparam_core::experiments::{self, presets, ExperimentSpec};
use overparam_core::models::{Dataset, GeneratorTag, Objective};
use overparam_core::optimizers::{self, OptimizerKind, OptimizerSpec};
use overparam_core::solutions;

#[derive(Parser)]
#[command(
    name = "overparam",
    version,
    about = "Plain vs adaptive gradient descent on structured linear regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a structured dataset as JSON (stdout unless --out is given).
    Generate(GenerateArgs),
    /// Train one optimizer on a dataset and report where it landed.
    Run(RunArgs),
    /// Run the seeded verification suite; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Reproduce a table over a seeded grid and emit the report CSV.
    Table(TableArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VersionArg {
    #[value(name = "wilson-v1")]
    WilsonV1,
    #[value(name = "new-ce")]
    NewCe,
}

impl From<VersionArg> for GeneratorTag {
    fn from(v: VersionArg) -> Self {
        match v {
            VersionArg::WilsonV1 => GeneratorTag::WilsonV1,
            VersionArg::NewCe => GeneratorTag::NewCe,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Gd,
    Adagrad,
    AdagradVariant,
    Rmsprop,
    Adam,
    ConstantD,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(v: OptimizerArg) -> Self {
        match v {
            OptimizerArg::Gd => OptimizerKind::Gd,
            OptimizerArg::Adagrad => OptimizerKind::AdaGrad,
            OptimizerArg::AdagradVariant => OptimizerKind::AdaGradVariant,
            OptimizerArg::Rmsprop => OptimizerKind::RmsProp,
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::ConstantD => OptimizerKind::ConstantD,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Quant,
    Sign,
}

impl From<RuleArg> for DecisionRule {
    fn from(v: RuleArg) -> Self {
        match v {
            RuleArg::Quant => DecisionRule::Quant,
            RuleArg::Sign => DecisionRule::Sign,
        }
    }
}

#[derive(Args)]
struct GeneratorFlags {
    /// Dataset family.
    #[arg(long, value_enum)]
    version: Option<VersionArg>,
    /// Training rows.
    #[arg(long)]
    n: Option<usize>,
    /// Probability of the positive class.
    #[arg(long)]
    p: Option<f64>,
    /// Label magnitude ℓ.
    #[arg(long)]
    level: Option<f64>,
    /// Feature count override (defaults to the family layout).
    #[arg(long)]
    d: Option<usize>,
    /// Dataset seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GeneratorFlags {
    fn to_spec(&self) -> Result<GeneratorSpec> {
        let version = self
            .version
            .ok_or_else(|| anyhow!("--version is required"))?;
        let n = self.n.ok_or_else(|| anyhow!("--n is required"))?;
        let p = self.p.ok_or_else(|| anyhow!("--p is required"))?;
        let level = self.level.ok_or_else(|| anyhow!("--level is required"))?;
        let mut spec = GeneratorSpec::new(version.into(), n, p, level, self.seed);
        spec.d = self.d;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    generator: GeneratorFlags,
    /// Write the dataset JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset JSON produced by `generate` (alternative to generator flags).
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorFlags,
    /// Optimizer to train.
    #[arg(long, value_enum, default_value = "gd")]
    optimizer: OptimizerArg,
    /// Optimizer settings JSON; inline flags below override its fields.
    #[arg(long)]
    optimizer_config: Option<PathBuf>,
    /// Step size (defaults to the spectral rule).
    #[arg(long)]
    eta: Option<f64>,
    /// Iteration count K.
    #[arg(long)]
    iterations: Option<usize>,
    /// Window length J for the windowed accumulators.
    #[arg(long)]
    window: Option<usize>,
    /// Stabilizer ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Constant preconditioner diagonal, comma-separated.
    #[arg(long, value_delimiter = ',')]
    diagonal: Option<Vec<f64>>,
    /// Unit-normalize the returned model.
    #[arg(long)]
    normalize: bool,
    /// Ridge weight λ; positive values regularize the objective and add a
    /// distance to the ridge solution.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Write the per-iteration trajectory CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct TableArgs {
    /// Built-in grid: table1, table6a, table6b, or table6c.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Experiment JSON (same schema as the presets; see README).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override: trial count per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Override: master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override: fresh examples scored per trial.
    #[arg(long)]
    test_count: Option<usize>,
    /// Override: iteration count for every configured optimizer.
    #[arg(long)]
    iterations: Option<usize>,
    /// Override: window length for every configured optimizer.
    #[arg(long)]
    window: Option<usize>,
    /// Override: dataset family.
    #[arg(long, value_enum)]
    version: Option<VersionArg>,
    /// Override: training-set sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    /// Override: label magnitudes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    level_values: Option<Vec<f64>>,
    /// Override: positive-class probabilities, comma-separated.
    #[arg(long, value_delimiter = ',')]
    p_values: Option<Vec<f64>>,
    /// Override: optimizer roster, comma-separated kinds.
    #[arg(long, value_enum, value_delimiter = ',')]
    optimizers: Option<Vec<OptimizerArg>>,
    /// Override: decision rule for test accuracy.
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
    /// Override: record unit-normalized distances too.
    #[arg(long)]
    normalized_report: Option<bool>,
    /// Write the report CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors that should produce exit code 2 (bad flags or config) rather
/// than 1 (operational failure).
struct UsageError(anyhow::Error);

fn usage<T>(err: impl Into<anyhow::Error>) -> std::result::Result<T, UsageError> {
    Err(UsageError(err.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Table(args) => table(args),
    };
    match outcome {
        Ok(code) => code,
        Err(UsageError(e)) => {
            eprintln!("error: {e:#}");
            eprintln!("run `overparam <subcommand> --help` for usage");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("OVERPARAM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .with_context(|| format!("OVERPARAM_THREADS must be a positive integer, got {raw:?}"))?;
    if threads == 0 {
        bail!("OVERPARAM_THREADS must be a positive integer, got 0");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("failed to size the worker pool")?;
    Ok(())
}

fn fail(e: impl Into<anyhow::Error>) -> ExitCode {
    eprintln!("error: {:#}", e.into());
    ExitCode::from(1)
}

/// Writes to stdout; a consumer closing the pipe (`... | head`) ends the
/// process quietly instead of panicking.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let outcome = out.write_all(text.as_bytes()).and_then(|()| out.flush());
    match outcome {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => Ok(other.context("writing to stdout")?),
    }
}

fn generate(args: GenerateArgs) -> std::result::Result<ExitCode, UsageError> {
    let spec = match args.generator.to_spec() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let run = || -> Result<()> {
        let dataset = counterexamples::generate(&spec)?;
        let text = dataset.to_json()?;
        match &args.out {
            Some(path) => fs::write(path, text)
                .with_context(|| format!("writing {}", path.display()))?,
            None => emit(&format!("{text}\n"))?,
        }
        Ok(())
    };
    Ok(run().map_or_else(fail, |()| ExitCode::SUCCESS))
}

fn load_dataset(args: &RunArgs) -> std::result::Result<Dataset, UsageError> {
    if let Some(path) = &args.dataset {
        if args.generator.version.is_some() || args.generator.n.is_some() {
            return usage(anyhow!("--dataset conflicts with generator flags"));
        }
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return usage(anyhow!("reading {}: {e}", path.display())),
        };
        return Dataset::from_json(&text).map_or_else(usage, Ok);
    }
    let spec = args.generator.to_spec().map_err(UsageError)?;
    counterexamples::generate(&spec).map_err(|e| UsageError(e.into()))
}

fn build_optimizer_spec(args: &RunArgs) -> Result<OptimizerSpec> {
    let mut spec = match &args.optimizer_config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<OptimizerSpec>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => OptimizerSpec::new(args.optimizer.into(), 10_000),
    };
    if args.optimizer_config.is_none() {
        spec.kind = args.optimizer.into();
    }
    if let Some(v) = args.eta {
        spec.eta = Some(v);
    }
    if let Some(v) = args.iterations {
        spec.iterations = v;
    }
    if let Some(v) = args.window {
        spec.window = v;
    }
    if let Some(v) = args.epsilon {
        spec.epsilon = Some(v);
    }
    if let Some(v) = &args.diagonal {
        spec.diagonal = Some(v.clone());
    }
    if args.normalize {
        spec.normalize_output = true;
    }
    spec.validate()?;
    Ok(spec)
}

fn run(args: RunArgs) -> std::result::Result<ExitCode, UsageError> {
    let dataset = load_dataset(&args)?;
    let ospec = match build_optimizer_spec(&args) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    if !(args.lambda >= 0.0 && args.lambda.is_finite()) {
        return usage(anyhow!("--lambda must be nonnegative and finite"));
    }
    let body = || -> Result<()> {
        let x = dataset.x.clone();
        let y = dataset.y.clone();
        let obj = Objective::new(dataset, args.lambda)?;
        let traj = optimizers::run(&obj, &ospec)?;
        if let Some(path) = &args.out {
            let file = fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            traj.write_csv(std::io::BufWriter::new(file))?;
        }
        let w = optimizers::final_model(&traj, &ospec)?;
        use std::fmt::Write as _;
        let mut summary = String::new();
        let _ = writeln!(summary, "iterations: {}", traj.iterates.len() - 1);
        let _ = writeln!(
            summary,
            "final_loss: {:.16e}",
            traj.losses.last().copied().unwrap_or(f64::NAN)
        );
        let _ = writeln!(summary, "train_residual: {:.16e}", obj.residual_norm(&w)?);
        let _ = writeln!(summary, "model_norm: {:.16e}", w.norm());
        let dist = |target: &overparam_core::linalg::Vector| {
            let mut diff = w.clone();
            diff.axpy(-1.0, target);
            diff.norm()
        };
        match solutions::min_norm_solution(&x, &y) {
            Ok(sol) => {
                let _ = writeln!(summary, "dist_min_norm: {:.16e}", dist(&sol.w));
            }
            Err(_) => summary.push_str("dist_min_norm: n/a (row gram not invertible)\n"),
        }
        match solutions::least_squares_solution(&x, &y) {
            Ok(sol) => {
                let _ = writeln!(summary, "dist_least_squares: {:.16e}", dist(&sol.w));
            }
            Err(_) => summary.push_str("dist_least_squares: n/a (column gram not invertible)\n"),
        }
        if args.lambda > 0.0 {
            let sol = solutions::ridge_solution(&x, &y, args.lambda)?;
            let _ = writeln!(summary, "dist_ridge: {:.16e}", dist(&sol.w));
        }
        emit(&summary)
    };
    Ok(body().map_or_else(fail, |()| ExitCode::SUCCESS))
}

fn verify(args: VerifyArgs) -> std::result::Result<ExitCode, UsageError> {
    let report = experiments::verify_suite(args.seed);
    if let Err(e) = emit(&format!("{report}\n")) {
        return Ok(fail(e));
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn resolve_table_spec(args: &TableArgs) -> Result<ExperimentSpec> {
    let mut spec = match (&args.preset, &args.config) {
        (Some(name), None) => presets::by_name(name).ok_or_else(|| {
            anyhow!("unknown preset {name:?}; available: table1, table6a, table6b, table6c")
        })?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentSpec>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        _ => bail!("exactly one of --preset or --config is required"),
    };
    if let Some(v) = args.trials {
        spec.trials = v;
    }
    if let Some(v) = args.seed {
        spec.master_seed = v;
    }
    if let Some(v) = args.test_count {
        spec.test_count = v;
    }
    if let Some(v) = args.iterations {
        for o in &mut spec.optimizers {
            o.iterations = v;
        }
    }
    if let Some(v) = args.window {
        for o in &mut spec.optimizers {
            o.window = v;
        }
    }
    if let Some(v) = args.version {
        spec.version = v.into();
    }
    if let Some(v) = &args.n_values {
        spec.n_values = v.clone();
    }
    if let Some(v) = &args.level_values {
        spec.level_values = v.clone();
    }
    if let Some(v) = &args.p_values {
        spec.p_values = v.clone();
    }
    if let Some(kinds) = &args.optimizers {
        let k = args.iterations.unwrap_or(10_000);
        spec.optimizers = kinds
            .iter()
            .map(|&kind| {
                let mut o = OptimizerSpec::new(kind.into(), k);
                if let Some(w) = args.window {
                    o.window = w;
                }
                o
            })
            .collect();
    }
    if let Some(v) = args.rule {
        spec.rule = v.into();
    }
    if let Some(v) = args.normalized_report {
        spec.report_normalized = v;
    }
    spec.validate()?;
    Ok(spec)
}

fn table(args: TableArgs) -> std::result::Result<ExitCode, UsageError> {
    let spec = match resolve_table_spec(&args) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let body = || -> Result<()> {
        let report = experiments::run_experiment(&spec)?;
        let csv = report.to_csv_string();
        match &args.out {
            Some(path) => fs::write(path, csv)
                .with_context(|| format!("writing {}", path.display()))?,
            None => emit(&csv)?,
        }
        Ok(())
    };
    Ok(body().map_or_else(fail, |()| ExitCode::SUCCESS))
}
