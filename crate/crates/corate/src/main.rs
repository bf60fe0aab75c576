//! Thin command-line front end. All numeric work happens in the library;
//! this binary only parses arguments, calls the matching `runner` function,
//! and maps errors to exit codes (2 for config/validation problems, 1 for
//! runtime failures).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use corate::{
    cmd_complete, cmd_run, cmd_similarity_dump, cmd_simulate, ClusterSpec, CompleteOptions,
    Error, EstimatorConfig, ExperimentConfig, Lambdas, Metric, NnmfSgdConfig,
};

#[derive(Parser)]
#[command(
    name = "corate",
    version,
    about = "Sparse rating-matrix completion and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a masking cross-validation sweep from a config file.
    Run(RunArgs),
    /// Fill the missing cells of a tidy CSV with one estimator's predictions.
    Complete(CompleteArgs),
    /// Generate cluster-structured synthetic ratings.
    Simulate(SimulateArgs),
    /// Dump the user-user similarity matrix of a tidy CSV.
    SimilarityDump(SimilarityDumpArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (.toml or .json).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count (0 = one per CPU).
    #[arg(long)]
    jobs: Option<usize>,
    /// Clamp predictions into the rating scale before scoring.
    #[arg(long)]
    clip: bool,
}

#[derive(Args)]
struct CompleteArgs {
    /// Tidy input CSV (user,item,rating); missing cells are absent rows.
    #[arg(long)]
    input: PathBuf,
    /// Output CSV of (user,item,prediction,clipped) rows.
    #[arg(long)]
    output: PathBuf,
    /// Estimator: mean, knn, nnmf_sgd, or nnmf_mult.
    #[arg(long, default_value = "nnmf_sgd")]
    estimator: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    min_overlap: Option<usize>,
    /// SGD learning rate.
    #[arg(long)]
    gamma: Option<f64>,
    /// Factor count (0 = min dimension).
    #[arg(long)]
    factors: Option<usize>,
    /// One L2 weight applied to all four parameter groups.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rating scale bounds; both or neither.
    #[arg(long)]
    scale_min: Option<f64>,
    #[arg(long)]
    scale_max: Option<f64>,
    /// Clamp predictions into the rating scale.
    #[arg(long)]
    clip: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 2)]
    groups: usize,
    #[arg(long, default_value_t = 20)]
    users_per_group: usize,
    #[arg(long, default_value_t = 100)]
    items: usize,
    /// Per-rating noise standard deviation.
    #[arg(long, default_value_t = 5.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    scale_min: f64,
    #[arg(long, default_value_t = 100.0)]
    scale_max: f64,
}

#[derive(Args)]
struct SimilarityDumpArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "pearson")]
    metric: String,
    #[arg(long, default_value_t = 2)]
    min_overlap: usize,
    #[arg(long)]
    scale_min: Option<f64>,
    #[arg(long)]
    scale_max: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: Cli) -> corate::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let mut config = ExperimentConfig::load(&args.config)?;
            if let Some(output) = args.output {
                config.output = output;
            }
            if let Some(seed) = args.seed {
                config.base_seed = seed;
            }
            if let Some(jobs) = args.jobs {
                config.jobs = jobs;
            }
            if args.clip {
                config.clip = true;
            }
            let artifacts = cmd_run(&config)?;
            eprintln!(
                "wrote {} ({} records), {}, {}",
                artifacts.report_path.display(),
                artifacts.report.records.len(),
                artifacts.summary_path.display(),
                artifacts.manifest_path.display()
            );
            if !artifacts.report.failures.is_empty() {
                eprintln!(
                    "warning: {} grid cell(s) failed; see manifest.json",
                    artifacts.report.failures.len()
                );
            }
            Ok(())
        }
        Command::Complete(args) => {
            let estimator = build_estimator(&args)?;
            let scale = scale_bounds(args.scale_min, args.scale_max)?;
            let stats = cmd_complete(&CompleteOptions {
                input: args.input,
                output: args.output.clone(),
                estimator,
                scale,
                clip: args.clip,
            })?;
            if stats.n_missing == 0 {
                eprintln!("warning: input is fully dense; wrote header only");
            } else {
                eprintln!(
                    "wrote {} prediction(s) to {}",
                    stats.n_written,
                    args.output.display()
                );
            }
            Ok(())
        }
        Command::Simulate(args) => {
            let spec = ClusterSpec {
                n_groups: args.groups,
                users_per_group: args.users_per_group,
                n_items: args.items,
                noise_sd: args.noise,
                seed: args.seed,
                scale_min: args.scale_min,
                scale_max: args.scale_max,
            };
            cmd_simulate(&spec, &args.output)?;
            eprintln!(
                "wrote {} users x {} items to {}",
                args.groups * args.users_per_group,
                args.items,
                args.output.display()
            );
            Ok(())
        }
        Command::SimilarityDump(args) => {
            let metric = Metric::from_str(&args.metric).map_err(Error::Config)?;
            let scale = scale_bounds(args.scale_min, args.scale_max)?;
            cmd_similarity_dump(&args.input, &args.output, metric, args.min_overlap, scale)
        }
    }
}

fn scale_bounds(min: Option<f64>, max: Option<f64>) -> corate::Result<Option<(f64, f64)>> {
    match (min, max) {
        (Some(lo), Some(hi)) => Ok(Some((lo, hi))),
        (None, None) => Ok(None),
        _ => Err(Error::Config(
            "scale-min and scale-max must be supplied together".into(),
        )),
    }
}

fn build_estimator(args: &CompleteArgs) -> corate::Result<EstimatorConfig> {
    match args.estimator.as_str() {
        "mean" => Ok(EstimatorConfig::Mean),
        "knn" => {
            let metric = match &args.metric {
                Some(m) => Metric::from_str(m).map_err(Error::Config)?,
                None => Metric::Pearson,
            };
            Ok(EstimatorConfig::Knn {
                k: args.k.unwrap_or(10),
                metric,
                min_overlap: args.min_overlap.unwrap_or(2),
            })
        }
        "nnmf_sgd" => {
            let defaults = NnmfSgdConfig::default();
            Ok(EstimatorConfig::NnmfSgd(NnmfSgdConfig {
                n_factors: args.factors.filter(|&f| f > 0),
                learning_rate: args.gamma.unwrap_or(defaults.learning_rate),
                lambdas: args.lambda.map(Lambdas::uniform).unwrap_or_default(),
                tol: args.tol.unwrap_or(defaults.tol),
                max_iters: args.max_iters.unwrap_or(defaults.max_iters),
                seed: args.seed.unwrap_or(0),
                ..defaults
            }))
        }
        "nnmf_mult" => Ok(EstimatorConfig::NnmfMult {
            n_factors: args.factors.filter(|&f| f > 0),
            tol: args.tol.unwrap_or(1e-6),
            max_iters: args.max_iters.unwrap_or(1000),
            seed: args.seed.unwrap_or(0),
        }),
        other => Err(Error::Config(format!(
            "estimator `{other}` is not one of mean, knn, nnmf_sgd, nnmf_mult"
        ))),
    }
}
