//! Command-line front end: cluster a CSV, run an experiment spec, or print
//! approximation-bound values.
//!
//! Exit codes: 0 success, 1 IO/parse failures at run time, 2 bad flags or
//! invalid experiment specs. Diagnostics go to stderr; with no --out, data
//! goes to stdout as a single JSON document.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mskmeans::bench::{
    export_results, run_deadline_experiment, run_lloyd_experiment, run_trajectory_experiment,
    ExperimentSpec, ExportFormat,
};
use mskmeans::local_search::{BoundVariant, LsConfig, LsVariant, SwapBudget};
use mskmeans::nine_eps::{nine_eps_run_steps, NineEpsConfig};
use mskmeans::{cost, eta_bound, kmeanspp_seed, rng_from_seed, run_steps, CentersState, Trajectory};

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("must be a positive integer, got {s:?}")),
    }
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("must be in the open interval (0, 1), got {s:?}")),
    }
}

#[derive(Parser)]
#[command(name = "mskmeans", version, about = "k-means local search with multi-swaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a CSV dataset and write the final centers.
    Cluster(ClusterArgs),
    /// Run an experiment spec (JSON) and write a results table.
    Experiment(ExperimentArgs),
    /// Print the squared approximation bound for a swap size.
    Bound(BoundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Kmpp,
    Ssls,
    Msls,
    MslsG,
    NineEps,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Kmpp => "kmpp",
            Algo::Ssls => "ssls",
            Algo::Msls => "msls",
            Algo::MslsG => "msls-g",
            Algo::NineEps => "nine-eps",
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    /// Input CSV of numeric rows.
    #[arg(long)]
    input: PathBuf,
    /// Number of centers.
    #[arg(long, value_parser = parse_positive)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Algo::MslsG)]
    algo: Algo,
    /// Swap size (ignored by kmpp and nine-eps; ssls forces 1).
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    p: usize,
    /// Local-search steps after seeding.
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Min-max scale features before clustering.
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false,
          default_missing_value = "true")]
    scale: bool,
    /// Accuracy parameter for nine-eps.
    #[arg(long, default_value_t = 0.5, value_parser = parse_epsilon)]
    epsilon: f64,
    /// Candidate cap per nine-eps step.
    #[arg(long, value_parser = parse_positive)]
    candidate_budget: Option<usize>,
    /// CSV delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Skip a header row in the input.
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false,
          default_missing_value = "true")]
    header: bool,
    /// Centers CSV path; the run summary lands next to it as
    /// <stem>.summary.json. Without this, everything prints to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Results path; format from --format. Without this, JSON to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Trajectory,
    Lloyd,
    Deadline,
}

#[derive(Args)]
struct BoundArgs {
    /// Swap size: a positive integer or 'inf'.
    #[arg(long)]
    p: SwapBudget,
    #[arg(long, value_enum, default_value_t = Variant::Msls)]
    variant: Variant,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    Msls,
    Kanungo,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("MSKMEANS_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("mskmeans: ignoring MSKMEANS_THREADS={threads:?} (want a positive integer)");
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cluster(args) => cmd_cluster(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Bound(args) => cmd_bound(&args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("mskmeans: {err}");
            ExitCode::from(1)
        }
    }
}

#[derive(Serialize)]
struct ClusterSummary {
    algorithm: &'static str,
    p: Option<usize>,
    k: usize,
    n: usize,
    dim: usize,
    seed: u64,
    scaled: bool,
    seeding_cost: f64,
    final_cost: f64,
    steps_total: usize,
    steps_accepted: usize,
    /// Timings only; everything outside meta is reproducible byte for byte.
    meta: RunMeta,
}

#[derive(Serialize)]
struct RunMeta {
    seconds: f64,
    version: &'static str,
}

fn cmd_cluster(args: &ClusterArgs) -> mskmeans::Result<ExitCode> {
    let raw = mskmeans::bench::load_csv(&args.input, args.delimiter as u8, args.header)?;
    let data = if args.scale { mskmeans::bench::minmax_scale(&raw) } else { raw };

    let t0 = std::time::Instant::now();
    let mut rng = rng_from_seed(args.seed);
    let init = kmeanspp_seed(&data, args.k, &mut rng)?;
    let seeding_cost = cost(&data, &init);

    let mut state = CentersState::build(&data, init);
    let trajectory: Trajectory = match args.algo {
        Algo::Kmpp => Trajectory::default(),
        Algo::NineEps => {
            let mut cfg = NineEpsConfig::with_epsilon(args.epsilon);
            if let Some(b) = args.candidate_budget {
                cfg.candidate_budget = b;
            }
            let cfg = cfg.resolved(&data);
            nine_eps_run_steps(&data, &mut state, &mut rng, &cfg, args.steps)
        }
        Algo::Ssls | Algo::Msls | Algo::MslsG => {
            let (variant, p) = match args.algo {
                Algo::Ssls => (LsVariant::MslsG, 1),
                Algo::Msls => (LsVariant::Msls, args.p),
                _ => (LsVariant::MslsG, args.p),
            };
            let cfg = LsConfig { p, steps: args.steps, ..LsConfig::default() };
            run_steps(&data, &mut state, &mut rng, &cfg, variant)
        }
    };

    let summary = ClusterSummary {
        algorithm: args.algo.name(),
        p: match args.algo {
            Algo::Kmpp | Algo::NineEps => None,
            Algo::Ssls => Some(1),
            _ => Some(args.p),
        },
        k: args.k,
        n: data.len(),
        dim: data.dim(),
        seed: args.seed,
        scaled: args.scale,
        seeding_cost,
        final_cost: state.total_cost,
        steps_total: trajectory.records.len(),
        steps_accepted: trajectory.accepted_count(),
        meta: RunMeta { seconds: t0.elapsed().as_secs_f64(), version: env!("CARGO_PKG_VERSION") },
    };

    match &args.out {
        Some(path) => {
            write_centers_csv(path, &state.centers)?;
            let sidecar = summary_path(path);
            std::fs::write(&sidecar, serde_json::to_string_pretty(&summary)?)?;
        }
        None => {
            #[derive(Serialize)]
            struct Doc {
                summary: ClusterSummary,
                centers: Vec<Vec<f64>>,
            }
            let doc = Doc {
                summary,
                centers: state.centers.iter().map(|c| c.coords.clone()).collect(),
            };
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_centers_csv(path: &Path, centers: &[mskmeans::Point]) -> mskmeans::Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for center in centers {
        writer.serialize(&center.coords)?;
    }
    writer.flush()?;
    Ok(())
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.json"))
}

fn cmd_experiment(args: &ExperimentArgs) -> mskmeans::Result<ExitCode> {
    let format: ExportFormat = match args.format.parse() {
        Ok(f) => f,
        Err(err) => {
            eprintln!("mskmeans: {err}");
            return Ok(ExitCode::from(2));
        }
    };
    let spec = match ExperimentSpec::from_json_file(&args.spec) {
        Ok(spec) => spec,
        Err(err) => {
            // Bad specs are usage errors: say what field is wrong, exit 2.
            eprintln!("mskmeans: invalid experiment spec {}: {err}", args.spec.display());
            return Ok(ExitCode::from(2));
        }
    };
    let table = match args.mode {
        Mode::Trajectory => run_trajectory_experiment(&spec)?,
        Mode::Lloyd => run_lloyd_experiment(&spec)?,
        Mode::Deadline => run_deadline_experiment(&spec)?,
    };
    match &args.out {
        Some(path) => export_results(&table, path, format)?,
        None => {
            #[derive(Serialize)]
            struct Doc<'a> {
                meta: &'a mskmeans::bench::TableMeta,
                rows: &'a [mskmeans::bench::ResultRow],
                summary: Vec<mskmeans::bench::SummaryRow>,
            }
            let doc = Doc { meta: &table.meta, rows: &table.rows, summary: table.summarize() };
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bound(args: &BoundArgs) -> mskmeans::Result<ExitCode> {
    let variant = match args.variant {
        Variant::Msls => BoundVariant::Msls,
        Variant::Kanungo => BoundVariant::Kanungo,
    };
    println!("{:.6}", eta_bound(args.p, variant));
    Ok(ExitCode::SUCCESS)
}
