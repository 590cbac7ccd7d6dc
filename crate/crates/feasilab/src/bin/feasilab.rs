use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use feasilab::campaign::{default_rule, ChainConfig};
use feasilab::{
    emit_tables, load_instance, resummarize, run_campaign, run_chain_campaign, save_instance,
    Algo, AlgorithmRun, CampaignConfig, HarnessError, Result,
};
use feasilab_core::{generate_instance, DiagonalVariant, InstanceConfig, MonitorKind, StopRule};

#[derive(Parser)]
#[command(name = "feasilab", version, about = "Feasibility solvers for 3D phase retrieval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Gen(GenArgs),
    /// Random-restart campaign over one or more algorithms.
    Run(RunArgs),
    /// Cyclic projections followed by warm-started product-space DR.
    Chain(ChainArgs),
    /// Re-cluster and re-summarize an existing output directory.
    Summarize(SummarizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
}

#[derive(Args)]
struct GenArgs {
    /// Generator settings as JSON.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Base path; writes `<out>.manifest.json` and `<out>.arrays.bin`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Cp,
    Cdrl,
    Drl,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Cp => Algo::Cp,
            AlgoArg::Cdrl => Algo::Cdrl,
            AlgoArg::Drl => Algo::Drl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MonitorArg {
    Shadow,
    Gap,
}

impl From<MonitorArg> for MonitorKind {
    fn from(m: MonitorArg) -> Self {
        match m {
            MonitorArg::Shadow => MonitorKind::ShadowDiff,
            MonitorArg::Gap => MonitorKind::GapDiff,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Instance base path or manifest.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    /// Restart k starts from seed `seed + k`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Project the random starts onto the symmetry set.
    #[arg(long)]
    symmetrize_start: bool,
    #[arg(long, default_value_t = 8)]
    clusters: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Compute gap and error every this many iterations.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Average the projected blocks in the product-space diagonal step.
    #[arg(long)]
    projected_average: bool,
    #[arg(long)]
    out: PathBuf,
}

impl Common {
    fn diagonal(&self) -> DiagonalVariant {
        if self.projected_average {
            DiagonalVariant::ProjectedAverage
        } else {
            DiagonalVariant::Average
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    algo: Vec<AlgoArg>,
    /// Relaxation parameters; each one gives a column for `cdrl` and `drl`.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Overrides the per-algorithm default tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, value_enum)]
    monitor: Option<MonitorArg>,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_cp: f64,
    #[arg(long, default_value_t = 2000)]
    nmax_cp: usize,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, value_enum)]
    monitor: Option<MonitorArg>,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long = "in")]
    dir: PathBuf,
    #[arg(long, default_value_t = 8)]
    clusters: usize,
}

fn rule(algo: Algo, lambda: Option<f64>, tol: Option<f64>, nmax: Option<usize>, monitor: Option<MonitorArg>) -> Result<StopRule> {
    let base = default_rule(algo, lambda);
    Ok(StopRule::new(
        tol.unwrap_or(base.tol),
        nmax.unwrap_or(base.n_max),
        monitor.map_or(base.monitor, Into::into),
    )?)
}

fn gen(args: GenArgs) -> Result<()> {
    let cfg = match (&args.config, args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str::<InstanceConfig>(&text)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?
        }
        (None, Some(Preset::Desk)) => InstanceConfig::desk(),
        (None, None) => return Err(HarnessError::Config("need --config or --preset".into())),
    };
    let inst = generate_instance(&cfg)?;
    save_instance(&args.out, &inst)?;
    eprintln!(
        "wrote {} ({} data, {:.1}% of the grid)",
        args.out.display(),
        inst.spheres.len(),
        100.0 * inst.data_fraction()
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let c = &args.common;
    let mut algorithms = Vec::new();
    for &a in &args.algo {
        let algo = Algo::from(a);
        if algo.uses_lambda() {
            if args.lambda.is_empty() {
                return Err(HarnessError::Config(format!("{} needs --lambda", algo.label())));
            }
            for &l in &args.lambda {
                algorithms.push(AlgorithmRun {
                    diagonal: c.diagonal(),
                    ..AlgorithmRun::new(algo, Some(l), rule(algo, Some(l), args.tol, args.nmax, args.monitor)?)
                });
            }
        } else {
            algorithms.push(AlgorithmRun::new(algo, None, rule(algo, None, args.tol, args.nmax, args.monitor)?));
        }
    }
    let cfg = CampaignConfig {
        symmetrize_start: c.symmetrize_start,
        clusters: c.clusters,
        jobs: c.jobs,
        metrics_stride: c.stride,
        ..CampaignConfig::new(algorithms, c.restarts, c.seed)
    };
    cfg.validate()?;
    let inst = load_instance(&c.instance)?;
    let sets = inst.constraint_sets()?;
    let outcome = run_campaign(&sets, inst.truth.as_ref(), &cfg)?;
    emit_tables(&outcome, &c.out)?;
    for a in &outcome.summary.algorithms {
        eprintln!(
            "{}{}: {}/{} converged, mean iterations {:.1}, best-cluster rate {:.2}",
            a.algo.label(),
            a.lambda.map(|l| format!(" lambda={l}")).unwrap_or_default(),
            a.tol_reached,
            a.runs,
            a.mean_iterations,
            a.best_cluster_rate
        );
    }
    Ok(())
}

fn chain(args: ChainArgs) -> Result<()> {
    let c = &args.common;
    let cfg = ChainConfig {
        diagonal: c.diagonal(),
        symmetrize_start: c.symmetrize_start,
        clusters: c.clusters,
        jobs: c.jobs,
        metrics_stride: c.stride,
        ..ChainConfig::new(
            StopRule::new(args.tol_cp, args.nmax_cp, MonitorKind::ShadowDiff)?,
            rule(Algo::Drl, Some(args.lambda), args.tol, args.nmax, args.monitor)?,
            args.lambda,
            c.restarts,
            c.seed,
        )
    };
    let inst = load_instance(&c.instance)?;
    let sets = inst.constraint_sets()?;
    let outcome = run_chain_campaign(&sets, inst.truth.as_ref(), &cfg)?;
    emit_tables(&outcome, &c.out)?;
    if let Some(ch) = &outcome.summary.chain {
        eprintln!("dr_gap <= cp_gap on {:.0}% of {} seeds", 100.0 * ch.dr_not_worse, ch.pairs);
    }
    Ok(())
}

fn summarize(args: SummarizeArgs) -> Result<()> {
    let s = resummarize(&args.dir, args.clusters)?;
    eprintln!("{} runs re-clustered into {} clusters", s.runs, s.clusters);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Chain(a) => chain(a),
        Command::Summarize(a) => summarize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
