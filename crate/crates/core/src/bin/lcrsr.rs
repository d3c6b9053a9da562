use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lcrsr::bgsub::Preset;
use lcrsr::cli::{self, BgsubOptions, ClusterOptions, PhaseOptions};
use lcrsr::clustering::{KMeansConfig, RowEmbedding};
use lcrsr::synthetic::PhaseConfig;
use lcrsr::{Error, MuPolicy, SolverConfig};

#[derive(Parser)]
#[command(name = "lcrsr", version, about = "Latent complete row space recovery for multi-view data")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MuArg {
    Fixed,
    Backtracking,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbeddingArg {
    Basis,
    ShapeInteraction,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Lab,
    Dthc,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the latent row space and cluster the samples.
    Cluster {
        manifest: PathBuf,
        #[arg(long = "r")]
        rank: usize,
        #[arg(long, default_value_t = cli::DEFAULT_CLUSTER_LAMBDA)]
        lambda: f64,
        /// Try λ in {1e-6, 1e-5, 1e-4, 1e-3} and keep the best mean NMI.
        #[arg(long)]
        lambda_sweep: bool,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = KMeansConfig::DEFAULT_REPEATS)]
        repeats: usize,
        /// Cluster rows of V̂ (basis) or of |V̂V̂ᵀ| (shape-interaction).
        #[arg(long, value_enum, default_value = "basis")]
        embedding: EmbeddingArg,
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SolverConfig::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = SolverConfig::DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, value_enum, default_value = "fixed")]
        mu: MuArg,
        /// Per-iteration objective trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the synthetic recovery phase experiment.
    Phase {
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Per-subspace ranks (true rank is twice this).
        #[arg(long = "r", value_delimiter = ',')]
        r_values: Option<Vec<usize>>,
        #[arg(long = "rho", value_delimiter = ',')]
        rho_values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Split multi-camera frames into background and foreground.
    Bgsub {
        /// Directory of PGM frames for one camera; repeat per camera.
        #[arg(long = "view", required = true)]
        views: Vec<PathBuf>,
        #[arg(long = "r")]
        rank: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted labels against ground truth.
    Eval { pred: PathBuf, truth: PathBuf },
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("LCRSR_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Parameter(format!("LCRSR_THREADS must be a positive integer, got {value:?}")))?;
    // Only fails if a global pool already exists, which cannot happen here.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn run(args: Args) -> Result<(), Error> {
    configure_threads()?;
    match args.command {
        Command::Cluster {
            manifest,
            rank,
            lambda,
            lambda_sweep,
            k,
            repeats,
            embedding,
            normalize,
            seed,
            tol,
            max_iter,
            mu,
            trace,
            out,
        } => {
            let opts = ClusterOptions {
                lambda,
                lambda_sweep,
                k,
                repeats,
                embedding: match embedding {
                    EmbeddingArg::Basis => RowEmbedding::Basis,
                    EmbeddingArg::ShapeInteraction => RowEmbedding::ShapeInteraction,
                },
                normalize,
                seed,
                tol,
                max_iter,
                mu_policy: match mu {
                    MuArg::Fixed => MuPolicy::FixedFromWeight,
                    MuArg::Backtracking => MuPolicy::Backtracking,
                },
                trace,
                ..ClusterOptions::new(manifest, rank, out)
            };
            let report = cli::cmd_cluster(&opts)?;
            println!(
                "lambda={} iterations={} converged={} objective={:e}",
                report.config.lambda, report.solver.iterations, report.solver.converged, report.solver.final_objective
            );
            for m in &report.metrics {
                println!("{} mean={:.4} std={:.4} best={:.4}", m.metric.name(), m.mean, m.std, m.best);
            }
        }
        Command::Phase {
            trials,
            r_values,
            rho_values,
            lambdas,
            seed,
            out,
        } => {
            let defaults = PhaseConfig::default();
            let config = PhaseConfig {
                trials,
                r_values: r_values.unwrap_or(defaults.r_values.clone()),
                rho_values: rho_values.unwrap_or(defaults.rho_values.clone()),
                lambdas: lambdas.unwrap_or(defaults.lambdas.clone()),
                seed,
                ..defaults
            };
            let grid = cli::cmd_phase(&PhaseOptions { config, out: out.clone() })?;
            println!(
                "{} cells x {} trials written to {}",
                grid.r_values.len() * grid.rho_values.len(),
                grid.trials,
                out.display()
            );
        }
        Command::Bgsub {
            views,
            rank,
            lambda,
            preset,
            out,
        } => {
            let summary = cli::cmd_bgsub(&BgsubOptions {
                views,
                rank,
                lambda,
                preset: preset.map(|p| match p {
                    PresetArg::Lab => Preset::Lab,
                    PresetArg::Dthc => Preset::Dthc,
                }),
                out,
            })?;
            println!(
                "r={} lambda={} frames={} iterations={} files={}",
                summary.rank,
                summary.lambda,
                summary.frames,
                summary.solver.iterations,
                summary.written.len()
            );
        }
        Command::Eval { pred, truth } => {
            print!("{}", cli::format_scores(&cli::cmd_eval(&pred, &truth)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            // clap exits 2 on bad usage already; help and version exit 0.
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
