//! Commands behind the `lcrsr` binary.
//!
//! Each command takes a plain options struct, writes its files and returns a
//! value describing what it did. Argument parsing and exit codes live in the
//! binary. Outputs are deterministic for a fixed seed; wall-clock timings are
//! kept out of the deterministic files and written to `timings.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bgsub::{self, FrameSequence, Preset};
use crate::clustering::{cluster_pipeline, ClusteringRun, KMeansConfig, RowEmbedding};
use crate::dataset::load_dataset;
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{self, MetricSummary, Scores};
use crate::solver::{write_trace_csv, MuPolicy, SolverConfig, SolverResult};
use crate::synthetic::{phase_experiment, PhaseConfig, RecoveryGrid};

/// λ used by `cluster` when none is given.
pub const DEFAULT_CLUSTER_LAMBDA: f64 = 1e-2;
/// Candidates tried by `cluster --lambda-sweep`.
pub const LAMBDA_SWEEP: [f64; 4] = [1e-6, 1e-5, 1e-4, 1e-3];

#[derive(Debug, Clone)]
pub struct ClusterOptions {
    pub manifest: PathBuf,
    pub rank: usize,
    pub lambda: f64,
    pub lambda_sweep: bool,
    pub k: Option<usize>,
    pub repeats: usize,
    pub embedding: RowEmbedding,
    pub normalize: bool,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub mu_policy: MuPolicy,
    pub trace: Option<PathBuf>,
    pub out: PathBuf,
}

impl ClusterOptions {
    pub fn new(manifest: impl Into<PathBuf>, rank: usize, out: impl Into<PathBuf>) -> Self {
        ClusterOptions {
            manifest: manifest.into(),
            rank,
            lambda: DEFAULT_CLUSTER_LAMBDA,
            lambda_sweep: false,
            k: None,
            repeats: KMeansConfig::DEFAULT_REPEATS,
            embedding: RowEmbedding::default(),
            normalize: false,
            seed: 0,
            tol: SolverConfig::DEFAULT_TOL,
            max_iter: SolverConfig::DEFAULT_MAX_ITER,
            mu_policy: MuPolicy::default(),
            trace: None,
            out: out.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub manifest: String,
    pub rank: usize,
    pub lambda: f64,
    pub lambda_sweep: bool,
    pub k: usize,
    pub repeats: usize,
    pub embedding: RowEmbedding,
    pub normalize: bool,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub epsilon: f64,
    pub mu_policy: MuPolicy,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub n_samples: usize,
    pub view_dims: Vec<usize>,
    pub has_labels: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
}

impl From<&SolverResult> for SolverStats {
    fn from(r: &SolverResult) -> Self {
        SolverStats {
            iterations: r.iterations,
            converged: r.converged,
            final_objective: r.final_objective(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub solver: SolverStats,
    pub best_inertia: f64,
    pub metrics: Vec<MetricSummary>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub load_s: f64,
    pub solve_and_cluster_s: f64,
    pub total_s: f64,
}

/// Summary of a `cluster` run, written as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub dataset: DatasetSummary,
    pub solver: SolverStats,
    pub best_inertia: f64,
    pub metrics: Vec<MetricSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepEntry>,
    #[serde(skip)]
    pub timings: StageTimings,
}

impl RunReport {
    pub fn metric(&self, m: metrics::Metric) -> Option<&MetricSummary> {
        self.metrics.iter().find(|s| s.metric == m)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Recovers `V̂`, clusters its rows and writes `report.json`,
/// `labels.csv` (lowest-inertia restart), `metrics.csv` (when ground truth
/// is available) and `timings.json` into `out`.
pub fn cmd_cluster(opts: &ClusterOptions) -> Result<RunReport> {
    let total = Instant::now();
    let data = load_dataset(&opts.manifest)?;
    let data = if opts.normalize { data.normalize_columns() } else { data };
    let load_s = total.elapsed().as_secs_f64();

    let k = opts
        .k
        .or(data.k())
        .ok_or_else(|| Error::param("number of clusters unknown: pass --k or set k in the manifest"))?;
    let kmeans_cfg = KMeansConfig::new(k, opts.seed)
        .with_repeats(opts.repeats)
        .with_embedding(opts.embedding);
    kmeans_cfg.validate(data.n_samples())?;
    if opts.lambda_sweep && data.labels().is_none() {
        return Err(Error::param("--lambda-sweep selects λ by NMI and needs ground-truth labels"));
    }
    let lambdas: Vec<f64> = if opts.lambda_sweep { LAMBDA_SWEEP.to_vec() } else { vec![opts.lambda] };

    let solver_cfg = |lambda| {
        SolverConfig::new(opts.rank, lambda)
            .with_tol(opts.tol)
            .with_max_iter(opts.max_iter)
            .with_mu_policy(opts.mu_policy)
    };
    solver_cfg(lambdas[0]).validate(data.n_samples())?;

    let started = Instant::now();
    let mut runs: Vec<(f64, ClusteringRun, SolverResult, Vec<MetricSummary>)> = Vec::new();
    for &lambda in &lambdas {
        let (run, result) = cluster_pipeline(&data, &solver_cfg(lambda), &kmeans_cfg)?;
        let summary = match data.labels() {
            Some(truth) => metrics::summarize_run(&run, truth)?,
            None => Vec::new(),
        };
        runs.push((lambda, run, result, summary));
    }
    let solve_and_cluster_s = started.elapsed().as_secs_f64();

    let chosen = if runs.len() == 1 {
        0
    } else {
        let nmi_mean = |s: &[MetricSummary]| {
            s.iter().find(|m| m.metric == metrics::Metric::Nmi).map_or(f64::NEG_INFINITY, |m| m.mean)
        };
        (0..runs.len()).fold(0, |best, i| if nmi_mean(&runs[i].3) > nmi_mean(&runs[best].3) { i } else { best })
    };

    let sweep = if opts.lambda_sweep {
        runs.iter()
            .map(|(lambda, run, result, summary)| SweepEntry {
                lambda: *lambda,
                solver: result.into(),
                best_inertia: run.best_inertia(),
                metrics: summary.clone(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let (lambda, run, result, summary) = runs.swap_remove(chosen);

    fs::create_dir_all(&opts.out).map_err(|e| Error::io(&opts.out, e))?;
    io::write_labels(&opts.out.join("labels.csv"), run.best_labels())?;
    if !summary.is_empty() {
        metrics::write_metrics_csv(&opts.out.join("metrics.csv"), &summary)?;
    }
    if let Some(trace) = &opts.trace {
        write_trace_csv(trace, &result.history)?;
    }

    let report = RunReport {
        config: ConfigEcho {
            manifest: opts.manifest.display().to_string(),
            rank: opts.rank,
            lambda,
            lambda_sweep: opts.lambda_sweep,
            k,
            repeats: opts.repeats,
            embedding: opts.embedding,
            normalize: opts.normalize,
            seed: opts.seed,
            tol: opts.tol,
            max_iter: opts.max_iter,
            epsilon: SolverConfig::DEFAULT_EPSILON,
            mu_policy: opts.mu_policy,
        },
        dataset: DatasetSummary {
            n_samples: data.n_samples(),
            view_dims: data.views().iter().map(|x| x.nrows()).collect(),
            has_labels: data.labels().is_some(),
        },
        solver: (&result).into(),
        best_inertia: run.best_inertia(),
        metrics: summary,
        sweep,
        timings: StageTimings {
            load_s,
            solve_and_cluster_s,
            total_s: total.elapsed().as_secs_f64(),
        },
    };
    write_json(&opts.out.join("report.json"), &report)?;
    write_json(&opts.out.join("timings.json"), &report.timings)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct PhaseOptions {
    pub config: PhaseConfig,
    pub out: PathBuf,
}

/// Runs the recovery phase experiment and writes its grid CSV to `out`.
pub fn cmd_phase(opts: &PhaseOptions) -> Result<RecoveryGrid> {
    if let Some(&r) = opts.config.r_values.iter().find(|&&r| 2 * r > opts.config.latent_dim || r == 0) {
        return Err(Error::param(format!(
            "per-subspace rank {r} is invalid for latent dimension {}",
            opts.config.latent_dim
        )));
    }
    if let Some(rho) = opts.config.rho_values.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::param(format!("rho_s {rho} is outside [0, 1]")));
    }
    let grid = phase_experiment(&opts.config)?;
    if let Some(parent) = opts.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    grid.write_csv(&opts.out)?;
    Ok(grid)
}

#[derive(Debug, Clone)]
pub struct BgsubOptions {
    pub views: Vec<PathBuf>,
    pub rank: Option<usize>,
    pub lambda: Option<f64>,
    pub preset: Option<Preset>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct BgsubSummary {
    pub rank: usize,
    pub lambda: f64,
    pub frames: usize,
    pub solver: SolverStats,
    /// Nonzero entries of `Ŝ` per view.
    pub foreground_nonzeros: Vec<usize>,
    pub written: Vec<PathBuf>,
}

/// Splits each camera's frames into background and foreground and writes
/// `view_<v>/bg_<frame>.pgm` and `view_<v>/fg_<frame>.pgm` under `out`.
pub fn cmd_bgsub(opts: &BgsubOptions) -> Result<BgsubSummary> {
    if opts.views.is_empty() {
        return Err(Error::param("at least one camera directory is required"));
    }
    let rank = opts
        .rank
        .or(opts.preset.map(Preset::rank))
        .ok_or_else(|| Error::param("pass --r or --preset"))?;
    let lambda = opts.lambda.or(opts.preset.map(Preset::lambda)).unwrap_or(10.0);
    let seqs = opts
        .views
        .iter()
        .map(|dir| bgsub::read_pgm_sequence(dir))
        .collect::<Result<Vec<FrameSequence>>>()?;
    let config = SolverConfig::new(rank, lambda);
    config.validate(seqs[0].len())?;
    let (parts, result) = bgsub::decompose(&seqs, &config)?;

    let mut written = Vec::new();
    for (v, part) in parts.iter().enumerate() {
        let dir = opts.out.join(format!("view_{}", v + 1));
        written.extend(bgsub::write_pgm_sequence(&part.background, &dir, "bg_")?);
        written.extend(bgsub::write_pgm_sequence(&part.foreground, &dir, "fg_")?);
    }
    Ok(BgsubSummary {
        rank,
        lambda,
        frames: seqs[0].len(),
        solver: (&result).into(),
        foreground_nonzeros: parts.iter().map(|p| p.sparse.iter().filter(|&&x| x != 0.0).count()).collect(),
        written,
    })
}

/// Scores a predicted labeling against ground truth.
pub fn cmd_eval(pred: &Path, truth: &Path) -> Result<Scores> {
    let p = io::read_labels(pred)?;
    let t = io::read_labels(truth)?;
    Scores::compute(&p, &t)
}

pub fn format_scores(s: &Scores) -> String {
    format!(
        "metric,value\nnmi,{}\nacc,{}\nf_score,{}\nari,{}\n",
        s.nmi, s.acc, s.f_score, s.ari
    )
}
