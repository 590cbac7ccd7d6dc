//! Random-restart campaigns and warm-start chains.
//!
//! Every algorithm of a campaign starts from the same list of fields: restart
//! `k` uses `random_start(dims, base_seed + k, symmetrize)`. Cells are
//! independent and run on a pool of `jobs` threads; results come back in
//! cell order, so output does not depend on the pool size.

use std::time::Duration;

use feasilab_core::driver::chain_from;
use feasilab_core::{
    random_start, run_with, ComplexField3D, DiagonalVariant, FeasibilityProblem, IdentityMap,
    MonitorKind, RunOptions, RunTrace, SplittingOperator, StopReason, StopRule, TraceRow,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::cluster_gaps;
use crate::error::{HarnessError, Result};
use crate::stats::{self, spearman};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Cp,
    Cdrl,
    Drl,
    /// `T = Id`, for smoke tests.
    Identity,
}

impl Algo {
    pub fn label(self) -> &'static str {
        match self {
            Algo::Cp => "cp",
            Algo::Cdrl => "cdrl",
            Algo::Drl => "drl",
            Algo::Identity => "identity",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "cp" => Some(Algo::Cp),
            "cdrl" => Some(Algo::Cdrl),
            "drl" => Some(Algo::Drl),
            "identity" => Some(Algo::Identity),
            _ => None,
        }
    }

    pub fn uses_lambda(self) -> bool {
        matches!(self, Algo::Cdrl | Algo::Drl)
    }
}

/// Default stopping rule: tolerance 1e-8 and 2000 iterations for the cyclic
/// methods; for product-space DR, 5e-18 and 35000 on the shadow monitor up
/// to `lambda = 1/2`, and 1e-13 and 10000 on the gap monitor above.
pub fn default_rule(algo: Algo, lambda: Option<f64>) -> StopRule {
    let (tol, n_max, monitor) = match algo {
        Algo::Drl if lambda.is_some_and(|l| l > 0.5) => (1e-13, 10_000, MonitorKind::GapDiff),
        Algo::Drl => (5e-18, 35_000, MonitorKind::ShadowDiff),
        _ => (1e-8, 2000, MonitorKind::ShadowDiff),
    };
    StopRule { tol, n_max, monitor }
}

/// One algorithm column of a campaign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgorithmRun {
    pub algo: Algo,
    /// Required for `cdrl` and `drl`, ignored otherwise.
    pub lambda: Option<f64>,
    pub rule: StopRule,
    pub diagonal: DiagonalVariant,
}

impl AlgorithmRun {
    pub fn new(algo: Algo, lambda: Option<f64>, rule: StopRule) -> Self {
        Self {
            algo,
            lambda: if algo.uses_lambda() { lambda } else { None },
            rule,
            diagonal: DiagonalVariant::Average,
        }
    }

    fn operator(&self) -> Result<Option<SplittingOperator>> {
        let lambda = || {
            self.lambda.ok_or_else(|| {
                HarnessError::Config(format!("{} needs a relaxation parameter", self.algo.label()))
            })
        };
        Ok(match self.algo {
            Algo::Cp => Some(SplittingOperator::cyclic_projections()),
            Algo::Cdrl => Some(SplittingOperator::cyclic_dr(lambda()?)?),
            Algo::Drl => Some(SplittingOperator::product_dr(lambda()?)?.with_diagonal(self.diagonal)),
            Algo::Identity => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub algorithms: Vec<AlgorithmRun>,
    pub n_restarts: usize,
    pub base_seed: u64,
    /// Project the random starts onto SYM.
    pub symmetrize_start: bool,
    pub clusters: usize,
    /// Worker threads; 1 runs serially on the calling thread.
    pub jobs: usize,
    pub metrics_stride: usize,
    /// Keep each run's final shadow in [`CampaignOutcome::final_shadows`].
    pub keep_shadows: bool,
}

impl CampaignConfig {
    pub fn new(algorithms: Vec<AlgorithmRun>, n_restarts: usize, base_seed: u64) -> Self {
        Self {
            algorithms,
            n_restarts,
            base_seed,
            symmetrize_start: false,
            clusters: 8,
            jobs: 1,
            metrics_stride: 1,
            keep_shadows: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_restarts == 0 {
            return Err(HarnessError::Config("need at least one restart".into()));
        }
        if self.clusters == 0 {
            return Err(HarnessError::Config("need at least one cluster".into()));
        }
        if self.jobs == 0 {
            return Err(HarnessError::Config("need at least one worker".into()));
        }
        for a in &self.algorithms {
            a.rule.validate()?;
            a.operator()?;
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_restarts as u64).map(|k| self.base_seed.wrapping_add(k)).collect()
    }
}

/// Final result of one (algorithm, seed) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub algo: Algo,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    /// SHA-256 of the starting field (little-endian `re, im` pairs).
    pub u0_sha256: Option<String>,
    pub final_gap: f64,
    pub final_error: Option<f64>,
    pub iters: usize,
    pub stop_reason: StopReason,
    pub cluster: usize,
    /// Not part of any emitted table, which keeps outputs reproducible.
    pub wall_time: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRow {
    pub seed: u64,
    pub cp_gap: f64,
    pub dr_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algo: Algo,
    pub lambda: Option<f64>,
    pub runs: usize,
    pub tol_reached: usize,
    pub n_max: usize,
    pub diverged: usize,
    pub mean_iterations: f64,
    pub gap: Option<stats::Summary>,
    /// Runs per gap cluster, best cluster first.
    pub histogram: Vec<usize>,
    /// Fraction of runs landing in the best (smallest-gap) cluster.
    pub best_cluster_rate: f64,
    pub spearman_gap_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub pairs: usize,
    /// Fraction of seeds with `dr_gap <= cp_gap`.
    pub dr_not_worse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub seed: u64,
    pub u0_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub runs: usize,
    pub clusters: usize,
    /// Cluster centers over the pooled final gaps of all runs.
    pub cluster_centers: Vec<f64>,
    pub algorithms: Vec<AlgorithmSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<StartRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSummary>,
}

#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    /// Sorted by `run_id`.
    pub records: Vec<RunRecord>,
    /// `traces[k]` belongs to `records[k]`.
    pub traces: Vec<Vec<TraceRow>>,
    /// Final shadows in record order; empty unless requested.
    pub final_shadows: Vec<ComplexField3D>,
    pub chain: Option<Vec<ChainRow>>,
    pub summary: CampaignSummary,
}

pub fn field_hash(u: &ComplexField3D) -> String {
    let mut h = Sha256::new();
    for z in u.data() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn record(run_id: usize, spec: &AlgorithmRun, seed: u64, hash: &str, trace: &RunTrace) -> RunRecord {
    RunRecord {
        run_id,
        algo: spec.algo,
        lambda: spec.lambda,
        seed: Some(seed),
        u0_sha256: Some(hash.to_owned()),
        final_gap: trace.final_gap(),
        final_error: trace.final_error(),
        iters: trace.iterations,
        stop_reason: trace.stop_reason,
        cluster: 0,
        wall_time: trace.wall_time,
    }
}

fn in_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 1 {
        return Ok(work());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(work))
}

fn map_cells<T: Send, R: Send>(
    jobs: usize,
    cells: Vec<T>,
    f: impl Fn(T) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    if jobs == 1 {
        return cells.into_iter().map(f).collect();
    }
    in_pool(jobs, || cells.into_par_iter().map(f).collect())?
}

/// Runs every (algorithm, restart) cell. A run that stops with
/// [`StopReason::NumericalDivergence`] is recorded like any other; only
/// configuration errors abort the campaign.
pub fn run_campaign<P>(
    problem: &P,
    truth: Option<&ComplexField3D>,
    cfg: &CampaignConfig,
) -> Result<CampaignOutcome>
where
    P: FeasibilityProblem + Sync + ?Sized,
{
    cfg.validate()?;
    let dims = problem.dims();
    let seeds = cfg.seeds();
    let starts: Vec<(ComplexField3D, String)> = seeds
        .iter()
        .map(|&s| {
            let u0 = random_start(dims, s, cfg.symmetrize_start);
            let h = field_hash(&u0);
            (u0, h)
        })
        .collect();
    let opts = RunOptions {
        truth,
        metrics_stride: cfg.metrics_stride,
        record_shadows: false,
    };

    let n = cfg.n_restarts;
    let cells: Vec<(usize, usize)> = (0..cfg.algorithms.len())
        .flat_map(|a| (0..n).map(move |k| (a, k)))
        .collect();
    let results = map_cells(cfg.jobs, cells, |(a, k)| {
        let spec = &cfg.algorithms[a];
        let (u0, hash) = &starts[k];
        let trace = match spec.operator()? {
            Some(op) => run_with(&op, problem, u0, &spec.rule, &opts)?,
            None => run_with(&IdentityMap, problem, u0, &spec.rule, &opts)?,
        };
        let rec = record(a * n + k, spec, seeds[k], hash, &trace);
        let shadow = cfg.keep_shadows.then_some(trace.final_shadow);
        Ok((rec, trace.rows, shadow))
    })?;

    let mut records = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    let mut final_shadows = Vec::new();
    for (rec, rows, shadow) in results {
        records.push(rec);
        traces.push(rows);
        final_shadows.extend(shadow);
    }
    let mut summary = summarize_runs(&mut records, cfg.clusters, None)?;
    summary.starts = seeds
        .iter()
        .zip(&starts)
        .map(|(&seed, (_, h))| StartRecord {
            seed,
            u0_sha256: h.clone(),
        })
        .collect();
    Ok(CampaignOutcome {
        records,
        traces,
        final_shadows,
        chain: None,
        summary,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub rule_cp: StopRule,
    pub rule_dr: StopRule,
    pub lambda: f64,
    pub diagonal: DiagonalVariant,
    pub n_restarts: usize,
    pub base_seed: u64,
    pub symmetrize_start: bool,
    pub clusters: usize,
    pub jobs: usize,
    pub metrics_stride: usize,
}

impl ChainConfig {
    pub fn new(rule_cp: StopRule, rule_dr: StopRule, lambda: f64, n_restarts: usize, base_seed: u64) -> Self {
        Self {
            rule_cp,
            rule_dr,
            lambda,
            diagonal: DiagonalVariant::Average,
            n_restarts,
            base_seed,
            symmetrize_start: false,
            clusters: 8,
            jobs: 1,
            metrics_stride: 1,
        }
    }
}

/// Cyclic projections from each start, then product-space DR from the
/// cyclic-projection result. Records `0..n` are the CP runs, `n..2n` the DR
/// runs of the same seeds.
pub fn run_chain_campaign<P>(
    problem: &P,
    truth: Option<&ComplexField3D>,
    cfg: &ChainConfig,
) -> Result<CampaignOutcome>
where
    P: FeasibilityProblem + Sync + ?Sized,
{
    let base = CampaignConfig {
        algorithms: vec![
            AlgorithmRun::new(Algo::Cp, None, cfg.rule_cp),
            AlgorithmRun {
                diagonal: cfg.diagonal,
                ..AlgorithmRun::new(Algo::Drl, Some(cfg.lambda), cfg.rule_dr)
            },
        ],
        n_restarts: cfg.n_restarts,
        base_seed: cfg.base_seed,
        symmetrize_start: cfg.symmetrize_start,
        clusters: cfg.clusters,
        jobs: cfg.jobs,
        metrics_stride: cfg.metrics_stride,
        keep_shadows: false,
    };
    base.validate()?;
    let dr_op = base.algorithms[1].operator()?.expect("drl operator");
    let dims = problem.dims();
    let seeds = base.seeds();
    let opts = RunOptions {
        truth,
        metrics_stride: cfg.metrics_stride,
        record_shadows: false,
    };

    let n = cfg.n_restarts;
    let pairs = map_cells(cfg.jobs, (0..n).collect(), |k| {
        let u0 = random_start(dims, seeds[k], cfg.symmetrize_start);
        let hash = field_hash(&u0);
        let (cp, dr) = chain_from(problem, &u0, &cfg.rule_cp, &dr_op, &cfg.rule_dr, &opts)?;
        let cp_rec = record(k, &base.algorithms[0], seeds[k], &hash, &cp);
        let dr_rec = record(n + k, &base.algorithms[1], seeds[k], &hash, &dr);
        Ok(((cp_rec, cp.rows), (dr_rec, dr.rows), hash))
    })?;

    let mut records = Vec::with_capacity(2 * n);
    let mut traces = Vec::with_capacity(2 * n);
    let mut chain = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(n);
    let mut dr_part = Vec::with_capacity(n);
    for ((cp_rec, cp_rows), dr, hash) in pairs {
        chain.push(ChainRow {
            seed: cp_rec.seed.expect("seeded"),
            cp_gap: cp_rec.final_gap,
            dr_gap: dr.0.final_gap,
        });
        starts.push(StartRecord {
            seed: cp_rec.seed.expect("seeded"),
            u0_sha256: hash,
        });
        records.push(cp_rec);
        traces.push(cp_rows);
        dr_part.push(dr);
    }
    for (rec, rows) in dr_part {
        records.push(rec);
        traces.push(rows);
    }
    let mut summary = summarize_runs(&mut records, cfg.clusters, Some(&chain))?;
    summary.starts = starts;
    Ok(CampaignOutcome {
        records,
        traces,
        final_shadows: Vec::new(),
        chain: Some(chain),
        summary,
    })
}

/// Clusters the pooled final gaps (writing each record's `cluster`) and
/// aggregates per algorithm column, in order of first appearance.
pub fn summarize_runs(
    records: &mut [RunRecord],
    clusters: usize,
    chain: Option<&[ChainRow]>,
) -> Result<CampaignSummary> {
    records.sort_by_key(|r| r.run_id);
    if clusters == 0 {
        return Err(HarnessError::Config("need at least one cluster".into()));
    }
    // non-finite gaps (possible after a divergence) join the worst cluster
    let gaps: Vec<f64> = records.iter().map(|r| r.final_gap).filter(|g| g.is_finite()).collect();
    let clustering = cluster_gaps(&gaps, clusters)?;
    let mut labels = clustering.labels.iter();
    for r in records.iter_mut() {
        r.cluster = if r.final_gap.is_finite() {
            *labels.next().expect("one label per finite gap")
        } else {
            clusters - 1
        };
    }

    let mut columns: Vec<(Algo, Option<f64>)> = Vec::new();
    for r in records.iter() {
        let key = (r.algo, r.lambda);
        if !columns.iter().any(|c| c.0 == key.0 && c.1.map(f64::to_bits) == key.1.map(f64::to_bits)) {
            columns.push(key);
        }
    }
    let algorithms = columns
        .into_iter()
        .map(|(algo, lambda)| {
            let rows: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.algo == algo && r.lambda.map(f64::to_bits) == lambda.map(f64::to_bits))
                .collect();
            let count = |reason| rows.iter().filter(|r| r.stop_reason == reason).count();
            let gaps: Vec<f64> = rows.iter().map(|r| r.final_gap).filter(|g| g.is_finite()).collect();
            let mut histogram = vec![0; clusters];
            for r in &rows {
                histogram[r.cluster] += 1;
            }
            let (g, e): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| r.final_error.map(|e| (r.final_gap, e)))
                .filter(|(g, e)| g.is_finite() && e.is_finite())
                .unzip();
            AlgorithmSummary {
                algo,
                lambda,
                runs: rows.len(),
                tol_reached: count(StopReason::TolReached),
                n_max: count(StopReason::NMax),
                diverged: count(StopReason::NumericalDivergence),
                mean_iterations: rows.iter().map(|r| r.iters as f64).sum::<f64>() / rows.len() as f64,
                gap: stats::summarize(&gaps),
                best_cluster_rate: histogram[0] as f64 / rows.len() as f64,
                histogram,
                spearman_gap_error: spearman(&g, &e),
            }
        })
        .collect();

    Ok(CampaignSummary {
        runs: records.len(),
        clusters,
        cluster_centers: clustering.centers,
        algorithms,
        starts: Vec::new(),
        chain: chain.map(|c| ChainSummary {
            pairs: c.len(),
            dr_not_worse: if c.is_empty() {
                0.0
            } else {
                c.iter().filter(|r| r.dr_gap <= r.cp_gap).count() as f64 / c.len() as f64
            },
        }),
    })
}
