//! Monitored fixed-point iteration.
//!
//! Starting from `u0`, the driver iterates `u(n) = T u(n-1)` until the chosen
//! monitor drops to the tolerance or the iteration cap is hit:
//!
//! * [`MonitorKind::ShadowDiff`]: `| shadow(u(n)) - shadow(u(n-1)) |`;
//! * [`MonitorKind::GapDiff`]: `| gap(n) - gap(n-1) |`.
//!
//! Every iteration produces a [`TraceRow`].

use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField3D, Dims};
use crate::metrics::{self, truth_error};
use crate::operators::{FixedPointMap, IterateState, SplittingOperator};
use crate::problem::FeasibilityProblem;
use crate::sets::project_symmetric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonitorKind {
    ShadowDiff,
    GapDiff,
}

impl MonitorKind {
    pub fn label(self) -> &'static str {
        match self {
            MonitorKind::ShadowDiff => "shadow",
            MonitorKind::GapDiff => "gap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub tol: f64,
    pub n_max: usize,
    pub monitor: MonitorKind,
}

impl StopRule {
    pub fn new(tol: f64, n_max: usize, monitor: MonitorKind) -> Result<Self> {
        let rule = Self { tol, n_max, monitor };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    TolReached,
    NMax,
    /// An iterate contained NaN or infinite entries.
    NumericalDivergence,
}

impl StopReason {
    pub fn label(self) -> &'static str {
        match self {
            StopReason::TolReached => "TOL_REACHED",
            StopReason::NMax => "N_MAX",
            StopReason::NumericalDivergence => "NUMERICAL_DIVERGENCE",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "TOL_REACHED" => Some(StopReason::TolReached),
            "N_MAX" => Some(StopReason::NMax),
            "NUMERICAL_DIVERGENCE" => Some(StopReason::NumericalDivergence),
            _ => None,
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-iteration record. Gap-derived values are `None` on iterations skipped
/// by the metrics stride.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub monitor_shadow: f64,
    pub monitor_gap: Option<f64>,
    pub gap: Option<f64>,
    pub error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    /// Gap of the starting shadow.
    pub initial_gap: f64,
    pub final_state: IterateState,
    pub final_shadow: ComplexField3D,
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// Zero unless the crate is built with the `std` feature.
    pub wall_time: Duration,
    /// Shadows `shadow(u(0)), ..., shadow(u(n))`, when requested.
    pub shadows: Vec<ComplexField3D>,
}

impl RunTrace {
    /// Gap at the final iterate.
    pub fn final_gap(&self) -> f64 {
        self.rows
            .last()
            .and_then(|r| r.gap)
            .unwrap_or(self.initial_gap)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.error)
    }

    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::TolReached
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions<'a> {
    /// Ground truth for the error column.
    pub truth: Option<&'a ComplexField3D>,
    /// Gap and error are evaluated every `metrics_stride` iterations (and on
    /// the last one). Gap monitoring forces a stride of 1.
    pub metrics_stride: usize,
    pub record_shadows: bool,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        Self {
            truth: None,
            metrics_stride: 1,
            record_shadows: false,
        }
    }
}

impl<'a> RunOptions<'a> {
    pub fn with_truth(truth: &'a ComplexField3D) -> Self {
        Self {
            truth: Some(truth),
            ..Self::default()
        }
    }
}

pub fn run<P, M>(map: &M, problem: &P, u0: &ComplexField3D, rule: &StopRule) -> Result<RunTrace>
where
    P: FeasibilityProblem + ?Sized,
    M: FixedPointMap<P> + ?Sized,
{
    run_with(map, problem, u0, rule, &RunOptions::default())
}

pub fn run_with<P, M>(
    map: &M,
    problem: &P,
    u0: &ComplexField3D,
    rule: &StopRule,
    opts: &RunOptions<'_>,
) -> Result<RunTrace>
where
    P: FeasibilityProblem + ?Sized,
    M: FixedPointMap<P> + ?Sized,
{
    rule.validate()?;
    if u0.dims() != problem.dims() {
        return Err(Error::DimensionMismatch {
            expected: problem.dims(),
            found: u0.dims(),
        });
    }
    if let Some(t) = opts.truth {
        if t.dims() != problem.dims() {
            return Err(Error::DimensionMismatch {
                expected: problem.dims(),
                found: t.dims(),
            });
        }
    }
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    let stride = match rule.monitor {
        MonitorKind::GapDiff => 1,
        MonitorKind::ShadowDiff => opts.metrics_stride.max(1),
    };
    let error_of = |s: &ComplexField3D| -> Option<f64> {
        opts.truth.and_then(|t| truth_error(s, t).ok())
    };

    let mut state = map.lift(u0);
    let mut prev_shadow = map.shadow(problem, &state);
    let initial_gap = metrics::gap(problem, &prev_shadow)?.total;
    let mut prev_gap = Some(initial_gap);
    let mut shadows = Vec::new();
    if opts.record_shadows {
        shadows.push(prev_shadow.clone());
    }
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut stop_reason = StopReason::NMax;
    let mut iterations = 0;

    for n in 1..=rule.n_max {
        let next = map.apply(problem, &state);
        iterations = n;
        if !next.is_finite() {
            stop_reason = StopReason::NumericalDivergence;
            break;
        }
        state = next;
        let shadow = map.shadow(problem, &state);
        let monitor_shadow = shadow.distance(&prev_shadow);
        let (gap, error) = if n % stride == 0 {
            (Some(metrics::gap(problem, &shadow)?.total), error_of(&shadow))
        } else {
            (None, None)
        };
        let monitor_gap = match (gap, prev_gap) {
            (Some(g), Some(p)) => Some(libm::fabs(g - p)),
            _ => None,
        };
        rows.push(TraceRow {
            n,
            monitor_shadow,
            monitor_gap,
            gap,
            error,
        });
        prev_gap = gap;
        if opts.record_shadows {
            shadows.push(shadow.clone());
        }
        prev_shadow = shadow;

        let monitor = match rule.monitor {
            MonitorKind::ShadowDiff => monitor_shadow,
            MonitorKind::GapDiff => monitor_gap.unwrap_or(f64::INFINITY),
        };
        if monitor <= rule.tol {
            stop_reason = StopReason::TolReached;
            break;
        }
    }

    if let Some(last) = rows.last_mut() {
        if last.gap.is_none() {
            last.gap = Some(metrics::gap(problem, &prev_shadow)?.total);
            last.error = error_of(&prev_shadow);
        }
    }

    #[cfg(feature = "std")]
    let wall_time = started.elapsed();
    #[cfg(not(feature = "std"))]
    let wall_time = Duration::ZERO;

    Ok(RunTrace {
        rows,
        initial_gap,
        final_state: state,
        final_shadow: prev_shadow,
        stop_reason,
        iterations,
        wall_time,
        shadows,
    })
}

/// Random starting field: i.i.d. standard normal real and imaginary parts
/// drawn from a ChaCha8 stream, optionally projected onto SYM.
pub fn random_start(dims: Dims, seed: u64, symmetrize: bool) -> ComplexField3D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..dims.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            num_complex::Complex64::new(re, im)
        })
        .collect();
    let u = ComplexField3D::from_vec(dims, data).expect("length matches dims");
    if symmetrize {
        project_symmetric(&u)
    } else {
        u
    }
}

/// Cyclic projections followed by product-space Douglas-Rachford started at
/// the diagonal lift of the cyclic-projection result.
#[derive(Clone, Debug)]
pub struct ChainPair {
    pub seed: u64,
    pub cp: RunTrace,
    pub dr: RunTrace,
}

/// Runs one warm-start chain from `u0`.
pub fn chain_from<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    u0: &ComplexField3D,
    rule_cp: &StopRule,
    dr: &SplittingOperator,
    rule_dr: &StopRule,
    opts: &RunOptions<'_>,
) -> Result<(RunTrace, RunTrace)> {
    let cp = run_with(&SplittingOperator::cyclic_projections(), problem, u0, rule_cp, opts)?;
    let start = match &cp.final_state {
        IterateState::Single(u) => u.clone(),
        IterateState::Product(_) => unreachable!("cyclic projections iterate single fields"),
    };
    let dr = run_with(dr, problem, &start, rule_dr, opts)?;
    Ok((cp, dr))
}

/// For each seed: cyclic projections from `random_start(dims, seed, false)`,
/// then product-space DR with relaxation `lambda` from its final iterate.
pub fn warm_start_chain<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    rule_cp: &StopRule,
    rule_dr: &StopRule,
    lambda: f64,
    seeds: &[u64],
    opts: &RunOptions<'_>,
) -> Result<Vec<ChainPair>> {
    let dr_op = SplittingOperator::product_dr(lambda)?;
    seeds
        .iter()
        .map(|&seed| {
            let u0 = random_start(problem.dims(), seed, false);
            let (cp, dr) = chain_from(problem, &u0, rule_cp, &dr_op, rule_dr, opts)?;
            Ok(ChainPair { seed, cp, dr })
        })
        .collect()
}
