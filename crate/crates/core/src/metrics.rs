//! Quality measures for (approximate) fixed points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField3D;
use crate::operators::{AlgorithmKind, IterateState};
use crate::problem::{FeasibilityProblem, SetKind};
use crate::sets::project_symmetric;

/// The five distances along the projection chain
/// `u -> P_M u -> P_LF P_M u -> ... -> P_SYM P_SR P_SUPP P_LF P_M u`
/// and their sum divided by `|b|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapBreakdown {
    pub sym_m: f64,
    pub m_lf: f64,
    pub lf_supp: f64,
    pub supp_sr: f64,
    pub sr_sym: f64,
    pub total: f64,
}

impl GapBreakdown {
    pub fn parts(&self) -> [f64; 5] {
        [self.sym_m, self.m_lf, self.lf_supp, self.supp_sr, self.sr_sym]
    }
}

/// Gap of a shadow point.
pub fn gap<P: FeasibilityProblem + ?Sized>(problem: &P, shadow: &ComplexField3D) -> Result<GapBreakdown> {
    let scale = problem.gap_scale();
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "gap normalization |b| must be positive, got {scale}"
        )));
    }
    let m = problem.project(SetKind::Amplitude, shadow);
    let lf = problem.project(SetKind::LowFreq, &m);
    let su = problem.project(SetKind::Support, &lf);
    let sr = problem.project(SetKind::SparseReal, &su);
    let sy = problem.project(SetKind::Sym, &sr);
    let sym_m = shadow.distance(&m);
    let m_lf = m.distance(&lf);
    let lf_supp = lf.distance(&su);
    let supp_sr = su.distance(&sr);
    let sr_sym = sr.distance(&sy);
    Ok(GapBreakdown {
        sym_m,
        m_lf,
        lf_supp,
        supp_sr,
        sr_sym,
        total: (sym_m + m_lf + lf_supp + supp_sr + sr_sym) / scale,
    })
}

/// `1/2 min(| u*/|u*| + u/|u| |, | u*/|u*| - u/|u| |)`: the distance between
/// normalized fields up to a global sign. Lies in `[0, sqrt(2)/2]`.
pub fn truth_error(u: &ComplexField3D, truth: &ComplexField3D) -> Result<f64> {
    let nu = u.norm();
    let nt = truth.norm();
    if !(nu > 0.0 && nt > 0.0) {
        return Err(Error::InvalidArgument(
            "error against ground truth needs nonzero fields".into(),
        ));
    }
    if u.dims() != truth.dims() {
        return Err(Error::DimensionMismatch {
            expected: truth.dims(),
            found: u.dims(),
        });
    }
    let (mut plus, mut minus) = (0.0, 0.0);
    for (a, b) in truth.data().iter().zip(u.data()) {
        let x = a / nt;
        let y = b / nu;
        plus += (x + y).norm_sqr();
        minus += (x - y).norm_sqr();
    }
    Ok(0.5 * libm::sqrt(plus.min(minus)))
}

/// Monitored point of an iterate: the iterate itself for cyclic projections,
/// its projection onto SYM for cyclic Douglas-Rachford, and the projection of
/// the first block onto SYM on the product space.
pub fn shadow<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    kind: AlgorithmKind,
    state: &IterateState,
) -> ComplexField3D {
    match (kind, state) {
        (AlgorithmKind::CyclicProjections, IterateState::Single(u)) => u.clone(),
        (AlgorithmKind::CyclicDouglasRachford, IterateState::Single(u)) => {
            problem.project(SetKind::Sym, u)
        }
        (AlgorithmKind::ProductDouglasRachford, IterateState::Product(p)) => {
            problem.project(SetKind::Sym, &p.blocks[0])
        }
        _ => panic!("iterate state does not match algorithm {kind}"),
    }
}

/// Spot check of the SYM-shadow property of cyclic Douglas-Rachford fixed
/// points: `| P_SYM u - T_CP(P_SYM u) |`.
pub fn shadow_cp_residual<P: FeasibilityProblem + ?Sized>(problem: &P, u: &ComplexField3D) -> f64 {
    let s = project_symmetric(u);
    let t = crate::operators::apply_cp(problem, &s);
    s.distance(&t)
}
