//! The three fixed-point maps compared by the solver: cyclic projections,
//! cyclic relaxed Douglas-Rachford and relaxed Douglas-Rachford on the
//! five-block product space.
//!
//! Compositions are written right to left, as in operator notation: the
//! rightmost factor acts first.

use core::fmt;

use crate::error::{Error, Result};
use crate::field::ComplexField3D;
use crate::metrics;
use crate::problem::{FeasibilityProblem, SetKind};
use crate::product::{self, DiagonalVariant, ProductPoint};

/// Relaxed Douglas-Rachford map of the pair `(a, b)`:
/// `(lambda/2) (R_a R_b + Id) + (1 - lambda) P_b`.
pub fn apply_dr_pair<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    a: SetKind,
    b: SetKind,
    lambda: f64,
    u: &ComplexField3D,
) -> ComplexField3D {
    let pb = problem.project(b, u);
    let rb = u.reflect_through(&pb);
    let rarb = problem.reflect(a, &rb);
    let half = lambda / 2.0;
    let mut out = ComplexField3D::lin_comb(half, &rarb, half, u);
    for (o, p) in out.data_mut().iter_mut().zip(pb.data()) {
        *o += p * (1.0 - lambda);
    }
    out
}

/// `P_SYM P_SR P_SUPP P_LF P_M u`.
pub fn apply_cp<P: FeasibilityProblem + ?Sized>(problem: &P, u: &ComplexField3D) -> ComplexField3D {
    SetKind::ORDER
        .iter()
        .rev()
        .fold(u.clone(), |v, &set| problem.project(set, &v))
}

/// Pairs of the cyclic relaxed Douglas-Rachford composition in the order
/// they act on the iterate.
pub const CDR_PAIRS: [(SetKind, SetKind); 5] = [
    (SetKind::Amplitude, SetKind::Sym),
    (SetKind::LowFreq, SetKind::Amplitude),
    (SetKind::Support, SetKind::LowFreq),
    (SetKind::SparseReal, SetKind::Support),
    (SetKind::Sym, SetKind::SparseReal),
];

/// `T_{SYM,SR} T_{SR,SUPP} T_{SUPP,LF} T_{LF,M} T_{M,SYM} u`.
pub fn apply_cdrl<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    lambda: f64,
    u: &ComplexField3D,
) -> ComplexField3D {
    CDR_PAIRS
        .iter()
        .fold(u.clone(), |v, &(a, b)| apply_dr_pair(problem, a, b, lambda, &v))
}

/// `(lambda/2) (R_D R_C + Id) + (1 - lambda) P_C` on the product space.
pub fn apply_drl_product<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    lambda: f64,
    variant: DiagonalVariant,
    p: &ProductPoint,
) -> ProductPoint {
    let pc = product::project_c(problem, p);
    let rc = ProductPoint::lin_comb(2.0, &pc, -1.0, p);
    let rdrc = product::reflect_d(problem, &rc, variant);
    let half = lambda / 2.0;
    let mut out = ProductPoint::lin_comb(half, &rdrc, half, p);
    for (o, q) in out.blocks.iter_mut().zip(&pc.blocks) {
        for (x, y) in o.data_mut().iter_mut().zip(q.data()) {
            *x += y * (1.0 - lambda);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    CyclicProjections,
    CyclicDouglasRachford,
    ProductDouglasRachford,
}

impl AlgorithmKind {
    pub fn label(self) -> &'static str {
        match self {
            AlgorithmKind::CyclicProjections => "cp",
            AlgorithmKind::CyclicDouglasRachford => "cdrl",
            AlgorithmKind::ProductDouglasRachford => "drl",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "cp" => Some(AlgorithmKind::CyclicProjections),
            "cdrl" => Some(AlgorithmKind::CyclicDouglasRachford),
            "drl" => Some(AlgorithmKind::ProductDouglasRachford),
            _ => None,
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Iterate of a fixed-point map: a single field for the cyclic methods, a
/// product point for product-space Douglas-Rachford.
#[derive(Clone, Debug, PartialEq)]
pub enum IterateState {
    Single(ComplexField3D),
    Product(ProductPoint),
}

impl IterateState {
    pub fn is_finite(&self) -> bool {
        match self {
            IterateState::Single(u) => u.is_finite(),
            IterateState::Product(p) => p.is_finite(),
        }
    }

    pub fn as_single(&self) -> Option<&ComplexField3D> {
        match self {
            IterateState::Single(u) => Some(u),
            IterateState::Product(_) => None,
        }
    }

    pub fn as_product(&self) -> Option<&ProductPoint> {
        match self {
            IterateState::Product(p) => Some(p),
            IterateState::Single(_) => None,
        }
    }
}

/// A map iterated by the driver.
pub trait FixedPointMap<P: ?Sized> {
    fn label(&self) -> &str;

    /// Initial state built from a starting field.
    fn lift(&self, u0: &ComplexField3D) -> IterateState;

    fn apply(&self, problem: &P, state: &IterateState) -> IterateState;

    /// Field that is monitored, scored and reported for a state.
    fn shadow(&self, problem: &P, state: &IterateState) -> ComplexField3D;
}

/// Configured splitting operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplittingOperator {
    kind: AlgorithmKind,
    lambda: f64,
    diagonal: DiagonalVariant,
}

impl SplittingOperator {
    pub fn new(kind: AlgorithmKind, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(alloc::format!(
                "relaxation parameter must lie in [0, 1], got {lambda}"
            )));
        }
        Ok(Self {
            kind,
            lambda,
            diagonal: DiagonalVariant::Average,
        })
    }

    pub fn cyclic_projections() -> Self {
        Self {
            kind: AlgorithmKind::CyclicProjections,
            lambda: 0.0,
            diagonal: DiagonalVariant::Average,
        }
    }

    pub fn cyclic_dr(lambda: f64) -> Result<Self> {
        Self::new(AlgorithmKind::CyclicDouglasRachford, lambda)
    }

    pub fn product_dr(lambda: f64) -> Result<Self> {
        Self::new(AlgorithmKind::ProductDouglasRachford, lambda)
    }

    pub fn with_diagonal(mut self, diagonal: DiagonalVariant) -> Self {
        self.diagonal = diagonal;
        self
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    /// Relaxation parameter; meaningless for cyclic projections.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn diagonal(&self) -> DiagonalVariant {
        self.diagonal
    }
}

impl<P: FeasibilityProblem + ?Sized> FixedPointMap<P> for SplittingOperator {
    fn label(&self) -> &str {
        self.kind.label()
    }

    fn lift(&self, u0: &ComplexField3D) -> IterateState {
        match self.kind {
            AlgorithmKind::ProductDouglasRachford => {
                IterateState::Product(ProductPoint::replicate(u0))
            }
            _ => IterateState::Single(u0.clone()),
        }
    }

    fn apply(&self, problem: &P, state: &IterateState) -> IterateState {
        match (self.kind, state) {
            (AlgorithmKind::CyclicProjections, IterateState::Single(u)) => {
                IterateState::Single(apply_cp(problem, u))
            }
            (AlgorithmKind::CyclicDouglasRachford, IterateState::Single(u)) => {
                IterateState::Single(apply_cdrl(problem, self.lambda, u))
            }
            (AlgorithmKind::ProductDouglasRachford, IterateState::Product(p)) => {
                IterateState::Product(apply_drl_product(problem, self.lambda, self.diagonal, p))
            }
            _ => panic!("iterate state does not match operator {}", self.kind),
        }
    }

    fn shadow(&self, problem: &P, state: &IterateState) -> ComplexField3D {
        metrics::shadow(problem, self.kind, state)
    }
}

/// `T = Id`. A baseline and test double for the driver and harness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdentityMap;

impl<P: ?Sized> FixedPointMap<P> for IdentityMap {
    fn label(&self) -> &str {
        "identity"
    }

    fn lift(&self, u0: &ComplexField3D) -> IterateState {
        IterateState::Single(u0.clone())
    }

    fn apply(&self, _problem: &P, state: &IterateState) -> IterateState {
        state.clone()
    }

    fn shadow(&self, _problem: &P, state: &IterateState) -> ComplexField3D {
        match state {
            IterateState::Single(u) => u.clone(),
            IterateState::Product(p) => p.blocks[0].clone(),
        }
    }
}
