//! Five-block product space: the Cartesian product `C` of the constraint sets
//! and the diagonal `D`.

use crate::field::ComplexField3D;
use crate::problem::{FeasibilityProblem, SetKind};

/// How the diagonal projector combines the five blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DiagonalVariant {
    /// Plain block average: the metric projection onto the diagonal.
    #[default]
    Average,
    /// Average of the blocks after each is projected onto its own set.
    /// Not a projection onto the diagonal; kept for comparison runs.
    ProjectedAverage,
}

/// Point `(u_1, ..., u_5)` of the product space, blocks ordered as
/// [`SetKind::ORDER`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    pub blocks: [ComplexField3D; 5],
}

impl ProductPoint {
    pub fn new(blocks: [ComplexField3D; 5]) -> Self {
        let d = blocks[0].dims();
        assert!(
            blocks.iter().all(|b| b.dims() == d),
            "product blocks must share dimensions"
        );
        Self { blocks }
    }

    /// Diagonal lift `(u, u, u, u, u)`.
    pub fn replicate(u: &ComplexField3D) -> Self {
        Self {
            blocks: core::array::from_fn(|_| u.clone()),
        }
    }

    pub fn block(&self, set: SetKind) -> &ComplexField3D {
        &self.blocks[set.block()]
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.blocks.iter().map(ComplexField3D::norm_sqr).sum())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        libm::sqrt(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| {
                    let d = a.distance(b);
                    d * d
                })
                .sum(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(ComplexField3D::is_finite)
    }

    pub fn map_blocks(&self, mut f: impl FnMut(usize, &ComplexField3D) -> ComplexField3D) -> Self {
        Self {
            blocks: core::array::from_fn(|k| f(k, &self.blocks[k])),
        }
    }

    /// `a * x + b * y`, blockwise.
    pub fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        Self {
            blocks: core::array::from_fn(|k| {
                ComplexField3D::lin_comb(a, &x.blocks[k], b, &y.blocks[k])
            }),
        }
    }

    fn average(&self) -> ComplexField3D {
        let mut sum = self.blocks[0].clone();
        for b in &self.blocks[1..] {
            for (s, z) in sum.data_mut().iter_mut().zip(b.data()) {
                *s += z;
            }
        }
        sum.map(|z| z / 5.0)
    }
}

/// `(P_SYM u_1, P_SR u_2, P_SUPP u_3, P_LF u_4, P_M u_5)`.
pub fn project_c<P: FeasibilityProblem + ?Sized>(problem: &P, p: &ProductPoint) -> ProductPoint {
    p.map_blocks(|k, b| problem.project(SetKind::ORDER[k], b))
}

pub fn reflect_c<P: FeasibilityProblem + ?Sized>(problem: &P, p: &ProductPoint) -> ProductPoint {
    let pc = project_c(problem, p);
    ProductPoint::lin_comb(2.0, &pc, -1.0, p)
}

/// Diagonal projector. The [`DiagonalVariant::ProjectedAverage`] variant
/// needs the problem to project each block first.
pub fn project_d<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    p: &ProductPoint,
    variant: DiagonalVariant,
) -> ProductPoint {
    let avg = match variant {
        DiagonalVariant::Average => p.average(),
        DiagonalVariant::ProjectedAverage => project_c(problem, p).average(),
    };
    ProductPoint::replicate(&avg)
}

pub fn reflect_d<P: FeasibilityProblem + ?Sized>(
    problem: &P,
    p: &ProductPoint,
    variant: DiagonalVariant,
) -> ProductPoint {
    let pd = project_d(problem, p, variant);
    ProductPoint::lin_comb(2.0, &pd, -1.0, p)
}
