use core::fmt;

use crate::field::{ComplexField3D, Dims};

/// The five constraint sets of the orbital feasibility model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetKind {
    /// Mirror symmetry in x, antisymmetry in y and z.
    Sym,
    /// Real-valued with at most `s` nonzero entries.
    SparseReal,
    /// Vanishes outside the object-domain mask.
    Support,
    /// Fourier transform vanishes outside a centered frequency ball.
    LowFreq,
    /// Fourier amplitudes match the measured data on the sphere voxels.
    Amplitude,
}

impl SetKind {
    /// Product-space block order; also the left-to-right order of the
    /// cyclic projection operator.
    pub const ORDER: [SetKind; 5] = [
        SetKind::Sym,
        SetKind::SparseReal,
        SetKind::Support,
        SetKind::LowFreq,
        SetKind::Amplitude,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SetKind::Sym => "SYM",
            SetKind::SparseReal => "SR",
            SetKind::Support => "SUPP",
            SetKind::LowFreq => "LF",
            SetKind::Amplitude => "M",
        }
    }

    pub fn block(self) -> usize {
        match self {
            SetKind::Sym => 0,
            SetKind::SparseReal => 1,
            SetKind::Support => 2,
            SetKind::LowFreq => 3,
            SetKind::Amplitude => 4,
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A five-set feasibility problem: one projector per [`SetKind`].
///
/// [`crate::ConstraintSets`] is the orbital instance. Small convex or
/// deliberately inconsistent toys implement this trait as well, which lets
/// every operator and the driver run on problems with known answers.
///
/// Projectors must be single-valued: where the true projection is a set,
/// implementations return one deterministic selection.
pub trait FeasibilityProblem {
    fn dims(&self) -> Dims;

    fn project(&self, set: SetKind, u: &ComplexField3D) -> ComplexField3D;

    fn reflect(&self, set: SetKind, u: &ComplexField3D) -> ComplexField3D {
        u.reflect_through(&self.project(set, u))
    }

    /// Denominator of the gap, the norm of the amplitude data.
    fn gap_scale(&self) -> f64;
}

impl<P: FeasibilityProblem + ?Sized> FeasibilityProblem for &P {
    fn dims(&self) -> Dims {
        (**self).dims()
    }

    fn project(&self, set: SetKind, u: &ComplexField3D) -> ComplexField3D {
        (**self).project(set, u)
    }

    fn reflect(&self, set: SetKind, u: &ComplexField3D) -> ComplexField3D {
        (**self).reflect(set, u)
    }

    fn gap_scale(&self) -> f64 {
        (**self).gap_scale()
    }
}
