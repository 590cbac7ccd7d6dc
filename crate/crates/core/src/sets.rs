//! Constraint sets of the orbital tomography feasibility model and their
//! projectors.
//!
//! Nonconvex sets (`SparseReal`, `Amplitude`) have set-valued projectors; the
//! functions here return one deterministic selection:
//!
//! * amplitude: where the current Fourier coefficient has modulus at most
//!   [`PHASE_FLOOR`], the phase is taken to be zero;
//! * sparse-real: ties at the `s`-th largest magnitude keep the lowest linear
//!   index.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{centered_frequency, Dft3};
use crate::field::{Axis, ComplexField3D, Dims};
use crate::problem::{FeasibilityProblem, SetKind};

/// Moduli at or below this are treated as zero when normalizing phases.
pub const PHASE_FLOOR: f64 = 1e-14;

/// Measured Fourier amplitudes on the sphere voxels.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereData {
    indexes: Vec<[u32; 3]>,
    amplitudes: Vec<f64>,
    linear: Vec<usize>,
    norm_b: f64,
}

impl SphereData {
    pub fn new(dims: Dims, indexes: Vec<[u32; 3]>, amplitudes: Vec<f64>) -> Result<Self> {
        if indexes.len() != amplitudes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} sphere indexes but {} amplitudes",
                indexes.len(),
                amplitudes.len()
            )));
        }
        if let Some(a) = amplitudes.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "amplitudes must be finite and nonnegative, found {a}"
            )));
        }
        let mut linear = Vec::with_capacity(indexes.len());
        let mut seen = BTreeSet::new();
        for &[i, j, l] in &indexes {
            let (i, j, l) = (i as usize, j as usize, l as usize);
            if i >= dims.nx || j >= dims.ny || l >= dims.nz {
                return Err(Error::InvalidArgument(format!(
                    "sphere index ({i}, {j}, {l}) outside grid {dims}"
                )));
            }
            let k = dims.index(i, j, l);
            if !seen.insert(k) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate sphere index ({i}, {j}, {l})"
                )));
            }
            linear.push(k);
        }
        let norm_b = libm::sqrt(amplitudes.iter().map(|a| a * a).sum());
        Ok(Self {
            indexes,
            amplitudes,
            linear,
            norm_b,
        })
    }

    pub fn indexes(&self) -> &[[u32; 3]] {
        &self.indexes
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Linear positions of the sphere voxels in the frequency grid.
    pub fn linear_indexes(&self) -> &[usize] {
        &self.linear
    }

    pub fn norm_b(&self) -> f64 {
        self.norm_b
    }

    pub fn len(&self) -> usize {
        self.indexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indexes.is_empty()
    }
}

/// Binary object-domain mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportMask {
    dims: Dims,
    cells: Vec<bool>,
}

impl SupportMask {
    pub fn new(dims: Dims, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                found: cells.len(),
            });
        }
        Ok(Self { dims, cells })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let cells = (0..dims.len())
            .map(|k| {
                let (i, j, l) = dims.coords(k);
                f(i, j, l)
            })
            .collect();
        Self { dims, cells }
    }

    pub fn full(dims: Dims) -> Self {
        Self {
            dims,
            cells: alloc::vec![true; dims.len()],
        }
    }

    /// Box centered on the grid: along each axis, keeps the voxels whose
    /// distance to the axis midpoint `(n - 1) / 2` is at most `h - 1/2`.
    /// On an even axis this keeps `2h` voxels.
    pub fn centered_box(dims: Dims, half_widths: [f64; 3]) -> Self {
        let keep = |i: usize, n: usize, h: f64| {
            let d = libm::fabs(i as f64 - (n as f64 - 1.0) / 2.0);
            d + 0.5 <= h
        };
        Self::from_fn(dims, |i, j, l| {
            keep(i, dims.nx, half_widths[0])
                && keep(j, dims.ny, half_widths[1])
                && keep(l, dims.nz, half_widths[2])
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Whether the mask is invariant under reversal of each of the three axes.
    pub fn is_symmetric(&self) -> bool {
        let d = self.dims;
        Axis::ALL.iter().all(|&axis| {
            let n = d.extent(axis);
            let stride = d.stride(axis);
            (0..d.len()).all(|k| {
                let pos = (k / stride) % n;
                let m = k + (n - 1 - pos) * stride - pos * stride;
                self.cells[k] == self.cells[m]
            })
        })
    }
}

/// Parameters of the SYM, SR, SUPP and LF sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintParams {
    pub dims: Dims,
    /// Radius of the closed frequency ball, in voxel units.
    pub lf_radius: f64,
    pub supp_mask: SupportMask,
    pub sparsity: usize,
}

impl ConstraintParams {
    pub fn validate(&self) -> Result<()> {
        if self.supp_mask.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                found: self.supp_mask.dims(),
            });
        }
        if !self.supp_mask.is_symmetric() {
            return Err(Error::Config("support mask is not symmetric under axis reversal".into()));
        }
        if self.sparsity == 0 || self.sparsity > self.dims.len() {
            return Err(Error::Config(format!(
                "sparsity must lie in 1..={}, got {}",
                self.dims.len(),
                self.sparsity
            )));
        }
        if !(self.lf_radius.is_finite() && self.lf_radius >= 0.0) {
            return Err(Error::Config(format!(
                "low-frequency radius must be finite and nonnegative, got {}",
                self.lf_radius
            )));
        }
        Ok(())
    }
}

/// Fourier-amplitude projector: on each sphere voxel the spectrum's modulus
/// is replaced by the data, keeping the phase; all other voxels are left
/// unchanged.
pub fn project_amplitude(u: &ComplexField3D, spheres: &SphereData, dft: &Dft3) -> ComplexField3D {
    let mut v = dft.forward(u);
    let spec = v.data_mut();
    for (&k, &b) in spheres.linear_indexes().iter().zip(spheres.amplitudes()) {
        let z = spec[k];
        let r = z.norm();
        spec[k] = if r > PHASE_FLOOR {
            z * (b / r)
        } else {
            Complex64::new(b, 0.0)
        };
    }
    dft.inverse_in_place(&mut v);
    v
}

/// Frequency bins kept by the low-frequency projector: centered frequency
/// vector inside the closed ball of the given radius.
pub fn low_freq_mask(dims: Dims, radius: f64) -> Vec<bool> {
    let r2 = radius * radius;
    (0..dims.len())
        .map(|k| {
            let (i, j, l) = dims.coords(k);
            let kx = centered_frequency(i, dims.nx) as f64;
            let ky = centered_frequency(j, dims.ny) as f64;
            let kz = centered_frequency(l, dims.nz) as f64;
            kx * kx + ky * ky + kz * kz <= r2
        })
        .collect()
}

fn project_spectral_mask(u: &ComplexField3D, keep: &[bool], dft: &Dft3) -> ComplexField3D {
    let mut v = dft.forward(u);
    for (z, &k) in v.data_mut().iter_mut().zip(keep) {
        if !k {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    dft.inverse_in_place(&mut v);
    v
}

pub fn project_low_freq(u: &ComplexField3D, radius: f64, dft: &Dft3) -> ComplexField3D {
    project_spectral_mask(u, &low_freq_mask(u.dims(), radius), dft)
}

pub fn project_support(u: &ComplexField3D, mask: &SupportMask) -> ComplexField3D {
    assert_eq!(u.dims(), mask.dims(), "mask does not match field");
    let mut v = u.clone();
    for (z, &keep) in v.data_mut().iter_mut().zip(mask.cells()) {
        if !keep {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    v
}

/// Projection onto the reals.
pub fn project_real(u: &ComplexField3D) -> ComplexField3D {
    u.map(|z| Complex64::new(z.re, 0.0))
}

/// Keeps the `s` entries of largest modulus (ties: lowest index) and zeroes
/// the rest. The entries themselves are not modified.
pub fn project_sparse(u: &ComplexField3D, s: usize) -> ComplexField3D {
    let n = u.data().len();
    if s >= n {
        return u.clone();
    }
    let mut v = ComplexField3D::zeros(u.dims());
    if s == 0 {
        return v;
    }
    let mags: Vec<f64> = u.data().iter().map(|z| z.norm_sqr()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // descending magnitude, ascending index: a strict total order
    order.select_nth_unstable_by(s - 1, |&a, &b| {
        mags[b].total_cmp(&mags[a]).then(a.cmp(&b))
    });
    let src = u.data();
    let dst = v.data_mut();
    for &k in &order[..s] {
        dst[k] = src[k];
    }
    v
}

/// Sparse-real projector: real part first, then the `s` largest magnitudes.
/// The reverse order is not a projection onto the sparse-real set.
pub fn project_sparse_real(u: &ComplexField3D, s: usize) -> ComplexField3D {
    project_sparse(&project_real(u), s)
}

/// `(u + sign * Pi_axis u) / 2`, the projection onto the fields that are even
/// (`sign = 1`) or odd (`sign = -1`) under reversal of `axis`.
fn mirror_average(u: &ComplexField3D, axis: Axis, sign: f64) -> ComplexField3D {
    let d = u.dims();
    let n = d.extent(axis);
    let stride = d.stride(axis);
    let src = u.data();
    let data = (0..d.len())
        .map(|k| {
            let pos = (k / stride) % n;
            let m = k + (n - 1 - pos) * stride - pos * stride;
            (src[k] + src[m] * sign) * 0.5
        })
        .collect();
    ComplexField3D::from_vec(d, data).expect("length preserved")
}

pub fn project_sym_even(u: &ComplexField3D, axis: Axis) -> ComplexField3D {
    mirror_average(u, axis, 1.0)
}

pub fn project_sym_odd(u: &ComplexField3D, axis: Axis) -> ComplexField3D {
    mirror_average(u, axis, -1.0)
}

/// Projector onto fields even in x and odd in y and z, applied as the
/// composition of the three commuting subspace projectors (x first).
pub fn project_symmetric(u: &ComplexField3D) -> ComplexField3D {
    let v = project_sym_even(u, Axis::X);
    let v = project_sym_odd(&v, Axis::Y);
    project_sym_odd(&v, Axis::Z)
}

/// The orbital feasibility problem: the five constraint sets together with
/// the cached transform plan and frequency mask they need.
#[derive(Clone, Debug)]
pub struct ConstraintSets {
    params: ConstraintParams,
    spheres: SphereData,
    dft: Dft3,
    lf_keep: Vec<bool>,
}

impl ConstraintSets {
    pub fn new(params: ConstraintParams, spheres: SphereData) -> Result<Self> {
        params.validate()?;
        if let Some(&k) = spheres.linear_indexes().iter().find(|&&k| k >= params.dims.len()) {
            return Err(Error::InvalidArgument(format!(
                "sphere voxel {k} outside grid {}",
                params.dims
            )));
        }
        let dft = Dft3::new(params.dims);
        let lf_keep = low_freq_mask(params.dims, params.lf_radius);
        Ok(Self {
            params,
            spheres,
            dft,
            lf_keep,
        })
    }

    pub fn params(&self) -> &ConstraintParams {
        &self.params
    }

    pub fn spheres(&self) -> &SphereData {
        &self.spheres
    }

    pub fn dft(&self) -> &Dft3 {
        &self.dft
    }

    pub fn project_amplitude(&self, u: &ComplexField3D) -> ComplexField3D {
        project_amplitude(u, &self.spheres, &self.dft)
    }

    pub fn project_low_freq(&self, u: &ComplexField3D) -> ComplexField3D {
        project_spectral_mask(u, &self.lf_keep, &self.dft)
    }

    pub fn project_support(&self, u: &ComplexField3D) -> ComplexField3D {
        project_support(u, &self.params.supp_mask)
    }

    pub fn project_sparse_real(&self, u: &ComplexField3D) -> ComplexField3D {
        project_sparse_real(u, self.params.sparsity)
    }
}

impl FeasibilityProblem for ConstraintSets {
    fn dims(&self) -> Dims {
        self.params.dims
    }

    fn project(&self, set: SetKind, u: &ComplexField3D) -> ComplexField3D {
        match set {
            SetKind::Sym => project_symmetric(u),
            SetKind::SparseReal => self.project_sparse_real(u),
            SetKind::Support => self.project_support(u),
            SetKind::LowFreq => self.project_low_freq(u),
            SetKind::Amplitude => self.project_amplitude(u),
        }
    }

    fn gap_scale(&self) -> f64 {
        self.spheres.norm_b()
    }
}
