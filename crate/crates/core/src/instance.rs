//! Synthetic problem instances with a known ground truth.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::driver::random_start;
use crate::error::{Error, Result};
use crate::fft::{centered_frequency, frequency_radius, Dft3};
use crate::field::{ComplexField3D, Dims};
use crate::sets::{
    project_sparse_real, project_support, project_symmetric, ConstraintParams, ConstraintSets,
    SphereData, SupportMask,
};

pub const FORMAT_VERSION: u32 = 1;

/// Membership tolerance for the generated ground truth.
const TRUTH_TOL: f64 = 1e-12;

fn default_half_width() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub dims: Dims,
    pub n_spheres: usize,
    /// Shell radii in frequency-voxel units.
    pub sphere_radii: Vec<f64>,
    /// A voxel belongs to the shell of radius `r` when `| |k| - r | <= w`.
    #[serde(default = "default_half_width")]
    pub shell_half_width: f64,
    pub lf_radius: f64,
    /// Half-widths of the centered box support, see
    /// [`SupportMask::centered_box`].
    pub supp_half_widths: [f64; 3],
    pub sparsity: usize,
    pub truth_seed: u64,
}

impl InstanceConfig {
    /// Small benchmark: 16^3 grid, four shells at radii 2, 4, 6, 8, a 4^3
    /// support box holding 32 nonzeros, and a low-frequency ball of radius 13
    /// that cuts off the outermost corner frequencies.
    pub fn desk() -> Self {
        Self {
            dims: Dims { nx: 16, ny: 16, nz: 16 },
            n_spheres: 4,
            sphere_radii: alloc::vec![2.0, 4.0, 6.0, 8.0],
            shell_half_width: 0.5,
            lf_radius: 13.0,
            supp_half_widths: [2.0, 2.0, 2.0],
            sparsity: 32,
            truth_seed: 7,
        }
    }

    pub fn support_mask(&self) -> SupportMask {
        SupportMask::centered_box(self.dims, self.supp_half_widths)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims;
        if d.is_empty() {
            return Err(Error::Config("grid must be nonempty".into()));
        }
        if self.n_spheres == 0 || self.n_spheres != self.sphere_radii.len() {
            return Err(Error::Config(format!(
                "n_spheres = {} but {} radii given",
                self.n_spheres,
                self.sphere_radii.len()
            )));
        }
        let max_radius = max_frequency_radius(d);
        for (k, &r) in self.sphere_radii.iter().enumerate() {
            if !(r > 0.0 && r <= max_radius) {
                return Err(Error::Config(format!(
                    "sphere radius {r} outside (0, {max_radius}]"
                )));
            }
            if self.sphere_radii[..k].contains(&r) {
                return Err(Error::Config(format!("duplicate sphere radius {r}")));
            }
        }
        if !(self.shell_half_width > 0.0 && self.shell_half_width.is_finite()) {
            return Err(Error::Config("shell half-width must be positive".into()));
        }
        let mask = self.support_mask();
        if self.sparsity == 0 || self.sparsity > mask.count() {
            return Err(Error::Config(format!(
                "sparsity {} must lie in 1..={} (support voxels)",
                self.sparsity,
                mask.count()
            )));
        }
        ConstraintParams {
            dims: d,
            lf_radius: self.lf_radius,
            supp_mask: mask,
            sparsity: self.sparsity,
        }
        .validate()
    }
}

/// Largest centered frequency radius on the grid.
pub fn max_frequency_radius(dims: Dims) -> f64 {
    let m2 = |n: usize| {
        let k = centered_frequency(n / 2, n) as f64;
        k * k
    };
    libm::sqrt(m2(dims.nx) + m2(dims.ny) + m2(dims.nz))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub format_version: u32,
    pub seed: Option<u64>,
    /// Creation timestamp; left empty by default so regenerated files stay
    /// byte-identical.
    #[serde(default)]
    pub created: Option<String>,
    pub generator: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    /// Generator settings, absent for instances built from external data.
    pub config: Option<InstanceConfig>,
    pub params: ConstraintParams,
    pub spheres: SphereData,
    pub truth: Option<ComplexField3D>,
    pub provenance: Provenance,
}

impl ProblemInstance {
    pub fn dims(&self) -> Dims {
        self.params.dims
    }

    pub fn constraint_sets(&self) -> Result<ConstraintSets> {
        ConstraintSets::new(self.params.clone(), self.spheres.clone())
    }

    /// Fraction of frequency voxels carrying amplitude data.
    pub fn data_fraction(&self) -> f64 {
        self.spheres.len() as f64 / self.dims().len() as f64
    }
}

/// Indexes of the frequency voxels on the union of the shells, in linear
/// order. Errors if some shell is empty.
pub fn shell_voxels(dims: Dims, radii: &[f64], half_width: f64) -> Result<Vec<[u32; 3]>> {
    let mut hits = alloc::vec![0usize; radii.len()];
    let mut out = Vec::new();
    for k in 0..dims.len() {
        let (i, j, l) = dims.coords(k);
        let rho = frequency_radius(dims, i, j, l);
        let mut inside = false;
        for (h, &r) in hits.iter_mut().zip(radii) {
            if libm::fabs(rho - r) <= half_width {
                *h += 1;
                inside = true;
            }
        }
        if inside {
            out.push([i as u32, j as u32, l as u32]);
        }
    }
    if let Some(p) = hits.iter().position(|&h| h == 0) {
        return Err(Error::Config(format!(
            "shell of radius {} with half-width {half_width} contains no voxels",
            radii[p]
        )));
    }
    Ok(out)
}

/// Draws a ground truth in SYM, SUPP and SR with unit norm and samples its
/// Fourier amplitudes on the configured shells.
pub fn generate_instance(cfg: &InstanceConfig) -> Result<ProblemInstance> {
    cfg.validate()?;
    let dims = cfg.dims;
    let mask = cfg.support_mask();

    let raw = random_start(dims, cfg.truth_seed, false);
    let sym = project_symmetric(&raw);
    let masked = project_support(&sym, &mask);
    let sparse = project_sparse_real(&masked, cfg.sparsity);
    let norm = sparse.norm();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::Config(
            "ground truth vanished; the support box may only cover antisymmetry planes".into(),
        ));
    }
    let truth = &sparse * (1.0 / norm);

    let residual = |p: ComplexField3D| p.distance(&truth);
    if residual(project_symmetric(&truth)) > TRUTH_TOL {
        return Err(Error::Config(format!(
            "sparsity {} splits a symmetry orbit of the ground truth; choose a multiple of the orbit size",
            cfg.sparsity
        )));
    }
    debug_assert!(residual(project_support(&truth, &mask)) <= TRUTH_TOL);
    debug_assert!(residual(project_sparse_real(&truth, cfg.sparsity)) <= TRUTH_TOL);

    let indexes = shell_voxels(dims, &cfg.sphere_radii, cfg.shell_half_width)?;
    let spectrum = Dft3::new(dims).forward(&truth);
    let amplitudes = indexes
        .iter()
        .map(|&[i, j, l]| spectrum.get(i as usize, j as usize, l as usize).norm())
        .collect();
    let spheres = SphereData::new(dims, indexes, amplitudes)?;
    if spheres.norm_b().is_nan() || spheres.norm_b() <= 0.0 {
        return Err(Error::Config("sampled amplitudes are all zero".into()));
    }

    Ok(ProblemInstance {
        config: Some(cfg.clone()),
        params: ConstraintParams {
            dims,
            lf_radius: cfg.lf_radius,
            supp_mask: mask,
            sparsity: cfg.sparsity,
        },
        spheres,
        truth: Some(truth),
        provenance: Provenance {
            format_version: FORMAT_VERSION,
            seed: Some(cfg.truth_seed),
            created: None,
            generator: format!("feasilab-core {}", env!("CARGO_PKG_VERSION")),
        },
    })
}
