//! On-disk problem instances.
//!
//! An instance named `<base>` is stored as two files:
//!
//! * `<base>.manifest.json`: grid, set parameters, generator settings and
//!   provenance, plus one descriptor per binary array (type, element count,
//!   byte offset and length, CRC-32);
//! * `<base>.arrays.bin`: the arrays back to back, little-endian.
//!
//! | array            | dtype   | element                                   |
//! |------------------|---------|-------------------------------------------|
//! | `sphere_indexes` | `u32x3` | `(i, j, l)` frequency index, 3 x u32      |
//! | `amplitudes`     | `f64`   | data value `b` of the matching index      |
//! | `support_mask`   | `u8`    | 0 or 1 per voxel                          |
//! | `truth`          | `c128`  | `(re, im)` as 2 x f64, optional           |
//!
//! Voxel arrays use the z-fastest row-major layout of
//! [`ComplexField3D`](feasilab_core::ComplexField3D).

use std::fs;
use std::path::{Path, PathBuf};

use feasilab_core::instance::FORMAT_VERSION;
use feasilab_core::{
    Complex64, ComplexField3D, ConstraintParams, Dims, InstanceConfig, ProblemInstance,
    Provenance, SphereData, SupportMask,
};
use serde::{Deserialize, Serialize};

const MANIFEST_SUFFIX: &str = ".manifest.json";
const ARRAYS_SUFFIX: &str = ".arrays.bin";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("array `{array}` is truncated: needs bytes up to {needed}, file has {available}")]
    Truncated {
        array: String,
        needed: u64,
        available: u64,
    },
    #[error("checksum mismatch in array `{array}`: manifest {expected:08x}, data {found:08x}")]
    Checksum {
        array: String,
        expected: u32,
        found: u32,
    },
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("invalid instance: {0}")]
    Invalid(#[from] feasilab_core::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayDescriptor {
    pub name: String,
    pub dtype: String,
    pub count: u64,
    pub offset: u64,
    pub bytes: u64,
    pub crc32: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dims: Dims,
    pub lf_radius: f64,
    pub sparsity: usize,
    /// Informational; recomputed from the amplitudes on load.
    pub norm_b: f64,
    pub config: Option<InstanceConfig>,
    pub provenance: Provenance,
    /// File name of the array blob, relative to the manifest.
    pub arrays_file: String,
    pub arrays: Vec<ArrayDescriptor>,
}

/// Manifest and array paths of an instance. `path` may be the base name or
/// the manifest itself.
pub fn instance_paths(path: &Path) -> (PathBuf, PathBuf) {
    let s = path.to_string_lossy();
    let base = s.strip_suffix(MANIFEST_SUFFIX).unwrap_or(&s);
    (
        PathBuf::from(format!("{base}{MANIFEST_SUFFIX}")),
        PathBuf::from(format!("{base}{ARRAYS_SUFFIX}")),
    )
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

struct Blob {
    bytes: Vec<u8>,
    arrays: Vec<ArrayDescriptor>,
}

impl Blob {
    fn push(&mut self, name: &str, dtype: &str, count: usize, data: Vec<u8>) {
        self.arrays.push(ArrayDescriptor {
            name: name.into(),
            dtype: dtype.into(),
            count: count as u64,
            offset: self.bytes.len() as u64,
            bytes: data.len() as u64,
            crc32: crc32fast::hash(&data),
        });
        self.bytes.extend_from_slice(&data);
    }
}

fn encode_complex(field: &ComplexField3D) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * field.data().len());
    for z in field.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Serializes an instance to the manifest text and the array blob.
pub fn encode_instance(inst: &ProblemInstance, arrays_file: &str) -> (String, Vec<u8>) {
    let mut blob = Blob {
        bytes: Vec::new(),
        arrays: Vec::new(),
    };
    let sp = &inst.spheres;
    let idx: Vec<u8> = sp
        .indexes()
        .iter()
        .flat_map(|t| t.iter().flat_map(|v| v.to_le_bytes()))
        .collect();
    blob.push("sphere_indexes", "u32x3", sp.len(), idx);
    let amp: Vec<u8> = sp.amplitudes().iter().flat_map(|v| v.to_le_bytes()).collect();
    blob.push("amplitudes", "f64", sp.len(), amp);
    let mask = &inst.params.supp_mask;
    let cells: Vec<u8> = mask.cells().iter().map(|&c| c as u8).collect();
    blob.push("support_mask", "u8", cells.len(), cells);
    if let Some(t) = &inst.truth {
        blob.push("truth", "c128", t.data().len(), encode_complex(t));
    }

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        dims: inst.dims(),
        lf_radius: inst.params.lf_radius,
        sparsity: inst.params.sparsity,
        norm_b: sp.norm_b(),
        config: inst.config.clone(),
        provenance: inst.provenance.clone(),
        arrays_file: arrays_file.into(),
        arrays: blob.arrays,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    (text, blob.bytes)
}

/// Writes `<base>.manifest.json` and `<base>.arrays.bin`.
pub fn save_instance(path: &Path, inst: &ProblemInstance) -> Result<(), FormatError> {
    let (manifest_path, arrays_path) = instance_paths(path);
    let arrays_file = arrays_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| FormatError::Malformed(format!("bad instance path {}", path.display())))?;
    let (text, bytes) = encode_instance(inst, &arrays_file);
    if let Some(dir) = manifest_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(&arrays_path, bytes).map_err(io_err(&arrays_path))?;
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance, FormatError> {
    let (manifest_path, _) = instance_paths(path);
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    // check the version before the full schema so that future formats
    // report a version error rather than a parse error
    let probe: serde_json::Value = serde_json::from_str(&text)?;
    let version = probe
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| FormatError::Malformed("missing format_version".into()))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(FormatError::Version {
            found: version.try_into().unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    let manifest: Manifest = serde_json::from_value(probe)?;
    let dir = manifest_path.parent().unwrap_or(Path::new(""));
    let arrays_path = dir.join(&manifest.arrays_file);
    let blob = fs::read(&arrays_path).map_err(io_err(&arrays_path))?;
    decode_instance(&manifest, &blob)
}

fn array<'a>(
    manifest: &'a Manifest,
    blob: &'a [u8],
    name: &str,
    dtype: &str,
    elem_bytes: u64,
) -> Result<Option<(&'a ArrayDescriptor, &'a [u8])>, FormatError> {
    let Some(desc) = manifest.arrays.iter().find(|a| a.name == name) else {
        return Ok(None);
    };
    if desc.dtype != dtype {
        return Err(FormatError::Malformed(format!(
            "array `{name}` has dtype {} (expected {dtype})",
            desc.dtype
        )));
    }
    if desc.count.checked_mul(elem_bytes) != Some(desc.bytes) {
        return Err(FormatError::Malformed(format!(
            "array `{name}`: {} bytes do not hold {} elements",
            desc.bytes, desc.count
        )));
    }
    let end = desc.offset.saturating_add(desc.bytes);
    if end > blob.len() as u64 {
        return Err(FormatError::Truncated {
            array: name.into(),
            needed: end,
            available: blob.len() as u64,
        });
    }
    let bytes = &blob[desc.offset as usize..end as usize];
    let found = crc32fast::hash(bytes);
    if found != desc.crc32 {
        return Err(FormatError::Checksum {
            array: name.into(),
            expected: desc.crc32,
            found,
        });
    }
    Ok(Some((desc, bytes)))
}

fn required<'a>(
    manifest: &'a Manifest,
    blob: &'a [u8],
    name: &str,
    dtype: &str,
    elem_bytes: u64,
) -> Result<(&'a ArrayDescriptor, &'a [u8]), FormatError> {
    array(manifest, blob, name, dtype, elem_bytes)?
        .ok_or_else(|| FormatError::Malformed(format!("missing array `{name}`")))
}

fn f64s(bytes: &[u8]) -> impl Iterator<Item = f64> + '_ {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
}

/// Rebuilds an instance from a parsed manifest and its array blob. Every
/// array is bounds- and checksum-checked before anything is constructed.
pub fn decode_instance(manifest: &Manifest, blob: &[u8]) -> Result<ProblemInstance, FormatError> {
    let dims = manifest.dims;
    let (idx_desc, idx) = required(manifest, blob, "sphere_indexes", "u32x3", 12)?;
    let (amp_desc, amp) = required(manifest, blob, "amplitudes", "f64", 8)?;
    let (mask_desc, mask) = required(manifest, blob, "support_mask", "u8", 1)?;
    let truth = array(manifest, blob, "truth", "c128", 16)?;
    if idx_desc.count != amp_desc.count {
        return Err(FormatError::Malformed(
            "sphere index and amplitude counts differ".into(),
        ));
    }
    if mask_desc.count != dims.len() as u64 {
        return Err(FormatError::Malformed(format!(
            "support mask has {} cells for a {dims} grid",
            mask_desc.count
        )));
    }

    let indexes: Vec<[u32; 3]> = idx
        .chunks_exact(12)
        .map(|c| {
            let w = |k: usize| u32::from_le_bytes(c[4 * k..4 * k + 4].try_into().expect("4 bytes"));
            [w(0), w(1), w(2)]
        })
        .collect();
    let amplitudes: Vec<f64> = f64s(amp).collect();
    let cells = mask
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(FormatError::Malformed(format!("mask byte {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    let truth = match truth {
        None => None,
        Some((desc, bytes)) => {
            if desc.count != dims.len() as u64 {
                return Err(FormatError::Malformed(format!(
                    "ground truth has {} voxels for a {dims} grid",
                    desc.count
                )));
            }
            let vals: Vec<f64> = f64s(bytes).collect();
            let data = vals
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect();
            Some(ComplexField3D::from_vec(dims, data)?)
        }
    };

    instance_from_parts(
        dims,
        manifest.lf_radius,
        SupportMask::new(dims, cells)?,
        manifest.sparsity,
        SphereData::new(dims, indexes, amplitudes)?,
        truth,
        manifest.config.clone(),
        manifest.provenance.clone(),
    )
}

/// Assembles and validates an instance from its parts.
///
/// This is also the entry point for measured data: an adapter has to supply
/// the grid, the low-frequency radius, a mask symmetric under the three axis
/// reversals, the sparsity, and the sphere voxels with their amplitudes; the
/// ground truth and generator settings are then `None`.
#[allow(clippy::too_many_arguments)]
pub fn instance_from_parts(
    dims: Dims,
    lf_radius: f64,
    supp_mask: SupportMask,
    sparsity: usize,
    spheres: SphereData,
    truth: Option<ComplexField3D>,
    config: Option<InstanceConfig>,
    provenance: Provenance,
) -> Result<ProblemInstance, FormatError> {
    let params = ConstraintParams {
        dims,
        lf_radius,
        supp_mask,
        sparsity,
    };
    params.validate()?;
    if spheres.norm_b().is_nan() || spheres.norm_b() <= 0.0 {
        return Err(FormatError::Malformed("amplitude data are all zero".into()));
    }
    Ok(ProblemInstance {
        config,
        params,
        spheres,
        truth,
        provenance,
    })
}
