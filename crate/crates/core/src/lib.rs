//! Set-feasibility solvers for 3D Fourier phase retrieval with symmetry,
//! support, low-frequency and sparse-real constraints.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`field`]: dense complex 3D fields and axis reversals,
//! * [`fft`]: the unitary 3D discrete Fourier transform,
//! * [`sets`]: the five constraint sets with their projectors and reflectors,
//!   plus the product-space sets,
//! * [`operators`]: cyclic projections, cyclic relaxed Douglas-Rachford and
//!   relaxed Douglas-Rachford on the product space,
//! * [`driver`]: the monitored fixed-point loop and warm-start chaining,
//! * [`metrics`]: gap, ground-truth error and shadows,
//! * [`instance`]: synthetic instance generation.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod driver;
pub mod error;
pub mod fft;
pub mod field;
pub mod instance;
pub mod metrics;
pub mod operators;
pub mod problem;
pub mod product;
pub mod sets;

pub use driver::{
    random_start, run, run_with, warm_start_chain, ChainPair, MonitorKind, RunOptions, RunTrace,
    StopReason, StopRule, TraceRow,
};
pub use error::{Error, Result};
pub use fft::Dft3;
pub use field::{Axis, ComplexField3D, Dims};
pub use instance::{generate_instance, InstanceConfig, ProblemInstance, Provenance};
pub use metrics::{gap, truth_error, GapBreakdown};
pub use operators::{
    AlgorithmKind, FixedPointMap, IdentityMap, IterateState, SplittingOperator,
};
pub use problem::{FeasibilityProblem, SetKind};
pub use product::{DiagonalVariant, ProductPoint};
pub use sets::{ConstraintParams, ConstraintSets, SphereData, SupportMask};

pub use num_complex::Complex64;
