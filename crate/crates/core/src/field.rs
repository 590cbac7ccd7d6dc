//! Dense complex 3D fields.
//!
//! Storage is row-major with the z index varying fastest, then y, then x:
//! entry `(i, j, l)` lives at `(i * ny + j) * nz + l`.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid dimensions must be positive, got {nx}x{ny}x{nz}"
            )));
        }
        Ok(Self { nx, ny, nz })
    }

    /// Cubic grid `n x n x n`.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    #[inline]
    pub const fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.ny + j) * self.nz + l
    }

    #[inline]
    pub const fn coords(&self, k: usize) -> (usize, usize, usize) {
        let l = k % self.nz;
        let rest = k / self.nz;
        (rest / self.ny, rest % self.ny, l)
    }

    pub const fn extent(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::Z => self.nz,
        }
    }

    /// Distance between consecutive entries along `axis`.
    pub const fn stride(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.ny * self.nz,
            Axis::Y => self.nz,
            Axis::Z => 1,
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// Coordinate axis of a 3D grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Maps the 1-based axis numbers 1, 2, 3 onto X, Y, Z.
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            3 => Ok(Axis::Z),
            _ => Err(Error::InvalidArgument(alloc::format!(
                "axis must be 1, 2 or 3, got {n}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField3D {
    dims: Dims,
    data: Vec<Complex64>,
}

impl ComplexField3D {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            data: alloc::vec![Complex64::new(0.0, 0.0); dims.len()],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                found: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn from_real(dims: Dims, values: &[f64]) -> Result<Self> {
        Self::from_vec(dims, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for i in 0..dims.nx {
            for j in 0..dims.ny {
                for l in 0..dims.nz {
                    data.push(f(i, j, l));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize) -> Complex64 {
        self.data[self.dims.index(i, j, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, l: usize, value: Complex64) {
        let k = self.dims.index(i, j, l);
        self.data[k] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Euclidean norm over all entries.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.assert_same_dims(other);
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        libm::sqrt(s)
    }

    /// Real part of the Hermitian inner product `<self, other>`.
    pub fn real_dot(&self, other: &Self) -> f64 {
        self.assert_same_dims(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Field with the index along `axis` reversed: for X the entry at
    /// `(i, j, l)` is taken from `(nx - 1 - i, j, l)`.
    pub fn axis_reverse(&self, axis: Axis) -> Self {
        let d = self.dims;
        let n = d.extent(axis);
        let stride = d.stride(axis);
        let mut out = Vec::with_capacity(d.len());
        for k in 0..d.len() {
            let pos = (k / stride) % n;
            let mirrored = k + (n - 1 - pos) * stride - pos * stride;
            out.push(self.data[mirrored]);
        }
        Self { dims: d, data: out }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `a * x + b * y`, entrywise.
    pub fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x.assert_same_dims(y);
        Self {
            dims: x.dims,
            data: x
                .data
                .iter()
                .zip(&y.data)
                .map(|(p, q)| p * a + q * b)
                .collect(),
        }
    }

    /// `2 * p - self`: the reflection of `self` through the point `p`.
    pub fn reflect_through(&self, p: &Self) -> Self {
        Self::lin_comb(2.0, p, -1.0, self)
    }

    #[inline]
    fn assert_same_dims(&self, other: &Self) {
        assert_eq!(
            self.dims, other.dims,
            "field dimension mismatch: {} vs {}",
            self.dims, other.dims
        );
    }
}

impl Add for &ComplexField3D {
    type Output = ComplexField3D;

    fn add(self, rhs: Self) -> ComplexField3D {
        ComplexField3D::lin_comb(1.0, self, 1.0, rhs)
    }
}

impl Sub for &ComplexField3D {
    type Output = ComplexField3D;

    fn sub(self, rhs: Self) -> ComplexField3D {
        ComplexField3D::lin_comb(1.0, self, -1.0, rhs)
    }
}

impl Mul<f64> for &ComplexField3D {
    type Output = ComplexField3D;

    fn mul(self, rhs: f64) -> ComplexField3D {
        self.map(|z| z * rhs)
    }
}

impl Neg for &ComplexField3D {
    type Output = ComplexField3D;

    fn neg(self) -> ComplexField3D {
        self.map(|z| -z)
    }
}
