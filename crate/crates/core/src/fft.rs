//! Unitary 3D discrete Fourier transform.
//!
//! Each 1D pass is scaled by `1/sqrt(n)`, so the transform is an isometry and
//! its inverse is its adjoint. Power-of-two lengths use an iterative radix-2
//! kernel; other lengths go through Bluestein's chirp-z reduction onto a
//! power-of-two convolution. Output is in standard FFT order (DC at index 0).

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::field::{Axis, ComplexField3D, Dims};

#[derive(Clone, Debug)]
struct Radix2 {
    n: usize,
    /// `exp(-2 pi i k / n)` for `k < n / 2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| unit_phase(-2.0 * PI * k as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|k| if bits == 0 { 0 } else { k.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Self { n, twiddles, bitrev }
    }

    /// Unnormalized forward transform in place.
    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            let r = self.bitrev[k];
            if r > k {
                buf.swap(k, r);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Clone, Debug)]
struct Bluestein {
    n: usize,
    inner: Radix2,
    /// `exp(-i pi k^2 / n)` for `k < n`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp, already divided by the
    /// inner length so the inner inverse needs no extra scaling.
    kernel: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        let two_n = 2 * n as u64;
        let chirp: Vec<Complex64> = (0..n as u64)
            .map(|k| unit_phase(-PI * ((k * k) % two_n) as f64 / n as f64))
            .collect();
        let mut kernel = alloc::vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        let scale = 1.0 / m as f64;
        for z in &mut kernel {
            *z *= scale;
        }
        Self {
            n,
            inner,
            chirp,
            kernel,
        }
    }

    fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let m = self.inner.n;
        scratch.clear();
        scratch.resize(m, Complex64::new(0.0, 0.0));
        for k in 0..self.n {
            scratch[k] = buf[k] * self.chirp[k];
        }
        self.inner.forward(scratch);
        for (a, b) in scratch.iter_mut().zip(&self.kernel) {
            *a = (*a * b).conj();
        }
        // inverse via conjugation: ifft(x) = conj(fft(conj(x)))
        self.inner.forward(scratch);
        for k in 0..self.n {
            buf[k] = scratch[k].conj() * self.chirp[k];
        }
    }
}

#[derive(Clone, Debug)]
enum Kernel {
    Identity,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// Plan for unnormalized 1D transforms of a fixed length.
#[derive(Clone, Debug)]
pub struct Fft1d {
    kernel: Kernel,
    len: usize,
}

impl Fft1d {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let kernel = if len == 1 {
            Kernel::Identity
        } else if len.is_power_of_two() {
            Kernel::Radix2(Radix2::new(len))
        } else {
            Kernel::Bluestein(Bluestein::new(len))
        };
        Self { kernel, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `X_k = sum_j x_j exp(-2 pi i j k / n)`, no scaling.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        debug_assert_eq!(buf.len(), self.len);
        match &self.kernel {
            Kernel::Identity => {}
            Kernel::Radix2(r) => r.forward(buf),
            Kernel::Bluestein(b) => b.forward(buf, scratch),
        }
    }

    /// `x_j = sum_k X_k exp(+2 pi i j k / n)`, no scaling.
    pub fn backward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        for z in buf.iter_mut() {
            *z = z.conj();
        }
        self.forward(buf, scratch);
        for z in buf.iter_mut() {
            *z = z.conj();
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
}

/// Unitary 3D DFT plan for one grid shape.
#[derive(Clone, Debug)]
pub struct Dft3 {
    dims: Dims,
    plans: [Fft1d; 3],
}

impl Dft3 {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            plans: [Fft1d::new(dims.nx), Fft1d::new(dims.ny), Fft1d::new(dims.nz)],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn forward(&self, u: &ComplexField3D) -> ComplexField3D {
        let mut out = u.clone();
        self.forward_in_place(&mut out);
        out
    }

    pub fn inverse(&self, v: &ComplexField3D) -> ComplexField3D {
        let mut out = v.clone();
        self.inverse_in_place(&mut out);
        out
    }

    pub fn forward_in_place(&self, u: &mut ComplexField3D) {
        self.transform(u, Direction::Forward);
    }

    pub fn inverse_in_place(&self, v: &mut ComplexField3D) {
        self.transform(v, Direction::Backward);
    }

    fn transform(&self, u: &mut ComplexField3D, dir: Direction) {
        assert_eq!(u.dims(), self.dims, "field does not match the transform plan");
        let d = self.dims;
        let data = u.data_mut();
        let mut scratch = Vec::new();
        let mut line = Vec::new();
        for (axis, plan) in Axis::ALL.iter().zip(&self.plans) {
            let n = plan.len();
            if n == 1 {
                continue;
            }
            let stride = d.stride(*axis);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    run(plan, chunk, &mut scratch, dir);
                }
                continue;
            }
            line.resize(n, Complex64::new(0.0, 0.0));
            // line starts: all k with coordinate 0 along the axis
            let block = stride * n;
            for outer in (0..d.len()).step_by(block) {
                for inner in 0..stride {
                    let start = outer + inner;
                    for (t, z) in line.iter_mut().enumerate() {
                        *z = data[start + t * stride];
                    }
                    run(plan, &mut line, &mut scratch, dir);
                    for (t, z) in line.iter().enumerate() {
                        data[start + t * stride] = *z;
                    }
                }
            }
        }
        let scale = 1.0 / libm::sqrt(d.len() as f64);
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

fn run(plan: &Fft1d, buf: &mut [Complex64], scratch: &mut Vec<Complex64>, dir: Direction) {
    match dir {
        Direction::Forward => plan.forward(buf, scratch),
        Direction::Backward => plan.backward(buf, scratch),
    }
}

#[inline]
fn unit_phase(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// One-shot forward transform; builds a plan on every call.
pub fn dft3_forward(u: &ComplexField3D) -> ComplexField3D {
    Dft3::new(u.dims()).forward(u)
}

/// One-shot inverse transform; builds a plan on every call.
pub fn dft3_inverse(v: &ComplexField3D) -> ComplexField3D {
    Dft3::new(v.dims()).inverse(v)
}

/// Centered integer frequency of FFT bin `i` on an axis of length `n`:
/// `i` for `i < n/2`, otherwise `i - n`.
#[inline]
pub fn centered_frequency(i: usize, n: usize) -> i64 {
    if 2 * i < n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Euclidean length of the centered frequency vector of bin `(i, j, l)`.
pub fn frequency_radius(dims: Dims, i: usize, j: usize, l: usize) -> f64 {
    let kx = centered_frequency(i, dims.nx) as f64;
    let ky = centered_frequency(j, dims.ny) as f64;
    let kz = centered_frequency(l, dims.nz) as f64;
    libm::sqrt(kx * kx + ky * ky + kz * kz)
}
