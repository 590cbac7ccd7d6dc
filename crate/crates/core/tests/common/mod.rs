#![allow(dead_code)]

use std::f64::consts::PI;

use feasilab_core::{
    generate_instance, random_start, Complex64, ComplexField3D, Dims, FeasibilityProblem,
    InstanceConfig, ProblemInstance, SetKind,
};

pub fn field(dims: Dims, seed: u64) -> ComplexField3D {
    random_start(dims, seed, false)
}

pub fn max_abs_diff(a: &ComplexField3D, b: &ComplexField3D) -> f64 {
    assert_eq!(a.dims(), b.dims());
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `sum_x u(x) exp(sign * 2 pi i k.x / n) / sqrt(N)`, straight from the definition.
pub fn brute_dft(u: &ComplexField3D, sign: f64) -> ComplexField3D {
    let d = u.dims();
    let scale = 1.0 / (d.len() as f64).sqrt();
    ComplexField3D::from_fn(d, |ki, kj, kl| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d.nx {
            for j in 0..d.ny {
                for l in 0..d.nz {
                    let phase = 2.0
                        * PI
                        * ((ki * i) as f64 / d.nx as f64
                            + (kj * j) as f64 / d.ny as f64
                            + (kl * l) as f64 / d.nz as f64);
                    acc += u.get(i, j, l) * Complex64::from_polar(1.0, sign * phase);
                }
            }
        }
        acc * scale
    })
}

/// Solves `G c = r` for symmetric positive definite real `G` by Gaussian
/// elimination with partial pivoting. `rhs` holds several right-hand sides.
pub fn solve_dense(mut g: Vec<Vec<f64>>, mut rhs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = g.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))
            .unwrap();
        g.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = g[row][col] / g[col][col];
            if f == 0.0 {
                continue;
            }
            let (top, bottom) = g.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            let (top, bottom) = rhs.split_at_mut(row);
            for (x, p) in bottom[0].iter_mut().zip(&top[col]) {
                *x -= f * p;
            }
        }
    }
    let m = rhs[0].len();
    let mut x = vec![vec![0.0; m]; n];
    for row in (0..n).rev() {
        for c in 0..m {
            let mut s = rhs[row][c];
            for k in row + 1..n {
                s -= g[row][k] * x[k][c];
            }
            x[row][c] = s / g[row][row];
        }
    }
    x
}

/// Least-squares projection of a complex vector onto the span of real basis
/// vectors (columns need not be orthogonal).
pub fn least_squares_projection(basis: &[Vec<f64>], u: &[Complex64]) -> Vec<Complex64> {
    let n = basis.len();
    let g: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| basis[a].iter().zip(&basis[b]).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    let rhs: Vec<Vec<f64>> = basis
        .iter()
        .map(|v| {
            let re = v.iter().zip(u).map(|(x, z)| x * z.re).sum();
            let im = v.iter().zip(u).map(|(x, z)| x * z.im).sum();
            vec![re, im]
        })
        .collect();
    let c = solve_dense(g, rhs);
    let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
    for (v, coef) in basis.iter().zip(&c) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += Complex64::new(coef[0], coef[1]) * x;
        }
    }
    out
}

type Projector = Box<dyn Fn(&ComplexField3D) -> ComplexField3D + Send + Sync>;

/// Problem assembled from closures; sets without a closure are the whole space.
pub struct Toy {
    pub dims: Dims,
    pub scale: f64,
    maps: Vec<(SetKind, Projector)>,
}

impl Toy {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            scale: 1.0,
            maps: Vec::new(),
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with(
        mut self,
        set: SetKind,
        f: impl Fn(&ComplexField3D) -> ComplexField3D + Send + Sync + 'static,
    ) -> Self {
        self.maps.push((set, Box::new(f)));
        self
    }
}

impl FeasibilityProblem for Toy {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn project(&self, set: SetKind, u: &ComplexField3D) -> ComplexField3D {
        match self.maps.iter().find(|(s, _)| *s == set) {
            Some((_, f)) => f(u),
            None => u.clone(),
        }
    }

    fn gap_scale(&self) -> f64 {
        self.scale
    }
}

/// Orthogonal projector onto the (complex) span of orthonormal real vectors.
pub fn span_projector(basis: Vec<Vec<f64>>) -> impl Fn(&ComplexField3D) -> ComplexField3D {
    move |u| {
        let mut out = vec![Complex64::new(0.0, 0.0); u.data().len()];
        for v in &basis {
            let c: Complex64 = v.iter().zip(u.data()).map(|(x, z)| z * x).sum();
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        ComplexField3D::from_vec(u.dims(), out).unwrap()
    }
}

/// Plane in R^3 through the origin containing the x-axis, tilted by `theta`
/// about it.
pub fn tilted_plane(theta: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.0, 0.0], vec![0.0, theta.cos(), theta.sin()]]
}

pub fn line_dims() -> Dims {
    Dims::new(1, 1, 3).unwrap()
}

/// Five planes through the x-axis: consistent, intersection = the x-axis.
pub fn planes_toy() -> Toy {
    let angles = [0.0, 0.4, 0.9, 1.5, 2.3];
    let mut toy = Toy::new(line_dims());
    for (set, th) in SetKind::ORDER.into_iter().zip(angles) {
        toy = toy.with(set, span_projector(tilted_plane(th)));
    }
    toy
}

/// SYM = {x_2 = 0}, M = {x_2 = d} in C^2; the other sets are everything.
pub fn parallel_lines(d: f64) -> Toy {
    let dims = Dims::new(1, 1, 2).unwrap();
    Toy::new(dims)
        .with(SetKind::Sym, |u| {
            let mut v = u.clone();
            v.data_mut()[1] = Complex64::new(0.0, 0.0);
            v
        })
        .with(SetKind::Amplitude, move |u| {
            let mut v = u.clone();
            v.data_mut()[1] = Complex64::new(d, 0.0);
            v
        })
}

pub fn small_config() -> InstanceConfig {
    InstanceConfig {
        dims: Dims::cube(8).unwrap(),
        n_spheres: 2,
        sphere_radii: vec![1.5, 3.0],
        shell_half_width: 0.5,
        lf_radius: 5.0,
        supp_half_widths: [2.0, 2.0, 2.0],
        sparsity: 16,
        truth_seed: 3,
    }
}

pub fn small_instance() -> ProblemInstance {
    generate_instance(&small_config()).unwrap()
}

/// Same as [`small_instance`] but with a low-frequency ball covering the
/// whole grid, so that the ground truth is feasible.
pub fn consistent_instance() -> ProblemInstance {
    generate_instance(&InstanceConfig {
        lf_radius: 7.0,
        ..small_config()
    })
    .unwrap()
}

pub fn tiny_config() -> InstanceConfig {
    InstanceConfig {
        dims: Dims::cube(4).unwrap(),
        n_spheres: 1,
        sphere_radii: vec![1.0],
        shell_half_width: 0.5,
        lf_radius: 2.5,
        supp_half_widths: [2.0, 2.0, 2.0],
        sparsity: 16,
        truth_seed: 11,
    }
}
