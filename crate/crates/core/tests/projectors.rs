mod common;

use std::f64::consts::PI;

use common::{brute_dft, consistent_instance, field, least_squares_projection, max_abs_diff, small_instance};
use feasilab_core::fft::centered_frequency;
use feasilab_core::product::{project_d, DiagonalVariant};
use feasilab_core::sets::{
    project_amplitude, project_low_freq, project_real, project_sparse, project_sparse_real,
    project_support, project_symmetric,
};
use feasilab_core::{
    Complex64, ComplexField3D, ConstraintParams, ConstraintSets, Dft3, Dims, FeasibilityProblem,
    ProductPoint, SetKind, SphereData, SupportMask,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Smallest distance from `u` to a real vector with at most `s` nonzeros,
/// by enumerating every support of size `s`.
fn sr_brute_force_distance(u: &[Complex64], s: usize) -> f64 {
    let n = u.len();
    let imag: f64 = u.iter().map(|z| z.im * z.im).sum();
    let mut best = f64::INFINITY;
    for bits in 0u32..(1 << n) {
        if bits.count_ones() as usize != s.min(n) {
            continue;
        }
        let dropped: f64 = (0..n)
            .filter(|k| bits & (1 << k) == 0)
            .map(|k| u[k].re * u[k].re)
            .sum();
        best = best.min(imag + dropped);
    }
    best.sqrt()
}

fn in_sr(v: &ComplexField3D, s: usize) -> bool {
    v.data().iter().all(|z| z.im == 0.0) && v.data().iter().filter(|z| z.re != 0.0).count() <= s
}

#[test]
fn sr_worked_examples() {
    let d = Dims::new(1, 1, 4).unwrap();
    let u = ComplexField3D::from_vec(d, vec![c(3.0, 1.0), c(-5.0, 0.0), c(2.0, -2.0), c(0.5, 0.0)])
        .unwrap();
    let v = project_sparse_real(&u, 2);
    assert_eq!(v.data(), &[c(3.0, 0.0), c(-5.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!((u.distance(&v) - sr_brute_force_distance(u.data(), 2)).abs() < 1e-12);

    let u = ComplexField3D::from_vec(d, vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)])
        .unwrap();
    let v = project_sparse_real(&u, 1);
    assert_eq!(v.data(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let alt = ComplexField3D::from_vec(d, vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
        .unwrap();
    assert!((u.distance(&v) - u.distance(&alt)).abs() < 1e-15);
    assert!((u.distance(&v) - sr_brute_force_distance(u.data(), 1)).abs() < 1e-12);
}

#[test]
fn sr_exact_on_exhaustive_small_integer_inputs() {
    // Every vector in {-1, 0, 1}^5 (real and imaginary): maximal tie density.
    let d = Dims::new(1, 1, 5).unwrap();
    let vals = [-1.0, 0.0, 1.0];
    for code in 0..3usize.pow(5) {
        let mut k = code;
        let data: Vec<Complex64> = (0..5)
            .map(|p| {
                let re = vals[k % 3];
                k /= 3;
                c(re, if p % 2 == 0 { 0.5 * re } else { 0.0 })
            })
            .collect();
        let u = ComplexField3D::from_vec(d, data).unwrap();
        for s in 1..=3 {
            let v = project_sparse_real(&u, s);
            assert!(in_sr(&v, s));
            let want = sr_brute_force_distance(u.data(), s);
            assert!((u.distance(&v) - want).abs() < 1e-12, "code {code} s {s}");
        }
    }
}

#[test]
fn sr_order_matters() {
    let d = Dims::new(1, 1, 2).unwrap();
    let u = ComplexField3D::from_vec(d, vec![c(0.0, 4.0), c(1.0, 0.0)]).unwrap();
    let good = project_sparse(&project_real(&u), 1);
    let swapped = project_real(&project_sparse(&u, 1));
    assert_ne!(good, swapped);
    assert!(u.distance(&good) < u.distance(&swapped));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sr_matches_subset_enumeration(
        n in 1usize..=8,
        s in 1usize..=3,
        raw in prop::collection::vec((-4i32..=4, -4i32..=4), 8),
        scale in prop::sample::select(vec![1.0, 0.5, 0.37]),
    ) {
        let data: Vec<Complex64> = raw[..n]
            .iter()
            .map(|&(a, b)| c(a as f64 * scale, b as f64 * scale))
            .collect();
        let u = ComplexField3D::from_vec(Dims::new(1, 1, n).unwrap(), data).unwrap();
        let v = project_sparse_real(&u, s);
        prop_assert!(in_sr(&v, s));
        let want = sr_brute_force_distance(u.data(), s);
        prop_assert!((u.distance(&v) - want).abs() < 1e-12);
    }
}

/// Orthogonal-or-not spanning set of SYM: for each orbit of the three axis
/// reversals, the signed indicator of the orbit (even in x, odd in y and z);
/// orbits where the signs cancel contribute nothing.
fn sym_basis(d: Dims) -> Vec<Vec<f64>> {
    let mut seen = vec![false; d.len()];
    let mut basis = Vec::new();
    for k in 0..d.len() {
        if seen[k] {
            continue;
        }
        let (i, j, l) = d.coords(k);
        let mut v = vec![0.0; d.len()];
        for fx in [false, true] {
            for fy in [false, true] {
                for fz in [false, true] {
                    let ii = if fx { d.nx - 1 - i } else { i };
                    let jj = if fy { d.ny - 1 - j } else { j };
                    let ll = if fz { d.nz - 1 - l } else { l };
                    let sign = if fy ^ fz { -1.0 } else { 1.0 };
                    let m = d.index(ii, jj, ll);
                    v[m] += sign;
                    seen[m] = true;
                }
            }
        }
        if v.iter().any(|&x| x != 0.0) {
            basis.push(v);
        }
    }
    basis
}

#[test]
fn sym_matches_least_squares_oracle() {
    for (nx, ny, nz) in [(4, 4, 4), (3, 4, 5), (5, 3, 3)] {
        let d = Dims::new(nx, ny, nz).unwrap();
        let basis = sym_basis(d);
        for seed in 0..3 {
            let u = field(d, seed);
            let want = least_squares_projection(&basis, u.data());
            let got = project_symmetric(&u);
            let err = got
                .data()
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "{d} seed {seed}: {err}");
        }
    }
}

fn flatten(p: &ProductPoint) -> Vec<Complex64> {
    p.blocks.iter().flat_map(|b| b.data().iter().copied()).collect()
}

#[test]
fn diagonal_matches_least_squares_oracle() {
    let inst = small_instance();
    let sets = inst.constraint_sets().unwrap();
    for n in [2, 4] {
        let d = Dims::cube(n).unwrap();
        let len = d.len();
        // basis of the diagonal: e_k repeated in all five blocks
        let basis: Vec<Vec<f64>> = (0..len)
            .map(|k| {
                let mut v = vec![0.0; 5 * len];
                for b in 0..5 {
                    v[b * len + k] = 1.0;
                }
                v
            })
            .collect();
        let p = ProductPoint::new(std::array::from_fn(|b| field(d, 100 + b as u64)));
        let want = least_squares_projection(&basis, &flatten(&p));
        // the plain average does not touch the problem; any instance works
        let got = flatten(&project_d(&&sets, &p, DiagonalVariant::Average));
        let err = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{n}: {err}");
    }
}

#[test]
fn diagonal_average_of_single_block() {
    let d = Dims::cube(2).unwrap();
    let u = field(d, 5);
    let z = ComplexField3D::zeros(d);
    let p = ProductPoint::new([u.clone(), z.clone(), z.clone(), z.clone(), z]);
    let sets = small_instance().constraint_sets().unwrap();
    let q = project_d(&sets, &p, DiagonalVariant::Average);
    for b in &q.blocks {
        assert!(max_abs_diff(b, &(&u * 0.2)) < 1e-15);
    }
}

#[test]
fn sym_annihilates_all_ones_and_fixes_members() {
    let d = Dims::cube(4).unwrap();
    let ones = ComplexField3D::from_fn(d, |_, _, _| c(1.0, 0.0));
    assert_eq!(project_symmetric(&ones).norm(), 0.0);
    let m = project_symmetric(&field(d, 9));
    assert!(project_symmetric(&m).distance(&m) < 1e-12);
}

fn single_index_spheres(d: Dims, idx: [u32; 3], b: f64) -> SphereData {
    SphereData::new(d, vec![idx], vec![b]).unwrap()
}

#[test]
fn amplitude_matches_phase_sweep_oracle() {
    let d = Dims::cube(4).unwrap();
    let (ki, kj, kl) = (1usize, 2usize, 3usize);
    let b = 0.7;
    let spheres = single_index_spheres(d, [ki as u32, kj as u32, kl as u32], b);
    let dft = Dft3::new(d);
    for seed in 0..3 {
        let u = field(d, 20 + seed);
        let got = project_amplitude(&u, &spheres, &dft);

        // Independent evaluation: the candidate for phase theta differs from u
        // by (b e^{i theta} - uhat_k) times the inverse basis wave of k.
        let uhat = brute_dft(&u, -1.0).get(ki, kj, kl);
        let wave = ComplexField3D::from_fn(d, |i, j, l| {
            let ph = 2.0 * PI * ((ki * i + kj * j + kl * l) as f64 / 4.0);
            Complex64::from_polar(1.0 / 8.0, ph)
        });
        let candidate = |theta: f64| {
            let coef = Complex64::from_polar(b, theta) - uhat;
            ComplexField3D::from_fn(d, |i, j, l| u.get(i, j, l) + coef * wave.get(i, j, l))
        };
        let steps = 7200;
        let (best_theta, best_dist) = (0..steps)
            .map(|t| {
                let th = 2.0 * PI * t as f64 / steps as f64;
                (th, candidate(th).distance(&u))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let best = candidate(best_theta);
        assert!(u.distance(&got) <= best_dist + 1e-12);
        // sweep resolution pi/3600 on a circle of radius b
        assert!(got.distance(&best) <= b * PI / steps as f64 + 1e-12);
    }
}

#[test]
fn amplitude_zero_spectrum_picks_real_phase() {
    let d = Dims::cube(4).unwrap();
    let spheres = single_index_spheres(d, [1, 0, 0], 1.0);
    let dft = Dft3::new(d);
    let v = project_amplitude(&ComplexField3D::zeros(d), &spheres, &dft);
    let vhat = dft.forward(&v);
    assert!((vhat.get(1, 0, 0) - c(1.0, 0.0)).norm() < 1e-14);
    assert!(vhat.data().iter().enumerate().all(|(k, z)| k == d.index(1, 0, 0) || z.norm() < 1e-14));
}

#[test]
fn amplitude_keeps_members_and_unconstrained_bins() {
    let inst = small_instance();
    let sets = inst.constraint_sets().unwrap();
    let truth = inst.truth.as_ref().unwrap();
    assert!(sets.project(SetKind::Amplitude, truth).distance(truth) < 1e-10);

    let u = field(inst.dims(), 4);
    let dft = sets.dft();
    let before = dft.forward(&u);
    let after = dft.forward(&sets.project(SetKind::Amplitude, &u));
    let on_sphere: std::collections::HashSet<usize> =
        inst.spheres.linear_indexes().iter().copied().collect();
    for k in 0..u.data().len() {
        if on_sphere.contains(&k) {
            continue;
        }
        assert!((before.data()[k] - after.data()[k]).norm() < 1e-12);
    }
}

#[test]
fn low_freq_matches_mask_oracle() {
    let d = Dims::cube(4).unwrap();
    let dft = Dft3::new(d);
    for (seed, radius) in [(0, 0.0), (1, 1.0), (2, 1.5), (3, 2.0), (4, 3.5)] {
        let u = field(d, seed);
        let mut spec = brute_dft(&u, -1.0);
        for i in 0..4 {
            for j in 0..4 {
                for l in 0..4 {
                    let f = |n: usize| if 2 * n < 4 { n as f64 } else { n as f64 - 4.0 };
                    if f(i).powi(2) + f(j).powi(2) + f(l).powi(2) > radius * radius {
                        spec.set(i, j, l, c(0.0, 0.0));
                    }
                }
            }
        }
        let want = brute_dft(&spec, 1.0);
        assert!(max_abs_diff(&project_low_freq(&u, radius, &dft), &want) < 1e-12);
    }
    // radius zero keeps the mean only
    let u = field(d, 7);
    let mean: Complex64 = u.data().iter().sum::<Complex64>() / 64.0;
    let v = project_low_freq(&u, 0.0, &dft);
    assert!(v.data().iter().all(|z| (z - mean).norm() < 1e-14));
    // radius beyond the corner keeps everything
    assert!(project_low_freq(&u, 3.5, &dft).distance(&u) < 1e-12);
    assert_eq!(centered_frequency(2, 4), -2);
}

fn random_symmetric_mask(d: Dims, seed: u64) -> SupportMask {
    let u = field(d, seed);
    let raw: Vec<bool> = u.data().iter().map(|z| z.re > 0.3).collect();
    SupportMask::from_fn(d, |i, j, l| {
        let mut any = false;
        for ii in [i, d.nx - 1 - i] {
            for jj in [j, d.ny - 1 - j] {
                for ll in [l, d.nz - 1 - l] {
                    any |= raw[d.index(ii, jj, ll)];
                }
            }
        }
        any
    })
}

#[test]
fn support_matches_entrywise_oracle() {
    let d = Dims::new(4, 5, 3).unwrap();
    for seed in 0..4 {
        let mask = random_symmetric_mask(d, seed);
        assert!(mask.is_symmetric());
        let u = field(d, 50 + seed);
        let v = project_support(&u, &mask);
        for (k, (a, b)) in u.data().iter().zip(v.data()).enumerate() {
            let want = if mask.cells()[k] { *a } else { c(0.0, 0.0) };
            assert_eq!(*b, want);
        }
    }
    let u = field(d, 1);
    assert_eq!(project_support(&u, &SupportMask::full(d)), u);
    let none = SupportMask::new(d, vec![false; d.len()]).unwrap();
    assert_eq!(project_support(&u, &none).norm(), 0.0);
}

#[test]
fn support_reflection_negates_masked_voxel() {
    let d = Dims::cube(3).unwrap();
    let mut cells = vec![true; d.len()];
    cells[13] = false;
    let mask = SupportMask::new(d, cells).unwrap();
    let u = field(d, 8);
    let r = u.reflect_through(&project_support(&u, &mask));
    for k in 0..d.len() {
        let want = if k == 13 { -u.data()[k] } else { u.data()[k] };
        assert!((r.data()[k] - want).norm() < 1e-15);
    }
}

const SETS: [SetKind; 5] = SetKind::ORDER;
const CONVEX: [SetKind; 3] = [SetKind::Sym, SetKind::Support, SetKind::LowFreq];

#[test]
fn projectors_are_idempotent_and_reflections_involutive() {
    let inst = small_instance();
    let sets = inst.constraint_sets().unwrap();
    for seed in 0..6 {
        let u = &field(inst.dims(), seed) * (0.1 + seed as f64);
        for set in SETS {
            let p = sets.project(set, &u);
            let pp = sets.project(set, &p);
            assert!(pp.distance(&p) <= 1e-10 * (1.0 + u.norm()), "{set}");
            let r = sets.reflect(set, &p);
            assert!(r.distance(&p) <= 1e-10 * (1.0 + u.norm()), "{set}: members are fixed by R");
        }
        for set in CONVEX {
            let rr = sets.reflect(set, &sets.reflect(set, &u));
            assert!(rr.distance(&u) <= 1e-10 * (1.0 + u.norm()), "{set}");
        }
    }
}

#[test]
fn projections_beat_200_random_members() {
    let inst = small_instance();
    let sets = inst.constraint_sets().unwrap();
    let d = inst.dims();
    for set in SETS {
        let members: Vec<ComplexField3D> = (0..200)
            .map(|k| {
                let scale = 0.05 + 0.01 * (k % 40) as f64;
                sets.project(set, &(&field(d, 10_000 + k) * scale))
            })
            .collect();
        for seed in 0..3 {
            let u = &field(d, 500 + seed) * 0.08;
            let best = u.distance(&sets.project(set, &u));
            for m in &members {
                assert!(best <= u.distance(m) + 1e-12, "{set}");
            }
        }
    }
}

#[test]
fn convex_projectors_firmly_nonexpansive() {
    let inst = small_instance();
    let sets = inst.constraint_sets().unwrap();
    let d = inst.dims();
    for seed in 0..8 {
        let x = field(d, 2 * seed);
        let y = &field(d, 2 * seed + 1) * 0.5;
        let xy = x.distance(&y).powi(2);
        for set in CONVEX {
            let (px, py) = (sets.project(set, &x), sets.project(set, &y));
            let lhs = px.distance(&py).powi(2) + (&x - &px).distance(&(&y - &py)).powi(2);
            assert!(lhs <= xy + 1e-10, "{set}");
            let (rx, ry) = (sets.reflect(set, &x), sets.reflect(set, &y));
            assert!(rx.distance(&ry) <= x.distance(&y) + 1e-10, "{set}");
        }
        let p = ProductPoint::new(std::array::from_fn(|b| field(d, 900 + 10 * seed + b as u64)));
        let q = ProductPoint::new(std::array::from_fn(|b| field(d, 950 + 10 * seed + b as u64)));
        let (pp, pq) = (
            project_d(&sets, &p, DiagonalVariant::Average),
            project_d(&sets, &q, DiagonalVariant::Average),
        );
        let rp = ProductPoint::lin_comb(1.0, &p, -1.0, &pp);
        let rq = ProductPoint::lin_comb(1.0, &q, -1.0, &pq);
        let lhs = pp.distance(&pq).powi(2) + rp.distance(&rq).powi(2);
        assert!(lhs <= p.distance(&q).powi(2) + 1e-10);
    }
}

#[test]
fn product_projection_is_blockwise() {
    let inst = small_instance();
    let sets = inst.constraint_sets().unwrap();
    let d = inst.dims();
    let p = ProductPoint::new(std::array::from_fn(|b| field(d, 70 + b as u64)));
    let q = feasilab_core::product::project_c(&sets, &p);
    for (k, set) in SETS.into_iter().enumerate() {
        assert_eq!(q.blocks[k], sets.project(set, &p.blocks[k]));
    }
    // a common block in all five sets is fixed by both projectors
    let inst = consistent_instance();
    let sets = inst.constraint_sets().unwrap();
    let truth = inst.truth.clone().unwrap();
    let t = ProductPoint::replicate(&truth);
    assert!(feasilab_core::product::project_c(&sets, &t).distance(&t) < 1e-10);
    assert!(project_d(&sets, &t, DiagonalVariant::Average).distance(&t) < 1e-15);
}

/// A compact box support and a small low-frequency ball share only the zero
/// field: alternating between them, the relative LF-to-SUPP distance of the
/// iterates never approaches zero.
#[test]
fn support_and_low_freq_are_inconsistent() {
    let d = Dims::cube(16).unwrap();
    let params = ConstraintParams {
        dims: d,
        lf_radius: 4.0,
        supp_mask: SupportMask::centered_box(d, [2.0, 2.0, 2.0]),
        sparsity: d.len(),
    };
    let spheres = SphereData::new(d, vec![[1, 0, 0]], vec![1.0]).unwrap();
    let sets = ConstraintSets::new(params, spheres).unwrap();
    let mut u = field(d, 3);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let lf = sets.project(SetKind::LowFreq, &u);
        let su = sets.project(SetKind::Support, &lf);
        worst = worst.min(lf.distance(&su) / lf.norm());
        u = su;
    }
    assert!(worst > 0.05, "relative gap {worst}");
}
