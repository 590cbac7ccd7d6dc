mod common;

use common::{small_config, small_instance, tiny_config};
use feasilab_core::sets::{project_sparse_real, project_support, project_symmetric};
use feasilab_core::{
    generate_instance, run, Dims, Error, FeasibilityProblem, InstanceConfig, MonitorKind,
    SetKind, SplittingOperator, StopRule,
};

#[test]
fn truth_lies_in_the_constructor_sets() {
    for cfg in [small_config(), tiny_config(), InstanceConfig::desk()] {
        let inst = generate_instance(&cfg).unwrap();
        let t = inst.truth.as_ref().unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-12);
        assert!(project_symmetric(t).distance(t) <= 1e-12);
        assert!(project_support(t, &inst.params.supp_mask).distance(t) <= 1e-12);
        assert!(project_sparse_real(t, cfg.sparsity).distance(t) <= 1e-12);
        assert!(inst.spheres.amplitudes().iter().all(|&b| b >= 0.0));
        assert!(inst.spheres.norm_b() > 0.0);
        // the data are exactly the truth's amplitudes
        let sets = inst.constraint_sets().unwrap();
        assert!(sets.project(SetKind::Amplitude, t).distance(t) < 1e-10);
    }
}

#[test]
fn generation_is_reproducible() {
    let a = small_instance();
    let b = small_instance();
    assert_eq!(a, b);
    let other = generate_instance(&InstanceConfig {
        truth_seed: 4,
        ..small_config()
    })
    .unwrap();
    assert_ne!(a.truth, other.truth);
}

#[test]
fn desk_preset_reports_its_data_fraction() {
    let inst = generate_instance(&InstanceConfig::desk()).unwrap();
    let f = inst.data_fraction();
    assert!(f > 0.0 && f < 1.0);
    assert_eq!(inst.dims(), Dims::cube(16).unwrap());
    assert_eq!(inst.params.supp_mask.count(), 64);
}

#[test]
fn invalid_configs_are_rejected() {
    let base = small_config();
    let cases = [
        InstanceConfig { sphere_radii: vec![1.5], ..base.clone() },
        InstanceConfig { sphere_radii: vec![1.5, 1.5], ..base.clone() },
        InstanceConfig { sphere_radii: vec![1.5, 99.0], ..base.clone() },
        InstanceConfig { sparsity: 0, ..base.clone() },
        InstanceConfig { sparsity: 65, ..base.clone() },
        InstanceConfig { shell_half_width: 0.0, ..base.clone() },
        InstanceConfig { lf_radius: -1.0, ..base.clone() },
        // no voxel at distance 1.2 +- 0.05 on the integer lattice
        InstanceConfig { sphere_radii: vec![1.2, 3.0], shell_half_width: 0.05, ..base.clone() },
    ];
    for cfg in cases {
        assert!(matches!(generate_instance(&cfg), Err(Error::Config(_))), "{cfg:?}");
    }
}

#[test]
fn sparsity_splitting_an_orbit_is_rejected() {
    // orbits of the axis reversals on an even grid have 8 voxels
    let cfg = InstanceConfig { sparsity: 12, ..small_config() };
    assert!(matches!(generate_instance(&cfg), Err(Error::Config(_))));
}

#[test]
fn full_data_limit() {
    let dims = Dims::cube(8).unwrap();
    let radii: Vec<f64> = (0..7).map(|k| 0.5 + k as f64).collect();
    let cfg = InstanceConfig {
        dims,
        n_spheres: radii.len(),
        sphere_radii: radii,
        shell_half_width: 0.5,
        lf_radius: 7.0,
        supp_half_widths: [4.0, 4.0, 4.0],
        sparsity: dims.len(),
        truth_seed: 21,
    };
    let inst = generate_instance(&cfg).unwrap();
    assert_eq!(inst.spheres.len(), dims.len());
    assert_eq!(inst.data_fraction(), 1.0);
    let sets = inst.constraint_sets().unwrap();
    let u0 = feasilab_core::random_start(dims, 1, false);
    let rule = StopRule::new(1e-10, 500, MonitorKind::ShadowDiff).unwrap();
    let trace = run(&SplittingOperator::cyclic_projections(), &sets, &u0, &rule).unwrap();
    assert!(trace.converged());
    let g = feasilab_core::gap(&sets, &trace.final_shadow).unwrap();
    assert!(g.sym_m < 1e-8, "{g:?}");
}
