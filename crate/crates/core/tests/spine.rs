use netjacobi::spineode::{
    bounded_branch, caccioppoli_check, caccioppoli_sweep, radial_ode_solve, spine_pde_residual, Polynomial,
    SpineParams, SweepConfig,
};

fn grid(dim: usize) -> Vec<Vec<f64>> {
    (0..50)
        .map(|k| (0..dim).map(|j| ((k * 7 + j * 3) % 11) as f64 * 0.9 - 4.5).collect())
        .collect()
}

#[test]
fn linear_profile_at_zero_frequency() {
    let p = SpineParams::new(1, 0.0, 0.0).unwrap();
    let t = radial_ode_solve(p, 1.0, 1.0, 1.0, 10.0, 1e-2).unwrap();
    for (r, g, dg) in t.resample(200) {
        assert!((g - r).abs() < 1e-9 * r && (dg - 1.0).abs() < 1e-9);
    }
    let phi = Polynomial::linear(&[0.3, -1.2, 2.0]);
    assert!(spine_pde_residual(0.0, &phi, &grid(3)).unwrap() < 1e-12);
}

#[test]
fn constant_profile_at_unit_frequency() {
    let p = SpineParams::new(2, 1.0, 0.0).unwrap();
    let t = radial_ode_solve(p, 1.0, 0.0, 1.0, 50.0, 1e-2).unwrap();
    assert!(t.gamma.iter().all(|g| (g - 1.0).abs() < 1e-12));
    let phi = Polynomial::constant(2, -3.0);
    assert!(spine_pde_residual(1.0, &phi, &grid(2)).unwrap() < 1e-12);
}

#[test]
fn squared_coordinate_is_not_a_solution() {
    let phi = Polynomial::new(3, vec![(1.0, vec![2, 0, 0])]).unwrap();
    assert!(spine_pde_residual(1.0, &phi, &[vec![1.0, 0.0, 0.0]]).unwrap() > 1.0);
}

#[test]
fn generic_trajectory_satisfies_both_forms() {
    let p = SpineParams::new(2, 3.0, 2.0).unwrap();
    let t = radial_ode_solve(p, 0.8, -0.3, 1.0, 128.0, 1e-2).unwrap();
    assert!(t.raw_residual() < 1e-6);
    assert!(t.divergence_agreement() < 1e-8);
}

#[test]
fn sweep_within_bound() {
    let r = caccioppoli_sweep(&SweepConfig::default()).unwrap();
    assert!(r.cells >= 3600);
    assert!(r.all_ok);
    assert!(r.max_divergence_gap < 1e-8);
    assert!(r.max_raw_residual < 1e-6);
}

#[test]
fn ratio_scales_out() {
    let p = SpineParams::new(1, 2.0, 0.0).unwrap();
    let a = radial_ode_solve(p, -0.25, 0.6, 1.0, 128.0, 1e-2).unwrap();
    let b = radial_ode_solve(p, -2.5, 6.0, 1.0, 128.0, 1e-2).unwrap();
    for rho in [4.0, 8.0, 16.0, 32.0] {
        let (x, y) = (
            caccioppoli_check(&a, rho).unwrap().ratio,
            caccioppoli_check(&b, rho).unwrap().ratio,
        );
        assert!((x - y).abs() <= 1e-12 * x, "{rho}: {x} {y}");
    }
}

#[test]
fn bounded_branch_tracks_a_line() {
    for (m, mu) in [(2, 0.0), (3, 0.0), (2, 6.0)] {
        let p = SpineParams::new(m, 0.0, mu).unwrap();
        let t = bounded_branch(p, 1.0, 1e4).unwrap();
        let slope = t.eval(1e4).0 / 1e4;
        let devs: Vec<f64> = [1e2, 3e2, 1e3, 3e3]
            .iter()
            .map(|&r| (t.eval(r).0 / r - slope).abs())
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "m={m} μ={mu}: {devs:?}");
    }
}
