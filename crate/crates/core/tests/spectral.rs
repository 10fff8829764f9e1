use netjacobi::jacobi::{rotation_subspace, translation_rank};
use netjacobi::linalg::max_principal_sine;
use netjacobi::net::{catalog, NetName};
use netjacobi::spectral::{
    eigenmodes, eigenvalues, gram_check, quadratic_form_defect, subspace_sine, translation_fields, SpectralOptions,
};

fn opts(lambda_max: f64) -> SpectralOptions {
    SpectralOptions {
        lambda_max,
        ..Default::default()
    }
}

#[test]
fn tetrahedron_low_spectrum() {
    let tet = catalog(NetName::Tetrahedron).unwrap();
    let s = eigenvalues(&tet, opts(50.0)).unwrap();
    let first = &s.eigenspaces[0];
    assert!(first.lambda.abs() <= 1e-8);
    assert_eq!(first.multiplicity, 3);
    assert_eq!(s.multiplicity(1.0, 1e-8), 3);
    assert!(s.negative_eigenvalues.is_empty());
    assert!(gram_check(&tet, &s) < 1e-8);
    assert!(quadratic_form_defect(&tet, &s) < 1e-7);
    let rot = rotation_subspace(&tet).unwrap().basis;
    let one = s.eigenspaces.iter().find(|e| (e.lambda - 1.0).abs() < 1e-8).unwrap();
    assert!(subspace_sine(&tet, &one.modes, &rot) < 1e-6);
}

#[test]
fn tetrahedron_weyl_count() {
    let tet = catalog(NetName::Tetrahedron).unwrap();
    let s = eigenvalues(&tet, opts(200.0)).unwrap();
    let w = s.weyl(&tet, 200.0);
    let total = 6.0 * 109.4712206f64.to_radians();
    assert!((w.predicted - total / std::f64::consts::PI * 200f64.sqrt()).abs() < 1e-6);
    assert!((w.count as f64 - w.predicted).abs() <= 4.0, "{w:?}");
}

#[test]
fn catalog_spectral_invariants() {
    for name in NetName::ALL {
        let net = catalog(name).unwrap();
        let s = eigenvalues(&net, opts(4.0)).unwrap();
        assert!(s.eigenspaces.iter().all(|e| e.lambda >= -1e-8), "{name}");
        assert!(s.negative_eigenvalues.is_empty(), "{name}");
        assert!(s.eigenspaces[0].lambda.abs() < 1e-8, "{name}");
        assert!(s.multiplicity(0.0, 1e-8) >= translation_rank(&net), "{name}");
        let tr = translation_fields(&net);
        let zero = eigenmodes(&net, 0.0).unwrap();
        assert!(zero.dim() >= tr.dim());
        // translations lie inside the zero eigenspace
        let g = netjacobi::jacobi::l2_metric(&net, 0.0);
        let z = zero.coords(&net);
        let t = tr.coords(&net);
        let proj = &z * (z.transpose() * &g * &t);
        assert!((proj - &t).amax() < 1e-8, "{name}");
        if name.polyhedral() {
            let rot = rotation_subspace(&net).unwrap().basis;
            assert_eq!(s.multiplicity(1.0, 1e-8), rot.dim(), "{name}");
            let one = eigenmodes(&net, 1.0).unwrap();
            let g1 = netjacobi::jacobi::l2_metric(&net, 1.0);
            assert!(
                max_principal_sine(&one.coords(&net), &rot.coords(&net), &g1) < 1e-6,
                "{name}"
            );
        }
    }
}

#[test]
fn suspension_zero_modes() {
    let net = catalog(NetName::YSuspension).unwrap();
    let zero = eigenmodes(&net, 0.0).unwrap();
    assert_eq!(translation_fields(&net).dim(), 2);
    assert_eq!(zero.dim(), 2);
}

#[test]
fn output_independent_of_thread_count() {
    let tet = catalog(NetName::Cube).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| eigenvalues(&tet, opts(10.0)).unwrap())
    };
    let (a, b) = (run(1), run(4));
    let la: Vec<_> = a
        .eigenspaces
        .iter()
        .map(|e| (e.lambda.to_bits(), e.multiplicity))
        .collect();
    let lb: Vec<_> = b
        .eigenspaces
        .iter()
        .map(|e| (e.lambda.to_bits(), e.multiplicity))
        .collect();
    assert_eq!(la, lb);
}
