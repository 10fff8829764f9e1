use netjacobi::geomcore::SkewGenerator;
use netjacobi::jacobi::{
    constraint_residual, integrability, integrability_with, linear_field_basis, local_skew_reconstruct, rotation_field,
    scalar_reduction, IntegrabilityOptions, JacobiError,
};
use netjacobi::net::{catalog, NetName};

fn polyhedral() -> impl Iterator<Item = NetName> {
    NetName::ALL.into_iter().filter(|n| n.polyhedral())
}

#[test]
fn polyhedral_nets_are_integrable() {
    for name in polyhedral() {
        let net = catalog(name).unwrap();
        let v = integrability(&net).unwrap();
        assert_eq!((v.dim_solutions, v.dim_rotations), (3, 3), "{name}");
        assert!(v.integrable && v.residual < 1e-9, "{name}: {v:?}");
        for a in SkewGenerator::basis(3) {
            let f = rotation_field(&net, &a).unwrap();
            assert!(constraint_residual(&net, &f) < 1e-9, "{name}");
        }
    }
}

#[test]
fn higher_codimension_tetrahedron() {
    let tet = catalog(NetName::Tetrahedron).unwrap();
    for (dim, want) in [(4, 6), (5, 9)] {
        let v = integrability(&tet.embed(dim).unwrap()).unwrap();
        assert_eq!((v.dim_solutions, v.dim_rotations), (want, want));
        assert!(v.integrable);
    }
}

#[test]
fn dropping_derivative_rows_breaks_integrability() {
    let tet = catalog(NetName::Tetrahedron).unwrap();
    let v = integrability_with(
        &tet,
        IntegrabilityOptions {
            drop_derivative_rows: true,
        },
    )
    .unwrap();
    assert!(v.dim_solutions > v.dim_rotations);
    assert!(!v.integrable);
}

#[test]
fn suspensions_are_rejected() {
    for name in [NetName::GreatCircle, NetName::YSuspension] {
        let net = catalog(name).unwrap();
        assert!(matches!(integrability(&net), Err(JacobiError::NotPolyhedral)), "{name}");
    }
}

#[test]
fn scalar_system_matches_vector_system() {
    for name in polyhedral() {
        let net = catalog(name).unwrap();
        let vector = integrability(&net).unwrap().dim_solutions;
        for pin in [0, net.vertices().len() - 1] {
            let s = scalar_reduction(&net, None, pin).unwrap();
            assert_eq!(s.nullity, vector, "{name}");
            assert_eq!(s.pinned_nullity, 0, "{name}");
            assert!(s.min_abs_pivot() > 1e-8, "{name}");
        }
    }
}

#[test]
fn linear_fields_are_locally_skew() {
    for name in polyhedral() {
        let net = catalog(name).unwrap();
        let basis = linear_field_basis(&net).unwrap();
        for field in &basis.fields {
            for p in 0..net.vertices().len() {
                let local = local_skew_reconstruct(&net, field, p).unwrap();
                assert!(local.residual < 1e-8, "{name} vertex {p}: {}", local.residual);
            }
        }
    }
}
