use netjacobi::net::{catalog, catalog_seed, edge_length_profile, grouped_length_profile, relax, NetName};

/// Expected `(degrees, count)` per net, lengths to three decimals.
fn expected(name: NetName) -> Vec<(f64, usize)> {
    match name {
        NetName::GreatCircle => vec![(360.0, 1)],
        NetName::YSuspension => vec![(180.0, 3)],
        NetName::Tetrahedron => vec![(109.471, 6)],
        NetName::Cube => vec![(70.529, 12)],
        NetName::PentagonalPrism => vec![(41.810, 10), (105.245, 5)],
        NetName::TriangularPrism => vec![(38.942, 3), (109.471, 6)],
        NetName::Dodecahedron => vec![(41.810, 30)],
        NetName::Quad2Pent8 => vec![(21.428, 8), (52.448, 8), (70.529, 8)],
        NetName::Quad4Pent4 => vec![(13.559, 4), (58.257, 8), (83.802, 6)],
        NetName::Quad3Pent6 => vec![(10.529, 3), (35.264, 6), (70.529, 12)],
    }
}

#[test]
fn every_net_is_stationary_with_expected_lengths() {
    for name in NetName::ALL {
        let net = catalog(name).unwrap();
        assert!(net.stationarity_residual() < 1e-9, "{name}");
        assert_eq!(net.is_polyhedral(), name.polyhedral(), "{name}");
        let want = expected(name);
        for len in edge_length_profile(&net) {
            assert!(
                want.iter().any(|&(w, _)| (len - w).abs() <= 1e-3),
                "{name}: length {len} not in {want:?}"
            );
        }
        assert_eq!(grouped_length_profile(&net), want, "{name}");
    }
}

#[test]
fn catalog_regenerates_from_seeds() {
    for name in NetName::ALL {
        let bundled = catalog(name).unwrap();
        let relaxed = relax(&catalog_seed(name).unwrap(), 20_000, 1e-12).unwrap();
        assert!(relaxed.stationarity_residual() < 1e-10, "{name}");
        let (a, b) = (edge_length_profile(&bundled), edge_length_profile(&relaxed));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "{name}: {x} vs {y}");
        }
    }
}

#[test]
fn eight_polyhedral_of_ten() {
    assert_eq!(NetName::ALL.len(), 10);
    assert_eq!(NetName::ALL.iter().filter(|n| n.polyhedral()).count(), 8);
}
