//! Runs alone in its own binary: it sets a process-wide variable.

use nalgebra::DMatrix;
use netjacobi::net::{catalog, NetError, NetName, CATALOG_DIR_ENV};

#[test]
fn catalog_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let tet = catalog(NetName::Tetrahedron).unwrap();
    let swap = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let moved = tet.transform(&swap).unwrap();
    std::fs::write(dir.path().join("tetrahedron.json"), moved.to_json()).unwrap();

    std::env::set_var(CATALOG_DIR_ENV, dir.path());
    let loaded = catalog(NetName::Tetrahedron).unwrap();
    let missing = catalog(NetName::Cube);
    std::env::remove_var(CATALOG_DIR_ENV);

    assert_eq!(loaded.vertices(), moved.vertices());
    assert!(matches!(missing, Err(NetError::Catalog { .. })));
    assert_eq!(catalog(NetName::Tetrahedron).unwrap().vertices(), tet.vertices());
}
