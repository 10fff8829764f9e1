//! The ten equiangular nets in `S²`: combinatorial seeds and the relaxed
//! coordinates bundled under `data/catalog`.

use super::{assemble_net, ArcSpec, AssembleOptions, GeodesicNet, NetError, NetFile};
use crate::geomcore::AmbientVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Directory overriding the bundled catalog data.
pub const CATALOG_DIR_ENV: &str = "NETJACOBI_CATALOG_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetName {
    GreatCircle,
    YSuspension,
    Tetrahedron,
    Cube,
    PentagonalPrism,
    TriangularPrism,
    Dodecahedron,
    Quad2Pent8,
    Quad4Pent4,
    Quad3Pent6,
}

impl NetName {
    pub const ALL: [NetName; 10] = [
        NetName::GreatCircle,
        NetName::YSuspension,
        NetName::Tetrahedron,
        NetName::Cube,
        NetName::PentagonalPrism,
        NetName::TriangularPrism,
        NetName::Dodecahedron,
        NetName::Quad2Pent8,
        NetName::Quad4Pent4,
        NetName::Quad3Pent6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NetName::GreatCircle => "great_circle",
            NetName::YSuspension => "y_suspension",
            NetName::Tetrahedron => "tetrahedron",
            NetName::Cube => "cube",
            NetName::PentagonalPrism => "pentagonal_prism",
            NetName::TriangularPrism => "triangular_prism",
            NetName::Dodecahedron => "dodecahedron",
            NetName::Quad2Pent8 => "quad2_pent8",
            NetName::Quad4Pent4 => "quad4_pent4",
            NetName::Quad3Pent6 => "quad3_pent6",
        }
    }

    /// Whether the cone over the net is polyhedral (3-valent, not a
    /// suspension).
    pub fn polyhedral(self) -> bool {
        !matches!(self, NetName::GreatCircle | NetName::YSuspension)
    }

    fn bundled(self) -> &'static str {
        match self {
            NetName::GreatCircle => include_str!("../../data/catalog/great_circle.json"),
            NetName::YSuspension => include_str!("../../data/catalog/y_suspension.json"),
            NetName::Tetrahedron => include_str!("../../data/catalog/tetrahedron.json"),
            NetName::Cube => include_str!("../../data/catalog/cube.json"),
            NetName::PentagonalPrism => include_str!("../../data/catalog/pentagonal_prism.json"),
            NetName::TriangularPrism => include_str!("../../data/catalog/triangular_prism.json"),
            NetName::Dodecahedron => include_str!("../../data/catalog/dodecahedron.json"),
            NetName::Quad2Pent8 => include_str!("../../data/catalog/quad2_pent8.json"),
            NetName::Quad4Pent4 => include_str!("../../data/catalog/quad4_pent4.json"),
            NetName::Quad3Pent6 => include_str!("../../data/catalog/quad3_pent6.json"),
        }
    }
}

impl fmt::Display for NetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetName {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, NetError> {
        NetName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| NetError::UnknownName(s.to_string()))
    }
}

/// Relaxed catalog net, read from `$NETJACOBI_CATALOG_DIR/<name>.json` when
/// that variable is set and from the bundled data otherwise.
pub fn catalog(name: NetName) -> Result<GeodesicNet, NetError> {
    let text = match std::env::var_os(CATALOG_DIR_ENV) {
        Some(dir) => {
            let path = std::path::Path::new(&dir).join(format!("{name}.json"));
            std::fs::read_to_string(&path).map_err(|e| NetError::Catalog {
                name: name.to_string(),
                reason: format!("{}: {e}", path.display()),
            })?
        }
        None => name.bundled().to_string(),
    };
    let file = NetFile::parse(&text).map_err(|e| NetError::Catalog {
        name: name.to_string(),
        reason: e.to_string(),
    })?;
    let net = file.to_net(1e-12)?;
    Ok(net.with_name(name.as_str()))
}

fn v3(x: f64, y: f64, z: f64) -> AmbientVector {
    let v = AmbientVector::from_column_slice(&[x, y, z]);
    let n = v.norm();
    v / n
}

/// Unit vector at colatitude and longitude given in degrees.
fn sph(colat: f64, lon: f64) -> AmbientVector {
    let (t, p) = (colat.to_radians(), lon.to_radians());
    v3(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
}

fn build(vertices: Vec<AmbientVector>, edges: &[(usize, usize)]) -> Result<GeodesicNet, NetError> {
    let specs: Vec<ArcSpec> = edges.iter().map(|&(a, b)| ArcSpec::new(a, b)).collect();
    assemble_net(3, vertices, &specs, AssembleOptions::default())
}

/// Edges joining vertex pairs whose angular distance is within 1e-6 of the
/// minimum over all pairs.
fn nearest_pairs(vertices: &[AmbientVector]) -> Vec<(usize, usize)> {
    let n = vertices.len();
    let best = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| vertices[i].dot(&vertices[j]))
        .fold(f64::MIN, f64::max);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if (vertices[i].dot(&vertices[j]) - best).abs() < 1e-6 {
                out.push((i, j));
            }
        }
    }
    out
}

/// A ring of `n` vertices at a fixed colatitude, starting at `lon0`.
fn ring(n: usize, colat: f64, lon0: f64) -> Vec<AmbientVector> {
    (0..n).map(|k| sph(colat, lon0 + 360.0 * k as f64 / n as f64)).collect()
}

/// Prism over a regular `n`-gon: two rings at colatitudes `colat` and
/// `180 - colat` joined by meridian arcs.
fn prism(n: usize, colat: f64) -> Result<GeodesicNet, NetError> {
    let mut vertices = ring(n, colat, 0.0);
    vertices.extend(ring(n, 180.0 - colat, 0.0));
    let mut edges = Vec::new();
    for k in 0..n {
        edges.push((k, (k + 1) % n));
        edges.push((n + k, n + (k + 1) % n));
        edges.push((k, n + k));
    }
    build(vertices, &edges)
}

/// Combinatorial seed for a catalog net: the right combinatorics with
/// approximately equiangular vertex positions. The tetrahedron, cube,
/// dodecahedron, great circle and suspension seeds are already exact.
pub fn catalog_seed(name: NetName) -> Result<GeodesicNet, NetError> {
    let net = match name {
        NetName::GreatCircle => assemble_net(
            3,
            vec![v3(1.0, 0.0, 0.0)],
            &[ArcSpec::via(0, 0, v3(0.0, 1.0, 0.0))],
            AssembleOptions {
                allow_nonpolyhedral: true,
                ..Default::default()
            },
        )?,
        NetName::YSuspension => {
            let specs: Vec<ArcSpec> = (0..3)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / 3.0;
                    ArcSpec::via(0, 1, v3(t.cos(), t.sin(), 0.0))
                })
                .collect();
            assemble_net(
                3,
                vec![v3(0.0, 0.0, 1.0), v3(0.0, 0.0, -1.0)],
                &specs,
                AssembleOptions::default(),
            )?
        }
        NetName::Tetrahedron => {
            let (r2, r6) = (2f64.sqrt(), 6f64.sqrt());
            let vertices = vec![
                AmbientVector::from_column_slice(&[1.0, 0.0, 0.0]),
                AmbientVector::from_column_slice(&[-1.0 / 3.0, 2.0 * r2 / 3.0, 0.0]),
                AmbientVector::from_column_slice(&[-1.0 / 3.0, -r2 / 3.0, r6 / 3.0]),
                AmbientVector::from_column_slice(&[-1.0 / 3.0, -r2 / 3.0, -r6 / 3.0]),
            ];
            build(vertices, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])?
        }
        NetName::Cube => {
            let mut vertices = Vec::new();
            for &x in &[-1.0, 1.0] {
                for &y in &[-1.0, 1.0] {
                    for &z in &[-1.0, 1.0] {
                        vertices.push(v3(x, y, z));
                    }
                }
            }
            let edges = nearest_pairs(&vertices);
            build(vertices, &edges)?
        }
        NetName::Dodecahedron => {
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            let ip = 1.0 / phi;
            let mut vertices = Vec::new();
            for &x in &[-1.0, 1.0] {
                for &y in &[-1.0, 1.0] {
                    for &z in &[-1.0, 1.0] {
                        vertices.push(v3(x, y, z));
                    }
                }
            }
            for &a in &[-1.0, 1.0] {
                for &b in &[-1.0, 1.0] {
                    vertices.push(v3(0.0, a * ip, b * phi));
                    vertices.push(v3(a * ip, b * phi, 0.0));
                    vertices.push(v3(a * phi, 0.0, b * ip));
                }
            }
            let edges = nearest_pairs(&vertices);
            build(vertices, &edges)?
        }
        // Pentagons at colatitude ~37.4°, meridians ~105.2° long.
        NetName::PentagonalPrism => prism(5, 37.38)?,
        // Triangles at colatitude ~70.5°, meridians ~38.9° long.
        NetName::TriangularPrism => prism(3, 70.53)?,
        NetName::Quad2Pent8 => {
            // 0..4 north square, 4..8 south square (rotated 45°),
            // 8..16 zigzag ring alternating north and south of the equator.
            let mut vertices = ring(4, 54.74, 0.0);
            vertices.extend(ring(4, 180.0 - 54.74, 45.0));
            for k in 0..8 {
                let colat = if k % 2 == 0 { 76.16 } else { 180.0 - 76.16 };
                vertices.push(sph(colat, 45.0 * k as f64));
            }
            let mut edges = Vec::new();
            for j in 0..4 {
                edges.push((j, (j + 1) % 4));
                edges.push((4 + j, 4 + (j + 1) % 4));
                edges.push((j, 8 + 2 * j));
                edges.push((4 + j, 8 + 2 * j + 1));
            }
            for k in 0..8 {
                edges.push((8 + k, 8 + (k + 1) % 8));
            }
            build(vertices, &edges)?
        }
        NetName::Quad4Pent4 => {
            // Two pairs of squares sharing an edge: the northern pair's shared
            // edge runs along y, the southern pair's along x. Each pair's four
            // outer corners join the nearest corner of the other pair.
            let (y0, z0) = (0.668, 0.744);
            let (x1, y1, z1) = (0.737, 0.668, 0.1075);
            let mut vertices = vec![v3(0.0, y0, z0), v3(0.0, -y0, z0)];
            for &(sx, sy) in &[(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                vertices.push(v3(sx * x1, sy * y1, z1));
            }
            vertices.push(v3(y0, 0.0, -z0));
            vertices.push(v3(-y0, 0.0, -z0));
            for &(sx, sy) in &[(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                vertices.push(v3(sx * y1, sy * x1, -z1));
            }
            // North: 0 = (0,+y0), 1 = (0,-y0); corners 2 (+,+) 3 (+,-) 4 (-,+) 5 (-,-).
            // South: 6 = (+y0,0), 7 = (-y0,0); corners 8 (+,+) 9 (-,+) 10 (+,-) 11 (-,-).
            let edges = [
                (0, 1),
                (0, 2),
                (0, 4),
                (1, 3),
                (1, 5),
                (2, 3),
                (4, 5),
                (6, 7),
                (6, 8),
                (6, 10),
                (7, 9),
                (7, 11),
                (8, 9),
                (10, 11),
                (2, 8),
                (3, 10),
                (4, 9),
                (5, 11),
            ];
            build(vertices, &edges)?
        }
        NetName::Quad3Pent6 => {
            // Poles 0, 1; three diamonds centred on the equator at longitudes
            // 0, 120, 240 with vertices top, bottom, east, west.
            let mut vertices = vec![v3(0.0, 0.0, 1.0), v3(0.0, 0.0, -1.0)];
            for k in 0..3 {
                let lon = 120.0 * k as f64;
                vertices.push(sph(35.26, lon));
                vertices.push(sph(180.0 - 35.26, lon));
                vertices.push(sph(90.0, lon + 54.74));
                vertices.push(sph(90.0, lon - 54.74));
            }
            let mut edges = Vec::new();
            for k in 0..3 {
                let (t, b, e, w) = (2 + 4 * k, 3 + 4 * k, 4 + 4 * k, 5 + 4 * k);
                edges.extend([(t, e), (e, b), (b, w), (w, t), (0, t), (1, b)]);
                let next_west = 5 + 4 * ((k + 1) % 3);
                edges.push((e, next_west));
            }
            build(vertices, &edges)?
        }
    };
    Ok(net.with_name(name.as_str()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for n in NetName::ALL {
            assert_eq!(n.as_str().parse::<NetName>().unwrap(), n);
        }
        assert!(matches!(
            "icosahedron".parse::<NetName>(),
            Err(NetError::UnknownName(_))
        ));
    }

    #[test]
    fn seed_counts_and_euler_characteristic() {
        let expect = [
            (NetName::Tetrahedron, 4, 6),
            (NetName::Cube, 8, 12),
            (NetName::PentagonalPrism, 10, 15),
            (NetName::TriangularPrism, 6, 9),
            (NetName::Dodecahedron, 20, 30),
            (NetName::Quad2Pent8, 16, 24),
            (NetName::Quad4Pent4, 12, 18),
            (NetName::Quad3Pent6, 14, 21),
        ];
        for (name, v, e) in expect {
            let net = catalog_seed(name).unwrap();
            assert_eq!(net.vertices().len(), v, "{name}");
            assert_eq!(net.arcs().len(), e, "{name}");
            assert!(net.is_polyhedral(), "{name}");
            // F = 2 - V + E faces on the sphere
            assert_eq!(2 + e - v, e / 3 + 2, "{name}");
        }
    }
}
