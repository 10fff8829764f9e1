//! Equiangular geodesic nets: data model, validation and the catalog.

mod catalog;
mod io;
mod relax;

pub use catalog::{catalog, catalog_seed, NetName, CATALOG_DIR_ENV};
pub use io::{ArcRecord, NetFile};
pub use relax::{relax, relax_traced, RelaxMethod, RelaxOptions, RelaxOutcome};

use crate::geomcore::{basis_vector, orthonormalize, AmbientVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("ambient dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("vertex {index}: {reason}")]
    BadVertex { index: usize, reason: String },
    #[error("arc {index}: {reason}")]
    BadArc { index: usize, reason: String },
    #[error("vertex {vertex} has valence {valence}, expected 3")]
    Valence { vertex: usize, valence: usize },
    #[error("arcs {first} and {second} coincide")]
    DuplicateArc { first: usize, second: usize },
    #[error("cannot embed a {from}-dimensional net into dimension {to}")]
    Embed { from: usize, to: usize },
    #[error("relaxation did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("arc {arc} degenerated during relaxation (length {length:.3e})")]
    Degenerate { arc: usize, length: f64 },
    #[error("unknown catalog net `{0}`")]
    UnknownName(String),
    #[error("catalog data for `{name}`: {reason}")]
    Catalog { name: String, reason: String },
    #[error("malformed net file: {0}")]
    Parse(String),
}

/// Which end of an arc sits at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    /// `θ = 0`.
    From,
    /// `θ = L`.
    To,
}

/// Great-circle arc `γ(θ) = cos θ · start + sin θ · tangent`, `θ ∈ [0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicArc {
    pub from: usize,
    pub to: usize,
    pub start: AmbientVector,
    pub tangent: AmbientVector,
    pub length: f64,
    /// Interior point fixing the plane of antipodal or closed arcs.
    pub via: Option<AmbientVector>,
    /// Orthonormal basis of the normal space `P^⊥` of the arc's plane,
    /// Gram-Schmidt of the standard basis against `(start, tangent)`.
    pub frame: Vec<AmbientVector>,
}

impl GeodesicArc {
    pub fn point(&self, theta: f64) -> AmbientVector {
        &self.start * theta.cos() + &self.tangent * theta.sin()
    }

    pub fn velocity(&self, theta: f64) -> AmbientVector {
        &self.tangent * theta.cos() - &self.start * theta.sin()
    }

    pub fn is_closed(&self) -> bool {
        self.from == self.to
    }

    /// Arc-length parameter of an end.
    pub fn theta(&self, end: End) -> f64 {
        match end {
            End::From => 0.0,
            End::To => self.length,
        }
    }

    /// Unit tangent at an end pointing into the arc.
    pub fn inward_tangent(&self, end: End) -> AmbientVector {
        match end {
            End::From => self.tangent.clone(),
            End::To => -self.velocity(self.length),
        }
    }

    /// Outer conormal of the wedge along the boundary ray through an end.
    pub fn conormal(&self, end: End) -> AmbientVector {
        -self.inward_tangent(end)
    }

    /// `π_{P^⊥}(x)` in frame coordinates.
    pub fn frame_coords(&self, x: &AmbientVector) -> Vec<f64> {
        self.frame.iter().map(|f| f.dot(x)).collect()
    }

    pub fn from_frame_coords(&self, coords: &[f64]) -> AmbientVector {
        let mut out = AmbientVector::zeros(self.start.len());
        for (f, c) in self.frame.iter().zip(coords) {
            out.axpy(*c, f, 1.0);
        }
        out
    }

    pub fn project_normal(&self, x: &AmbientVector) -> AmbientVector {
        self.from_frame_coords(&self.frame_coords(x))
    }

    fn build(
        index: usize,
        from: usize,
        to: usize,
        start: &AmbientVector,
        end: &AmbientVector,
        via: Option<&AmbientVector>,
        tol: f64,
    ) -> Result<Self, NetError> {
        let bad = |reason: String| NetError::BadArc { index, reason };
        let dim = start.len();
        let closed = from == to;
        let antipodal = (start + end).norm() < 1e-9;
        let direction = match via {
            Some(w) => {
                if w.len() != dim {
                    return Err(bad(format!("via point has length {}, expected {dim}", w.len())));
                }
                w - start * start.dot(w)
            }
            None if closed => return Err(bad("closed arc needs a via point".into())),
            None if antipodal => return Err(bad("antipodal endpoints need a via point".into())),
            None => end - start * start.dot(end),
        };
        let n = direction.norm();
        if n < 1e-9 {
            return Err(bad("via point or endpoint does not determine a tangent".into()));
        }
        let tangent = direction / n;
        let length = if closed {
            2.0 * PI
        } else {
            let (x, y) = (start.dot(end), tangent.dot(end));
            let off_plane = (end - start * x - &tangent * y).norm();
            if off_plane > tol.max(1e-9) {
                return Err(bad(format!("endpoint leaves the arc plane by {off_plane:.3e}")));
            }
            let mut t = y.atan2(x);
            if t <= 0.0 {
                t += 2.0 * PI;
            }
            t
        };
        if !closed && !(1e-6..=PI + 1e-9).contains(&length) {
            return Err(bad(format!("length {length} outside (1e-6, π]")));
        }
        let mut seeds = vec![start.clone(), tangent.clone()];
        seeds.extend((0..dim).map(|i| basis_vector(dim, i)));
        let frame = orthonormalize(&seeds, 1e-6).split_off(2);
        Ok(Self {
            from,
            to,
            start: start.clone(),
            tangent,
            length,
            via: via.cloned(),
            frame,
        })
    }
}

/// One arc request for [`assemble_net`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSpec {
    pub from: usize,
    pub to: usize,
    pub via: Option<AmbientVector>,
}

impl ArcSpec {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to, via: None }
    }

    pub fn via(from: usize, to: usize, via: AmbientVector) -> Self {
        Self {
            from,
            to,
            via: Some(via),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    /// Tolerance on unit vertices and arc planes.
    pub tol: f64,
    /// Accept vertices of valence other than 3.
    pub allow_nonpolyhedral: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            allow_nonpolyhedral: false,
        }
    }
}

/// Great-circle network on `S^{D-1}`, immutable once assembled.
///
/// The great circle is stored as one closed arc through a single base
/// vertex of valence 2.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicNet {
    pub name: Option<String>,
    dim: usize,
    vertices: Vec<AmbientVector>,
    arcs: Vec<GeodesicArc>,
    incidence: Vec<Vec<(usize, End)>>,
}

pub fn assemble_net(
    dim: usize,
    vertices: Vec<AmbientVector>,
    arc_specs: &[ArcSpec],
    opts: AssembleOptions,
) -> Result<GeodesicNet, NetError> {
    if dim < 2 {
        return Err(NetError::BadDimension(dim));
    }
    for (index, v) in vertices.iter().enumerate() {
        if v.len() != dim {
            return Err(NetError::BadVertex {
                index,
                reason: format!("has {} coordinates, expected {dim}", v.len()),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(NetError::BadVertex {
                index,
                reason: "non-finite coordinate".into(),
            });
        }
        if (v.norm() - 1.0).abs() > opts.tol {
            return Err(NetError::BadVertex {
                index,
                reason: format!("not a unit vector (norm {})", v.norm()),
            });
        }
    }
    let mut arcs = Vec::with_capacity(arc_specs.len());
    let mut incidence = vec![Vec::new(); vertices.len()];
    for (index, spec) in arc_specs.iter().enumerate() {
        for &end in &[spec.from, spec.to] {
            if end >= vertices.len() {
                return Err(NetError::BadArc {
                    index,
                    reason: format!("vertex index {end} out of range"),
                });
            }
        }
        let arc = GeodesicArc::build(
            index,
            spec.from,
            spec.to,
            &vertices[spec.from],
            &vertices[spec.to],
            spec.via.as_ref(),
            opts.tol,
        )?;
        incidence[spec.from].push((index, End::From));
        incidence[spec.to].push((index, End::To));
        arcs.push(arc);
    }
    for (vertex, inc) in incidence.iter_mut().enumerate() {
        inc.sort();
        if !opts.allow_nonpolyhedral && inc.len() != 3 {
            return Err(NetError::Valence {
                vertex,
                valence: inc.len(),
            });
        }
    }
    let net = GeodesicNet {
        name: None,
        dim,
        vertices,
        arcs,
        incidence,
    };
    net.check_multiplicity()?;
    Ok(net)
}

impl GeodesicNet {
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[AmbientVector] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[GeodesicArc] {
        &self.arcs
    }

    /// Incident `(arc, end)` pairs of a vertex, sorted by arc index.
    pub fn incidence(&self, vertex: usize) -> &[(usize, End)] {
        &self.incidence[vertex]
    }

    pub fn valence(&self, vertex: usize) -> usize {
        self.incidence[vertex].len()
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    fn check_multiplicity(&self) -> Result<(), NetError> {
        for v in 0..self.vertices.len() {
            let inc = &self.incidence[v];
            for (i, &(a, ea)) in inc.iter().enumerate() {
                for &(b, eb) in &inc[i + 1..] {
                    let ta = self.arcs[a].inward_tangent(ea);
                    let tb = self.arcs[b].inward_tangent(eb);
                    if a != b && (ta - tb).norm() < 1e-9 {
                        return Err(NetError::DuplicateArc { first: a, second: b });
                    }
                }
            }
        }
        Ok(())
    }

    /// `max_p ‖Σ inward tangents at p‖`; zero iff every junction is
    /// balanced (for valence 3, the 120° condition).
    pub fn stationarity_residual(&self) -> f64 {
        (0..self.vertices.len())
            .map(|p| self.vertex_force(p).norm())
            .fold(0.0, f64::max)
    }

    /// Sum of inward unit tangents at a vertex; the negative Riemannian
    /// gradient of total length with respect to that vertex.
    pub fn vertex_force(&self, p: usize) -> AmbientVector {
        let mut f = AmbientVector::zeros(self.dim);
        for &(a, e) in &self.incidence[p] {
            f += self.arcs[a].inward_tangent(e);
        }
        f
    }

    /// Every vertex has valence 3 and the net is not a suspension.
    pub fn is_polyhedral(&self) -> bool {
        !self.vertices.is_empty() && self.incidence.iter().all(|i| i.len() == 3) && !is_suspension(self)
    }

    /// Zero-pad every vector into `R^new_dim`.
    pub fn embed(&self, new_dim: usize) -> Result<GeodesicNet, NetError> {
        if new_dim < self.dim {
            return Err(NetError::Embed {
                from: self.dim,
                to: new_dim,
            });
        }
        let pad = |v: &AmbientVector| {
            let mut out = AmbientVector::zeros(new_dim);
            out.rows_mut(0, v.len()).copy_from(v);
            out
        };
        let vertices = self.vertices.iter().map(pad).collect();
        let specs: Vec<ArcSpec> = self
            .arcs
            .iter()
            .map(|a| ArcSpec {
                from: a.from,
                to: a.to,
                via: a.via.as_ref().map(pad),
            })
            .collect();
        let mut net = assemble_net(
            new_dim,
            vertices,
            &specs,
            AssembleOptions {
                tol: 1e-9,
                allow_nonpolyhedral: true,
            },
        )?;
        net.name = self.name.clone();
        Ok(net)
    }

    /// Apply an orthogonal matrix to every vector of the net.
    pub fn transform(&self, q: &nalgebra::DMatrix<f64>) -> Result<GeodesicNet, NetError> {
        let vertices = self.vertices.iter().map(|v| q * v).collect();
        let specs: Vec<ArcSpec> = self
            .arcs
            .iter()
            .map(|a| ArcSpec {
                from: a.from,
                to: a.to,
                via: a.via.as_ref().map(|w| q * w),
            })
            .collect();
        let mut net = assemble_net(
            self.dim,
            vertices,
            &specs,
            AssembleOptions {
                tol: 1e-9,
                allow_nonpolyhedral: true,
            },
        )?;
        net.name = self.name.clone();
        Ok(net)
    }

    /// Same combinatorics with new vertex positions (via points are kept
    /// only where endpoints remain antipodal or the arc is closed).
    pub fn with_vertices(&self, vertices: Vec<AmbientVector>) -> Result<GeodesicNet, NetError> {
        let specs: Vec<ArcSpec> = self
            .arcs
            .iter()
            .map(|a| {
                let needs_via = a.is_closed() || (&vertices[a.from] + &vertices[a.to]).norm() < 1e-9;
                ArcSpec {
                    from: a.from,
                    to: a.to,
                    via: if needs_via { a.via.clone() } else { None },
                }
            })
            .collect();
        let mut net = assemble_net(
            self.dim,
            vertices,
            &specs,
            AssembleOptions {
                tol: 1e-9,
                allow_nonpolyhedral: true,
            },
        )?;
        net.name = self.name.clone();
        Ok(net)
    }
}

/// Exactly one antipodal vertex pair with every arc joining the two.
pub fn is_suspension(net: &GeodesicNet) -> bool {
    net.vertices.len() == 2
        && (&net.vertices[0] + &net.vertices[1]).norm() < 1e-9
        && net.arcs.iter().all(|a| a.from != a.to)
}

pub fn stationarity_residual(net: &GeodesicNet) -> f64 {
    net.stationarity_residual()
}

/// Arc lengths in degrees, ascending.
pub fn edge_length_profile(net: &GeodesicNet) -> Vec<f64> {
    let mut out: Vec<f64> = net.arcs.iter().map(|a| a.length.to_degrees()).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Profile grouped as `(degrees rounded to 3 decimals, count)`.
pub fn grouped_length_profile(net: &GeodesicNet) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for d in edge_length_profile(net) {
        let r = (d * 1000.0).round() / 1000.0;
        match out.last_mut() {
            Some((v, n)) if *v == r => *n += 1,
            _ => out.push((r, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> AmbientVector {
        AmbientVector::from_column_slice(xs)
    }

    fn tetra_vertices() -> Vec<AmbientVector> {
        let (r2, r6) = (2f64.sqrt(), 6f64.sqrt());
        vec![
            v(&[1.0, 0.0, 0.0]),
            v(&[-1.0 / 3.0, 2.0 * r2 / 3.0, 0.0]),
            v(&[-1.0 / 3.0, -r2 / 3.0, r6 / 3.0]),
            v(&[-1.0 / 3.0, -r2 / 3.0, -r6 / 3.0]),
        ]
    }

    fn tetra_specs() -> Vec<ArcSpec> {
        let mut s = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                s.push(ArcSpec::new(i, j));
            }
        }
        s
    }

    #[test]
    fn tetrahedron_is_three_valent() {
        let net = assemble_net(3, tetra_vertices(), &tetra_specs(), AssembleOptions::default()).unwrap();
        assert!((0..4).all(|p| net.valence(p) == 3));
        assert!(net.is_polyhedral());
        assert!(!is_suspension(&net));
        assert!(net.stationarity_residual() < 1e-14);
    }

    #[test]
    fn arc_parameterization_hits_endpoint() {
        let net = assemble_net(3, tetra_vertices(), &tetra_specs(), AssembleOptions::default()).unwrap();
        for a in net.arcs() {
            assert!((a.point(a.length) - &net.vertices()[a.to]).norm() < 1e-12);
            assert!(a.tangent.dot(&a.start).abs() < 1e-14);
            for f in &a.frame {
                assert!(f.dot(&a.start).abs() < 1e-14 && f.dot(&a.tangent).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn suspension_of_three_half_circles() {
        let t = 2.0 * PI / 3.0;
        let specs: Vec<ArcSpec> = (0..3)
            .map(|k| ArcSpec::via(0, 1, v(&[(t * k as f64).cos(), (t * k as f64).sin(), 0.0])))
            .collect();
        let net = assemble_net(
            3,
            vec![v(&[0.0, 0.0, 1.0]), v(&[0.0, 0.0, -1.0])],
            &specs,
            AssembleOptions::default(),
        )
        .unwrap();
        assert!(net.arcs().iter().all(|a| (a.length - PI).abs() < 1e-15));
        assert!(is_suspension(&net));
        assert!(!net.is_polyhedral());
        assert!(net.stationarity_residual() < 1e-12);
    }

    #[test]
    fn antipodal_without_via_rejected() {
        let err = assemble_net(
            3,
            vec![v(&[0.0, 0.0, 1.0]), v(&[0.0, 0.0, -1.0])],
            &[ArcSpec::new(0, 1)],
            AssembleOptions {
                allow_nonpolyhedral: true,
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(NetError::BadArc { index: 0, .. })));
    }

    #[test]
    fn four_valent_vertex_rejected() {
        let verts = vec![
            v(&[0.0, 0.0, 1.0]),
            v(&[1.0, 0.0, 0.0]),
            v(&[0.0, 1.0, 0.0]),
            v(&[-1.0, 0.0, 0.0]),
            v(&[0.0, -1.0, 0.0]),
        ];
        let specs: Vec<ArcSpec> = (1..5).map(|j| ArcSpec::new(0, j)).collect();
        assert!(matches!(
            assemble_net(3, verts, &specs, AssembleOptions::default()),
            Err(NetError::Valence { vertex: 0, valence: 4 })
        ));
    }

    #[test]
    fn non_unit_vertex_rejected() {
        let mut verts = tetra_vertices();
        verts[2] *= 1.01;
        assert!(matches!(
            assemble_net(3, verts, &tetra_specs(), AssembleOptions::default()),
            Err(NetError::BadVertex { index: 2, .. })
        ));
    }

    #[test]
    fn duplicate_arc_rejected() {
        let mut specs = tetra_specs();
        specs.push(ArcSpec::new(0, 1));
        let err = assemble_net(
            3,
            tetra_vertices(),
            &specs,
            AssembleOptions {
                allow_nonpolyhedral: true,
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(NetError::DuplicateArc { .. })));
    }

    #[test]
    fn perturbed_tetrahedron_residual_in_range() {
        let mut verts = tetra_vertices();
        verts[1][2] += 1e-3;
        let n = verts[1].norm();
        verts[1] /= n;
        let net = assemble_net(3, verts, &tetra_specs(), AssembleOptions::default()).unwrap();
        let r = net.stationarity_residual();
        assert!(r > 1e-4 && r < 1e-1, "{r}");
    }

    #[test]
    fn embedding_preserves_lengths_and_projects_back() {
        let net = assemble_net(3, tetra_vertices(), &tetra_specs(), AssembleOptions::default()).unwrap();
        let big = net.embed(5).unwrap();
        assert_eq!(edge_length_profile(&net), edge_length_profile(&big));
        assert!(big.stationarity_residual() < 1e-14);
        for (a, b) in net.vertices().iter().zip(big.vertices()) {
            assert_eq!(a.as_slice(), &b.as_slice()[..3]);
        }
        assert!(matches!(big.embed(4), Err(NetError::Embed { from: 5, to: 4 })));
    }
}
