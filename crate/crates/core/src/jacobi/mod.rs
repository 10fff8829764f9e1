//! Compatible Jacobi fields on the cone over a net: assembly of the junction
//! system, linear fields, rotation fields and integrability.

mod integrability;
mod scalar;
mod system;

pub use integrability::{
    cylinder_l_dim, integrability, integrability_with, linear_field_basis, local_skew_reconstruct, rotation_field,
    rotation_subspace, translation_rank, IntegrabilityOptions, IntegrabilityVerdict, LocalSkew, RotationSubspace,
};
pub use scalar::{scalar_reduction, PivotStep, ScalarMode, ScalarReduction};
pub use system::{
    compatibility_system, compatibility_system_with, constraint_residual, reduced_system, CompatibilitySystem, Layout,
    ReducedSystem, RowKind, SystemOptions,
};

use crate::arcfn::{self, ArcIntegrals};
use crate::geomcore::{AmbientVector, GeomError};
use crate::linalg;
use crate::net::{End, GeodesicNet, NetError};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

/// Stationarity residual above which junction conditions are not assembled.
pub const STATIONARITY_TOL: f64 = 1e-9;

/// Relative singular-value cut for nullspaces and ranks.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JacobiError {
    #[error("net is not stationary (residual {residual:.3e})")]
    NotStationary { residual: f64 },
    #[error("net is not polyhedral")]
    NotPolyhedral,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("rotation fields are not contained in the solution space (residual {residual:.3e})")]
    Containment { residual: f64 },
    #[error("field violates the junction conditions at vertex {vertex} (residual {residual:.3e})")]
    Compatibility { vertex: usize, residual: f64 },
    #[error("vertex {vertex} has valence {valence}, expected 3")]
    Valence { vertex: usize, valence: usize },
    #[error("vertex index {0} out of range")]
    BadVertex(usize),
    #[error("field has {found} arcs, net has {expected}")]
    ArcCount { expected: usize, found: usize },
    #[error("field has frequency λ = {0}, expected 1")]
    NotLinear(f64),
    #[error("scalar reduction: {0}")]
    ScalarMode(String),
}

/// Field on the net: on arc `i`, `v(θ) = a(i) s_λ(θ) + b(i) c_λ(θ)` with
/// `a(i), b(i) ∈ P(i)^⊥`. At `λ = 1` this is `a sin θ + b cos θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcFieldCoefficients {
    pub lambda: f64,
    pub arcs: Vec<(AmbientVector, AmbientVector)>,
}

impl ArcFieldCoefficients {
    pub fn zeros(net: &GeodesicNet, lambda: f64) -> Self {
        let d = net.ambient_dim();
        Self {
            lambda,
            arcs: vec![(AmbientVector::zeros(d), AmbientVector::zeros(d)); net.arcs().len()],
        }
    }

    /// Unpack frame coordinates laid out as in [`Layout`].
    pub fn from_coords(net: &GeodesicNet, lambda: f64, x: &[f64]) -> Self {
        let layout = Layout::new(net);
        let arcs = net
            .arcs()
            .iter()
            .enumerate()
            .map(|(i, arc)| {
                let a = arc.from_frame_coords(&x[layout.a_col(i, 0)..layout.a_col(i, 0) + layout.codim]);
                let b = arc.from_frame_coords(&x[layout.b_col(i, 0)..layout.b_col(i, 0) + layout.codim]);
                (a, b)
            })
            .collect();
        Self { lambda, arcs }
    }

    pub fn coords(&self, net: &GeodesicNet) -> DVector<f64> {
        let layout = Layout::new(net);
        let mut x = DVector::zeros(layout.field_cols());
        for (i, (arc, (a, b))) in net.arcs().iter().zip(&self.arcs).enumerate() {
            for (r, f) in arc.frame.iter().enumerate() {
                x[layout.a_col(i, r)] = f.dot(a);
                x[layout.b_col(i, r)] = f.dot(b);
            }
        }
        x
    }

    pub fn value(&self, arc: usize, theta: f64) -> AmbientVector {
        let (a, b) = &self.arcs[arc];
        a * arcfn::s(self.lambda, theta) + b * arcfn::c(self.lambda, theta)
    }

    pub fn derivative(&self, arc: usize, theta: f64) -> AmbientVector {
        let (a, b) = &self.arcs[arc];
        let [_, _, ds, dc] = arcfn::eval(self.lambda, theta);
        a * ds + b * dc
    }

    /// Derivative at an end in the direction pointing into the arc.
    pub fn inward_derivative(&self, net: &GeodesicNet, arc: usize, end: End) -> AmbientVector {
        let d = self.derivative(arc, net.arcs()[arc].theta(end));
        match end {
            End::From => d,
            End::To => -d,
        }
    }

    /// Largest component of any `a(i)`, `b(i)` along the arc's plane.
    pub fn plane_leak(&self, net: &GeodesicNet) -> f64 {
        net.arcs()
            .iter()
            .zip(&self.arcs)
            .map(|(arc, (a, b))| {
                let pa = (a - arc.project_normal(a)).norm();
                let pb = (b - arc.project_normal(b)).norm();
                pa.max(pb)
            })
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            lambda: self.lambda,
            arcs: self.arcs.iter().map(|(a, b)| (a * c, b * c)).collect(),
        }
    }

    /// JSON-ready records, one per arc, in ambient coordinates.
    pub fn records(&self) -> Vec<FieldRecord> {
        self.arcs
            .iter()
            .enumerate()
            .map(|(arc, (a, b))| FieldRecord {
                arc,
                a: a.as_slice().to_vec(),
                b: b.as_slice().to_vec(),
            })
            .collect()
    }
}

/// Export form of one arc's coefficients. `θ` is arclength from the arc's
/// `from` vertex and `a`, `b` are ambient vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldRecord {
    pub arc: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// `L²(Γ)`-orthonormal list of fields sharing one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBasis {
    pub lambda: f64,
    pub fields: Vec<ArcFieldCoefficients>,
}

impl FieldBasis {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Frame coordinates of the fields as matrix columns.
    pub fn coords(&self, net: &GeodesicNet) -> DMatrix<f64> {
        let n = Layout::new(net).field_cols();
        let mut m = DMatrix::zeros(n, self.fields.len());
        for (k, f) in self.fields.iter().enumerate() {
            m.set_column(k, &f.coords(net));
        }
        m
    }

    /// Orthonormalize coordinate columns in `L²` and wrap them.
    pub fn from_columns(net: &GeodesicNet, lambda: f64, x: &DMatrix<f64>) -> Self {
        let g = l2_metric(net, lambda);
        let q = linalg::orthonormalize_in_metric(x, &g, RANK_TOL);
        let fields = q
            .column_iter()
            .map(|c| ArcFieldCoefficients::from_coords(net, lambda, c.as_slice()))
            .collect();
        Self { lambda, fields }
    }

    pub fn gram(&self, net: &GeodesicNet) -> DMatrix<f64> {
        let x = self.coords(net);
        x.transpose() * l2_metric(net, self.lambda) * x
    }
}

/// `L²(Γ)` Gram matrix of the frame coordinates at frequency `λ`.
pub fn l2_metric(net: &GeodesicNet, lambda: f64) -> DMatrix<f64> {
    let layout = Layout::new(net);
    let mut g = DMatrix::zeros(layout.field_cols(), layout.field_cols());
    for (i, arc) in net.arcs().iter().enumerate() {
        let ints = ArcIntegrals::new(lambda, arc.length);
        for r in 0..layout.codim {
            let (ia, ib) = (layout.a_col(i, r), layout.b_col(i, r));
            g[(ia, ia)] = ints.ss;
            g[(ib, ib)] = ints.cc;
            g[(ia, ib)] = ints.sc;
            g[(ib, ia)] = ints.sc;
        }
    }
    g
}

/// `∫_Γ u·w`, exact per arc, for fields of any two frequencies.
pub fn l2_inner(net: &GeodesicNet, u: &ArcFieldCoefficients, w: &ArcFieldCoefficients) -> f64 {
    let same = (u.lambda - w.lambda).abs() <= 1e-12 * (1.0 + u.lambda.abs());
    net.arcs()
        .iter()
        .zip(u.arcs.iter().zip(&w.arcs))
        .map(|(arc, ((a1, b1), (a2, b2)))| {
            let dots = [a1.dot(a2), a1.dot(b2), b1.dot(a2), b1.dot(b2)];
            if same {
                ArcIntegrals::new(u.lambda, arc.length).pair(dots[0], dots[1], dots[2], dots[3])
            } else {
                arcfn::cross_integral(u.lambda, w.lambda, arc.length, dots)
            }
        })
        .sum()
}

/// `∫_Γ |u'|²`, exact per arc.
pub fn dirichlet_energy(net: &GeodesicNet, u: &ArcFieldCoefficients) -> f64 {
    let l = u.lambda;
    net.arcs()
        .iter()
        .zip(&u.arcs)
        .map(|(arc, (a, b))| {
            // u' = a c - λ b s
            let ints = ArcIntegrals::new(l, arc.length);
            a.dot(a) * ints.cc - 2.0 * l * a.dot(b) * ints.sc + l * l * b.dot(b) * ints.ss
        })
        .sum()
}

pub(crate) fn check_stationary(net: &GeodesicNet) -> Result<(), JacobiError> {
    let residual = net.stationarity_residual();
    if residual > STATIONARITY_TOL {
        return Err(JacobiError::NotStationary { residual });
    }
    Ok(())
}
