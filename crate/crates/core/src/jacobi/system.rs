//! Junction constraint matrices.

use super::{check_stationary, ArcFieldCoefficients, JacobiError};
use crate::arcfn;
use crate::geomcore::{orthonormalize, AmbientVector};
use crate::net::{End, GeodesicNet};
use nalgebra::{DMatrix, DVector};

/// Column layout: for each arc `i`, the `D-2` frame coordinates of `a(i)`
/// then those of `b(i)`; after all arcs, the `D` coordinates of `V_p` for
/// each vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub dim: usize,
    pub codim: usize,
    pub n_arcs: usize,
    pub n_vertices: usize,
}

impl Layout {
    pub fn new(net: &GeodesicNet) -> Self {
        let dim = net.ambient_dim();
        Self {
            dim,
            codim: dim - 2,
            n_arcs: net.arcs().len(),
            n_vertices: net.vertices().len(),
        }
    }

    pub fn field_cols(&self) -> usize {
        2 * self.codim * self.n_arcs
    }

    pub fn cols(&self) -> usize {
        self.field_cols() + self.dim * self.n_vertices
    }

    pub fn a_col(&self, arc: usize, r: usize) -> usize {
        2 * self.codim * arc + r
    }

    pub fn b_col(&self, arc: usize, r: usize) -> usize {
        2 * self.codim * arc + self.codim + r
    }

    pub fn v_col(&self, vertex: usize, d: usize) -> usize {
        self.field_cols() + self.dim * vertex + d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `v(i)(p) = π_{P(i)^⊥}(V_p)`, one frame component.
    Value {
        vertex: usize,
        arc: usize,
        end: End,
        component: usize,
    },
    /// `Σ_j ∂_n v(i_j)(p) = 0`, one ambient component.
    Derivative { vertex: usize, component: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct SystemOptions {
    pub lambda: f64,
    /// Dropping the derivative rows gives a non-physical system, useful
    /// only as a negative control for integrability.
    pub include_derivative_rows: bool,
}

impl Default for SystemOptions {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            include_derivative_rows: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompatibilitySystem {
    pub lambda: f64,
    pub layout: Layout,
    pub matrix: DMatrix<f64>,
    pub rows: Vec<RowKind>,
}

/// Junction system at `λ = 1`.
pub fn compatibility_system(net: &GeodesicNet) -> Result<CompatibilitySystem, JacobiError> {
    compatibility_system_with(net, SystemOptions::default())
}

/// Per vertex (ascending), the value rows of each incident arc end (by arc
/// index) followed by the derivative rows.
pub fn compatibility_system_with(net: &GeodesicNet, opts: SystemOptions) -> Result<CompatibilitySystem, JacobiError> {
    check_stationary(net)?;
    let layout = Layout::new(net);
    let lambda = opts.lambda;
    let valence_sum: usize = (0..layout.n_vertices).map(|p| net.valence(p)).sum();
    let n_rows = layout.codim * valence_sum
        + if opts.include_derivative_rows {
            layout.dim * layout.n_vertices
        } else {
            0
        };
    let mut m = DMatrix::zeros(n_rows, layout.cols());
    let mut rows = Vec::with_capacity(n_rows);
    for p in 0..layout.n_vertices {
        for &(i, end) in net.incidence(p) {
            let arc = &net.arcs()[i];
            let [s, c, _, _] = arcfn::eval(lambda, arc.theta(end));
            for (r, f) in arc.frame.iter().enumerate() {
                let row = rows.len();
                m[(row, layout.a_col(i, r))] = s;
                m[(row, layout.b_col(i, r))] = c;
                for d in 0..layout.dim {
                    m[(row, layout.v_col(p, d))] = -f[d];
                }
                rows.push(RowKind::Value {
                    vertex: p,
                    arc: i,
                    end,
                    component: r,
                });
            }
        }
        if !opts.include_derivative_rows {
            continue;
        }
        let base = rows.len();
        for d in 0..layout.dim {
            rows.push(RowKind::Derivative {
                vertex: p,
                component: d,
            });
        }
        for &(i, end) in net.incidence(p) {
            let arc = &net.arcs()[i];
            let [_, _, ds, dc] = arcfn::eval(lambda, arc.theta(end));
            let sigma = outward_sign(end);
            for (r, f) in arc.frame.iter().enumerate() {
                for d in 0..layout.dim {
                    m[(base + d, layout.a_col(i, r))] += sigma * f[d] * ds;
                    m[(base + d, layout.b_col(i, r))] += sigma * f[d] * dc;
                }
            }
        }
    }
    Ok(CompatibilitySystem {
        lambda,
        layout,
        matrix: m,
        rows,
    })
}

/// `d/dθ` times this is the derivative along the outer conormal.
fn outward_sign(end: End) -> f64 {
    match end {
        End::From => -1.0,
        End::To => 1.0,
    }
}

/// Square junction system with the gauge removed: `V_p` is restricted to
/// the span `S_p` of the incident arcs' normal spaces (outside it, `V_p` is
/// invisible to the value rows) and the derivative rows are read in `S_p`
/// (they cannot leave it). For `λ > 0` the `a` columns are scaled by
/// `w = max(1, √λ)` and the derivative rows divided by `w`, so entries stay
/// of unit size at high frequency.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub lambda: f64,
    pub matrix: DMatrix<f64>,
    /// Column scale applied to the `a` coordinates.
    pub weight: f64,
    pub layout: Layout,
    /// Orthonormal basis of `S_p` per vertex.
    pub vertex_bases: Vec<Vec<AmbientVector>>,
}

impl ReducedSystem {
    pub fn field_cols(&self) -> usize {
        self.layout.field_cols()
    }

    /// Undo the column scaling on a null vector's field part.
    pub fn field_coords(&self, y: &[f64]) -> DVector<f64> {
        let l = &self.layout;
        let mut x = DVector::from_column_slice(&y[..l.field_cols()]);
        for i in 0..l.n_arcs {
            for r in 0..l.codim {
                x[l.a_col(i, r)] *= self.weight;
            }
        }
        x
    }
}

pub fn reduced_system(net: &GeodesicNet, lambda: f64, balanced: bool) -> ReducedSystem {
    let layout = Layout::new(net);
    let w = if balanced && lambda > 1.0 { lambda.sqrt() } else { 1.0 };
    let vertex_bases: Vec<Vec<AmbientVector>> = (0..layout.n_vertices)
        .map(|p| {
            let frames: Vec<AmbientVector> = net
                .incidence(p)
                .iter()
                .flat_map(|&(i, _)| net.arcs()[i].frame.iter().cloned())
                .collect();
            orthonormalize(&frames, 1e-8)
        })
        .collect();
    let v_total: usize = vertex_bases.iter().map(Vec::len).sum();
    let valence_sum: usize = (0..layout.n_vertices).map(|p| net.valence(p)).sum();
    let n_rows = layout.codim * valence_sum + v_total;
    let n_cols = layout.field_cols() + v_total;
    let mut m = DMatrix::zeros(n_rows, n_cols);
    let mut row = 0;
    let mut v_off = layout.field_cols();
    for (p, basis) in vertex_bases.iter().enumerate() {
        for &(i, end) in net.incidence(p) {
            let arc = &net.arcs()[i];
            let [s, c, _, _] = arcfn::eval(lambda, arc.theta(end));
            for (r, f) in arc.frame.iter().enumerate() {
                m[(row, layout.a_col(i, r))] = s * w;
                m[(row, layout.b_col(i, r))] = c;
                for (k, q) in basis.iter().enumerate() {
                    m[(row, v_off + k)] = -f.dot(q);
                }
                row += 1;
            }
        }
        for &(i, end) in net.incidence(p) {
            let arc = &net.arcs()[i];
            let [_, _, ds, dc] = arcfn::eval(lambda, arc.theta(end));
            let sigma = outward_sign(end);
            for (r, f) in arc.frame.iter().enumerate() {
                for (k, q) in basis.iter().enumerate() {
                    let fq = f.dot(q);
                    m[(row + k, layout.a_col(i, r))] += sigma * fq * ds;
                    m[(row + k, layout.b_col(i, r))] += sigma * fq * dc / w;
                }
            }
        }
        row += basis.len();
        v_off += basis.len();
    }
    ReducedSystem {
        lambda,
        matrix: m,
        weight: w,
        layout,
        vertex_bases,
    }
}

/// Largest violation of the junction conditions by a field, with each
/// `V_p` chosen by least squares.
pub fn constraint_residual(net: &GeodesicNet, field: &ArcFieldCoefficients) -> f64 {
    let sys = reduced_system(net, field.lambda, false);
    let nf = sys.field_cols();
    let x = field.coords(net);
    let rhs = -(sys.matrix.columns(0, nf) * &x);
    let mv = sys.matrix.columns(nf, sys.matrix.ncols() - nf).into_owned();
    let y = if mv.ncols() > 0 {
        mv.clone()
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(mv.ncols()))
    } else {
        DVector::zeros(0)
    };
    (&mv * y - rhs).amax()
}
