//! Scalar form of the junction conditions for nets in `S²`.
//!
//! A field normal to the cone takes the form `f(i) ν(i)` on wedge `i`,
//! `ν(i) = u(i) × t(i)` the unit normal of the arc's plane, with
//! `f(i)(θ) = a(i) sin θ + b(i) cos θ`. At a vertex `p` write `ε_j = ±1` for
//! the orientation of `ν(i_j)` against `p × τ_j` (`τ_j` the inward tangent)
//! and `D_j` for the inward derivative of `f(i_j)`. The value condition is
//! `Σ ε_j f(i_j)(p) = 0` and the derivative condition is `ε_j D_j` equal for
//! the three arcs.
//!
//! Along a coordinate `e` orthogonal to every arc plane, the component
//! `g(i) = v(i)·e` instead satisfies `g(i_j)(p)` equal and `Σ D_j = 0`. The
//! map `f ↦ f'`, i.e. `(a, b) ↦ (-b, a)`, exchanges the two systems.

use super::{JacobiError, RANK_TOL};
use crate::geomcore::AmbientVector;
use crate::linalg::Svd;
use crate::net::{End, GeodesicNet};
use nalgebra::DMatrix;
use serde::Serialize;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    /// Component along the in-sphere normal of each wedge. The net must lie
    /// in the first three coordinates.
    Normal,
    /// Component along a fixed coordinate axis orthogonal to every wedge.
    Extra(usize),
}

/// One pivot of the elimination with one junction's arcs pinned to zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotStep {
    /// e.g. `v3:value`, `v3:derivative1`.
    pub row: String,
    pub arc: usize,
    /// `"a"` or `"b"`.
    pub coefficient: &'static str,
    pub pivot: f64,
}

#[derive(Debug, Clone)]
pub struct ScalarReduction {
    pub mode: ScalarMode,
    /// `3V × 2E`, unknowns `(a(i), b(i))` per arc, rows three per vertex.
    pub matrix: DMatrix<f64>,
    pub row_labels: Vec<String>,
    pub nullity: usize,
    pub pinned_vertex: usize,
    /// Nullity after forcing `f ≡ 0` on the pinned vertex's arcs.
    pub pinned_nullity: usize,
    pub trace: Vec<PivotStep>,
}

impl ScalarReduction {
    pub fn min_abs_pivot(&self) -> f64 {
        self.trace.iter().map(|s| s.pivot.abs()).fold(f64::INFINITY, f64::min)
    }
}

fn cross3(u: &AmbientVector, v: &AmbientVector) -> AmbientVector {
    let mut out = AmbientVector::zeros(u.len());
    out[0] = u[1] * v[2] - u[2] * v[1];
    out[1] = u[2] * v[0] - u[0] * v[2];
    out[2] = u[0] * v[1] - u[1] * v[0];
    out
}

/// Build the scalar system. `mode = None` means [`ScalarMode::Normal`] and
/// requires `D = 3`.
pub fn scalar_reduction(
    net: &GeodesicNet,
    mode: Option<ScalarMode>,
    pinned_vertex: usize,
) -> Result<ScalarReduction, JacobiError> {
    let dim = net.ambient_dim();
    let mode = match mode {
        None if dim != 3 => {
            return Err(JacobiError::ScalarMode(format!(
                "ambient dimension {dim} needs an explicit mode"
            )));
        }
        None => ScalarMode::Normal,
        Some(m) => m,
    };
    if pinned_vertex >= net.vertices().len() {
        return Err(JacobiError::BadVertex(pinned_vertex));
    }
    let in_r3 = net.vertices().iter().all(|v| v.iter().skip(3).all(|x| x.abs() < 1e-12)) && dim >= 3;
    match mode {
        ScalarMode::Normal if !in_r3 => {
            return Err(JacobiError::ScalarMode(
                "net does not lie in the first three coordinates".into(),
            ));
        }
        ScalarMode::Extra(e) if e < 3 || e >= dim || !in_r3 => {
            return Err(JacobiError::ScalarMode(format!(
                "coordinate {e} is not orthogonal to the net"
            )));
        }
        _ => {}
    }
    for v in 0..net.vertices().len() {
        if net.valence(v) != 3 {
            return Err(JacobiError::Valence {
                vertex: v,
                valence: net.valence(v),
            });
        }
    }
    super::check_stationary(net)?;

    let n_arcs = net.arcs().len();
    let n_vertices = net.vertices().len();
    let normals: Vec<AmbientVector> = net.arcs().iter().map(|a| cross3(&a.start, &a.tangent)).collect();
    let mut m = DMatrix::zeros(3 * n_vertices, 2 * n_arcs);
    let mut labels = Vec::with_capacity(3 * n_vertices);
    for p in 0..n_vertices {
        let x = &net.vertices()[p];
        let inc = net.incidence(p);
        // per incident arc: (arc, value coefficients, derivative coefficients, ε)
        let mut parts = Vec::with_capacity(3);
        for &(i, end) in inc {
            let arc = &net.arcs()[i];
            let th = arc.theta(end);
            let kappa = if end == End::From { 1.0 } else { -1.0 };
            let value = [th.sin(), th.cos()];
            let deriv = [kappa * th.cos(), -kappa * th.sin()];
            let eps = normals[i].dot(&cross3(x, &arc.inward_tangent(end))).signum();
            parts.push((i, value, deriv, eps));
        }
        let r0 = 3 * p;
        match mode {
            ScalarMode::Normal => {
                for &(i, val, der, eps) in &parts {
                    m[(r0, 2 * i)] += eps * val[0];
                    m[(r0, 2 * i + 1)] += eps * val[1];
                    let _ = der;
                }
                for k in 0..2 {
                    let (i, _, d1, e1) = parts[k];
                    let (j, _, d2, e2) = parts[k + 1];
                    m[(r0 + 1 + k, 2 * i)] += e1 * d1[0];
                    m[(r0 + 1 + k, 2 * i + 1)] += e1 * d1[1];
                    m[(r0 + 1 + k, 2 * j)] -= e2 * d2[0];
                    m[(r0 + 1 + k, 2 * j + 1)] -= e2 * d2[1];
                }
                labels.push(format!("v{p}:value"));
                labels.push(format!("v{p}:derivative1"));
                labels.push(format!("v{p}:derivative2"));
            }
            ScalarMode::Extra(_) => {
                for k in 0..2 {
                    let (i, v1, _, _) = parts[k];
                    let (j, v2, _, _) = parts[k + 1];
                    m[(r0 + k, 2 * i)] += v1[0];
                    m[(r0 + k, 2 * i + 1)] += v1[1];
                    m[(r0 + k, 2 * j)] -= v2[0];
                    m[(r0 + k, 2 * j + 1)] -= v2[1];
                }
                for &(i, _, der, _) in &parts {
                    m[(r0 + 2, 2 * i)] += der[0];
                    m[(r0 + 2, 2 * i + 1)] += der[1];
                }
                labels.push(format!("v{p}:value1"));
                labels.push(format!("v{p}:value2"));
                labels.push(format!("v{p}:derivative"));
            }
        }
    }
    let nullity = 2 * n_arcs - Svd::new(&m).rank(RANK_TOL);

    // Pin the arcs at one vertex and eliminate the rest in breadth-first
    // order of discovery from that vertex.
    let pinned: Vec<usize> = net.incidence(pinned_vertex).iter().map(|&(i, _)| i).collect();
    let order = bfs_arc_order(net, pinned_vertex);
    let cols: Vec<usize> = order
        .iter()
        .filter(|i| !pinned.contains(i))
        .flat_map(|&i| [2 * i, 2 * i + 1])
        .collect();
    let mut work = DMatrix::zeros(m.nrows(), cols.len());
    for (k, &c) in cols.iter().enumerate() {
        work.set_column(k, &m.column(c));
    }
    let pinned_nullity = cols.len() - Svd::new(&work).rank(RANK_TOL);
    let trace = eliminate(&mut work, &labels, &cols);

    Ok(ScalarReduction {
        mode,
        matrix: m,
        row_labels: labels,
        nullity,
        pinned_vertex,
        pinned_nullity,
        trace,
    })
}

fn bfs_arc_order(net: &GeodesicNet, start: usize) -> Vec<usize> {
    let mut seen_v = vec![false; net.vertices().len()];
    let mut seen_a = vec![false; net.arcs().len()];
    let mut order = Vec::with_capacity(net.arcs().len());
    let mut queue = VecDeque::from([start]);
    seen_v[start] = true;
    while let Some(v) = queue.pop_front() {
        for &(i, end) in net.incidence(v) {
            if !seen_a[i] {
                seen_a[i] = true;
                order.push(i);
            }
            let arc = &net.arcs()[i];
            let other = if end == End::From { arc.to } else { arc.from };
            if !seen_v[other] {
                seen_v[other] = true;
                queue.push_back(other);
            }
        }
    }
    // Arcs in other components, if any, in index order.
    order.extend((0..net.arcs().len()).filter(|&i| !seen_a[i]));
    order
}

/// Gaussian elimination with partial pivoting, column by column.
fn eliminate(work: &mut DMatrix<f64>, labels: &[String], cols: &[usize]) -> Vec<PivotStep> {
    let (rows, n) = work.shape();
    let mut used = vec![false; rows];
    let mut trace = Vec::with_capacity(n);
    for k in 0..n {
        let Some(r) = (0..rows)
            .filter(|&r| !used[r])
            .max_by(|&x, &y| work[(x, k)].abs().total_cmp(&work[(y, k)].abs()))
        else {
            break;
        };
        let pivot = work[(r, k)];
        trace.push(PivotStep {
            row: labels[r].clone(),
            arc: cols[k] / 2,
            coefficient: if cols[k].is_multiple_of(2) { "a" } else { "b" },
            pivot,
        });
        if pivot.abs() < 1e-300 {
            continue;
        }
        used[r] = true;
        for rr in 0..rows {
            if rr != r && !used[rr] {
                let factor = work[(rr, k)] / pivot;
                if factor != 0.0 {
                    for c in k..n {
                        let v = work[(r, c)];
                        work[(rr, c)] -= factor * v;
                    }
                }
            }
        }
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{catalog, NetName};

    #[test]
    fn tetrahedron_scalar_dimension() {
        let tet = catalog(NetName::Tetrahedron).unwrap();
        let s = scalar_reduction(&tet, None, 0).unwrap();
        assert_eq!(s.nullity, 3);
        assert_eq!(s.pinned_nullity, 0);
        assert!(s.min_abs_pivot() > 1e-8);
    }

    #[test]
    fn wrong_dimension_needs_mode() {
        let tet = catalog(NetName::Tetrahedron).unwrap().embed(4).unwrap();
        assert!(matches!(
            scalar_reduction(&tet, None, 0),
            Err(JacobiError::ScalarMode(_))
        ));
        assert!(scalar_reduction(&tet, Some(ScalarMode::Extra(2)), 0).is_err());
    }

    #[test]
    fn derivative_maps_extra_solutions_to_normal_solutions() {
        let tet = catalog(NetName::Tetrahedron).unwrap().embed(4).unwrap();
        let normal = scalar_reduction(&tet, Some(ScalarMode::Normal), 0).unwrap();
        let extra = scalar_reduction(&tet, Some(ScalarMode::Extra(3)), 0).unwrap();
        assert_eq!(extra.nullity, 3);
        let null = Svd::new(&extra.matrix).nullspace(RANK_TOL);
        for col in null.column_iter() {
            let mut dual = col.clone_owned();
            for i in 0..col.len() / 2 {
                dual[2 * i] = -col[2 * i + 1];
                dual[2 * i + 1] = col[2 * i];
            }
            assert!((&normal.matrix * dual).amax() < 1e-12);
        }
    }
}
