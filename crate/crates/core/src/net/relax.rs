//! Length-minimizing relaxation of vertex positions on the sphere.

use super::{GeodesicNet, NetError};
use crate::geomcore::{AmbientVector, Subspace};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxMethod {
    /// Gradient descent on total length; total length never increases.
    /// Converges only to local minima of length.
    LengthDescent,
    /// Damped Gauss-Newton on the junction force balance; the stationarity
    /// residual never increases. Reaches saddle points of length too, such
    /// as the prisms, whose polygons shrink towards the poles under descent.
    Stationarity,
}

#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions {
    pub max_iters: usize,
    /// Target stationarity residual.
    pub tol: f64,
    pub method: RelaxMethod,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-12,
            method: RelaxMethod::Stationarity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelaxOutcome {
    pub net: GeodesicNet,
    /// Accepted steps.
    pub iterations: usize,
    pub residual: f64,
    /// Total length after each accepted step, starting with the seed.
    pub lengths: Vec<f64>,
}

fn step(vertices: &[AmbientVector], forces: &[AmbientVector], alpha: f64) -> Vec<AmbientVector> {
    vertices
        .iter()
        .zip(forces)
        .map(|(x, g)| {
            let y = x + g * alpha;
            let n = y.norm();
            y / n
        })
        .collect()
}

fn forces(net: &GeodesicNet) -> Vec<AmbientVector> {
    (0..net.vertices().len()).map(|p| net.vertex_force(p)).collect()
}

fn dot(a: &[AmbientVector], b: &[AmbientVector]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn check_lengths(net: &GeodesicNet) -> Result<(), NetError> {
    for (arc, a) in net.arcs().iter().enumerate() {
        if a.length < 1e-6 {
            return Err(NetError::Degenerate { arc, length: a.length });
        }
    }
    Ok(())
}

pub fn relax_traced(seed: &GeodesicNet, opts: RelaxOptions) -> Result<RelaxOutcome, NetError> {
    match opts.method {
        RelaxMethod::LengthDescent => descend(seed, opts),
        RelaxMethod::Stationarity => balance(seed, opts),
    }
}

/// Gradient descent on total arc length with Barzilai-Borwein steps and
/// Armijo backtracking. Vertices move along the sum of their inward
/// tangents and are renormalized onto the sphere.
fn descend(seed: &GeodesicNet, opts: RelaxOptions) -> Result<RelaxOutcome, NetError> {
    let mut net = seed.clone();
    check_lengths(&net)?;
    let mut g = forces(&net);
    let mut energy = net.total_length();
    let mut residual = net.stationarity_residual();
    let mut lengths = vec![energy];
    let mut alpha: f64 = 0.1;
    let mut iterations = 0;
    // Energy differences below this are rounding noise.
    let slack = 1e-14 * (1.0 + energy);
    while residual > opts.tol {
        if iterations >= opts.max_iters {
            return Err(NetError::NonConvergence { iterations, residual });
        }
        let g2 = dot(&g, &g);
        let mut trial_alpha = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = step(net.vertices(), &g, trial_alpha);
            let cand_net = match net.with_vertices(cand) {
                Ok(n) => n,
                Err(_) => {
                    trial_alpha *= 0.5;
                    continue;
                }
            };
            check_lengths(&cand_net)?;
            let e = cand_net.total_length();
            let sufficient = e <= energy - 1e-4 * trial_alpha * g2;
            let flat = e <= energy + slack && cand_net.stationarity_residual() < residual;
            if sufficient || flat {
                accepted = Some((cand_net, e));
                break;
            }
            trial_alpha *= 0.5;
        }
        let Some((next, e)) = accepted else {
            return Err(NetError::NonConvergence { iterations, residual });
        };
        let g_next = forces(&next);
        let s: Vec<AmbientVector> = next.vertices().iter().zip(net.vertices()).map(|(a, b)| a - b).collect();
        let y: Vec<AmbientVector> = g.iter().zip(&g_next).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(1e-4, 2.0)
        } else {
            trial_alpha * 2.0
        };
        net = next;
        g = g_next;
        energy = e;
        residual = net.stationarity_residual();
        lengths.push(energy);
        iterations += 1;
    }
    Ok(RelaxOutcome {
        net,
        iterations,
        residual,
        lengths,
    })
}

/// Tangent-space bases at each vertex.
fn tangent_bases(net: &GeodesicNet) -> Vec<Vec<AmbientVector>> {
    let dim = net.ambient_dim();
    net.vertices()
        .iter()
        .map(|p| {
            Subspace::span(dim, std::slice::from_ref(p))
                .expect("vertex has ambient dimension")
                .complement()
                .basis()
                .to_vec()
        })
        .collect()
}

/// Forces in tangent coordinates.
fn force_vector(net: &GeodesicNet, bases: &[Vec<AmbientVector>]) -> DVector<f64> {
    let mut out = Vec::new();
    for (p, basis) in bases.iter().enumerate() {
        let f = net.vertex_force(p);
        out.extend(basis.iter().map(|b| b.dot(&f)));
    }
    DVector::from_vec(out)
}

fn displace(net: &GeodesicNet, bases: &[Vec<AmbientVector>], delta: &DVector<f64>) -> Vec<AmbientVector> {
    let mut k = 0;
    net.vertices()
        .iter()
        .zip(bases)
        .map(|(p, basis)| {
            let mut y = p.clone();
            for b in basis {
                y.axpy(delta[k], b, 1.0);
                k += 1;
            }
            let n = y.norm();
            y / n
        })
        .collect()
}

/// Damped Gauss-Newton on the force balance with a central-difference
/// Jacobian and a minimum-norm step (rigid rotations are null directions).
fn balance(seed: &GeodesicNet, opts: RelaxOptions) -> Result<RelaxOutcome, NetError> {
    let mut net = seed.clone();
    check_lengths(&net)?;
    let mut residual = net.stationarity_residual();
    let mut lengths = vec![net.total_length()];
    let mut iterations = 0;
    while residual > opts.tol {
        if iterations >= opts.max_iters {
            return Err(NetError::NonConvergence { iterations, residual });
        }
        let bases = tangent_bases(&net);
        let f0 = force_vector(&net, &bases);
        let n = f0.len();
        let h = 1e-7;
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut e = DVector::zeros(n);
            e[k] = h;
            let plus = net.with_vertices(displace(&net, &bases, &e))?;
            let minus = net.with_vertices(displace(&net, &bases, &(-&e)))?;
            // Forces of displaced nets are read in the unmoved bases; the
            // mismatch is second order in h.
            let col = (force_vector(&plus, &bases) - force_vector(&minus, &bases)) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let svd = jac.svd(true, true);
        let cut = 1e-9 * svd.singular_values.max();
        let step = svd
            .solve(&(-&f0), cut)
            .map_err(|_| NetError::NonConvergence { iterations, residual })?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            if let Ok(cand) = net.with_vertices(displace(&net, &bases, &(&step * t))) {
                check_lengths(&cand)?;
                let r = cand.stationarity_residual();
                if r < residual {
                    accepted = Some((cand, r));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, r)) = accepted else {
            return Err(NetError::NonConvergence { iterations, residual });
        };
        net = next;
        residual = r;
        lengths.push(net.total_length());
        iterations += 1;
    }
    Ok(RelaxOutcome {
        net,
        iterations,
        residual,
        lengths,
    })
}

/// Relax a seed onto a nearby equiangular net by the default method.
pub fn relax(seed: &GeodesicNet, max_iters: usize, tol: f64) -> Result<GeodesicNet, NetError> {
    relax_traced(
        seed,
        RelaxOptions {
            max_iters,
            tol,
            ..Default::default()
        },
    )
    .map(|o| o.net)
}
