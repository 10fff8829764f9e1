//! Spectrum of `-u''` on a net with the junction conditions, by scanning
//! the smallest singular value of the frequency-dependent junction system.

use crate::jacobi::{
    compatibility_system_with, dirichlet_energy, l2_inner, l2_metric, reduced_system, translation_rank,
    ArcFieldCoefficients, CompatibilitySystem, FieldBasis, JacobiError, SystemOptions,
};
use crate::linalg::{max_principal_sine, Svd};
use crate::net::GeodesicNet;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Relative singular-value cut separating the numerical nullspace.
pub const MULTIPLICITY_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error("unresolved eigenvalue cluster near λ = {near:.6}; refine the grid")]
    UnresolvedCluster { near: f64 },
    #[error("λ = {lambda} is not an eigenvalue (relative σ_min {sigma:.3e})")]
    NotEigenvalue { lambda: f64, sigma: f64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Frequency-dependent junction matrix in the full layout; at `λ = 1` it is
/// the matrix of [`crate::jacobi::compatibility_system`].
pub fn secular_matrix(net: &GeodesicNet, lambda: f64) -> Result<CompatibilitySystem, SpectralError> {
    Ok(compatibility_system_with(
        net,
        SystemOptions {
            lambda,
            include_derivative_rows: true,
        },
    )?)
}

/// Smallest singular value of the gauge-reduced, balanced junction system.
pub fn secular_sigma_min(net: &GeodesicNet, lambda: f64) -> f64 {
    Svd::new(&reduced_system(net, lambda, true).matrix).min()
}

fn relative_sigma(net: &GeodesicNet, lambda: f64) -> f64 {
    let svd = Svd::new(&reduced_system(net, lambda, true).matrix);
    svd.min() / svd.max().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    pub lambda_max: f64,
    /// Grid spacing in `√λ`.
    pub grid_step: f64,
    /// Target bracket width in `√λ` for root refinement.
    pub tol: f64,
    /// Also scan `λ ∈ [-25, 0)` for (absent) negative eigenvalues.
    pub negative_scan: bool,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            lambda_max: 200.0,
            grid_step: 0.05,
            tol: 1e-13,
            negative_scan: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub lambda: f64,
    pub multiplicity: usize,
    pub modes: FieldBasis,
    /// `σ_min / σ_max` at the refined root.
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenspaces: Vec<Eigenspace>,
    pub lambda_max: f64,
    pub grid_step: f64,
    pub tol: f64,
    /// Roots found by the negative scan (expected empty).
    pub negative_eigenvalues: Vec<f64>,
    /// Smallest relative `σ_min` seen on the negative grid.
    pub negative_min_sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylCount {
    pub count: usize,
    pub predicted: f64,
}

impl SpectrumResult {
    pub fn multiplicity(&self, lambda: f64, tol: f64) -> usize {
        self.eigenspaces
            .iter()
            .filter(|e| (e.lambda - lambda).abs() <= tol)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Eigenvalues `≤ Λ` with multiplicity.
    pub fn counting(&self, big_lambda: f64) -> usize {
        self.eigenspaces
            .iter()
            .filter(|e| e.lambda <= big_lambda)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Counting function against `(D-2) (L/π) √Λ`, one scalar branch per
    /// normal direction.
    pub fn weyl(&self, net: &GeodesicNet, big_lambda: f64) -> WeylCount {
        let codim = (net.ambient_dim() - 2) as f64;
        WeylCount {
            count: self.counting(big_lambda),
            predicted: codim * net.total_length() / std::f64::consts::PI * big_lambda.sqrt(),
        }
    }
}

/// Golden-section minimization of `f` on `[lo, hi]`.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iters = 0;
    while hi - lo > tol && iters < 200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Local minima indices of a sampled function, endpoints included when
/// they are lower than their single neighbour.
fn local_minima(vals: &[f64]) -> Vec<usize> {
    let n = vals.len();
    (0..n)
        .filter(|&k| {
            let left = k == 0 || vals[k] <= vals[k - 1];
            let right = k + 1 == n || vals[k] < vals[k + 1];
            left && right
        })
        .collect()
}

/// Roots of `σ(s²)` (relative σ_min, as a function of `s = ±√|λ|`) inside
/// `[lo, hi]`: sub-grid scan then golden-section refinement.
fn roots_in_bracket(sigma: &(dyn Fn(f64) -> f64 + Sync), lo: f64, hi: f64, tol: f64) -> Result<Vec<(f64, f64)>, f64> {
    const SUB: usize = 16;
    let h = (hi - lo) / SUB as f64;
    let xs: Vec<f64> = (0..=SUB).map(|j| lo + h * j as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| sigma(x)).collect();
    let mut out = Vec::new();
    for j in local_minima(&vals) {
        let a = if j == 0 { xs[0] } else { xs[j - 1] };
        let b = if j == SUB { xs[SUB] } else { xs[j + 1] };
        let (x, v) = golden(sigma, a, b, tol);
        if v < MULTIPLICITY_TOL {
            out.push((x, v));
        } else if v < 1e-4 && j != 0 && j != SUB {
            // A deep non-root dip: two roots merged below sub-grid resolution.
            return Err(x);
        }
    }
    Ok(out)
}

/// Scan `√λ ∈ [0, √λ_max]`, refine, and extract eigenspaces.
pub fn eigenvalues(net: &GeodesicNet, opts: SpectralOptions) -> Result<SpectrumResult, SpectralError> {
    if !(opts.lambda_max > 0.0) || !(opts.grid_step > 0.0) || !(opts.tol > 0.0) {
        return Err(SpectralError::BadParameter(
            "λ_max, grid step and tolerance must be positive".into(),
        ));
    }
    crate::jacobi::compatibility_system(net)?;
    let sigma = |s: f64| relative_sigma(net, s * s);
    let s_max = opts.lambda_max.sqrt();
    let n = (s_max / opts.grid_step).ceil() as usize + 2;
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 * opts.grid_step).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&s| sigma(s)).collect();

    let zero_is_root = vals[0] < MULTIPLICITY_TOL;
    let brackets: Vec<(f64, f64)> = local_minima(&vals)
        .into_iter()
        .filter(|&k| k < n)
        .map(|k| (if k == 0 { 0.0 } else { grid[k - 1] }, grid[k + 1]))
        .collect();
    let found: Vec<Result<Vec<(f64, f64)>, f64>> = brackets
        .par_iter()
        .map(|&(lo, hi)| roots_in_bracket(&sigma, lo, hi, opts.tol))
        .collect();

    let mut roots: Vec<(f64, f64)> = Vec::new();
    if zero_is_root {
        roots.push((0.0, vals[0]));
    }
    for r in found {
        match r {
            Ok(list) => roots.extend(list),
            Err(s) => return Err(SpectralError::UnresolvedCluster { near: s * s }),
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, v) in roots {
        if zero_is_root && s < 1e-6 && s > 0.0 {
            continue;
        }
        match merged.last_mut() {
            Some(last) if (s - last.0).abs() < 1e-7 => {
                if v < last.1 {
                    *last = (s, v);
                }
            }
            _ => merged.push((s, v)),
        }
    }
    let eigenspaces: Vec<Eigenspace> = merged
        .par_iter()
        .filter(|(s, _)| s * s <= opts.lambda_max)
        .map(|&(s, v)| {
            let lambda = s * s;
            let modes = modes_at(net, lambda);
            Eigenspace {
                lambda,
                multiplicity: modes.dim(),
                modes,
                sigma: v,
            }
        })
        .collect();

    let (negative_eigenvalues, negative_min_sigma) = if opts.negative_scan {
        negative_scan(net, opts)?
    } else {
        (Vec::new(), None)
    };
    Ok(SpectrumResult {
        eigenspaces,
        lambda_max: opts.lambda_max,
        grid_step: opts.grid_step,
        tol: opts.tol,
        negative_eigenvalues,
        negative_min_sigma,
    })
}

/// Relative σ_min at `λ = -κ²`, using the decaying pair
/// `e^{-κθ}, e^{-κ(L-θ)}` on each arc. It spans the same space as
/// `sinh, cosh` but stays bounded for long arcs and large `κ`.
fn negative_relative_sigma(net: &GeodesicNet, kappa: f64) -> f64 {
    let sys = reduced_system(net, 0.0, false);
    let layout = sys.layout;
    let mut m = sys.matrix.clone();
    m.columns_mut(0, layout.field_cols()).fill(0.0);
    let scale = kappa.max(1.0);
    let mut row = 0;
    for (p, basis) in sys.vertex_bases.iter().enumerate() {
        let deriv_row = row + layout.codim * net.valence(p);
        for &(i, end) in net.incidence(p) {
            let arc = &net.arcs()[i];
            let th = arc.theta(end);
            let e1 = (-kappa * th).exp();
            let e2 = (-kappa * (arc.length - th)).exp();
            let sigma = match end {
                crate::net::End::From => -1.0,
                crate::net::End::To => 1.0,
            };
            for (r, f) in arc.frame.iter().enumerate() {
                m[(row, layout.a_col(i, r))] = e1;
                m[(row, layout.b_col(i, r))] = e2;
                row += 1;
                for (k, q) in basis.iter().enumerate() {
                    let fq = f.dot(q);
                    m[(deriv_row + k, layout.a_col(i, r))] += sigma * fq * (-kappa * e1) / scale;
                    m[(deriv_row + k, layout.b_col(i, r))] += sigma * fq * (kappa * e2) / scale;
                }
            }
        }
        row += basis.len();
    }
    let svd = Svd::new(&m);
    svd.min() / svd.max().max(f64::MIN_POSITIVE)
}

/// `λ = -κ²` for `κ ∈ (0, 5]`: `sinh, cosh` up to `κ = 1`, the decaying
/// pair beyond. Minima with `κ < 1e-3` are the tail of the zero eigenvalue
/// and are not reported.
fn negative_scan(net: &GeodesicNet, opts: SpectralOptions) -> Result<(Vec<f64>, Option<f64>), SpectralError> {
    let sigma = |k: f64| {
        if k <= 1.0 {
            relative_sigma(net, -k * k)
        } else {
            negative_relative_sigma(net, k)
        }
    };
    let n = (5.0 / opts.grid_step).round() as usize;
    let grid: Vec<f64> = (1..=n).map(|k| k as f64 * opts.grid_step).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&k| sigma(k)).collect();
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut found = Vec::new();
    for k in local_minima(&vals) {
        let lo = if k == 0 { 0.0 } else { grid[k - 1] };
        let hi = if k + 1 == grid.len() { grid[k] } else { grid[k + 1] };
        match roots_in_bracket(&sigma, lo, hi, opts.tol) {
            Ok(list) => found.extend(list.into_iter().filter(|&(k, _)| k > 1e-3).map(|(k, _)| -k * k)),
            Err(k) if k > 1e-3 => found.push(-k * k),
            Err(_) => {}
        }
    }
    found.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    Ok((found, Some(min)))
}

fn modes_at(net: &GeodesicNet, lambda: f64) -> FieldBasis {
    let sys = reduced_system(net, lambda, true);
    let svd = Svd::new(&sys.matrix);
    let null = svd.nullspace(MULTIPLICITY_TOL);
    let nf = sys.field_cols();
    let mut x = DMatrix::zeros(nf, null.ncols());
    for (k, col) in null.column_iter().enumerate() {
        x.set_column(k, &sys.field_coords(col.as_slice()));
    }
    FieldBasis::from_columns(net, lambda, &x)
}

/// Orthonormal eigenfunctions at an eigenvalue.
pub fn eigenmodes(net: &GeodesicNet, lambda: f64) -> Result<FieldBasis, SpectralError> {
    let sigma = relative_sigma(net, lambda);
    if sigma >= MULTIPLICITY_TOL {
        return Err(SpectralError::NotEigenvalue { lambda, sigma });
    }
    Ok(modes_at(net, lambda))
}

/// Largest `|⟨u, w⟩_{L²}|` over distinct pairs of computed modes.
pub fn gram_check(net: &GeodesicNet, result: &SpectrumResult) -> f64 {
    let modes: Vec<_> = result.eigenspaces.iter().flat_map(|e| e.modes.fields.iter()).collect();
    (0..modes.len())
        .into_par_iter()
        .map(|i| {
            ((i + 1)..modes.len())
                .map(|j| l2_inner(net, modes[i], modes[j]).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Largest relative defect of `∫|u'|² = λ ∫|u|²` over computed modes.
pub fn quadratic_form_defect(net: &GeodesicNet, result: &SpectrumResult) -> f64 {
    result
        .eigenspaces
        .iter()
        .flat_map(|e| e.modes.fields.iter().map(move |u| (e.lambda, u)))
        .map(|(lambda, u)| {
            let energy = dirichlet_energy(net, u);
            let mass = l2_inner(net, u, u);
            (energy - lambda * mass).abs() / (energy.abs() + lambda.abs() * mass).max(1e-300).max(mass)
        })
        .fold(0.0, f64::max)
}

/// Lower bound for the multiplicity of `λ = 0`.
pub fn zero_multiplicity_bound(net: &GeodesicNet) -> usize {
    translation_rank(net)
}

/// Translation fields `π_{P(i)^⊥}(V)`, constant on each arc, over the
/// standard basis of `V`, orthonormalized in `L²`.
pub fn translation_fields(net: &GeodesicNet) -> FieldBasis {
    let dim = net.ambient_dim();
    let cols: Vec<DVector<f64>> = (0..dim)
        .map(|d| {
            let v = crate::geomcore::basis_vector(dim, d);
            let mut field = ArcFieldCoefficients::zeros(net, 0.0);
            for (i, arc) in net.arcs().iter().enumerate() {
                field.arcs[i].1 = arc.project_normal(&v);
            }
            field.coords(net)
        })
        .collect();
    FieldBasis::from_columns(net, 0.0, &DMatrix::from_columns(&cols))
}

/// Largest principal-angle sine between two field spaces at the same `λ`;
/// `1` when the dimensions differ.
pub fn subspace_sine(net: &GeodesicNet, a: &FieldBasis, b: &FieldBasis) -> f64 {
    if a.dim() != b.dim() {
        return 1.0;
    }
    let g = l2_metric(net, a.lambda);
    max_principal_sine(&a.coords(net), &b.coords(net), &g)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueRecord {
    pub lambda: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumExport {
    pub eigenvalues: Vec<EigenvalueRecord>,
    pub weyl: WeylCount,
}

impl SpectrumResult {
    /// Weyl data at `Λ = λ_max`.
    pub fn export(&self, net: &GeodesicNet) -> SpectrumExport {
        SpectrumExport {
            eigenvalues: self
                .eigenspaces
                .iter()
                .map(|e| EigenvalueRecord {
                    lambda: e.lambda,
                    multiplicity: e.multiplicity,
                })
                .collect(),
            weyl: self.weyl(net, self.lambda_max),
        }
    }
}


#[cfg(test)]
mod subspace_tests {
    use super::*;
    use crate::jacobi::rotation_subspace;
    use crate::net::{catalog, NetName};

    #[test]
    fn tetrahedron_low_eigenspaces() {
        let tet = catalog(NetName::Tetrahedron).unwrap();
        let rot = rotation_subspace(&tet).unwrap().basis;
        let one = eigenmodes(&tet, 1.0).unwrap();
        assert!(subspace_sine(&tet, &one, &rot) < 1e-6);
        let zero = eigenmodes(&tet, 0.0).unwrap();
        assert_eq!(zero.dim(), 3);
        assert!(subspace_sine(&tet, &zero, &translation_fields(&tet)) < 1e-6);
    }

    #[test]
    fn suspension_zero_modes_contain_translations() {
        let net = catalog(NetName::YSuspension).unwrap();
        let zero = eigenmodes(&net, 0.0).unwrap();
        let tr = translation_fields(&net);
        assert!(zero.dim() >= tr.dim());
        assert_eq!(tr.dim(), zero_multiplicity_bound(&net));
    }
}
