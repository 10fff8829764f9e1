//! Radial ODE along the spine of a cylindrical cone and the polynomial
//! spine PDE, with the checks used in the decay analysis.
//!
//! The radial equation is
//! `(1+r²)γ'' + ((m-1)/r - r)γ' + (-μ/r² + 1 - λ)γ = 0`, equivalently
//! `(hγ')' + h/(1+r²) · (-μ/r² + 1 - λ)γ = 0` with
//! `h = r^{m-1} (1+r²)^{-m/2}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use thiserror::Error;

pub const ATOL: f64 = 1e-12;
pub const RTOL: f64 = 1e-10;
/// Uniform Simpson panels per integral.
pub const SIMPSON_PANELS: usize = 1 << 12;
/// Finite-difference spacing relative to `r`.
const FD_REL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpineError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("step size underflow at r = {reached}")]
    StepRejection { reached: f64 },
    #[error("trajectory covers [{have_lo}, {have_hi}], need [{need_lo}, {need_hi}]")]
    Coverage {
        have_lo: f64,
        have_hi: f64,
        need_lo: f64,
        need_hi: f64,
    },
    #[error("polynomial degree {0} exceeds 4")]
    Degree(u32),
    #[error("point has {got} coordinates, polynomial has {want}")]
    Dimension { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpineParams {
    pub m: usize,
    pub lambda: f64,
    pub mu: f64,
}

impl SpineParams {
    pub fn new(m: usize, lambda: f64, mu: f64) -> Result<Self, SpineError> {
        if m < 1 {
            return Err(SpineError::BadParameter("m must be at least 1".into()));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(SpineError::BadParameter(format!("λ = {lambda} must be finite and ≥ 0")));
        }
        if !mu.is_finite() || mu < 0.0 {
            return Err(SpineError::BadParameter(format!("μ = {mu} must be finite and ≥ 0")));
        }
        Ok(Self { m, lambda, mu })
    }

    /// `γ''` from the raw equation.
    pub fn second_derivative(&self, r: f64, g: f64, dg: f64) -> f64 {
        let (p, q) = self.coefficients(r);
        -(p * dg + q * g) / (1.0 + r * r)
    }

    /// `((m-1)/r - r, -μ/r² + 1 - λ)`.
    fn coefficients(&self, r: f64) -> (f64, f64) {
        ((self.m as f64 - 1.0) / r - r, -self.mu / (r * r) + 1.0 - self.lambda)
    }

    pub fn h(&self, r: f64) -> f64 {
        r.powi(self.m as i32 - 1) * (1.0 + r * r).powf(-(self.m as f64) / 2.0)
    }

    /// Raw residual and a scale: the sum of magnitudes of its individual
    /// monomial terms, taken before the coefficients cancel.
    pub fn raw_residual(&self, r: f64, g: f64, dg: f64, ddg: f64) -> (f64, f64) {
        let (p, q) = self.coefficients(r);
        let res = (1.0 + r * r) * ddg + p * dg + q * g;
        let m1 = self.m as f64 - 1.0;
        let scale = (1.0 + r * r) * ddg.abs()
            + (m1 / r + r) * dg.abs()
            + (self.mu / (r * r) + (1.0 - self.lambda).abs()) * g.abs();
        (res, scale)
    }

    /// Constant of the Caccioppoli check, `1000 (1 + μ + λ)`.
    pub fn c0(&self) -> f64 {
        1000.0 * (1.0 + self.mu + self.lambda)
    }
}

// Dormand-Prince 5(4) with Hairer's dense output.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

type State = [f64; 2];

/// Interpolant over one accepted step.
#[derive(Debug, Clone, Copy)]
struct DenseSegment {
    r0: f64,
    h: f64,
    coef: [State; 5],
}

impl DenseSegment {
    fn eval(&self, r: f64) -> State {
        let t = (r - self.r0) / self.h;
        let t1 = 1.0 - t;
        let c = &self.coef;
        [0, 1].map(|k| c[0][k] + t * (c[1][k] + t1 * (c[2][k] + t * (c[3][k] + t1 * c[4][k]))))
    }
}

#[derive(Debug, Clone)]
pub struct RadialTrajectory {
    pub params: SpineParams,
    /// Accepted mesh, increasing.
    pub r: Vec<f64>,
    pub gamma: Vec<f64>,
    pub dgamma: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub order: usize,
    segments: Vec<DenseSegment>,
}

impl RadialTrajectory {
    pub fn r0(&self) -> f64 {
        self.r[0]
    }

    pub fn r1(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// `(γ, γ')` at any `r` in range, from the dense output.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let k = match self.segments.binary_search_by(|s| s.r0.total_cmp(&r)) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) => k - 1,
        }
        .min(self.segments.len().saturating_sub(1));
        if self.segments.is_empty() {
            return (self.gamma[0], self.dgamma[0]);
        }
        let [g, dg] = self.segments[k].eval(r);
        (g, dg)
    }

    fn covers(&self, lo: f64, hi: f64) -> Result<(), SpineError> {
        let slack = 1e-12 * hi.abs().max(1.0);
        if lo < self.r0() - slack || hi > self.r1() + slack {
            return Err(SpineError::Coverage {
                have_lo: self.r0(),
                have_hi: self.r1(),
                need_lo: lo,
                need_hi: hi,
            });
        }
        Ok(())
    }

    /// `γ''` by fourth-order central differences of the dense `γ'`.
    fn fd_second(&self, r: f64, d: f64) -> f64 {
        let f = |x: f64| self.eval(x).1;
        (-f(r + 2.0 * d) + 8.0 * f(r + d) - 8.0 * f(r - d) + f(r - 2.0 * d)) / (12.0 * d)
    }

    /// Largest relative residual of the raw equation at the interior mesh
    /// points, with `γ''` from finite differences.
    pub fn raw_residual(&self) -> f64 {
        self.fd_points()
            .map(|(r, d)| {
                let (g, dg) = self.eval(r);
                let (res, scale) = self.params.raw_residual(r, g, dg, self.fd_second(r, d));
                if scale == 0.0 {
                    0.0
                } else {
                    res.abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative gap between the divergence form, differenced as a
    /// product, and `h/(1+r²)` times the raw form.
    pub fn divergence_agreement(&self) -> f64 {
        let p = self.params;
        self.fd_points()
            .map(|(r, d)| {
                let flux = |x: f64| p.h(x) * self.eval(x).1;
                let dflux =
                    (-flux(r + 2.0 * d) + 8.0 * flux(r + d) - 8.0 * flux(r - d) + flux(r - 2.0 * d)) / (12.0 * d);
                let (g, dg) = self.eval(r);
                let w = p.h(r) / (1.0 + r * r);
                let (_, q) = p.coefficients(r);
                let div = dflux + w * q * g;
                let (raw, scale) = p.raw_residual(r, g, dg, self.fd_second(r, d));
                let denom = w * scale;
                if denom == 0.0 {
                    0.0
                } else {
                    (div - w * raw).abs() / denom
                }
            })
            .fold(0.0, f64::max)
    }

    fn fd_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (lo, hi) = (self.r0(), self.r1());
        self.r.iter().filter_map(move |&r| {
            let d = FD_REL * r;
            (r - 2.0 * d >= lo && r + 2.0 * d <= hi).then_some((r, d))
        })
    }

    /// `n+1` uniform samples `(r, γ, γ')`.
    pub fn resample(&self, n: usize) -> Vec<(f64, f64, f64)> {
        let (lo, hi) = (self.r0(), self.r1());
        (0..=n)
            .map(|k| {
                let r = if k == n {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / n as f64
                };
                let (g, dg) = self.eval(r);
                (r, g, dg)
            })
            .collect()
    }

    /// CSV with header `r,gamma,dgamma`, one row per mesh point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "gamma", "dgamma"])?;
        for k in 0..self.r.len() {
            w.serialize((self.r[k], self.gamma[k], self.dgamma[k]))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn rhs(p: &SpineParams, r: f64, y: &State) -> State {
    [y[1], p.second_derivative(r, y[0], y[1])]
}

/// Integrate from `r0` to `r1 > r0`. The absolute tolerance is taken
/// relative to the size of the initial data, so the computed trajectory is
/// homogeneous in `(γ(r₀), γ'(r₀))`. `step` is the initial step.
pub fn radial_ode_solve(
    params: SpineParams,
    gamma0: f64,
    dgamma0: f64,
    r0: f64,
    r1: f64,
    step: f64,
) -> Result<RadialTrajectory, SpineError> {
    if !(r0 > 0.0) || !(r1 > r0) || !r1.is_finite() {
        return Err(SpineError::BadParameter(format!("need 0 < r₀ < r₁, got [{r0}, {r1}]")));
    }
    if !(step > 0.0) {
        return Err(SpineError::BadParameter("initial step must be positive".into()));
    }
    let size = gamma0.abs().max(dgamma0.abs());
    let mut traj = RadialTrajectory {
        params,
        r: vec![r0],
        gamma: vec![gamma0],
        dgamma: vec![dgamma0],
        accepted_steps: 0,
        rejected_steps: 0,
        order: 5,
        segments: Vec::new(),
    };
    if size == 0.0 {
        traj.r.push(r1);
        traj.gamma.push(0.0);
        traj.dgamma.push(0.0);
        traj.segments.push(DenseSegment {
            r0,
            h: r1 - r0,
            coef: [[0.0; 2]; 5],
        });
        return Ok(traj);
    }
    let atol = ATOL * size;
    let mut r = r0;
    let mut y: State = [gamma0, dgamma0];
    let mut h = step.min(r1 - r0);
    let mut k1 = rhs(&params, r, &y);
    while r < r1 {
        if h < 1e-14 * r {
            return Err(SpineError::StepRejection { reached: r });
        }
        let last = r + h >= r1;
        if last {
            h = r1 - r;
        }
        let mut k = [[0.0; 2]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for c in 0..2 {
                    ys[c] += h * A[s][j] * kj[c];
                }
            }
            k[s] = rhs(&params, r + C[s] * h, &ys);
        }
        let mut y1 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            for c in 0..2 {
                y1[c] += h * A[6][j] * kj[c];
            }
        }
        let mut err = 0.0;
        for c in 0..2 {
            let e: f64 = (0..7).map(|j| E[j] * k[j][c]).sum::<f64>() * h;
            let sc = atol + RTOL * y[c].abs().max(y1[c].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / 2.0).sqrt();
        if err <= 1.0 {
            let mut coef = [[0.0; 2]; 5];
            for c in 0..2 {
                let diff = y1[c] - y[c];
                let bspl = h * k[0][c] - diff;
                coef[0][c] = y[c];
                coef[1][c] = diff;
                coef[2][c] = bspl;
                coef[3][c] = diff - h * k[6][c] - bspl;
                coef[4][c] = h * (0..7).map(|j| D[j] * k[j][c]).sum::<f64>();
            }
            traj.segments.push(DenseSegment { r0: r, h, coef });
            r = if last { r1 } else { r + h };
            y = y1;
            k1 = k[6];
            traj.r.push(r);
            traj.gamma.push(y[0]);
            traj.dgamma.push(y[1]);
            traj.accepted_steps += 1;
        } else {
            traj.rejected_steps += 1;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= if err <= 1.0 { fac } else { fac.min(1.0) };
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaccioppoliResult {
    /// `∫_ρ^{2ρ} γ'²`.
    pub lhs: f64,
    /// `∫_{ρ/2}^{4ρ} γ²/r²`.
    pub rhs: f64,
    /// `lhs/rhs`, `0` when both vanish.
    pub ratio: f64,
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * k as f64);
    }
    sum * h / 3.0
}

pub fn caccioppoli_check(traj: &RadialTrajectory, rho: f64) -> Result<CaccioppoliResult, SpineError> {
    if !(rho >= 4.0) {
        return Err(SpineError::BadParameter(format!("ρ = {rho} must be at least 4")));
    }
    traj.covers(rho / 2.0, 4.0 * rho)?;
    let clamp = |r: f64| r.clamp(traj.r0(), traj.r1());
    let lhs = simpson(|r| traj.eval(clamp(r)).1.powi(2), rho, 2.0 * rho, SIMPSON_PANELS);
    let rhs = simpson(
        |r| (traj.eval(clamp(r)).0 / r).powi(2),
        rho / 2.0,
        4.0 * rho,
        SIMPSON_PANELS,
    );
    let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(CaccioppoliResult { lhs, rhs, ratio })
}

/// Polynomial in `dim` variables, as `(coefficient, exponents)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self, SpineError> {
        for (_, e) in &terms {
            if e.len() != dim {
                return Err(SpineError::Dimension {
                    got: e.len(),
                    want: dim,
                });
            }
        }
        let p = Self { dim, terms };
        if p.degree() > 4 {
            return Err(SpineError::Degree(p.degree()));
        }
        Ok(p)
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            dim,
            terms: vec![(c, vec![0; dim])],
        }
    }

    /// `a · z`.
    pub fn linear(a: &[f64]) -> Self {
        let dim = a.len();
        let terms = a
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut e = vec![0; dim];
                e[i] = 1;
                (c, e)
            })
            .collect();
        Self { dim, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn derivative(&self, j: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[j] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[j] -= 1;
                (c * e[j] as f64, e2)
            })
            .collect();
        Self { dim: self.dim, terms }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(z).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }
}

/// `max |Σ (δ_jk + z_j z_k) D_jD_k φ - Σ z_j D_j φ + (1-λ) φ|` over the points.
pub fn spine_pde_residual(lambda: f64, phi: &Polynomial, points: &[Vec<f64>]) -> Result<f64, SpineError> {
    if phi.degree() > 4 {
        return Err(SpineError::Degree(phi.degree()));
    }
    let n = phi.dim;
    let first: Vec<Polynomial> = (0..n).map(|j| phi.derivative(j)).collect();
    let second: Vec<Vec<Polynomial>> = first
        .iter()
        .map(|d| (0..n).map(|k| d.derivative(k)).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for z in points {
        if z.len() != n {
            return Err(SpineError::Dimension { got: z.len(), want: n });
        }
        let mut res = (1.0 - lambda) * phi.eval(z);
        for j in 0..n {
            res -= z[j] * first[j].eval(z);
            for k in 0..n {
                let coeff = if j == k { 1.0 } else { 0.0 } + z[j] * z[k];
                res += coeff * second[j][k].eval(z);
            }
        }
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// Parameter sweep for the Caccioppoli check.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub ms: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    pub rhos: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub r0: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ms: vec![1, 2, 3],
            lambdas: vec![0.0, 1.0, 2.0],
            mus: vec![0.0, 2.0, 6.0],
            rhos: vec![4.0, 8.0, 16.0, 32.0],
            samples: 100,
            seed: 0x5eed,
            r0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub c0: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Individual `(parameters, initial data, ρ)` checks.
    pub cells: usize,
    pub max_raw_residual: f64,
    pub max_divergence_gap: f64,
    pub all_ok: bool,
}

/// Initial data for sample `k` of parameter cell `cell`, uniform in
/// `[-1, 1]²`.
pub fn sweep_initial_data(seed: u64, cell: usize, k: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell as u64);
    rng.set_word_pos(4 * k as u128);
    (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

pub fn caccioppoli_sweep(cfg: &SweepConfig) -> Result<SweepReport, SpineError> {
    let r1 = 4.0 * cfg.rhos.iter().cloned().fold(4.0, f64::max);
    let mut cells = Vec::new();
    for &m in &cfg.ms {
        for &lambda in &cfg.lambdas {
            for &mu in &cfg.mus {
                cells.push(SpineParams::new(m, lambda, mu)?);
            }
        }
    }
    for &rho in &cfg.rhos {
        if !(rho >= 4.0) {
            return Err(SpineError::BadParameter(format!("ρ = {rho} must be at least 4")));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.samples).map(move |k| (c, k)))
        .collect();
    type Job = (usize, Vec<f64>, f64, f64);
    let results: Vec<Result<Job, SpineError>> = jobs
        .par_iter()
        .map(|&(c, k)| {
            let (g0, dg0) = sweep_initial_data(cfg.seed, c, k);
            let traj = radial_ode_solve(cells[c], g0, dg0, cfg.r0, r1, 1e-2)?;
            let ratios = cfg
                .rhos
                .iter()
                .map(|&rho| caccioppoli_check(&traj, rho).map(|r| r.ratio))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((c, ratios, traj.raw_residual(), traj.divergence_agreement()))
        })
        .collect();
    let mut max = vec![vec![0.0f64; cfg.rhos.len()]; cells.len()];
    let (mut raw, mut div) = (0.0f64, 0.0f64);
    for r in results {
        let (c, ratios, rr, dd) = r?;
        for (slot, v) in max[c].iter_mut().zip(ratios) {
            *slot = slot.max(v);
        }
        raw = raw.max(rr);
        div = div.max(dd);
    }
    let mut rows = Vec::new();
    for (c, p) in cells.iter().enumerate() {
        for (j, &rho) in cfg.rhos.iter().enumerate() {
            let c0 = p.c0();
            rows.push(SweepRow {
                m: p.m,
                lambda: p.lambda,
                mu: p.mu,
                rho,
                samples: cfg.samples,
                max_ratio: max[c][j],
                c0,
                ok: max[c][j] <= c0,
            });
        }
    }
    let all_ok = rows.iter().all(|r| r.ok);
    Ok(SweepReport {
        cells: rows.len() * cfg.samples,
        rows,
        max_raw_residual: raw,
        max_divergence_gap: div,
        all_ok,
    })
}

/// For `λ = 0`, the solution from `r₀` whose `γ/r` has no logarithmic drift
/// at `r_far`, found by combining two fundamental solutions. Normalised to
/// `γ(r_far)/r_far = 1`.
pub fn bounded_branch(params: SpineParams, r0: f64, r_far: f64) -> Result<RadialTrajectory, SpineError> {
    let u = radial_ode_solve(params, 1.0, 0.0, r0, r_far, 1e-2)?;
    let v = radial_ode_solve(params, 0.0, 1.0, r0, r_far, 1e-2)?;
    // r (γ/r)' = γ' - γ/r
    let drift = |t: &RadialTrajectory| {
        let (g, dg) = t.eval(r_far);
        dg - g / r_far
    };
    let (du, dv) = (drift(&u), drift(&v));
    let (a, b) = (dv, -du);
    let (gu, _) = u.eval(r_far);
    let (gv, _) = v.eval(r_far);
    let norm = (a * gu + b * gv) / r_far;
    if norm == 0.0 {
        return Err(SpineError::BadParameter("degenerate shooting combination".into()));
    }
    radial_ode_solve(params, a / norm, b / norm, r0, r_far, 1e-2)
}
