//! Per-arc solution basis of `u'' + λ u = 0` and its exact integrals.
//!
//! The basis is `s(θ) = sin(ωθ)/ω`, `c(θ) = cos(ωθ)` with `ω = √λ`, which
//! reduces to `(θ, 1)` at `λ = 0` and to `(sinh(κθ)/κ, cosh(κθ))` for
//! `λ = -κ² < 0`. It is analytic in `λ`, satisfies `s' = c`, `c' = -λ s`,
//! and equals `(sin, cos)` at `λ = 1`.

/// `s_λ(θ)`.
pub fn s(lambda: f64, theta: f64) -> f64 {
    if lambda > 0.0 {
        let w = lambda.sqrt();
        (w * theta).sin() / w
    } else if lambda < 0.0 {
        let k = (-lambda).sqrt();
        (k * theta).sinh() / k
    } else {
        theta
    }
}

/// `c_λ(θ)`.
pub fn c(lambda: f64, theta: f64) -> f64 {
    if lambda > 0.0 {
        (lambda.sqrt() * theta).cos()
    } else if lambda < 0.0 {
        ((-lambda).sqrt() * theta).cosh()
    } else {
        1.0
    }
}

/// Values and first derivatives `(s, c, s', c')` at `θ`.
pub fn eval(lambda: f64, theta: f64) -> [f64; 4] {
    let sv = s(lambda, theta);
    let cv = c(lambda, theta);
    [sv, cv, cv, -lambda * sv]
}

// 16-point Gauss-Legendre on [-1, 1].
const GL_NODES: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_09,
];

fn gauss_legendre(f: impl Fn(f64) -> f64, len: f64) -> f64 {
    let half = 0.5 * len;
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (f(half * (1.0 - x)) + f(half * (1.0 + x)));
    }
    acc * half
}

/// Exact integrals over `[0, L]` of `s²`, `s c`, `c²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcIntegrals {
    pub ss: f64,
    pub sc: f64,
    pub cc: f64,
}

impl ArcIntegrals {
    pub fn new(lambda: f64, len: f64) -> Self {
        // `c² + λ s²` is conserved, so `∫c² = L - λ ∫s²`.
        let ss = if (lambda * len * len).abs() >= 1.0 {
            (len - 0.5 * s(lambda, 2.0 * len)) / (2.0 * lambda)
        } else {
            gauss_legendre(|t| s(lambda, t).powi(2), len)
        };
        let sl = s(lambda, len);
        Self {
            ss,
            sc: 0.5 * sl * sl,
            cc: len - lambda * ss,
        }
    }

    /// `∫ (a s + b c)·(a' s + b' c)` given the four dot products
    /// `a·a'`, `a·b'`, `b·a'`, `b·b'`.
    pub fn pair(&self, aa: f64, ab: f64, ba: f64, bb: f64) -> f64 {
        aa * self.ss + (ab + ba) * self.sc + bb * self.cc
    }
}

/// `∫_0^L u w` for `u = a₁ s_{λ₁} + b₁ c_{λ₁}`, `w = a₂ s_{λ₂} + b₂ c_{λ₂}`
/// with `λ₁ ≠ λ₂`, from the Wronskian identity
/// `(λ₁ - λ₂) ∫ u w = [u w' - u' w]_0^L`. Dot products are supplied as
/// `[a₁·a₂, a₁·b₂, b₁·a₂, b₁·b₂]`.
pub fn cross_integral(l1: f64, l2: f64, len: f64, dots: [f64; 4]) -> f64 {
    let [aa, ab, ba, bb] = dots;
    let bracket = |t: f64| {
        let [s1, c1, ds1, dc1] = eval(l1, t);
        let [s2, c2, ds2, dc2] = eval(l2, t);
        // u w' - u' w, expanded bilinearly
        aa * (s1 * ds2 - ds1 * s2)
            + ab * (s1 * dc2 - ds1 * c2)
            + ba * (c1 * ds2 - dc1 * s2)
            + bb * (c1 * dc2 - dc1 * c2)
    };
    (bracket(len) - bracket(0.0)) / (l1 - l2)
}
