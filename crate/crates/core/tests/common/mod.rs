#![allow(dead_code)]

use nalgebra::DVector;
use netjacobi::geomcore::{orthonormalize, AmbientVector};
use rand::Rng;

pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> AmbientVector {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}

/// Orthonormal `(e1, e2, rest)` with `rest` spanning the complement.
pub fn random_frame<R: Rng>(rng: &mut R, dim: usize) -> Vec<AmbientVector> {
    loop {
        let vs: Vec<AmbientVector> = (0..dim).map(|_| random_unit(rng, dim)).collect();
        let q = orthonormalize(&vs, 1e-6);
        if q.len() == dim {
            return q;
        }
    }
}

/// Three unit vectors at mutual 120° in a random plane.
pub fn random_triple<R: Rng>(rng: &mut R, dim: usize) -> ([AmbientVector; 3], Vec<AmbientVector>) {
    let f = random_frame(rng, dim);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let om = |k: f64| {
        let t = phi + k * std::f64::consts::TAU / 3.0;
        &f[0] * t.cos() + &f[1] * t.sin()
    };
    ([om(0.0), om(1.0), om(2.0)], f)
}

fn perp_random<R: Rng>(rng: &mut R, w: &AmbientVector) -> AmbientVector {
    let x = random_unit(rng, w.len()) * rng.gen_range(0.0..3.0);
    &x - w * w.dot(&x)
}

/// `v_i ⊥ ω_i` with `Σ v_i = 0`, drawn without reference to any skew matrix.
pub fn random_balanced<R: Rng>(rng: &mut R, om: &[AmbientVector; 3]) -> [AmbientVector; 3] {
    let v1 = perp_random(rng, &om[0]);
    let mut v2 = perp_random(rng, &om[1]);
    let d = &om[2] - &om[1] * om[1].dot(&om[2]);
    let c = om[2].dot(&(&v1 + &v2)) / om[2].dot(&d);
    v2 -= d * c;
    let v3 = -(&v1 + &v2);
    [v1, v2, v3]
}

/// Mix of generic and structured `v_i ⊥ ω_i` so that every branch of the
/// vector/scalar lemma is exercised.
pub fn random_lemma_input<R: Rng>(rng: &mut R, dim: usize) -> ([AmbientVector; 3], [AmbientVector; 3]) {
    let (om, f) = random_triple(rng, dim);
    // J: e1 -> e2 in the plane, with e1 = ω₁
    let e1 = om[0].clone();
    let e2 = {
        let x = &om[1] - &e1 * e1.dot(&om[1]);
        &x / x.norm()
    };
    let j = |w: &AmbientVector| &e2 * e1.dot(w) - &e1 * e2.dot(w);
    let pick = |rng: &mut R| -> [f64; 3] {
        match rng.gen_range(0..3) {
            0 => {
                let a = rng.gen_range(-2.0..2.0);
                [a, a, a]
            }
            1 => {
                let a = rng.gen_range(-2.0..2.0);
                let b = rng.gen_range(-2.0..2.0);
                [a, b, -a - b]
            }
            _ => [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ],
        }
    };
    let alphas = pick(rng);
    let betas = pick(rng);
    let normal_dir = if dim > 2 { Some(f[2].clone()) } else { None };
    let skew_normals = dim > 3 && rng.gen_bool(0.2);
    let mut vs: [AmbientVector; 3] = [0, 1, 2].map(|i| j(&om[i]) * alphas[i]);
    if let Some(n) = normal_dir {
        for i in 0..3 {
            vs[i] += &n * betas[i];
        }
        if skew_normals {
            vs[0] += &f[3] * rng.gen_range(0.5..1.0);
        }
    }
    (om, vs)
}
