//! Small-dimension exact linear algebra: subspaces and projections, skew
//! generators, and the junction lemmas relating vector and scalar conditions
//! for three unit conormals meeting at 120°.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// A vector in the ambient space `R^D`, `D = 2 + k`.
pub type AmbientVector = DVector<f64>;

/// Absolute tolerance used when a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("precondition `{constraint}` violated (residual {residual:.3e})")]
    Precondition { constraint: &'static str, residual: f64 },
    #[error("matrix is not skew-symmetric (max |A + A^T| = {asymmetry:.3e})")]
    NotSkew { asymmetry: f64 },
    #[error("the three unit vectors do not span a 2-plane")]
    DegeneratePlane,
}

/// Unit vector `e_i` in `R^dim`.
pub fn basis_vector(dim: usize, i: usize) -> AmbientVector {
    let mut v = AmbientVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors whose
/// residual norm falls below `tol` are dropped.
pub fn orthonormalize(vectors: &[AmbientVector], tol: f64) -> Vec<AmbientVector> {
    let mut basis: Vec<AmbientVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let n = w.norm();
        if n > tol {
            basis.push(w / n);
        }
    }
    basis
}

/// A linear subspace of `R^D` held by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    dim: usize,
    basis: Vec<AmbientVector>,
}

impl Subspace {
    /// Span of `vectors`; linearly dependent inputs are discarded.
    pub fn span(dim: usize, vectors: &[AmbientVector]) -> Result<Self, GeomError> {
        for v in vectors {
            check_dim(dim, v)?;
        }
        Ok(Self {
            dim,
            basis: orthonormalize(vectors, 1e-12),
        })
    }

    pub fn full(dim: usize) -> Self {
        Self {
            dim,
            basis: (0..dim).map(|i| basis_vector(dim, i)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, basis: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[AmbientVector] {
        &self.basis
    }

    /// Orthogonal complement, with basis completed from the standard basis
    /// in index order.
    pub fn complement(&self) -> Subspace {
        let mut all = self.basis.clone();
        let start = all.len();
        for i in 0..self.dim {
            all.push(basis_vector(self.dim, i));
        }
        let full = orthonormalize(&all, 1e-8);
        Subspace {
            dim: self.dim,
            basis: full[start..].to_vec(),
        }
    }

    pub fn project(&self, v: &AmbientVector) -> Result<AmbientVector, GeomError> {
        check_dim(self.dim, v)?;
        let mut out = AmbientVector::zeros(self.dim);
        for b in &self.basis {
            out.axpy(b.dot(v), b, 1.0);
        }
        Ok(out)
    }

    /// Max deviation of the basis Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }
}

/// `π_S(v) = Σ (v·b_i) b_i`.
pub fn project(s: &Subspace, v: &AmbientVector) -> Result<AmbientVector, GeomError> {
    s.project(v)
}

fn check_dim(dim: usize, v: &AmbientVector) -> Result<(), GeomError> {
    if v.len() != dim {
        return Err(GeomError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(())
}

/// Skew-symmetric `D×D` matrix, an infinitesimal rotation of `R^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewGenerator(DMatrix<f64>);

impl SkewGenerator {
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self, GeomError> {
        if m.nrows() != m.ncols() {
            return Err(GeomError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let asymmetry = asymmetry(&m);
        if asymmetry > tol {
            return Err(GeomError::NotSkew { asymmetry });
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// `e_j e_i^T - e_i e_j^T`: rotation taking `e_i` towards `e_j`.
    pub fn elementary(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(j, i)] = 1.0;
        m[(i, j)] = -1.0;
        Self(m)
    }

    /// `a b^T - b a^T`.
    pub fn wedge(a: &AmbientVector, b: &AmbientVector) -> Self {
        Self(a * b.transpose() - b * a.transpose())
    }

    /// Basis of so(D) ordered lexicographically by `(i, j)`, `i < j`.
    pub fn basis(dim: usize) -> Vec<SkewGenerator> {
        let mut out = Vec::with_capacity(dim * dim.saturating_sub(1) / 2);
        for i in 0..dim {
            for j in (i + 1)..dim {
                out.push(Self::elementary(dim, i, j));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn apply(&self, v: &AmbientVector) -> AmbientVector {
        &self.0 * v
    }

    pub fn asymmetry(&self) -> f64 {
        asymmetry(&self.0)
    }

    pub fn scaled_add(&self, other: &SkewGenerator, c: f64) -> SkewGenerator {
        SkewGenerator(&self.0 + &other.0 * c)
    }

    /// Conjugate by an orthogonal matrix: `q A q^T`.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> SkewGenerator {
        SkewGenerator(q * &self.0 * q.transpose())
    }
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).amax()
}

/// Ordered orthonormal basis `(e1, e2)` of the plane of a 120° triple, with
/// `e1 = ω₁` and `e2` the Gram-Schmidt of `ω₂`. The quarter turn `J` maps
/// `e1 → e2 → -e1`, so `ω₂` sits at `+120°` from `ω₁`.
#[derive(Debug, Clone)]
pub struct TriplePlane {
    pub e1: AmbientVector,
    pub e2: AmbientVector,
}

impl TriplePlane {
    pub fn new(omegas: &[AmbientVector; 3]) -> Result<Self, GeomError> {
        let e1 = omegas[0].clone();
        let w = &omegas[1] - &e1 * e1.dot(&omegas[1]);
        let n = w.norm();
        if n < 1e-6 {
            return Err(GeomError::DegeneratePlane);
        }
        Ok(Self { e1, e2: w / n })
    }

    pub fn project(&self, v: &AmbientVector) -> AmbientVector {
        &self.e1 * self.e1.dot(v) + &self.e2 * self.e2.dot(v)
    }

    pub fn project_normal(&self, v: &AmbientVector) -> AmbientVector {
        v - self.project(v)
    }

    /// Quarter turn inside the plane; vanishes on the normal space.
    pub fn rotate90(&self, v: &AmbientVector) -> AmbientVector {
        &self.e2 * self.e1.dot(v) - &self.e1 * self.e2.dot(v)
    }
}

fn check_triple(omegas: &[AmbientVector; 3], tol: f64) -> Result<usize, GeomError> {
    let dim = omegas[0].len();
    for w in omegas {
        check_dim(dim, w)?;
    }
    let unit = omegas.iter().map(|w| (w.norm() - 1.0).abs()).fold(0.0, f64::max);
    if unit > tol {
        return Err(GeomError::Precondition {
            constraint: "|ω_i| = 1",
            residual: unit,
        });
    }
    let sum = (&omegas[0] + &omegas[1] + &omegas[2]).norm();
    if sum > tol {
        return Err(GeomError::Precondition {
            constraint: "Σ ω_i = 0",
            residual: sum,
        });
    }
    Ok(dim)
}

/// Skew `A` with `A ω_i = v_i` (i = 1, 2, 3) that vanishes on the orthogonal
/// complement of `span(ω, v)`.
///
/// With `v^T`, `v^⊥` the components in and normal to the plane `P` of the
/// `ω`'s, `A = Σ_ℓ w_ℓ ω_ℓ^T - ω_ℓ w_ℓ^T` where `w_ℓ = v_ℓ^T / 3 + v_ℓ^⊥ / (3/2)`.
/// The in-plane weight is `1/3`: the planar parts are a common quarter turn
/// `α J ω_ℓ`, and each of the three wedges `Jω ω^T - ω (Jω)^T` equals `J`.
pub fn skew_extension(
    omegas: &[AmbientVector; 3],
    vs: &[AmbientVector; 3],
    tol: Option<f64>,
) -> Result<SkewGenerator, GeomError> {
    let tol = tol.unwrap_or(DEFAULT_TOL);
    let dim = check_triple(omegas, tol)?;
    for v in vs {
        check_dim(dim, v)?;
    }
    let scale = 1.0 + vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let perp = omegas.iter().zip(vs).map(|(w, v)| w.dot(v).abs()).fold(0.0, f64::max);
    if perp > tol * scale {
        return Err(GeomError::Precondition {
            constraint: "v_i ⊥ ω_i",
            residual: perp,
        });
    }
    let sum = (&vs[0] + &vs[1] + &vs[2]).norm();
    if sum > tol * scale {
        return Err(GeomError::Precondition {
            constraint: "Σ v_i = 0",
            residual: sum,
        });
    }
    let plane = TriplePlane::new(omegas)?;
    let mut a = DMatrix::zeros(dim, dim);
    for (w, v) in omegas.iter().zip(vs) {
        let tangential = plane.project(v);
        let normal = v - &tangential;
        let weighted = tangential / 3.0 + normal / 1.5;
        a += &weighted * w.transpose() - w * weighted.transpose();
    }
    Ok(SkewGenerator(a))
}

/// Vector `u` in the plane of the `ω`'s with `u·ω_i = α_i`, given `Σ α_i = 0`:
/// `u = α₁ ω₁ + (α₂ - α₃)/√3 · J ω₁`.
pub fn scalar_duality_u(
    alphas: [f64; 3],
    omegas: &[AmbientVector; 3],
    tol: Option<f64>,
) -> Result<AmbientVector, GeomError> {
    let tol = tol.unwrap_or(DEFAULT_TOL);
    check_triple(omegas, tol)?;
    let sum = alphas.iter().sum::<f64>();
    if sum.abs() > 1e-12_f64.max(tol * 1e-2) * (1.0 + alphas.iter().map(|a| a.abs()).sum::<f64>()) {
        return Err(GeomError::Precondition {
            constraint: "Σ α_i = 0",
            residual: sum.abs(),
        });
    }
    let plane = TriplePlane::new(omegas)?;
    let j_omega = plane.rotate90(&omegas[0]);
    Ok(&omegas[0] * alphas[0] + j_omega * ((alphas[1] - alphas[2]) / 3f64.sqrt()))
}

/// Numerical evaluation of the vector/scalar junction lemma for one triple.
///
/// Each `v_i ⊥ ω_i` splits as `α_i J ω_i` in the plane `P` plus a normal part.
/// Part A relates the planar parts to the `α`'s, part B the normal parts to
/// their coefficients `β_i` along a common direction (when they are collinear).
#[derive(Debug, Clone, PartialEq)]
pub struct TripleReport {
    pub alphas: [f64; 3],
    /// `Σ π_P(v_i) = 0`.
    pub sum_zero: bool,
    /// Some `u` has `v_i = π_{<ω_i>^⊥}(u)` for all `i`.
    pub common_u_exists: bool,
    /// `α₁ = α₂ = α₃`.
    pub equal_alphas: bool,
    pub alpha_sum_zero: bool,
    /// Some `u` has `π_P(v_i) = π_{<ω_i>^⊥}(u)`.
    pub planar_common_u: bool,
    /// Coefficients of the normal parts along a shared unit direction, when
    /// the normal parts are collinear.
    pub betas: Option<[f64; 3]>,
    /// `Σ π_{P^⊥}(v_i) = 0`.
    pub normal_sum_zero: bool,
    /// Some `u` has `π_{P^⊥}(v_i) = π_{<ω_i>^⊥}(u)`.
    pub normal_common_u: bool,
}

impl TripleReport {
    /// The four equivalences, in order A1, A2, B1, B2. Part B holds vacuously
    /// when the normal parts are not collinear.
    pub fn equivalences(&self, tol: f64) -> [bool; 4] {
        let (b1, b2) = match self.betas {
            Some(b) => {
                let scale = 1.0 + b.iter().map(|x| x.abs()).fold(0.0, f64::max);
                let equal = (b[0] - b[1]).abs() <= tol * scale && (b[1] - b[2]).abs() <= tol * scale;
                let sum_zero = (b[0] + b[1] + b[2]).abs() <= tol * scale;
                (self.normal_common_u == equal, self.normal_sum_zero == sum_zero)
            }
            None => (true, true),
        };
        [
            self.planar_common_u == self.alpha_sum_zero,
            self.sum_zero == self.equal_alphas,
            b1,
            b2,
        ]
    }
}

/// Least-squares `u` for `π_{<ω_i>^⊥}(u) = w_i`; returns the max residual.
/// `Σ π_{<ω_i>^⊥} = 3/2` on `P` and `3` on `P^⊥`, so the normal equations
/// invert in closed form.
fn common_u_residual(plane: &TriplePlane, omegas: &[AmbientVector; 3], ws: &[AmbientVector; 3]) -> f64 {
    let perp = |w: &AmbientVector, x: &AmbientVector| x - w * w.dot(x);
    let mut rhs = AmbientVector::zeros(omegas[0].len());
    for (om, w) in omegas.iter().zip(ws) {
        rhs += perp(om, w);
    }
    let u = plane.project(&rhs) / 1.5 + plane.project_normal(&rhs) / 3.0;
    omegas
        .iter()
        .zip(ws)
        .map(|(om, w)| (perp(om, &u) - w).norm())
        .fold(0.0, f64::max)
}

pub fn triple_sum_tests(
    omegas: &[AmbientVector; 3],
    vs: &[AmbientVector; 3],
    tol: Option<f64>,
) -> Result<TripleReport, GeomError> {
    let tol = tol.unwrap_or(1e-9);
    let dim = check_triple(omegas, tol.max(DEFAULT_TOL))?;
    for v in vs {
        check_dim(dim, v)?;
    }
    let plane = TriplePlane::new(omegas)?;
    let scale = 1.0 + vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let perp = omegas.iter().zip(vs).map(|(w, v)| w.dot(v).abs()).fold(0.0, f64::max);
    if perp > tol * scale {
        return Err(GeomError::Precondition {
            constraint: "v_i ⊥ ω_i",
            residual: perp,
        });
    }
    let planar: Vec<AmbientVector> = vs.iter().map(|v| plane.project(v)).collect();
    let normal: Vec<AmbientVector> = vs.iter().zip(&planar).map(|(v, p)| v - p).collect();
    let mut alphas = [0.0; 3];
    for i in 0..3 {
        alphas[i] = plane.rotate90(&omegas[i]).dot(&planar[i]);
    }
    let tol_s = tol * scale;
    let planar_arr = [planar[0].clone(), planar[1].clone(), planar[2].clone()];
    let normal_arr = [normal[0].clone(), normal[1].clone(), normal[2].clone()];

    let betas = {
        let longest = normal.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        if longest.norm() <= tol_s {
            Some([0.0; 3])
        } else {
            let dir = longest / longest.norm();
            let b = [dir.dot(&normal[0]), dir.dot(&normal[1]), dir.dot(&normal[2])];
            let off = (0..3).map(|i| (&normal[i] - &dir * b[i]).norm()).fold(0.0, f64::max);
            (off <= tol_s).then_some(b)
        }
    };

    Ok(TripleReport {
        alphas,
        sum_zero: (&planar[0] + &planar[1] + &planar[2]).norm() <= tol_s,
        common_u_exists: common_u_residual(&plane, omegas, vs) <= tol_s,
        equal_alphas: (alphas[0] - alphas[1]).abs() <= tol_s && (alphas[1] - alphas[2]).abs() <= tol_s,
        alpha_sum_zero: alphas.iter().sum::<f64>().abs() <= tol_s,
        planar_common_u: common_u_residual(&plane, omegas, &planar_arr) <= tol_s,
        betas,
        normal_sum_zero: (&normal[0] + &normal[1] + &normal[2]).norm() <= tol_s,
        normal_common_u: common_u_residual(&plane, omegas, &normal_arr) <= tol_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> AmbientVector {
        AmbientVector::from_column_slice(xs)
    }

    fn standard_triple() -> [AmbientVector; 3] {
        let t = 2.0 * std::f64::consts::PI / 3.0;
        [
            v(&[1.0, 0.0]),
            v(&[t.cos(), t.sin()]),
            v(&[(2.0 * t).cos(), (2.0 * t).sin()]),
        ]
    }

    fn embed(x: &AmbientVector, dim: usize) -> AmbientVector {
        let mut out = AmbientVector::zeros(dim);
        out.rows_mut(0, x.len()).copy_from(x);
        out
    }

    #[test]
    fn coordinate_projection() {
        let s = Subspace::span(2, &[v(&[1.0, 0.0])]).unwrap();
        assert_eq!(project(&s, &v(&[3.0, 4.0])).unwrap(), v(&[3.0, 0.0]));
    }

    #[test]
    fn full_space_projection_is_identity() {
        let x = v(&[0.3, -1.7, 2.5]);
        let p = Subspace::full(3).project(&x).unwrap();
        assert!((p - x).norm() < 1e-15);
    }

    #[test]
    fn projection_rejects_wrong_dimension() {
        let s = Subspace::full(3);
        assert!(matches!(
            s.project(&v(&[1.0, 2.0])),
            Err(GeomError::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn complement_is_orthogonal() {
        let s = Subspace::span(4, &[v(&[1.0, 1.0, 0.0, 0.0]), v(&[0.0, 1.0, 1.0, 0.0])]).unwrap();
        let c = s.complement();
        assert_eq!(c.rank(), 2);
        for a in s.basis() {
            for b in c.basis() {
                assert!(a.dot(b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_fields_give_zero_generator() {
        let om = standard_triple();
        let zero = [
            AmbientVector::zeros(2),
            AmbientVector::zeros(2),
            AmbientVector::zeros(2),
        ];
        let a = skew_extension(&om, &zero, None).unwrap();
        assert_eq!(a.matrix().amax(), 0.0);
    }

    #[test]
    fn quarter_turn_fields_recover_rotation_generator() {
        let om = standard_triple();
        let rot = |x: &AmbientVector| v(&[-x[1], x[0]]);
        let vs = [rot(&om[0]), rot(&om[1]), rot(&om[2])];
        let a = skew_extension(&om, &vs, None).unwrap();
        for i in 0..3 {
            assert!((a.apply(&om[i]) - &vs[i]).amax() < 1e-14);
        }
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((a.matrix() - j).amax() < 1e-14);
    }

    #[test]
    fn skew_extension_reports_violated_constraint() {
        let om = standard_triple();
        let vs = [v(&[0.0, 1.0]), v(&[0.0, 0.0]), v(&[0.0, 0.0])];
        match skew_extension(&om, &vs, None) {
            Err(GeomError::Precondition { constraint, residual }) => {
                assert_eq!(constraint, "Σ v_i = 0");
                assert!((residual - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = [v(&[1.0, 0.0]), v(&[1.0, 0.0]), v(&[-2.0, 0.0])];
        assert!(skew_extension(&bad, &vs, None).is_err());
    }

    #[test]
    fn duality_u_trivial_and_collapsed_cases() {
        let om = standard_triple();
        assert_eq!(scalar_duality_u([0.0; 3], &om, None).unwrap().norm(), 0.0);
        let u = scalar_duality_u([2.0, -1.0, -1.0], &om, None).unwrap();
        assert!((&u - &om[0] * 2.0).norm() < 1e-15);
    }

    #[test]
    fn duality_u_reproduces_dot_products() {
        let om = standard_triple();
        let u = scalar_duality_u([1.0, -1.0, 0.0], &om, None).unwrap();
        assert!((u.dot(&om[0]) - 1.0).abs() < 1e-14);
        assert!((u.dot(&om[1]) + 1.0).abs() < 1e-14);
        assert!(u.dot(&om[2]).abs() < 1e-14);
        assert!(scalar_duality_u([1.0, 1.0, 0.0], &om, None).is_err());
    }

    #[test]
    fn equal_quarter_turns_sum_to_zero() {
        let om = standard_triple();
        let plane = TriplePlane::new(&om).unwrap();
        let vs = [
            plane.rotate90(&om[0]) * 0.7,
            plane.rotate90(&om[1]) * 0.7,
            plane.rotate90(&om[2]) * 0.7,
        ];
        let r = triple_sum_tests(&om, &vs, None).unwrap();
        assert!(r.sum_zero && r.equal_alphas && !r.alpha_sum_zero);
        assert!(r.equivalences(1e-9).iter().all(|&b| b));
    }

    #[test]
    fn sum_zero_alphas_admit_common_u_but_do_not_sum() {
        let om = standard_triple();
        let plane = TriplePlane::new(&om).unwrap();
        let vs = [
            plane.rotate90(&om[0]),
            plane.rotate90(&om[1]) * -1.0,
            AmbientVector::zeros(2),
        ];
        let r = triple_sum_tests(&om, &vs, None).unwrap();
        assert!(r.common_u_exists);
        assert!(!r.sum_zero);
        assert!(r.equivalences(1e-9).iter().all(|&b| b));
    }

    #[test]
    fn equal_normal_multiples_admit_common_u() {
        let om: Vec<AmbientVector> = standard_triple().iter().map(|w| embed(w, 4)).collect();
        let om = [om[0].clone(), om[1].clone(), om[2].clone()];
        let n = v(&[0.0, 0.0, 0.6, 0.8]);
        let vs = [&n * 1.5, &n * 1.5, &n * 1.5];
        let r = triple_sum_tests(&om, &vs, None).unwrap();
        assert!(r.common_u_exists && r.normal_common_u);
        assert!(!r.normal_sum_zero);
        assert!(r.equivalences(1e-9).iter().all(|&b| b));
    }

    #[test]
    fn degenerate_triple_rejected() {
        let om = [v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 0.0])];
        let zero = [
            AmbientVector::zeros(2),
            AmbientVector::zeros(2),
            AmbientVector::zeros(2),
        ];
        assert!(triple_sum_tests(&om, &zero, None).is_err());
    }
}
