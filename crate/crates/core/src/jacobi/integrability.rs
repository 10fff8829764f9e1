//! Linear fields, rotation fields, integrability and local reconstruction.

use super::{
    check_stationary, compatibility_system_with, constraint_residual, l2_inner, ArcFieldCoefficients, FieldBasis,
    JacobiError, Layout, SystemOptions, RANK_TOL,
};
use crate::geomcore::{skew_extension, AmbientVector, SkewGenerator};
use crate::linalg::{self, Svd};
use crate::net::GeodesicNet;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Solutions of the `λ = 1` junction system with the `V_p` dropped,
/// orthonormal in `L²(Γ)`.
pub fn linear_field_basis(net: &GeodesicNet) -> Result<FieldBasis, JacobiError> {
    solution_basis(net, SystemOptions::default())
}

fn solution_basis(net: &GeodesicNet, opts: SystemOptions) -> Result<FieldBasis, JacobiError> {
    let sys = compatibility_system_with(net, opts)?;
    let null = linalg::nullspace(&sys.matrix, RANK_TOL);
    let nf = sys.layout.field_cols();
    let fields = null.rows(0, nf).into_owned();
    Ok(FieldBasis::from_columns(net, opts.lambda, &fields))
}

/// `a(i) = π_{P(i)^⊥}(A t_i)`, `b(i) = π_{P(i)^⊥}(A u_i)`: the normal part
/// of the rotation `x ↦ A x` restricted to each wedge.
pub fn rotation_field(net: &GeodesicNet, a: &SkewGenerator) -> Result<ArcFieldCoefficients, JacobiError> {
    if a.dim() != net.ambient_dim() {
        return Err(crate::geomcore::GeomError::DimensionMismatch {
            expected: net.ambient_dim(),
            found: a.dim(),
        }
        .into());
    }
    let asym = a.asymmetry();
    if asym > 1e-12 * (1.0 + a.matrix().amax()) {
        return Err(crate::geomcore::GeomError::NotSkew { asymmetry: asym }.into());
    }
    let arcs = net
        .arcs()
        .iter()
        .map(|arc| {
            (
                arc.project_normal(&a.apply(&arc.tangent)),
                arc.project_normal(&a.apply(&arc.start)),
            )
        })
        .collect();
    Ok(ArcFieldCoefficients { lambda: 1.0, arcs })
}

#[derive(Debug, Clone)]
pub struct RotationSubspace {
    pub basis: FieldBasis,
    /// Dimension of `{A : π_{P(i)^⊥} ∘ A ≡ 0 on every wedge}`.
    pub dim_stabilizer: usize,
}

/// Image of `so(D)` under [`rotation_field`].
pub fn rotation_subspace(net: &GeodesicNet) -> Result<RotationSubspace, JacobiError> {
    let d = net.ambient_dim();
    let gens = SkewGenerator::basis(d);
    let n = Layout::new(net).field_cols();
    let mut x = DMatrix::zeros(n, gens.len());
    for (k, g) in gens.iter().enumerate() {
        x.set_column(k, &rotation_field(net, g)?.coords(net));
    }
    let basis = FieldBasis::from_columns(net, 1.0, &x);
    Ok(RotationSubspace {
        dim_stabilizer: gens.len() - basis.dim(),
        basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrabilityVerdict {
    pub dim_solutions: usize,
    pub dim_rotations: usize,
    pub dim_stabilizer: usize,
    pub integrable: bool,
    /// Largest junction-condition violation among the rotation fields of
    /// the elementary generators.
    pub residual: f64,
    /// Largest `L²` distance from a unit rotation field to the solutions.
    pub containment: f64,
}

#[derive(Default, Debug, Clone, Copy)]
pub struct IntegrabilityOptions {
    /// Non-physical negative control: assemble without derivative rows.
    pub drop_derivative_rows: bool,
}

pub fn integrability(net: &GeodesicNet) -> Result<IntegrabilityVerdict, JacobiError> {
    integrability_with(net, IntegrabilityOptions::default())
}

/// Compare the linear solutions with the rotation fields, after checking
/// that every rotation field is a solution.
pub fn integrability_with(net: &GeodesicNet, opts: IntegrabilityOptions) -> Result<IntegrabilityVerdict, JacobiError> {
    if !net.is_polyhedral() {
        return Err(JacobiError::NotPolyhedral);
    }
    check_stationary(net)?;
    let sys_opts = SystemOptions {
        lambda: 1.0,
        include_derivative_rows: !opts.drop_derivative_rows,
    };
    let solutions = solution_basis(net, sys_opts)?;
    let rotations = rotation_subspace(net)?;
    let mut residual: f64 = 0.0;
    for g in SkewGenerator::basis(net.ambient_dim()) {
        residual = residual.max(constraint_residual(net, &rotation_field(net, &g)?));
    }
    let mut containment: f64 = 0.0;
    for r in &rotations.basis.fields {
        let mut rest = r.clone();
        for s in &solutions.fields {
            let c = l2_inner(net, r, s);
            for (k, (a, b)) in rest.arcs.iter_mut().enumerate() {
                *a -= &s.arcs[k].0 * c;
                *b -= &s.arcs[k].1 * c;
            }
        }
        containment = containment.max(l2_inner(net, &rest, &rest).max(0.0).sqrt());
    }
    if containment > 1e-8 {
        return Err(JacobiError::Containment { residual: containment });
    }
    Ok(IntegrabilityVerdict {
        dim_solutions: solutions.dim(),
        dim_rotations: rotations.basis.dim(),
        dim_stabilizer: rotations.dim_stabilizer,
        integrable: solutions.dim() == rotations.basis.dim(),
        residual,
        containment,
    })
}

#[derive(Debug, Clone)]
pub struct LocalSkew {
    pub generator: SkewGenerator,
    /// Largest mismatch of `a(i)`, `b(i)` against `π_{P(i)^⊥} ∘ A_L` over
    /// the incident arcs.
    pub residual: f64,
}

/// Skew `A_L` whose rotation field agrees with a linear field on the three
/// arcs at a vertex `p`.
///
/// With `D_i` the inward derivatives at `p` and `n_i` the outer conormals,
/// the derivative condition gives `Σ D_i = 0`, so the extension lemma yields
/// a skew `A'` with `A' n_i = -D_i` vanishing at `p`. A vector `b ⊥ p` with
/// `π_{P(i)^⊥}(b) = v(i)(p)` exists by the value condition, and
/// `A_L = A' + b' pᵀ - p b'ᵀ` with `b' = b - A'p` matches both.
pub fn local_skew_reconstruct(
    net: &GeodesicNet,
    field: &ArcFieldCoefficients,
    vertex: usize,
) -> Result<LocalSkew, JacobiError> {
    if vertex >= net.vertices().len() {
        return Err(JacobiError::BadVertex(vertex));
    }
    if field.arcs.len() != net.arcs().len() {
        return Err(JacobiError::ArcCount {
            expected: net.arcs().len(),
            found: field.arcs.len(),
        });
    }
    if (field.lambda - 1.0).abs() > 1e-12 {
        return Err(JacobiError::NotLinear(field.lambda));
    }
    let inc = net.incidence(vertex);
    if inc.len() != 3 {
        return Err(JacobiError::Valence {
            vertex,
            valence: inc.len(),
        });
    }
    let p = &net.vertices()[vertex];
    let dim = net.ambient_dim();
    let scale = 1.0
        + field
            .arcs
            .iter()
            .map(|(a, b)| a.norm().max(b.norm()))
            .fold(0.0, f64::max);

    let mut omegas = Vec::with_capacity(3);
    let mut vs = Vec::with_capacity(3);
    let mut values = Vec::with_capacity(3);
    let mut sum = AmbientVector::zeros(dim);
    for &(i, end) in inc {
        let arc = &net.arcs()[i];
        let d = field.inward_derivative(net, i, end);
        sum += &d;
        omegas.push(arc.conormal(end));
        vs.push(-d);
        values.push(field.value(i, arc.theta(end)));
    }
    let c1 = sum.norm();
    if c1 > 1e-8 * scale {
        return Err(JacobiError::Compatibility { vertex, residual: c1 });
    }
    let omegas: [AmbientVector; 3] = [omegas[0].clone(), omegas[1].clone(), omegas[2].clone()];
    let vs: [AmbientVector; 3] = [vs[0].clone(), vs[1].clone(), vs[2].clone()];
    let a_prime = skew_extension(&omegas, &vs, Some(1e-8))?;

    // b ⊥ p with matching normal projections, by least squares.
    let tangent = crate::geomcore::Subspace::span(dim, std::slice::from_ref(p))?.complement();
    let q = tangent.basis();
    let codim = dim - 2;
    let mut m = DMatrix::zeros(3 * codim, q.len());
    let mut rhs = DVector::zeros(3 * codim);
    for (k, &(i, _)) in inc.iter().enumerate() {
        let arc = &net.arcs()[i];
        for (r, f) in arc.frame.iter().enumerate() {
            for (c, qc) in q.iter().enumerate() {
                m[(k * codim + r, c)] = f.dot(qc);
            }
            rhs[k * codim + r] = f.dot(&values[k]);
        }
    }
    let y = m
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|_| JacobiError::Compatibility {
            vertex,
            residual: f64::INFINITY,
        })?;
    let c0 = (&m * &y - &rhs).amax();
    if c0 > 1e-8 * scale {
        return Err(JacobiError::Compatibility { vertex, residual: c0 });
    }
    let mut b = AmbientVector::zeros(dim);
    for (c, qc) in q.iter().enumerate() {
        b.axpy(y[c], qc, 1.0);
    }
    let b_prime = &b - a_prime.apply(p);
    let generator = a_prime.scaled_add(&SkewGenerator::wedge(&b_prime, p), 1.0);

    let mut residual: f64 = 0.0;
    for &(i, _) in inc {
        let arc = &net.arcs()[i];
        let (a_i, b_i) = &field.arcs[i];
        residual = residual
            .max((a_i - arc.project_normal(&generator.apply(&arc.tangent))).norm())
            .max((b_i - arc.project_normal(&generator.apply(&arc.start))).norm());
    }
    Ok(LocalSkew { generator, residual })
}

/// Rank of `V ↦ (π_{P(i)^⊥} V)_i` on `R^D`.
pub fn translation_rank(net: &GeodesicNet) -> usize {
    let d = net.ambient_dim();
    let codim = d - 2;
    let mut m = DMatrix::zeros(codim * net.arcs().len(), d);
    for (i, arc) in net.arcs().iter().enumerate() {
        for (r, f) in arc.frame.iter().enumerate() {
            for k in 0..d {
                m[(i * codim + r, k)] = f[k];
            }
        }
    }
    Svd::new(&m).rank(RANK_TOL)
}

/// Dimension of linear compatible fields on the cylinder over the cone with
/// an `m`-dimensional spine: `m · rank(translations) + dim(linear fields)`.
pub fn cylinder_l_dim(net: &GeodesicNet, m: usize) -> Result<usize, JacobiError> {
    Ok(m * translation_rank(net) + linear_field_basis(net)?.dim())
}
