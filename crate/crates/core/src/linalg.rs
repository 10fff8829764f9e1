//! Rank-revealing helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Singular values sorted descending plus the matching right singular
/// vectors as columns of `v` (always `ncols × ncols`).
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let n = m.ncols();
        // Pad wide matrices with zero rows so that V is square.
        let padded;
        let m = if m.nrows() < n {
            padded = {
                let mut p = DMatrix::zeros(n, n);
                p.rows_mut(0, m.nrows()).copy_from(m);
                p
            };
            &padded
        } else {
            m
        };
        let svd = m.clone().svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
        let mut v = DMatrix::zeros(n, order.len());
        for (k, &i) in order.iter().enumerate() {
            v.set_column(k, &vt.row(i).transpose());
        }
        Self { singular_values, v }
    }

    pub fn max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Count of singular values above `rel · σ_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let cut = rel * self.max();
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }

    /// Orthonormal nullspace basis (columns) at relative threshold `rel`.
    pub fn nullspace(&self, rel: f64) -> DMatrix<f64> {
        let r = self.rank(rel);
        self.v.columns(r, self.v.ncols() - r).into_owned()
    }
}

pub fn nullspace(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    Svd::new(m).nullspace(rel)
}

pub fn rank(m: &DMatrix<f64>, rel: f64) -> usize {
    Svd::new(m).rank(rel)
}

/// Given columns `x` and a symmetric positive definite metric `g`,
/// returns a basis of `span(x)` orthonormal in `g`, dropping directions
/// whose singular value in the `g`-norm falls below `rel` times the largest.
pub fn orthonormalize_in_metric(x: &DMatrix<f64>, g: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    if x.ncols() == 0 {
        return DMatrix::zeros(x.nrows(), 0);
    }
    let root = metric_root(g);
    let y = root.transpose() * x;
    let svd = Svd::new(&y);
    let k = svd.rank(rel);
    let mut out = DMatrix::zeros(x.nrows(), k);
    for i in 0..k {
        let col: DVector<f64> = x * svd.v.column(i) / svd.singular_values[i];
        out.set_column(i, &col);
    }
    // One correction pass against rounding.
    let gram = out.transpose() * g * &out;
    if let Some(chol) = gram.clone().cholesky() {
        if let Some(l_inv) = chol.l().try_inverse() {
            out *= l_inv.transpose();
        }
    }
    out
}

/// `R` with `R Rᵀ = g`: the Cholesky factor, or a symmetric square root
/// when `g` is only semidefinite.
fn metric_root(g: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = g.clone().cholesky() {
        return chol.l();
    }
    let eig = SymmetricEigen::new(g.clone());
    let mut d = eig.eigenvalues.clone();
    for v in d.iter_mut() {
        *v = v.max(0.0).sqrt();
    }
    &eig.eigenvectors * DMatrix::from_diagonal(&d)
}

/// Largest principal-angle sine between the column spans of `x` and `y`,
/// both orthonormal in the metric `g`.
pub fn max_principal_sine(x: &DMatrix<f64>, y: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    if x.ncols() != y.ncols() {
        return 1.0;
    }
    if x.ncols() == 0 {
        return 0.0;
    }
    let cross = x.transpose() * g * y;
    let svd = Svd::new(&cross);
    let cos_min = svd.min().min(1.0);
    (1.0 - cos_min * cos_min).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = nullspace(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).amax() < 1e-14);
    }

    #[test]
    fn rank_of_rank_one() {
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let m = &u * u.transpose();
        assert_eq!(rank(&m, 1e-10), 1);
    }

    #[test]
    fn metric_orthonormalization() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 9.0]));
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0]);
        let q = orthonormalize_in_metric(&x, &g, 1e-8);
        assert_eq!(q.ncols(), 2);
        let gram = q.transpose() * &g * &q;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-14);
    }
}
