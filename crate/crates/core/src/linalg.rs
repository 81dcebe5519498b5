//! Small dense linear algebra for the update rules.
//!
//! The filters solve symmetric positive-definite systems built from Gram
//! matrices: P×P in the production paths (P is the memory order, typically
//! below ten) and up to a few hundred rows in the dense oracle forms. All of
//! that is served by an in-place Cholesky factorization; rank-deficient
//! systems fall back to a minimum-norm solve through a Jacobi
//! eigendecomposition. Matrices are column-major.

use crate::error::{Error, Result};

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds an `len × cols.len()` matrix from column slices.
    ///
    /// Panics if the columns have unequal lengths.
    pub fn from_columns(cols: &[&[f64]]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        let mut data = Vec::with_capacity(rows * cols.len());
        for c in cols {
            assert_eq!(c.len(), rows, "ragged columns");
            data.extend_from_slice(c);
        }
        Mat {
            rows,
            cols: cols.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `self · z` for a square or rectangular matrix.
    pub fn mat_vec(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &zj) in z.iter().enumerate() {
            if zj != 0.0 {
                axpy(zj, self.col(j), &mut out);
            }
        }
        out
    }

    /// `selfᵀ · w`.
    pub fn tr_mat_vec(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), w)).collect()
    }

    /// Adds `alpha` to every diagonal entry.
    pub fn add_diag(&mut self, alpha: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            let v = self.get(i, i);
            self.set(i, i, v + alpha);
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

/// Gram matrix `XᵀX` from column slices.
pub fn gram(cols: &[&[f64]]) -> Mat {
    let p = cols.len();
    let mut g = Mat::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let v = dot(cols[i], cols[j]);
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    g
}

/// `X · z` where `X` is given by column slices.
pub fn columns_times(cols: &[&[f64]], z: &[f64], rows: usize) -> Vec<f64> {
    assert_eq!(cols.len(), z.len());
    let mut out = vec![0.0; rows];
    for (c, &zj) in cols.iter().zip(z) {
        if zj != 0.0 {
            axpy(zj, c, &mut out);
        }
    }
    out
}

/// `Xᵀ · w` where `X` is given by column slices.
pub fn columns_tr_times(cols: &[&[f64]], w: &[f64]) -> Vec<f64> {
    cols.iter().map(|c| dot(c, w)).collect()
}

/// In-place Cholesky factorization of a symmetric positive-definite matrix.
///
/// On success the lower triangle of `a` holds the factor `L` with
/// `L·Lᵀ = A`; the strict upper triangle is left untouched. Fails with
/// [`Error::Numerical`] on a non-positive pivot.
pub fn cholesky(a: &mut Mat) -> Result<()> {
    let n = a.rows;
    assert_eq!(a.cols, n, "cholesky needs a square matrix");
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let l = a.get(j, k);
            d -= l * l;
        }
        if !(d > 0.0) {
            return Err(Error::Numerical(format!(
                "cholesky pivot {j} is {d:e}; matrix not positive definite"
            )));
        }
        let d = d.sqrt();
        a.set(j, j, d);
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= a.get(i, k) * a.get(j, k);
            }
            a.set(i, j, v / d);
        }
    }
    Ok(())
}

/// Solves `L·Lᵀ x = b` in place given the factor from [`cholesky`].
pub fn cholesky_solve(l: &Mat, b: &mut [f64]) {
    let n = l.rows;
    assert_eq!(b.len(), n);
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l.get(i, k) * b[k];
        }
        b[i] = v / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in (i + 1)..n {
            v -= l.get(k, i) * b[k];
        }
        b[i] = v / l.get(i, i);
    }
}

/// Solves a symmetric positive-definite system, consuming the matrix.
pub fn solve_spd(mut a: Mat, mut b: Vec<f64>) -> Result<Vec<f64>> {
    cholesky(&mut a)?;
    cholesky_solve(&a, &mut b);
    Ok(b)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns the eigenvalues (unordered) and the matrix of eigenvector columns.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows;
    assert_eq!(a.cols, n, "sym_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let frob: f64 = m.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = frob * 1e-14 + f64::MIN_POSITIVE;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let vals = (0..n).map(|i| m.get(i, i)).collect();
    (vals, v)
}

/// Minimum-norm solve of a symmetric positive semi-definite system.
///
/// Eigenvalues below `n·ε·λ_max` are treated as zero, which gives the
/// pseudo-inverse solution for rank-deficient Gram matrices.
pub fn solve_sym_pinv(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.rows;
    assert_eq!(b.len(), n);
    let (vals, vecs) = sym_eigen(a);
    let lmax = vals.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let cutoff = lmax * (n as f64) * f64::EPSILON;
    let mut x = vec![0.0; n];
    for (j, &lambda) in vals.iter().enumerate() {
        if lambda.abs() > cutoff {
            let coeff = dot(vecs.col(j), b) / lambda;
            axpy(coeff, vecs.col(j), &mut x);
        }
    }
    x
}

/// Extreme singular values of a rectangular matrix, via the Gram matrix of
/// the shorter side.
pub fn extreme_singular_values(a: &Mat) -> (f64, f64) {
    let (m, n) = (a.rows, a.cols);
    let small = m.min(n);
    let mut g = Mat::zeros(small, small);
    if m <= n {
        // A·Aᵀ
        for j in 0..n {
            let c = a.col(j);
            for p in 0..m {
                for q in 0..=p {
                    let v = g.get(p, q) + c[p] * c[q];
                    g.set(p, q, v);
                    g.set(q, p, v);
                }
            }
        }
    } else {
        for p in 0..n {
            for q in 0..=p {
                let v = dot(a.col(p), a.col(q));
                g.set(p, q, v);
                g.set(q, p, v);
            }
        }
    }
    let (vals, _) = sym_eigen(&g);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &l in &vals {
        let s = l.max(0.0).sqrt();
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (lo, hi)
}
