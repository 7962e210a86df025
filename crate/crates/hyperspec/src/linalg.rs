//! Dense symmetric linear algebra: Jacobi eigendecomposition, numeric rank
//! via one-sided Jacobi singular values, PSD verdicts, and the centering
//! projection `Π = I - J/n`.
//!
//! Everything here is plain `f64` with deterministic, sequential arithmetic,
//! so repeated calls on the same input produce bitwise-identical output.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default relative tolerance for [`numeric_rank`].
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-9;

/// Dense row-major `rows × cols` matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::RejectedInput("empty matrix".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::RejectedInput("ragged rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::RejectedInput("non-finite matrix entry".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Symmetric matrix; construction guarantees exact entrywise symmetry and
/// finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Build from the upper triangle of `f`: entry `(i, j)` with `i <= j` is
    /// evaluated once and mirrored, so symmetry is exact by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::RejectedInput("empty matrix".into()));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::RejectedInput(format!(
                        "non-finite entry at ({i}, {j}): {v}"
                    )));
                }
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Self { n, data })
    }

    /// Validate an explicit square array: exact symmetry, finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        if m.rows() != m.cols() {
            return Err(Error::RejectedInput(format!(
                "matrix is {}x{}, not square",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::RejectedInput(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, data: m.data })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    /// Quadratic form `w' A w`.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        self.mul_vec(w).iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

/// Result of [`sym_eigen`]: ascending eigenvalues paired with orthonormal
/// eigenvector columns, `A = V diag(values) V'`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`, sign-normalized so
    /// its first nonzero component is positive.
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.rows())
            .map(|i| self.vectors.get(i, k))
            .collect()
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps rotate every off-diagonal pair until the off-diagonal Frobenius
/// mass is at machine level. Deterministic for a fixed input.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = a.max_abs();
    if scale > 0.0 {
        let tol = 1e-14 * scale;
        const MAX_SWEEPS: usize = 64;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq.abs() <= tol {
                        continue;
                    }
                    rotated = true;
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);

                    m[p * n + p] = app - t * apq;
                    m[q * n + q] = aqq + t * apq;
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    for k in 0..n {
                        if k != p && k != q {
                            let akp = m[k * n + p];
                            let akq = m[k * n + q];
                            let new_kp = akp - s * (akq + tau * akp);
                            let new_kq = akq + s * (akp - tau * akq);
                            m[k * n + p] = new_kp;
                            m[p * n + k] = new_kp;
                            m[k * n + q] = new_kq;
                            m[q * n + k] = new_kq;
                        }
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp - s * (vkq + tau * vkp);
                        v[k * n + q] = vkq + s * (vkp - tau * vkq);
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }

    // Sort ascending; stable so equal eigenvalues keep rotation order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());

    let values: Vec<f64> = order.iter().map(|&k| m[k * n + k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut sign = 1.0;
        for i in 0..n {
            let x = v[i * n + k];
            if x != 0.0 {
                sign = x.signum();
                break;
            }
        }
        for i in 0..n {
            vectors.set(i, col, sign * v[i * n + k]);
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Numeric rank report: singular values plus the absolute threshold that was
/// applied, so every rank decision is auditable.
#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub rank: usize,
    /// Singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Absolute threshold: `rel_tol * max(sigma_max, 1) * max(rows, cols)`.
    pub tolerance_used: f64,
}

/// Singular values by one-sided Jacobi orthogonalization of the columns.
///
/// Avoids forming the Gram matrix, so tiny singular values of nearly
/// rank-deficient inputs come out at `~eps * sigma_max` instead of
/// `~sqrt(eps) * sigma_max`.
fn singular_values(a: &Matrix) -> Vec<f64> {
    // Work on the orientation with fewer columns.
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (m, n) = (work.rows(), work.cols());
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| work.get(i, j)).collect())
        .collect();

    const MAX_SWEEPS: usize = 64;
    let eps = 1e-15;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = cols[p][i];
                    let y = cols[q][i];
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sigma
}

/// Numeric rank of an `m × n` matrix.
///
/// Counts singular values strictly above
/// `rel_tol * max(sigma_max, 1) * max(m, n)`. `rel_tol` must lie in `(0, 1)`;
/// [`DEFAULT_RANK_REL_TOL`] is the conventional choice.
pub fn numeric_rank(a: &Matrix, rel_tol: f64) -> Result<RankReport> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::RejectedInput("empty matrix".into()));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::RejectedInput(format!(
            "rank tolerance {rel_tol} outside (0, 1)"
        )));
    }
    let sigma = singular_values(a);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * sigma_max.max(1.0) * a.rows().max(a.cols()) as f64;
    let rank = sigma.iter().filter(|&&s| s > threshold).count();
    Ok(RankReport {
        rank,
        singular_values: sigma,
        tolerance_used: threshold,
    })
}

/// Positive semidefiniteness verdict with the achieving direction.
#[derive(Debug, Clone, Serialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// Unit direction attaining the minimal Rayleigh quotient.
    pub witness: Vec<f64>,
    /// Absolute tolerance the verdict used.
    pub tolerance: f64,
}

/// Default PSD tolerance `1e-9 * n * (1 + max |A|)`.
pub fn default_psd_tol(a: &SymMatrix) -> f64 {
    1e-9 * a.n() as f64 * (1.0 + a.max_abs())
}

/// Decide `A ⪰ 0` up to `tol`; `None` selects [`default_psd_tol`].
pub fn psd_verdict(a: &SymMatrix, tol: Option<f64>) -> Result<PsdVerdict> {
    let tol = tol.unwrap_or_else(|| default_psd_tol(a));
    if tol < 0.0 {
        return Err(Error::RejectedInput(format!("negative tolerance {tol}")));
    }
    let eig = sym_eigen(a)?;
    let min_eigenvalue = eig.values[0];
    Ok(PsdVerdict {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
        witness: eig.vector(0),
        tolerance: tol,
    })
}

/// `Π D Π` with `Π = I - J/n`, computed by double centering:
/// subtract row means and column means, add back the grand mean.
pub fn project_off_ones(d: &SymMatrix) -> Result<SymMatrix> {
    let n = d.n();
    let nf = n as f64;
    let row_mean: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| d.get(i, j)).sum::<f64>() / nf)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / nf;
    SymMatrix::from_fn(n, |i, j| d.get(i, j) - row_mean[i] - row_mean[j] + grand)
}
