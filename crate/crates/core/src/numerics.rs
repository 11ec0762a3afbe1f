//! Dense linear algebra used by the spectral and finite element code.
//!
//! Matrices are plain `nalgebra` dense matrices. Every routine here is pure.

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn, Schur, SymmetricEigen, SVD};
use thiserror::Error;

pub type DenseMatrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest dimension accepted by the eigenvalue routines.
pub const MAX_DIM: usize = 512;

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular to tolerance (pivot {pivot:e}, scale {scale:e})")]
    Singular { pivot: f64, scale: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigenvalue iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix dimension {0} exceeds the supported maximum {MAX_DIM}")]
    TooLarge(usize),
    #[error("matrix has non-finite entries")]
    NonFinite,
}

fn check_square(a: &DenseMatrix) -> Result<usize, NumericsError> {
    if a.nrows() != a.ncols() {
        return Err(NumericsError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    Ok(a.nrows())
}

/// Largest absolute row sum.
pub fn norm_inf(a: &DenseMatrix) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Relative asymmetry `‖A − Aᵀ‖_F / ‖A‖_F`, zero for the zero matrix.
pub fn asymmetry(a: &DenseMatrix) -> f64 {
    let n = a.norm();
    if n == 0.0 {
        return 0.0;
    }
    (a - a.transpose()).norm() / n
}

/// Solves `A x = b` by LU with partial pivoting.
///
/// Fails when a pivot falls below `1e-14 ‖A‖∞`.
pub fn solve_linear(a: &DenseMatrix, b: &Vector) -> Result<Vector, NumericsError> {
    let n = check_square(a)?;
    if b.len() != n {
        return Err(NumericsError::Dimension(format!(
            "right-hand side has length {}, expected {n}",
            b.len()
        )));
    }
    let scale = norm_inf(a);
    let lu = a.clone().lu();
    let pivot = lu.u().diagonal().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if n > 0 && (scale == 0.0 || pivot < 1e-14 * scale) {
        return Err(NumericsError::Singular {
            pivot: if n > 0 { pivot } else { 0.0 },
            scale,
        });
    }
    lu.solve(b).ok_or(NumericsError::Singular { pivot, scale })
}

/// Solves a tridiagonal system by Gaussian elimination with partial pivoting.
///
/// `lower[i]` is entry `(i+1, i)`, `upper[i]` is entry `(i, i+1)`. Fails on an
/// exactly zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    let n = diag.len();
    if lower.len() + 1 != n.max(1) || upper.len() + 1 != n.max(1) || b.len() != n {
        return Err(NumericsError::Dimension(format!(
            "tridiagonal system of size {n} with bands {}, {} and right-hand side {}",
            lower.len(),
            upper.len(),
            b.len()
        )));
    }
    let (mut dl, mut d, mut du, mut x) = (lower.to_vec(), diag.to_vec(), upper.to_vec(), b.to_vec());
    // second superdiagonal created by row swaps
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let singular = |pivot: f64| NumericsError::Singular { pivot, scale: 0.0 };
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return Err(singular(0.0));
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            x[i + 1] -= fact * x[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let temp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = temp - fact * x[i + 1];
        }
        dl[i] = 0.0;
    }
    if n == 0 {
        return Ok(x);
    }
    if d[n - 1] == 0.0 {
        return Err(singular(0.0));
    }
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    Ok(x)
}

/// Solution of the symmetric-definite pencil `A v = λ K v`.
#[derive(Debug, Clone)]
pub struct PencilEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `K`-orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: DenseMatrix,
}

pub fn cholesky(k: &DenseMatrix) -> Result<Cholesky<f64, Dyn>, NumericsError> {
    check_square(k)?;
    if asymmetry(k) > 1e-10 {
        return Err(NumericsError::NotSymmetric(asymmetry(k)));
    }
    Cholesky::new(k.clone()).ok_or(NumericsError::NotPositiveDefinite)
}

/// Congruence `L⁻¹ A L⁻ᵀ` for the Cholesky factor `K = L Lᵀ`.
pub fn whiten(a: &DenseMatrix, chol: &Cholesky<f64, Dyn>) -> DenseMatrix {
    let l = chol.l();
    let left = l
        .solve_lower_triangular(a)
        .expect("Cholesky factor has a nonzero diagonal");
    let right = l
        .solve_lower_triangular(&left.transpose())
        .expect("Cholesky factor has a nonzero diagonal");
    right.transpose()
}

pub fn eigen_symmetric_pencil(
    a: &DenseMatrix,
    k: &DenseMatrix,
) -> Result<PencilEigen, NumericsError> {
    let n = check_square(a)?;
    if k.nrows() != n {
        return Err(NumericsError::Dimension(format!(
            "pencil matrices are {n}x{n} and {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    if n > MAX_DIM {
        return Err(NumericsError::TooLarge(n));
    }
    let asym = asymmetry(a);
    if asym > 1e-10 {
        return Err(NumericsError::NotSymmetric(asym));
    }
    let chol = cholesky(k)?;
    let c = whiten(a, &chol);
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut w = DenseMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        w.set_column(col, &eig.eigenvectors.column(i));
    }
    let vectors = chol
        .l()
        .transpose()
        .solve_upper_triangular(&w)
        .expect("Cholesky factor has a nonzero diagonal");
    Ok(PencilEigen { values, vectors })
}

/// Eigenvalues of a general square matrix, sorted by real then imaginary part.
///
/// Complex eigenvalues come in exactly conjugate pairs.
pub fn eigen_general(m: &DenseMatrix) -> Result<Vec<Complex<f64>>, NumericsError> {
    let n = check_square(m)?;
    if n > MAX_DIM {
        return Err(NumericsError::TooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let cap = 100 * n.max(10);
    let schur = Schur::try_new(m.clone(), f64::EPSILON, cap).ok_or(NumericsError::NoConvergence(cap))?;
    let mut vals: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();

    // Pair each upper-half-plane value with its closest lower-half partner.
    let mut used = vec![false; vals.len()];
    for i in 0..vals.len() {
        if used[i] || vals[i].im <= 0.0 {
            continue;
        }
        let target = vals[i].conj();
        let partner = (0..vals.len())
            .filter(|&j| !used[j] && j != i && vals[j].im < 0.0)
            .min_by(|&a, &b| (vals[a] - target).norm().total_cmp(&(vals[b] - target).norm()));
        if let Some(j) = partner {
            vals[j] = target;
            used[i] = true;
            used[j] = true;
        }
    }
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(vals)
}

/// Orthonormal bases of the numerical range and null space of `m`.
#[derive(Debug, Clone)]
pub struct RankSplit {
    /// Orthonormal columns spanning the numerical range (left singular vectors).
    pub range: DenseMatrix,
    /// Orthonormal columns spanning the numerical null space (right singular vectors).
    pub kernel: DenseMatrix,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

/// Splits by singular values: those `<= tol · σ_max` count as zero.
pub fn rank_split(m: &DenseMatrix, tol: f64) -> RankSplit {
    rank_split_impl(m, Threshold::Relative(tol))
}

/// Splits by singular values with an absolute cutoff.
pub fn rank_split_abs(m: &DenseMatrix, threshold: f64) -> RankSplit {
    rank_split_impl(m, Threshold::Absolute(threshold))
}

enum Threshold {
    Relative(f64),
    Absolute(f64),
}

fn rank_split_impl(m: &DenseMatrix, cut: Threshold) -> RankSplit {
    let (rows, cols) = m.shape();
    // pad to square so the right singular vectors span the whole domain
    let size = rows.max(cols);
    let mut sq = DenseMatrix::zeros(size, size);
    sq.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = SVD::new(sq, true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");

    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma_max = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let threshold = match cut {
        Threshold::Relative(tol) => tol * sigma_max,
        Threshold::Absolute(t) => t,
    };
    let nonzero = |i: usize| sigma_max > 0.0 && svd.singular_values[i] > threshold;
    let keep: Vec<usize> = order.iter().copied().filter(|&i| nonzero(i)).collect();
    let null: Vec<usize> = order.iter().copied().filter(|&i| !nonzero(i)).collect();

    let mut range = DenseMatrix::zeros(rows, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        range.set_column(c, &u.column(i).rows(0, rows));
    }
    let mut kernel = DenseMatrix::zeros(cols, null.len());
    for (c, &i) in null.iter().enumerate() {
        kernel.set_column(c, &vt.row(i).transpose().rows(0, cols));
    }
    if sigma_max == 0.0 {
        kernel = DenseMatrix::identity(cols, cols);
        range = DenseMatrix::zeros(rows, 0);
    }
    RankSplit {
        range,
        kernel,
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        threshold,
    }
}

/// Orthonormal basis (columns) of the numerical null space of `m`.
pub fn kernel_basis(m: &DenseMatrix, tol: f64) -> DenseMatrix {
    rank_split(m, tol).kernel
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `R^n`.
pub fn orthogonal_complement(basis: &DenseMatrix) -> DenseMatrix {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return DenseMatrix::identity(n, n);
    }
    // complement = null space of basisᵀ
    kernel_basis(&basis.transpose(), 1e-10)
}

/// Orthonormalizes columns by modified Gram–Schmidt, dropping dependent ones.
pub fn orthonormalize(cols: &DenseMatrix) -> DenseMatrix {
    let mut out: Vec<Vector> = Vec::new();
    let scale = cols.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in cols.column_iter() {
        let mut v = c.into_owned();
        for _ in 0..2 {
            for q in &out {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
        }
        let n = v.norm();
        if n > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            out.push(v / n);
        }
    }
    let mut m = DenseMatrix::zeros(cols.nrows(), out.len());
    for (i, v) in out.iter().enumerate() {
        m.set_column(i, v);
    }
    m
}
