//! Dense complex linear algebra shared by every other module.
//!
//! Conventions fixed here and relied on everywhere:
//!
//! * `vec` stacks columns, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
//! * Approximate equality of matrices is the max-abs entry difference
//!   compared against [`Tolerance::eq_tol`].
//! * Rank and nullspace decisions cut singular values at
//!   `rank_tol · σ_max`.

pub(crate) mod index;
mod json;
pub mod random;

pub use json::{serialize_matrix, MatrixJson};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix; the carrier for states, Kraus operators and
/// superoperators alike.
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Global tolerance policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eq_tol: f64,
    pub rank_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eq_tol: 1e-9,
            rank_tol: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(eq_tol: f64, rank_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol <= eq_tol && eq_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tolerances must satisfy 0 < rank_tol <= eq_tol < 1 (got rank_tol={rank_tol}, eq_tol={eq_tol})"
            )));
        }
        Ok(Tolerance { eq_tol, rank_tol })
    }

    /// Gap below which eigenvalues are treated as one cluster.
    pub fn cluster_gap(&self) -> f64 {
        self.eq_tol.sqrt()
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Builds a matrix from real row-major data.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| r(data[i * cols + j]))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let d = values.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { r(values[i]) } else { ZERO })
}

pub fn diag(values: &[Complex64]) -> CMatrix {
    let d = values.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { values[i] } else { ZERO })
}

/// Computational basis ket `|k⟩` as a `d × 1` column.
pub fn ket(d: usize, k: usize) -> CMatrix {
    let mut v = zeros(d, 1);
    v[(k, 0)] = ONE;
    v
}

/// `|k⟩⟨k|`.
pub fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut m = zeros(d, d);
    m[(k, k)] = ONE;
    m
}

/// `|i⟩⟨j|`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn pauli_x() -> CMatrix {
    from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    from_real_rows(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    from_real_rows(2, 2, &[s, s, s, -s])
}

/// Kronecker product; entry `(i·p + k, j·q + l)` is `a[i,j]·b[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec(m: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(m.len(), 1, m.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &CMatrix, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot unvec length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Max-abs entry difference; `f64::INFINITY` when shapes differ.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    max_abs_diff(a, b) <= tol
}

/// Hilbert–Schmidt inner product `Tr[A† B]`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn unitarity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

pub fn is_unitary(m: &CMatrix, tol: &Tolerance) -> bool {
    unitarity_residual(m) <= tol.eq_tol
}

/// `‖V†V − I‖_max` for a (possibly rectangular) isometry.
pub fn isometry_residual(m: &CMatrix) -> f64 {
    max_abs_diff(&(m.adjoint() * m), &identity(m.ncols()))
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Columns `range` of the eigenvector matrix.
    pub fn columns(&self, idx: &[usize]) -> CMatrix {
        let d = self.vectors.nrows();
        let mut out = zeros(d, idx.len());
        for (c, &k) in idx.iter().enumerate() {
            out.set_column(c, &self.vectors.column(k));
        }
        out
    }

    /// Groups consecutive eigenvalues whose gap is at most `gap`.
    pub fn clusters(&self, gap: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(last) if (v - self.values[*last.last().unwrap()]).abs() <= gap => last.push(k),
                _ => out.push(vec![k]),
            }
        }
        out
    }
}

pub fn eig_hermitian(m: &CMatrix, tol: &Tolerance) -> Result<HermitianEigen> {
    let res = hermitian_residual(m);
    let scale = max_abs(m).max(1.0);
    if res > tol.eq_tol * scale {
        return Err(Error::NotHermitian(res));
    }
    Ok(eig_hermitian_unchecked(&hermitian_part(m)))
}

/// Eigen-decomposition of the Hermitian part of `m`, skipping validation.
pub(crate) fn eig_hermitian_unchecked(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: vec![],
            vectors: zeros(0, 0),
        };
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(k));
    }
    HermitianEigen { values, vectors }
}

/// Singular value decomposition with descending singular values and a full
/// set of right singular vectors (columns of `v`).
pub(crate) struct FullSvd {
    pub singular: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

pub(crate) fn svd_full(m: &CMatrix) -> Result<FullSvd> {
    let (rows, cols) = m.shape();
    // Pad to square so that the right factor spans all of ℂ^cols.
    let work = if rows < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let n = svd.singular_values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular = order.iter().map(|&k| svd.singular_values[k]).collect();
    let mut us = zeros(u.nrows(), n);
    let mut vs = zeros(v_t.ncols(), n);
    for (c, &k) in order.iter().enumerate() {
        us.set_column(c, &u.column(k));
        vs.set_column(c, &v_t.row(k).adjoint());
    }
    let us = if rows < cols {
        us.rows(0, rows).into_owned()
    } else {
        us
    };
    Ok(FullSvd {
        singular,
        u: us,
        v: vs,
    })
}

/// Orthonormal basis of the nullspace as columns of a single matrix.
pub fn nullspace_matrix(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(zeros(0, 0));
    }
    // A tall system has the same nullspace as its triangular factor.
    let reduced = if rows > 2 * cols {
        m.clone().qr().r()
    } else {
        m.clone()
    };
    let svd = svd_full(&reduced)?;
    let smax = svd.singular.first().copied().unwrap_or(0.0);
    let cut = tol.rank_tol * smax;
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| k >= svd.singular.len() || svd.singular[k] <= cut || smax == 0.0)
        .collect();
    let mut out = zeros(cols, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        out.set_column(c, &svd.v.column(k));
    }
    Ok(out)
}

/// Nullspace of the vertical stack of `blocks` (all with `ncols` columns),
/// reduced block by block through QR so the full stack is never formed.
pub fn nullspace_of_stack<'a>(
    blocks: impl IntoIterator<Item = &'a CMatrix>,
    ncols: usize,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let mut r = zeros(0, ncols);
    for b in blocks {
        if b.ncols() != ncols {
            return Err(Error::DimensionMismatch(
                "stacked blocks differ in width".into(),
            ));
        }
        let rows = r.nrows() + b.nrows();
        let mut stacked = zeros(rows, ncols);
        stacked.view_mut((0, 0), (r.nrows(), ncols)).copy_from(&r);
        stacked
            .view_mut((r.nrows(), 0), (b.nrows(), ncols))
            .copy_from(b);
        r = if rows > ncols {
            stacked.qr().r()
        } else {
            stacked
        };
    }
    if r.nrows() == 0 {
        return Ok(identity(ncols));
    }
    // Stacked rows come from normalized operators, so an absolute floor on the
    // cut keeps rounding noise in an all-zero stack from reading as rank.
    let svd = svd_full(&r)?;
    let smax = svd.singular.first().copied().unwrap_or(0.0);
    let cut = tol.rank_tol * smax.max(1.0);
    let keep: Vec<usize> = (0..ncols)
        .filter(|&k| k >= svd.singular.len() || svd.singular[k] <= cut)
        .collect();
    let mut out = zeros(ncols, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        out.set_column(c, &svd.v.column(k));
    }
    Ok(out)
}

/// Orthonormal basis of `{v : ‖Mv‖ ≤ rank_tol·σ_max}` as column vectors.
pub fn nullspace(m: &CMatrix, tol: &Tolerance) -> Result<Vec<CMatrix>> {
    let n = nullspace_matrix(m, tol)?;
    Ok((0..n.ncols())
        .map(|k| CMatrix::from_column_slice(n.nrows(), 1, n.column(k).as_slice()))
        .collect())
}

/// Numerical rank at `rank_tol · σ_max`.
pub fn rank(m: &CMatrix, tol: &Tolerance) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    let svd = svd_full(m)?;
    let smax = svd.singular.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(svd
        .singular
        .iter()
        .filter(|&&s| s > tol.rank_tol * smax)
        .count())
}

/// Orthonormal basis (Hilbert–Schmidt) of the span of `mats`.
///
/// Modified Gram–Schmidt with one re-orthogonalization pass; a matrix whose
/// residual norm falls below `rank_tol` times its own norm is dropped.
pub fn gram_schmidt_hs(mats: &[CMatrix], tol: &Tolerance) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::new();
    for m in mats {
        if let Some(b) = orthonormal_residual(&basis, m, tol) {
            basis.push(b);
        }
    }
    basis
}

/// Component of `m` orthogonal to the (orthonormal) `basis`, normalized, or
/// `None` if it is numerically in the span.
pub(crate) fn orthonormal_residual(
    basis: &[CMatrix],
    m: &CMatrix,
    tol: &Tolerance,
) -> Option<CMatrix> {
    let norm0 = hs_norm(m);
    if norm0 == 0.0 {
        return None;
    }
    let mut v = m.clone();
    for _ in 0..2 {
        for b in basis {
            let coef = hs_inner(b, &v);
            v -= b * coef;
        }
    }
    let n = hs_norm(&v);
    if n <= tol.rank_tol.max(1e-12) * norm0.max(1.0) * 10.0 {
        None
    } else {
        Some(v.unscale(n))
    }
}

/// Distance of `m` from the span of an orthonormal basis, as the max-abs
/// entry of the residual.
pub fn span_residual(basis: &[CMatrix], m: &CMatrix) -> f64 {
    let mut v = m.clone();
    for b in basis {
        let coef = hs_inner(b, &v);
        v -= b * coef;
    }
    max_abs(&v)
}

/// Hilbert–Schmidt orthogonal projection onto the span of an orthonormal basis.
pub fn project_onto(basis: &[CMatrix], m: &CMatrix) -> CMatrix {
    let mut out = zeros(m.nrows(), m.ncols());
    for b in basis {
        out += b * hs_inner(b, m);
    }
    out
}

/// `f(M)` for Hermitian `M` through its spectral decomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = eig_hermitian_unchecked(&hermitian_part(m));
    let vals: Vec<f64> = eig.values.iter().map(|&x| f(x)).collect();
    &eig.vectors * diag_real(&vals) * eig.vectors.adjoint()
}

/// `M^{-1/2}` for positive definite `M`.
pub fn inverse_sqrt_psd(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let eig = eig_hermitian_unchecked(&hermitian_part(m));
    let smallest = eig.values.first().copied().unwrap_or(0.0);
    if smallest <= tol.rank_tol {
        return Err(Error::Numeric(format!(
            "matrix is not positive definite (smallest eigenvalue {smallest:.3e})"
        )));
    }
    let vals: Vec<f64> = eig.values.iter().map(|&x| 1.0 / x.sqrt()).collect();
    Ok(&eig.vectors * diag_real(&vals) * eig.vectors.adjoint())
}

pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// Unitary polar factor `W` of `M = W P`, together with the smallest
/// singular value of `M`.
pub fn polar_unitary(m: &CMatrix) -> Result<(CMatrix, f64)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "polar factor needs a square matrix".into(),
        ));
    }
    let svd = svd_full(m)?;
    let smin = svd.singular.last().copied().unwrap_or(0.0);
    Ok((&svd.u * svd.v.adjoint(), smin))
}

/// Orthonormal basis of the orthogonal complement of the column span of `cols`.
pub fn orthogonal_complement(cols: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    if cols.ncols() == 0 {
        return Ok(identity(cols.nrows()));
    }
    nullspace_matrix(&cols.adjoint(), tol)
}

/// Orthonormalizes columns (thin QR with sign/phase fix), dropping dependent ones.
pub fn orthonormalize_columns(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    let mut cols: Vec<DVector<Complex64>> = Vec::new();
    for k in 0..m.ncols() {
        let mut v: DVector<Complex64> = m.column(k).into_owned();
        let n0 = v.norm();
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &cols {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let n = v.norm();
        if n > tol.rank_tol * n0.max(1.0) * 10.0 {
            cols.push(v.unscale(n));
        }
    }
    let mut out = zeros(m.nrows(), cols.len());
    for (k, c) in cols.iter().enumerate() {
        out.set_column(k, c);
    }
    out
}

/// Partial trace of an operator on `ℂ^{da} ⊗ ℂ^{db}` over the second factor.
pub fn partial_trace_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    assert_eq!(m.nrows(), da * db);
    CMatrix::from_fn(da, da, |i, j| {
        (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
    })
}

/// Partial trace of an operator on `ℂ^{da} ⊗ ℂ^{db}` over the first factor.
pub fn partial_trace_first(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    assert_eq!(m.nrows(), da * db);
    CMatrix::from_fn(db, db, |k, l| {
        (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()
    })
}

/// Direct sum of square blocks.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}
