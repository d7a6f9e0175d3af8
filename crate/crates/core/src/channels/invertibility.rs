use super::{superop_to_choi, Channel};
use crate::numerics::{
    self, c, eig_hermitian_unchecked, hermitian_residual, identity, max_abs, max_abs_diff,
    svd_full, zeros, CMatrix, Tolerance,
};

/// Orthonormal basis of the traceless Hermitian `d × d` matrices (generalized Gell-Mann).
fn traceless_hermitian_basis(d: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for k in 0..d {
        for l in k + 1..d {
            let mut x = zeros(d, d);
            x[(k, l)] = c(s, 0.0);
            x[(l, k)] = c(s, 0.0);
            out.push(x);
            let mut y = zeros(d, d);
            y[(k, l)] = c(0.0, -s);
            y[(l, k)] = c(0.0, s);
            out.push(y);
        }
    }
    for m in 1..d {
        let norm = ((m * (m + 1)) as f64).sqrt();
        let mut z = zeros(d, d);
        for k in 0..m {
            z[(k, k)] = c(1.0 / norm, 0.0);
        }
        z[(m, m)] = c(-(m as f64) / norm, 0.0);
        out.push(z);
    }
    out
}

/// Real coordinates of a Hermitian matrix in the orthonormal Hermitian basis.
fn hermitian_coordinates(h: &CMatrix) -> Vec<f64> {
    let d = h.nrows();
    let r2 = std::f64::consts::SQRT_2;
    let mut v = Vec::with_capacity(d * d);
    for k in 0..d {
        v.push(h[(k, k)].re);
        for l in k + 1..d {
            v.push(r2 * h[(k, l)].re);
            v.push(r2 * h[(k, l)].im);
        }
    }
    v
}

/// Injectivity of the channel on density matrices, tested as trivial nullspace of
/// its real-linear restriction to traceless Hermitian operators.
pub fn is_logically_invertible(t: &Channel, tol: &Tolerance) -> bool {
    if !t.is_square() {
        return false;
    }
    let d = t.dim_in();
    if d == 1 {
        return true;
    }
    let basis = traceless_hermitian_basis(d);
    let n = basis.len();
    let mut m = zeros(d * d, n);
    for (col, x) in basis.iter().enumerate() {
        let y = t.apply_matrix(x).expect("square channel");
        for (row, v) in hermitian_coordinates(&y).into_iter().enumerate() {
            m[(row, col)] = c(v, 0.0);
        }
    }
    match svd_full(&m) {
        Ok(svd) => {
            let smax = svd.singular.first().copied().unwrap_or(0.0);
            let smin = svd.singular.get(n - 1).copied().unwrap_or(0.0);
            smax > 0.0 && smin > tol.rank_tol * smax.max(1.0)
        }
        Err(_) => false,
    }
}

/// Inverse of the superoperator, when it exists numerically.
pub fn inverse_map(t: &Channel, tol: &Tolerance) -> Option<CMatrix> {
    if !t.is_square() {
        return None;
    }
    let svd = svd_full(t.superop()).ok()?;
    let smax = svd.singular.first().copied().unwrap_or(0.0);
    let smin = svd.singular.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= tol.rank_tol * smax.max(1.0) {
        return None;
    }
    t.superop().clone().try_inverse()
}

/// True iff the inverse map exists and is itself a channel.
pub fn is_physically_reversible(t: &Channel, tol: &Tolerance) -> bool {
    let Some(inv) = inverse_map(t, tol) else {
        return false;
    };
    let d = t.dim_in();
    let choi = superop_to_choi(&inv, d, d);
    let scale = max_abs(&choi).max(1.0);
    if hermitian_residual(&choi) > tol.eq_tol * scale {
        return false;
    }
    let herm = numerics::hermitian_part(&choi);
    let tr_out = numerics::partial_trace_first(&herm, d, d);
    if max_abs_diff(&tr_out, &identity(d)) > tol.eq_tol * scale {
        return false;
    }
    eig_hermitian_unchecked(&herm).values[0] >= -tol.eq_tol * scale
}
