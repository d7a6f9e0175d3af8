//! Constructors for the channels that recur throughout the crate.

use super::{Channel, StateDM};
use crate::error::{Error, Result};
use crate::numerics::{
    self, basis_projector, c, eig_hermitian_unchecked, identity, matrix_unit, unitarity_residual,
    zeros, CMatrix, Tolerance,
};

pub fn identity_channel(d: usize) -> Channel {
    Channel::assemble(d, d, vec![identity(d)])
}

/// `ρ ↦ U ρ U†`.
pub fn unitary(u: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    let res = unitarity_residual(u);
    if res > tol.eq_tol {
        return Err(Error::NotUnitary(res));
    }
    Ok(Channel::assemble(u.ncols(), u.nrows(), vec![u.clone()]))
}

/// `ρ ↦ V ρ V†` for an isometry `V`.
pub fn isometry(v: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    let res = numerics::isometry_residual(v);
    if res > tol.eq_tol {
        return Err(Error::NotIsometry(res));
    }
    Ok(Channel::assemble(v.ncols(), v.nrows(), vec![v.clone()]))
}

/// Replaces every input on `dim_in` with `target`: `ρ ↦ Tr[ρ] target`.
pub fn erasure_to(target: &StateDM, dim_in: usize) -> Result<Channel> {
    let d_out = target.dim();
    let eig = eig_hermitian_unchecked(target.matrix());
    let mut kraus = Vec::new();
    for (m, &l) in eig.values.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let e = eig.vectors.column(m);
        for i in 0..dim_in {
            let mut k = zeros(d_out, dim_in);
            k.set_column(i, &(e.into_owned() * c(l.sqrt(), 0.0)));
            kraus.push(k);
        }
    }
    if kraus.is_empty() {
        return Err(Error::InvalidState("erasure target has no support".into()));
    }
    Ok(Channel::assemble(dim_in, d_out, kraus))
}

/// Completely dephasing channel `𝒟(ρ) = Σₖ |k⟩⟨k| ρ |k⟩⟨k|`.
pub fn dephase(d: usize) -> Channel {
    Channel::assemble(d, d, (0..d).map(|k| basis_projector(d, k)).collect())
}

/// `U_θ = Σₖ e^{iθₖ} |k⟩⟨k|`.
pub fn diagonal_unitary_matrix(thetas: &[f64]) -> CMatrix {
    let phases: Vec<_> = thetas.iter().map(|&t| c(t.cos(), t.sin())).collect();
    numerics::diag(&phases)
}

pub fn diagonal_unitary(thetas: &[f64]) -> Channel {
    let d = thetas.len();
    Channel::assemble(d, d, vec![diagonal_unitary_matrix(thetas)])
}

/// Unitary channel of the permutation `|k⟩ ↦ |perm[k]⟩`.
pub fn permutation_unitary(perm: &[usize]) -> Result<Channel> {
    let d = perm.len();
    let mut seen = vec![false; d];
    for &j in perm {
        if j >= d || seen[j] {
            return Err(Error::InvalidInput(format!(
                "{perm:?} is not a permutation"
            )));
        }
        seen[j] = true;
    }
    let p = numerics::random::permutation_matrix(perm);
    Ok(Channel::assemble(d, d, vec![p]))
}

/// Classical channel of a column-stochastic matrix: `|k⟩⟨k| ↦ Σⱼ Pⱼₖ |j⟩⟨j|`,
/// off-diagonal inputs are annihilated.
pub fn classical_from_stochastic(p: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    let (rows, cols) = p.shape();
    if rows != cols {
        return Err(Error::InvalidStochastic("matrix must be square".into()));
    }
    for k in 0..cols {
        let mut sum = 0.0;
        for j in 0..rows {
            let z = p[(j, k)];
            if z.im.abs() > tol.eq_tol || z.re < -tol.rank_tol {
                return Err(Error::InvalidStochastic(format!(
                    "entry ({j},{k}) = {z} is not a probability"
                )));
            }
            sum += z.re;
        }
        if (sum - 1.0).abs() > tol.eq_tol {
            return Err(Error::InvalidStochastic(format!(
                "column {k} sums to {sum}"
            )));
        }
    }
    let mut kraus = Vec::new();
    for k in 0..cols {
        for j in 0..rows {
            let w = p[(j, k)].re.max(0.0);
            if w > 0.0 {
                kraus.push(matrix_unit(rows, j, k).scale(w.sqrt()));
            }
        }
    }
    Ok(Channel::assemble(cols, rows, kraus))
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Channel {
    let k0 = numerics::from_real_rows(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]);
    let k1 = numerics::from_real_rows(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0]);
    Channel::assemble(2, 2, vec![k0, k1])
}

/// Channel with diagonal Kraus operators `{diag(kᵢ)}` after exact TP repair.
pub fn from_diagonal_kraus(diagonals: &[CMatrix], tol: &Tolerance) -> Result<Channel> {
    let d = diagonals
        .first()
        .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?
        .nrows();
    let s = diagonals
        .iter()
        .fold(zeros(d, d), |acc, k| acc + k.adjoint() * k);
    let fix = numerics::inverse_sqrt_psd(&s, tol)?;
    Ok(Channel::assemble(
        d,
        d,
        diagonals.iter().map(|k| k * &fix).collect(),
    ))
}
