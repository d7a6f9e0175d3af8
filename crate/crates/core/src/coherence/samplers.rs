use rand::Rng as _;

use crate::channels::named::{diagonal_unitary, from_diagonal_kraus};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::numerics::random::{ginibre, random_diagonal, random_permutation, random_unitary, Rng};
use crate::numerics::{
    basis_projector, c, eig_hermitian_unchecked, inverse_sqrt_psd, matrix_unit,
    orthogonal_complement, zeros, CMatrix, Tolerance,
};

/// Applies `K ↦ K S^{-1/2}` with `S = Σ K†K`.
fn repair(kraus: Vec<CMatrix>, tol: &Tolerance) -> Result<Channel> {
    let d = kraus[0].ncols();
    let s = kraus
        .iter()
        .fold(zeros(d, d), |acc, k| acc + k.adjoint() * k);
    let fix = inverse_sqrt_psd(&s, tol)
        .map_err(|e| Error::Numeric(format!("sampler failed TP repair: {e}")))?;
    Channel::from_kraus(kraus.into_iter().map(|k| k * &fix).collect(), tol)
}

/// `ℳ(ρ) = Σᵢ Mᵢ ρ Mᵢ† + Σ_{j≠k} p(j|k) |j⟩⟨k|ρ|k⟩⟨j|` with random diagonal `Mᵢ`.
pub fn sample_multiphase_covariant(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
    let count = rng.random_range(1..=d.max(1));
    let mut diag_ops: Vec<CMatrix> = (0..count).map(|_| random_diagonal(d, rng)).collect();
    let mut kraus = Vec::new();
    for k in 0..d {
        let keep: f64 = rng.random_range(0.05..1.0);
        let norm: f64 = diag_ops
            .iter()
            .map(|m| m[(k, k)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        for m in diag_ops.iter_mut() {
            m[(k, k)] *= keep.sqrt() / norm;
        }
        let others: Vec<f64> = (0..d)
            .map(|j| if j == k { 0.0 } else { rng.random::<f64>() })
            .collect();
        let total: f64 = others.iter().sum();
        for (j, w) in others.into_iter().enumerate() {
            if j != k && total > 0.0 {
                let p = (1.0 - keep) * w / total;
                kraus.push(matrix_unit(d, j, k).scale(p.sqrt()));
            }
        }
        if d == 1 {
            for m in diag_ops.iter_mut() {
                m[(k, k)] /= keep.sqrt();
            }
        }
    }
    kraus.extend(diag_ops);
    Channel::from_kraus(kraus, tol)
}

/// Mixture of a diagonal-Kraus channel and a diagonal-unitary channel.
pub fn sample_basis_preserving(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
    let count = rng.random_range(1..=d.max(1));
    let diag_ops: Vec<CMatrix> = (0..count).map(|_| random_diagonal(d, rng)).collect();
    let a = from_diagonal_kraus(&diag_ops, tol)?;
    let thetas: Vec<f64> = (0..d)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect();
    let u = diagonal_unitary(&thetas);
    let p: f64 = rng.random();
    Channel::mixture(&[(p, &a), (1.0 - p, &u)], tol)
}

/// `ρ ↦ Γ∘ρ` for a PSD `Γ` with unit diagonal.
pub fn schur_channel(gamma: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    let d = gamma.nrows();
    for k in 0..d {
        if (gamma[(k, k)] - c(1.0, 0.0)).norm() > tol.eq_tol {
            return Err(Error::InvalidChannel(
                "Schur multiplier needs a unit diagonal".into(),
            ));
        }
    }
    let eig = eig_hermitian_unchecked(gamma);
    if eig.values[0] < -tol.rank_tol {
        return Err(Error::InvalidChannel(
            "Schur multiplier is not positive".into(),
        ));
    }
    let kraus: Vec<CMatrix> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > tol.rank_tol)
        .map(|(i, &l)| {
            let v: Vec<_> = eig.vectors.column(i).iter().map(|z| z * l.sqrt()).collect();
            crate::numerics::diag(&v)
        })
        .collect();
    Channel::from_kraus(kraus, tol)
}

/// `ρ ↦ c ρ + (1 − c) 𝒟(ρ)` for `c ∈ [−1/(d−1), 1]`.
pub fn uniform_schur(d: usize, coherence: f64, tol: &Tolerance) -> Result<Channel> {
    let gamma = CMatrix::from_fn(d, d, |i, j| c(if i == j { 1.0 } else { coherence }, 0.0));
    schur_channel(&gamma, tol)
}

/// Kraus operators `D_i P_{π_i}` with random diagonals and permutations.
pub fn random_strictly_incoherent(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
    let count = rng.random_range(1..=d.max(1) + 1);
    let kraus = (0..count)
        .map(|_| {
            let p = crate::numerics::random::permutation_matrix(&random_permutation(d, rng));
            random_diagonal(d, rng) * p
        })
        .collect();
    repair(kraus, tol)
}

/// Mixture of `{|f(r)⟩⟨v_r|}` for a random unitary with rows `v_r` and a
/// random map `f`, and a strictly incoherent channel.
pub fn random_incoherent(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
    let v = random_unitary(d, rng);
    let kraus: Vec<CMatrix> = (0..d)
        .map(|r| crate::numerics::ket(d, rng.random_range(0..d)) * v.row(r))
        .collect();
    let a = Channel::from_kraus(kraus, tol)?;
    let b = random_strictly_incoherent(d, rng, tol)?;
    let p: f64 = rng.random_range(0.2..1.0);
    Channel::mixture(&[(p, &a), (1.0 - p, &b)], tol)
}

/// Kraus operators `Σₖ cₖ |k+s⟩⟨k|` with a fixed shift `s` each.
pub fn random_phase_covariant(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
    let count = rng.random_range(1..=d.max(1) + 1);
    let mut kraus: Vec<CMatrix> = (0..count)
        .map(|_| {
            let s = rng.random_range(-(d as i64 - 1)..=(d as i64 - 1)) as isize;
            let coeffs = ginibre(d, 1, rng);
            let mut k = zeros(d, d);
            for col in 0..d as isize {
                let row = col + s;
                if (0..d as isize).contains(&row) {
                    k[(row as usize, col as usize)] = coeffs[(col as usize, 0)];
                }
            }
            k
        })
        .collect();
    // Guarantee full support so the TP repair exists.
    kraus.push(random_diagonal(d, rng));
    repair(kraus, tol)
}

/// `𝒞_ψ(ρ) = |0⟩⟨0| ⟨ψ|ρ|ψ⟩ + (I − |0⟩⟨0|)/(d−1) · Tr[(I − |ψ⟩⟨ψ|) ρ]`.
pub fn c_psi(psi: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    let d = psi.nrows();
    if d < 2 || psi.ncols() != 1 {
        return Err(Error::InvalidInput(
            "𝒞_ψ needs a column vector in dimension ≥ 2".into(),
        ));
    }
    let psi = psi.unscale(psi.norm());
    let mut kraus = vec![crate::numerics::ket(d, 0) * psi.adjoint()];
    let perp = orthogonal_complement(&psi, tol)?;
    let w = 1.0 / ((d - 1) as f64).sqrt();
    for k in 1..d {
        for m in 0..perp.ncols() {
            let phi = perp.column(m).into_owned();
            kraus.push(crate::numerics::ket(d, k) * phi.adjoint() * c(w, 0.0));
        }
    }
    let ch = Channel::from_kraus(kraus, tol)?;
    debug_assert!(ch.apply_matrix(&basis_projector(d, 0)).is_ok());
    Ok(ch)
}
