//! Free-operation classes of coherence theory as channel predicates, and the
//! classical-subsystem verdict for a set of generators.
//!
//! Predicates that quantify over Kraus operators accept a channel when either
//! its stored Kraus set or its minimal Kraus set satisfies the condition; a
//! `false` therefore means neither representation has the required form.

mod samplers;

pub use samplers::{
    c_psi, random_incoherent, random_phase_covariant, random_strictly_incoherent,
    sample_basis_preserving, sample_multiphase_covariant, schur_channel, uniform_schur,
};

use serde::Serialize;

use crate::channels::named::{dephase, diagonal_unitary, erasure_to};
use crate::channels::{commutator_norm, superop_commutant_basis, Channel, StateDM};
use crate::error::{Error, Result};
use crate::numerics::{
    basis_projector, identity, kron, max_abs, max_abs_diff, nullspace_of_stack, zeros, CMatrix,
    Tolerance,
};

fn dephase_superop(d: usize) -> CMatrix {
    dephase(d).superop().clone()
}

fn kraus_superop(k: &CMatrix) -> CMatrix {
    kron(&k.conjugate(), k)
}

/// `ℬ(|k⟩⟨k|) = |k⟩⟨k|` for every `k`.
pub fn is_basis_preserving(t: &Channel, tol: &Tolerance) -> bool {
    if !t.is_square() {
        return false;
    }
    let d = t.dim_in();
    (0..d).all(|k| {
        let p = basis_projector(d, k);
        t.apply_matrix(&p)
            .map(|out| max_abs_diff(&out, &p) <= tol.eq_tol)
            .unwrap_or(false)
    })
}

/// Choi mass outside the multiphase-covariant pattern
/// `{(a,i),(b,j)} : (a = i ∧ b = j) ∨ (a = b ∧ i = j)`.
pub fn multiphase_pattern_residual(t: &Channel) -> f64 {
    if !t.is_square() {
        return f64::INFINITY;
    }
    let d = t.dim_in();
    let m = t.choi();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for i in 0..d {
            for b in 0..d {
                for j in 0..d {
                    if (a == i && b == j) || (a == b && i == j) {
                        continue;
                    }
                    worst = worst.max(m[(a * d + i, b * d + j)].norm());
                }
            }
        }
    }
    worst
}

pub fn is_multiphase_covariant(t: &Channel, tol: &Tolerance) -> bool {
    multiphase_pattern_residual(t) <= tol.eq_tol
}

/// Largest commutator with `𝒰_θ` for `θ = π/2` on one axis at a time.
/// Vanishes exactly on the multiphase-covariant pattern.
pub fn multiphase_torus_residual(t: &Channel) -> f64 {
    if !t.is_square() {
        return f64::INFINITY;
    }
    let d = t.dim_in();
    (0..d)
        .map(|k| {
            let mut th = vec![0.0; d];
            th[k] = std::f64::consts::FRAC_PI_2;
            commutator_norm(t, &diagonal_unitary(&th))
        })
        .fold(0.0, f64::max)
}

pub fn is_dephasing_covariant(t: &Channel, tol: &Tolerance) -> bool {
    t.is_square() && commutator_norm(t, &dephase(t.dim_in())) <= tol.eq_tol
}

/// Choi mass outside `a − b = i − j`.
pub fn phase_pattern_residual(t: &Channel) -> f64 {
    if !t.is_square() {
        return f64::INFINITY;
    }
    let d = t.dim_in() as isize;
    let m = t.choi();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for i in 0..d {
            for b in 0..d {
                for j in 0..d {
                    if a - b != i - j {
                        worst = worst.max(m[((a * d + i) as usize, (b * d + j) as usize)].norm());
                    }
                }
            }
        }
    }
    worst
}

/// Commutes with `𝒰_φ = Σₖ e^{ikφ}|k⟩⟨k|` for all `φ`.
pub fn is_phase_covariant(t: &Channel, tol: &Tolerance) -> bool {
    if phase_pattern_residual(t) > tol.eq_tol {
        return false;
    }
    let d = t.dim_in();
    (1..=2 * d).all(|m| {
        let phi = std::f64::consts::TAU * m as f64 / (2 * d + 1) as f64;
        let th: Vec<f64> = (0..d).map(|k| k as f64 * phi).collect();
        commutator_norm(t, &diagonal_unitary(&th)) <= tol.eq_tol
    })
}

/// `𝒯 = 𝒟∘𝒯∘𝒟`.
pub fn is_classical(t: &Channel, tol: &Tolerance) -> bool {
    if !t.is_square() {
        return false;
    }
    let sd = dephase_superop(t.dim_in());
    max_abs_diff(t.superop(), &(&sd * t.superop() * &sd)) <= tol.eq_tol
}

/// `𝒯∘𝒟 = 𝒟∘𝒯∘𝒟`.
pub fn is_maximally_incoherent(t: &Channel, tol: &Tolerance) -> bool {
    if !t.is_square() {
        return false;
    }
    let sd = dephase_superop(t.dim_in());
    let lhs = t.superop() * &sd;
    max_abs_diff(&lhs, &(&sd * &lhs)) <= tol.eq_tol
}

fn kraus_wise(t: &Channel, tol: &Tolerance, ok: impl Fn(&CMatrix) -> bool) -> bool {
    if !t.is_square() {
        return false;
    }
    t.kraus().iter().all(&ok) || t.minimal_kraus(tol).iter().all(&ok)
}

/// Kraus-wise `𝒯ᵢ∘𝒟 = 𝒟∘𝒯ᵢ∘𝒟`.
pub fn is_incoherent_kraus(t: &Channel, tol: &Tolerance) -> bool {
    let sd = if t.is_square() {
        dephase_superop(t.dim_in())
    } else {
        zeros(0, 0)
    };
    kraus_wise(t, tol, |k| {
        let lhs = kraus_superop(k) * &sd;
        max_abs_diff(&lhs, &(&sd * &lhs)) <= tol.eq_tol
    })
}

/// Kraus-wise `𝒟∘𝒯ᵢ = 𝒯ᵢ∘𝒟`.
pub fn is_strictly_incoherent(t: &Channel, tol: &Tolerance) -> bool {
    let sd = if t.is_square() {
        dephase_superop(t.dim_in())
    } else {
        zeros(0, 0)
    };
    kraus_wise(t, tol, |k| {
        let s = kraus_superop(k);
        max_abs(&(&s * &sd - &sd * &s)) <= tol.eq_tol
    })
}

/// Every Kraus operator is a scalar times `U_π U_θ P`: at most one nonzero
/// entry per row and column, all of equal modulus. Sufficient, not necessary.
pub fn has_physically_incoherent_kraus_form(t: &Channel, tol: &Tolerance) -> bool {
    kraus_wise(t, tol, |k| {
        let cut = tol.eq_tol.max(tol.rank_tol);
        let nz: Vec<(usize, usize, f64)> = (0..k.nrows())
            .flat_map(|r| (0..k.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, k[(r, c)].norm()))
            .filter(|&(_, _, v)| v > cut)
            .collect();
        let Some(&(_, _, m0)) = nz.first() else {
            return true;
        };
        let mut rows = vec![false; k.nrows()];
        let mut cols = vec![false; k.ncols()];
        nz.iter().all(|&(r, c, v)| {
            let fresh = !rows[r] && !cols[c];
            rows[r] = true;
            cols[c] = true;
            fresh && (v - m0).abs() <= tol.eq_tol.sqrt()
        })
    })
}

/// `Pⱼₖ = ⟨j|𝒯(|k⟩⟨k|)|j⟩`.
pub fn classical_quotient_channel(t: &Channel) -> Result<CMatrix> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(
            "classical quotient needs a square channel".into(),
        ));
    }
    let d = t.dim_in();
    let mut p = zeros(d, d);
    for k in 0..d {
        let out = t.apply_matrix(&basis_projector(d, k))?;
        for j in 0..d {
            p[(j, k)] = crate::numerics::r(out[(j, j)].re);
        }
    }
    Ok(p)
}

/// Diagonal-unitary channel with the largest commutator against `t`, from
/// the single-axis `θ = π/2` family and a few fixed generic angles.
pub fn basis_preserving_witness(t: &Channel) -> (Channel, f64) {
    let d = t.dim_in();
    let mut candidates: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut th = vec![0.0; d];
            th[k] = std::f64::consts::FRAC_PI_2;
            th
        })
        .collect();
    for s in [0.7, 1.9, 2.6] {
        candidates.push((0..d).map(|k| s * (k * k + 1) as f64).collect());
    }
    candidates
        .into_iter()
        .map(|th| {
            let u = diagonal_unitary(&th);
            let r = commutator_norm(t, &u);
            (u, r)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one candidate")
}

/// Dimension of the space of Schur multipliers `Γ` whose channel
/// `ρ ↦ Γ∘ρ` commutes (as a linear map) with every channel in `family`.
pub fn schur_commutant_dim(family: &[Channel], tol: &Tolerance) -> Result<usize> {
    let d = family
        .first()
        .ok_or_else(|| Error::InvalidInput("empty channel family".into()))?
        .dim_in();
    let n = d * d;
    let rows: Vec<CMatrix> = family
        .iter()
        .map(|ch| {
            let s = ch.superop();
            // (S diag(γ) − diag(γ) S)_{rc} = S_{rc} (γ_c − γ_r).
            let mut m = zeros(n * n, n);
            for r in 0..n {
                for c in 0..n {
                    let v = s[(r, c)];
                    m[(r * n + c, c)] += v;
                    m[(r * n + c, r)] -= v;
                }
            }
            m
        })
        .collect();
    Ok(nullspace_of_stack(rows.iter(), n, tol)?.ncols())
}

/// Dimension of `{X : X S(g) = S(g) X}` over all generators, as linear maps on `M_d`.
pub fn superop_commutant_dim(gens: &[Channel], tol: &Tolerance) -> Result<usize> {
    Ok(superop_commutant_basis(gens, tol)?.ncols())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalVerdict {
    Classical { dim: usize },
    WholeSystem,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceClassReport {
    pub dimension: usize,
    pub generators: usize,
    pub strictly_incoherent: bool,
    pub dephasing_covariant: bool,
    pub phase_covariant: bool,
    pub multiphase_covariant: bool,
    pub basis_preserving: bool,
    pub classical: bool,
    pub incoherent: bool,
    pub maximally_incoherent: bool,
    pub physically_incoherent_kraus_form: bool,
    pub classical_channels_witnessed: bool,
    pub superop_commutant_dim: Option<usize>,
    pub classical_subsystem_verdict: ClassicalVerdict,
}

/// Largest dimension for which the linear superoperator commutant is computed.
pub const MAX_COMMUTANT_DIM: usize = 5;

/// Classifies the monoid generated by `gens`.
///
/// `attested_classical` records that the caller guarantees the monoid contains
/// every classical channel; otherwise erasures to each basis state are searched
/// for among words of length at most `max_words`.
pub fn classify_monoid(
    gens: &[Channel],
    attested_classical: bool,
    max_words: usize,
    tol: &Tolerance,
) -> Result<CoherenceClassReport> {
    let first = gens
        .first()
        .ok_or_else(|| Error::InvalidInput("classify needs at least one channel".into()))?;
    let d = first.dim_in();
    if gens.iter().any(|g| g.dim_in() != d || g.dim_out() != d) {
        return Err(Error::DimensionMismatch(
            "generators act on different spaces".into(),
        ));
    }
    let all = |f: fn(&Channel, &Tolerance) -> bool| gens.iter().all(|g| f(g, tol));
    let dephasing_covariant = all(is_dephasing_covariant);
    let witnessed = attested_classical || erasures_reachable(gens, max_words, tol);
    let commutant_dim = if d <= MAX_COMMUTANT_DIM {
        Some(superop_commutant_dim(gens, tol)?)
    } else {
        None
    };
    let verdict = if dephasing_covariant && witnessed {
        ClassicalVerdict::Classical { dim: d }
    } else if commutant_dim == Some(1) {
        ClassicalVerdict::WholeSystem
    } else {
        ClassicalVerdict::Undetermined
    };
    Ok(CoherenceClassReport {
        dimension: d,
        generators: gens.len(),
        strictly_incoherent: all(is_strictly_incoherent),
        dephasing_covariant,
        phase_covariant: all(is_phase_covariant),
        multiphase_covariant: all(is_multiphase_covariant),
        basis_preserving: all(is_basis_preserving),
        classical: all(is_classical),
        incoherent: all(is_incoherent_kraus),
        maximally_incoherent: all(is_maximally_incoherent),
        physically_incoherent_kraus_form: all(has_physically_incoherent_kraus_form),
        classical_channels_witnessed: witnessed,
        superop_commutant_dim: commutant_dim,
        classical_subsystem_verdict: verdict,
    })
}

const MAX_WORD_POOL: usize = 4096;

/// True iff every erasure `ρ ↦ |k⟩⟨k|` appears among words of length ≤ `max_len`.
fn erasures_reachable(gens: &[Channel], max_len: usize, tol: &Tolerance) -> bool {
    let d = gens[0].dim_in();
    let targets: Vec<CMatrix> = (0..d)
        .map(|k| {
            erasure_to(&StateDM::basis(d, k), d)
                .expect("basis state has support")
                .superop()
                .clone()
        })
        .collect();
    let mut found = vec![false; d];
    let mut pool: Vec<CMatrix> = Vec::new();
    let mut frontier: Vec<CMatrix> = vec![identity(d * d)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let s = g.superop() * w;
                if pool.iter().any(|p| max_abs_diff(p, &s) <= tol.eq_tol) {
                    continue;
                }
                for (k, t) in targets.iter().enumerate() {
                    if max_abs_diff(t, &s) <= tol.eq_tol {
                        found[k] = true;
                    }
                }
                if pool.len() >= MAX_WORD_POOL {
                    return found.iter().all(|&f| f);
                }
                pool.push(s.clone());
                next.push(s);
            }
        }
        if found.iter().all(|&f| f) || next.is_empty() {
            break;
        }
        frontier = next;
    }
    found.iter().all(|&f| f)
}
