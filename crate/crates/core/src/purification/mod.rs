//! Purifications of reduced states on a carved subsystem, their essential
//! uniqueness up to the adversary, and the regularity constructions for
//! isometric monoids.

use serde::Serialize;

use crate::carver::{states_equivalent_by_chain, ChainSearch};
use crate::channels::{Channel, StateDM};
use crate::error::{Error, Result};
use crate::numerics::{
    eig_hermitian, identity, isometry_residual, max_abs_diff, orthogonal_complement, polar_unitary,
    serialize_matrix, unitarity_residual, zeros, CMatrix, Tolerance, ONE,
};
use crate::star_algebra::{partial_trace_over_commutant, BlockDecomposition};

/// Which side the connecting map acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `target = W · source`.
    Forward,
    /// `source = W · target`.
    Backward,
}

#[derive(Debug, Clone, Serialize)]
pub struct PurificationWitness {
    #[serde(serialize_with = "serialize_matrix")]
    pub global_pure: CMatrix,
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "serialize_opt"
    )]
    pub connecting_unitary: Option<CMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

fn serialize_opt<S: serde::Serializer>(
    m: &Option<CMatrix>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => serialize_matrix(m, s),
        None => s.serialize_none(),
    }
}

/// Reduced data for one block: weight `p` and normalized state on `H_R`.
#[derive(Debug, Clone)]
pub struct BlockReduced {
    pub p: f64,
    pub rho: CMatrix,
}

/// `|ψ⟩ = U† ⊕ⱼ √pⱼ Σᵢ √λᵢⱼ |eᵢⱼ⟩ ⊗ |i⟩`.
pub fn purify(
    dec: &BlockDecomposition,
    reduced: &[BlockReduced],
    tol: &Tolerance,
) -> Result<PurificationWitness> {
    if reduced.len() != dec.blocks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} reduced blocks for {} blocks",
            reduced.len(),
            dec.blocks.len()
        )));
    }
    let total: f64 = reduced.iter().map(|b| b.p).sum();
    if reduced
        .iter()
        .any(|b| !b.p.is_finite() || b.p < -tol.eq_tol)
        || (total - 1.0).abs() > tol.eq_tol
    {
        return Err(Error::InvalidState(
            "block weights are not a probability vector".into(),
        ));
    }
    let d = dec.dim();
    let mut v = zeros(d, 1);
    for ((&(dr, dm), off), block) in dec.blocks.iter().zip(dec.offsets()).zip(reduced) {
        if block.rho.shape() != (dr, dr) {
            return Err(Error::DimensionMismatch(format!(
                "block state of shape {:?}, expected {dr}x{dr}",
                block.rho.shape()
            )));
        }
        if block.p <= tol.rank_tol {
            continue;
        }
        let rho = StateDM::new(block.rho.clone(), tol)?;
        let eig = eig_hermitian(rho.matrix(), tol)?;
        let support: Vec<usize> = (0..dr)
            .rev()
            .filter(|&i| eig.values[i] > tol.rank_tol)
            .collect();
        if support.len() > dm {
            return Err(Error::NotPurifiable(format!(
                "block state of rank {} exceeds multiplicity {dm}",
                support.len()
            )));
        }
        for (slot, &i) in support.iter().enumerate() {
            let amp = (block.p * eig.values[i]).sqrt();
            let e = canonical_phase(eig.vectors.column(i).into_owned());
            for r in 0..dr {
                v[(off + r * dm + slot, 0)] += e[r] * amp;
            }
        }
    }
    let global_pure = dec.unitary.adjoint() * v;
    Ok(PurificationWitness {
        global_pure,
        connecting_unitary: None,
        direction: None,
    })
}

fn canonical_phase(
    v: nalgebra::DVector<num_complex::Complex64>,
) -> nalgebra::DVector<num_complex::Complex64> {
    let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match v.iter().find(|z| z.norm() >= m * (1.0 - 1e-9)) {
        Some(p) if m > 0.0 => {
            let ph = p.conj() / p.norm();
            v * ph
        }
        _ => v,
    }
}

/// Coefficient matrices `Cⱼ` with `(Uψ)_{off + r·d_M + m} = Cⱼ[r, m]`.
fn block_coefficients(dec: &BlockDecomposition, psi: &CMatrix) -> Vec<CMatrix> {
    let v = &dec.unitary * psi;
    dec.blocks
        .iter()
        .zip(dec.offsets())
        .map(|(&(dr, dm), off)| CMatrix::from_fn(dr, dm, |r, m| v[(off + r * dm + m, 0)]))
        .collect()
}

fn check_vector(dec: &BlockDecomposition, psi: &CMatrix, tol: &Tolerance) -> Result<()> {
    if psi.shape() != (dec.dim(), 1) {
        return Err(Error::DimensionMismatch(format!(
            "vector of shape {:?} for dimension {}",
            psi.shape(),
            dec.dim()
        )));
    }
    if (psi.norm() - 1.0).abs() > tol.eq_tol {
        return Err(Error::InvalidState("vector is not normalized".into()));
    }
    Ok(())
}

/// `U_B = ⊕ⱼ (I ⊗ Uⱼ)` with `U_B ψ = ψ′`, by per-block unitary Procrustes.
pub fn connect_purifications(
    dec: &BlockDecomposition,
    psi: &CMatrix,
    psi_prime: &CMatrix,
    tol: &Tolerance,
) -> Result<PurificationWitness> {
    check_vector(dec, psi, tol)?;
    check_vector(dec, psi_prime, tol)?;
    let q = partial_trace_over_commutant(dec, &StateDM::pure(psi)?, tol)?;
    let q2 = partial_trace_over_commutant(dec, &StateDM::pure(psi_prime)?, tol)?;
    for (a, b) in q.iter().zip(&q2) {
        let da = a.state.matrix().scale(a.weight.max(0.0));
        let db = b.state.matrix().scale(b.weight.max(0.0));
        if max_abs_diff(&da, &db) > 10.0 * tol.eq_tol {
            return Err(Error::InvalidState(
                "purifications have different reduced states".into(),
            ));
        }
    }
    let parts: Vec<CMatrix> = block_coefficients(dec, psi)
        .iter()
        .zip(block_coefficients(dec, psi_prime))
        .map(|(c, c2)| polar_unitary(&(c.adjoint() * c2)).map(|(y, _)| y.transpose()))
        .collect::<Result<_>>()?;
    let u = dec.embed_commutant(&parts)?;
    let res = (&u * psi - psi_prime).norm();
    if res > 10.0 * tol.eq_tol {
        return Err(Error::Numeric(format!(
            "connecting unitary misses by {res:.3e}"
        )));
    }
    Ok(PurificationWitness {
        global_pure: psi.clone(),
        connecting_unitary: Some(u),
        direction: Some(Direction::Forward),
    })
}

/// Isometry `W` with `V′ = W V` (forward) or `V = W V′` (backward).
///
/// `V: ℂᵐ → ℂⁿ` and `V′: ℂᵐ → ℂⁿ′`; forward when the orthocomplement of
/// `ran V` is no larger than that of `ran V′`.
pub fn extend_isometry(
    v: &CMatrix,
    v_prime: &CMatrix,
    tol: &Tolerance,
) -> Result<(Direction, CMatrix)> {
    if v.ncols() != v_prime.ncols() {
        return Err(Error::DimensionMismatch(
            "isometries have different domains".into(),
        ));
    }
    for m in [v, v_prime] {
        let res = isometry_residual(m);
        if res > tol.eq_tol {
            return Err(Error::NotIsometry(res));
        }
    }
    let (dir, src, dst) = if v.nrows() <= v_prime.nrows() {
        (Direction::Forward, v, v_prime)
    } else {
        (Direction::Backward, v_prime, v)
    };
    let comp = orthogonal_complement(src, tol)?;
    let comp_dst = orthogonal_complement(dst, tol)?;
    let r = comp.ncols();
    let w = dst * src.adjoint() + comp_dst.columns(0, r) * comp.adjoint();
    let res = isometry_residual(&w).max(max_abs_diff(&(&w * src), dst));
    if res > 10.0 * tol.eq_tol {
        return Err(Error::Numeric(format!(
            "extended isometry misses by {res:.3e}"
        )));
    }
    Ok((dir, w))
}

/// Unitary `U` with `U ψ = ψ′` from two Householder reflections.
pub fn householder_connect(psi: &CMatrix, psi_prime: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    if psi.shape() != psi_prime.shape() || psi.ncols() != 1 {
        return Err(Error::DimensionMismatch(
            "vectors of different shape".into(),
        ));
    }
    if (psi.norm() - 1.0).abs() > tol.eq_tol || (psi_prime.norm() - 1.0).abs() > tol.eq_tol {
        return Err(Error::InvalidState("vectors must be normalized".into()));
    }
    let (h, a) = reflector(psi);
    let (h2, a2) = reflector(psi_prime);
    let u = h2 * h * (a2 / a);
    let res = (&u * psi - psi_prime).norm().max(unitarity_residual(&u));
    if res > 10.0 * tol.eq_tol {
        return Err(Error::Numeric(format!(
            "Householder connection misses by {res:.3e}"
        )));
    }
    Ok(u)
}

/// `H = I − 2ww†/‖w‖²` with `H x = α e₀`.
fn reflector(x: &CMatrix) -> (CMatrix, num_complex::Complex64) {
    let n = x.nrows();
    let x0 = x[(0, 0)];
    let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
    let alpha = -phase * x.norm();
    let mut w = x.clone();
    w[(0, 0)] -= alpha;
    let ww = w.norm_squared();
    if ww == 0.0 {
        return (identity(n), x0);
    }
    (
        identity(n) - &w * w.adjoint() * num_complex::Complex64::new(2.0 / ww, 0.0),
        alpha,
    )
}

/// Single transformation connecting two states, from a degradation chain.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityWitness {
    #[serde(serialize_with = "serialize_matrix")]
    pub unitary: CMatrix,
    pub direction: Direction,
    pub chain_length: usize,
    pub residual: f64,
}

/// Finds a chain under the isometric monoid generated by `monoid_samples` and
/// collapses it link by link into a single transformation.
pub fn check_regularity_chain(
    psi: &StateDM,
    psi_prime: &StateDM,
    monoid_samples: &[Channel],
    search: &ChainSearch,
    tol: &Tolerance,
) -> Result<Option<RegularityWitness>> {
    let kraus: Vec<CMatrix> = monoid_samples
        .iter()
        .map(|ch| {
            ch.single_kraus()
                .filter(|k| k.is_square() && unitarity_residual(k) <= tol.eq_tol)
                .cloned()
                .ok_or_else(|| {
                    Error::Unsupported(
                        "regularity collapse needs isometric witnesses on one space".into(),
                    )
                })
        })
        .collect::<Result<_>>()?;
    let Some(cert) = states_equivalent_by_chain(psi, psi_prime, monoid_samples, search, tol)?
    else {
        return Ok(None);
    };
    let d = psi.dim();
    let word_matrix = |w: &[usize]| w.iter().fold(identity(d), |acc, &g| &kraus[g] * acc);

    // Relation between ψ₁ and the current chain state ψₖ:
    // forward `ψₖ = A ψ₁`, backward `ψ₁ = A ψₖ`.
    let mut acc = identity(d);
    let mut dir = Direction::Forward;
    if cert.len() > 1 {
        for (b, bt) in &cert.words {
            let (vb, vbt) = (word_matrix(b), word_matrix(bt));
            // Link `V ψₖ = Ṽ ψₖ₊₁`, resolved by regularity into one step.
            let (link_dir, step) = match extend_isometry(&vb, &vbt, tol)? {
                // Ṽ = W V: ψₖ = V† W V ψₖ₊₁.
                (Direction::Forward, w) => (Direction::Backward, vb.adjoint() * w * &vb),
                // V = W Ṽ: ψₖ₊₁ = Ṽ† W Ṽ ψₖ.
                (Direction::Backward, w) => (Direction::Forward, vbt.adjoint() * w * &vbt),
            };
            (dir, acc) = match (dir, link_dir) {
                (Direction::Forward, Direction::Forward) => (Direction::Forward, step * &acc),
                (Direction::Backward, Direction::Backward) => (Direction::Backward, &acc * step),
                // A ψ₁ = B ψₖ₊₁.
                (Direction::Forward, Direction::Backward) => {
                    (Direction::Forward, step.adjoint() * &acc)
                }
                // ψ₁ = A ψₖ and ψₖ₊₁ = B ψₖ.
                (Direction::Backward, Direction::Forward) => {
                    (Direction::Forward, step * acc.adjoint())
                }
            };
        }
    }
    let (src, dst) = match dir {
        Direction::Forward => (psi, psi_prime),
        Direction::Backward => (psi_prime, psi),
    };
    let image = &acc * src.matrix() * acc.adjoint();
    let residual = max_abs_diff(&image, dst.matrix());
    if residual > 10.0 * tol.eq_tol {
        return Err(Error::Numeric(format!(
            "collapsed chain misses by {residual:.3e}"
        )));
    }
    Ok(Some(RegularityWitness {
        unitary: acc,
        direction: dir,
        chain_length: cert.len(),
        residual,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::named::{diagonal_unitary, diagonal_unitary_matrix};
    use crate::numerics::random::{
        random_density, random_isometry, random_state_vector, random_unitary, Rng,
    };
    use crate::numerics::{diag_real, ket, partial_trace_first, partial_trace_second, r};
    use rand::SeedableRng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn reduced_of(dec: &BlockDecomposition, psi: &CMatrix) -> Vec<(f64, CMatrix)> {
        partial_trace_over_commutant(dec, &StateDM::pure(psi).unwrap(), &tol())
            .unwrap()
            .into_iter()
            .map(|b| (b.weight, b.state.matrix().clone()))
            .collect()
    }

    #[test]
    fn maximally_mixed_qubit_purifies_to_bell_state() {
        let t = tol();
        let dec = BlockDecomposition::standard(&[(2, 2)]).unwrap();
        let w = purify(
            &dec,
            &[BlockReduced {
                p: 1.0,
                rho: diag_real(&[0.5, 0.5]),
            }],
            &t,
        )
        .unwrap();
        let rho = StateDM::pure(&w.global_pure).unwrap();
        let half = diag_real(&[0.5, 0.5]);
        assert!(max_abs_diff(&partial_trace_second(rho.matrix(), 2, 2), &half) < 1e-10);
        assert!(max_abs_diff(&partial_trace_first(rho.matrix(), 2, 2), &half) < 1e-10);
    }

    #[test]
    fn purify_round_trips_through_partial_trace() {
        let t = tol();
        let mut g = Rng::seed_from_u64(210);
        let blocks = [(2, 3), (3, 3), (1, 2)];
        let dec = BlockDecomposition::standard(&blocks).unwrap();
        let p = [0.5, 0.3, 0.2];
        let reduced: Vec<BlockReduced> = blocks
            .iter()
            .zip(p)
            .map(|(&(dr, _), p)| BlockReduced {
                p,
                rho: random_density(dr, dr, &mut g),
            })
            .collect();
        let w = purify(&dec, &reduced, &t).unwrap();
        assert!((w.global_pure.norm() - 1.0).abs() < 1e-10);
        for ((wt, rho), b) in reduced_of(&dec, &w.global_pure).iter().zip(&reduced) {
            assert!((wt - b.p).abs() < 1e-9);
            assert!(max_abs_diff(rho, &b.rho) < 1e-9);
        }
    }

    #[test]
    fn rank_above_multiplicity_is_rejected() {
        let t = tol();
        let dec = BlockDecomposition::standard(&[(3, 1)]).unwrap();
        let err = purify(
            &dec,
            &[BlockReduced {
                p: 1.0,
                rho: diag_real(&[0.5, 0.5, 0.0]),
            }],
            &t,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotPurifiable(_)));
        let dec = BlockDecomposition::standard(&[(3, 2)]).unwrap();
        assert!(purify(
            &dec,
            &[BlockReduced {
                p: 1.0,
                rho: diag_real(&[0.5, 0.5, 0.0])
            }],
            &t
        )
        .is_ok());
    }

    #[test]
    fn purifications_connect_by_commutant_unitary() {
        let t = tol();
        let mut g = Rng::seed_from_u64(211);
        let dec = BlockDecomposition::standard(&[(2, 2), (1, 3)]).unwrap();
        let reduced = vec![
            BlockReduced {
                p: 0.6,
                rho: random_density(2, 2, &mut g),
            },
            BlockReduced {
                p: 0.4,
                rho: diag_real(&[1.0]),
            },
        ];
        let psi = purify(&dec, &reduced, &t).unwrap().global_pure;
        let ub = dec
            .embed_commutant(&[random_unitary(2, &mut g), random_unitary(3, &mut g)])
            .unwrap();
        let psi2 = &ub * &psi;
        let w = connect_purifications(&dec, &psi, &psi2, &t).unwrap();
        let u = w.connecting_unitary.unwrap();
        assert!((&u * &psi - &psi2).norm() < 1e-9);
        assert!(unitarity_residual(&u) < 1e-9);
        let (_, off) = dec.commutant_parts(&u);
        assert!(off < 1e-9);
    }

    #[test]
    fn diagonal_commutant_example() {
        let t = tol();
        let dec = BlockDecomposition::standard(&[(1, 2)]).unwrap();
        let psi = ket(2, 0);
        let psi2 = diagonal_unitary_matrix(&[0.4, 1.1]) * &psi;
        let u = connect_purifications(&dec, &psi, &psi2, &t)
            .unwrap()
            .connecting_unitary
            .unwrap();
        assert!((&u * &psi - &psi2).norm() < 1e-12);
    }

    #[test]
    fn mismatched_reduced_states_are_rejected() {
        let t = tol();
        let dec = BlockDecomposition::standard(&[(2, 2)]).unwrap();
        let a = (ket(4, 0) + ket(4, 3)) * r(0.5f64.sqrt());
        assert!(connect_purifications(&dec, &a, &ket(4, 0), &t).is_err());
    }

    #[test]
    fn truncated_shift_extends_to_a_unitary() {
        let t = tol();
        let n = 6;
        let v = CMatrix::from_fn(n, n - 1, |i, j| if i == j + 1 { r(1.0) } else { r(0.0) });
        let v2 = CMatrix::from_fn(n, n - 1, |i, j| if i == j { r(1.0) } else { r(0.0) });
        let (dir, w) = extend_isometry(&v, &v2, &t).unwrap();
        assert_eq!(dir, Direction::Forward);
        assert!(unitarity_residual(&w) < 1e-10);
        assert!(max_abs_diff(&(&w * &v), &v2) < 1e-10);
    }

    #[test]
    fn random_isometries_extend_in_the_right_direction() {
        let t = tol();
        let mut g = Rng::seed_from_u64(212);
        for _ in 0..5 {
            let v = random_isometry(3, 7, &mut g);
            let v2 = random_isometry(3, 5, &mut g);
            let (dir, w) = extend_isometry(&v, &v2, &t).unwrap();
            assert_eq!(dir, Direction::Backward);
            assert!(isometry_residual(&w) < 1e-9);
            assert!(max_abs_diff(&(&w * &v2), &v) < 1e-9);
            let (dir, w) = extend_isometry(&v2, &v, &t).unwrap();
            assert_eq!(dir, Direction::Forward);
            assert!(max_abs_diff(&(&w * &v2), &v) < 1e-9);
        }
    }

    #[test]
    fn householder_connects_random_vectors() {
        let t = tol();
        let mut g = Rng::seed_from_u64(213);
        for d in 1..=4 {
            for _ in 0..4 {
                let a = random_state_vector(d, &mut g);
                let b = random_state_vector(d, &mut g);
                let u = householder_connect(&a, &b, &t).unwrap();
                assert!((&u * &a - &b).norm() < 1e-10);
            }
        }
        let e = ket(3, 1);
        assert!((householder_connect(&e, &e, &t).unwrap() * &e - &e).norm() < 1e-12);
    }

    fn phase_setup() -> (StateDM, CMatrix, Channel) {
        let mut g = Rng::seed_from_u64(214);
        let psi = random_state_vector(3, &mut g);
        let u = diagonal_unitary_matrix(&[0.0, 0.7, 1.9]);
        (
            StateDM::pure(&psi).unwrap(),
            u,
            diagonal_unitary(&[0.0, 0.7, 1.9]),
        )
    }

    #[test]
    fn regularity_collapses_chains() {
        let t = tol();
        let (psi, u, ch) = phase_setup();
        for (power, words, len) in [(1, 6, 2), (2, 1, 3)] {
            let mut target = psi.matrix().clone();
            for _ in 0..power {
                target = &u * target * u.adjoint();
            }
            let target = StateDM::new(target, &t).unwrap();
            let search = ChainSearch {
                max_words: words,
                ..ChainSearch::default()
            };
            let w = check_regularity_chain(&psi, &target, std::slice::from_ref(&ch), &search, &t)
                .unwrap()
                .unwrap();
            assert_eq!(w.chain_length, len);
            assert!(w.residual < 1e-9);
            assert!(unitarity_residual(&w.unitary) < 1e-9);
        }
        let w = check_regularity_chain(
            &psi,
            &psi,
            std::slice::from_ref(&ch),
            &ChainSearch::default(),
            &t,
        )
        .unwrap()
        .unwrap();
        assert_eq!(w.chain_length, 1);
        assert!(max_abs_diff(&w.unitary, &identity(3)) < 1e-12);
    }

    #[test]
    fn regularity_needs_unitary_witnesses() {
        let t = tol();
        let (psi, _, _) = phase_setup();
        let noisy = crate::channels::named::dephase(3);
        let res = check_regularity_chain(&psi, &psi, &[noisy], &ChainSearch::default(), &t);
        assert!(matches!(res, Err(Error::Unsupported(_))));
    }
}
