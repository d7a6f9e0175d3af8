use std::f64::consts::TAU;

use rand::Rng as _;
use subcarve::carver::{
    carve, carve_checks, check_no_signalling, states_equivalent_by_chain, Agent, CanonicalState,
    ChainSearch, ReducedTransformation, SubsystemDescription,
};
use subcarve::channels::named::{
    dephase, diagonal_unitary, diagonal_unitary_matrix, erasure_to, identity_channel, unitary,
};
use subcarve::channels::{
    commutant_residuals, commutator_norm, is_logically_invertible, is_physically_reversible,
    superop_commutant_basis, Channel, StateDM,
};
use subcarve::coherence::{
    basis_preserving_witness, c_psi, classical_quotient_channel, multiphase_pattern_residual,
    sample_basis_preserving, sample_multiphase_covariant, schur_commutant_dim,
};
use subcarve::group_rep::{adversarial_group, close_group, isotypic_decompose, FiniteGroupRep};
use subcarve::numerics::random::{
    permutation_matrix, random_density, random_isometry, random_kraus, random_permutation,
    random_probabilities, random_state_vector, random_unitary, Rng,
};
use subcarve::numerics::{
    c, diag, identity, isometry_residual, kron, max_abs_diff, pauli_x, pauli_z, span_residual,
    unitarity_residual, CMatrix, Tolerance,
};
use subcarve::purification::{
    check_regularity_chain, connect_purifications, extend_isometry, purify, BlockReduced, Direction,
};
use subcarve::star_algebra::{
    block_decompose, commutant, d0_channel, double_commutant_check, generate_algebra,
    partial_trace_over_commutant, random_algebra_channel, random_commutant_channel,
    BlockDecomposition, StarAlgebra,
};
use subcarve::{Error, Result};

use super::{Finding, PropertyCheck};
use crate::config::RunConfig;

pub static REGISTRY: &[&dyn PropertyCheck] = &[
    &LocalChannelCommutant,
    &AlgebraDuality,
    &WedderburnInvariants,
    &NoSignalling,
    &MultiphaseBasisPreservingDuality,
    &ClassicalSubsystem,
    &PhaseFlipGolden,
    &AdversarialGroupStructure,
    &Purification,
    &IsometryRegularity,
    &ConservationOfInformation,
    &ChainCertificates,
    &RegularityChain,
    &CarveConsistency,
];

const COMMUTE_BOUND: f64 = 1e-8;

fn random_channel(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
    let r = rng.random_range(1..=(d * d).min(4));
    Channel::from_kraus(random_kraus(d, d, r, rng), tol)
}

fn random_state(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<StateDM> {
    let rank = rng.random_range(1..=d);
    StateDM::new(random_density(d, rank, rng), tol)
}

/// Random partition of `d` into blocks `(d_A, d_B)` with `Σ d_A d_B = d`.
fn random_blocks(d: usize, rng: &mut Rng) -> Vec<(usize, usize)> {
    let mut left = d;
    let mut blocks = Vec::new();
    while left > 0 {
        let a = rng.random_range(1..=left);
        let b = rng.random_range(1..=left / a);
        blocks.push((a, b));
        left -= a * b;
    }
    blocks
}

/// Algebra generated by two random elements of a randomly rotated block algebra.
fn random_algebra(d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<StarAlgebra> {
    let blocks = random_blocks(d, rng);
    let model = StarAlgebra::from_block_structure(&blocks, &random_unitary(d, rng))?;
    let gens = [model.random_element(rng), model.random_element(rng)];
    generate_algebra(d, &gens, tol)
}

/// Twenty algebras shared by the duality and Wedderburn checks.
fn shared_algebras(cfg: &RunConfig) -> Result<Vec<StarAlgebra>> {
    let mut rng = subcarve::numerics::random::SeedSplitter::new(cfg.seed).child("shared-algebras");
    [3, 4, 6]
        .iter()
        .cycle()
        .take(20)
        .map(|&d| random_algebra(d, &mut rng, &cfg.tol))
        .collect()
}

fn finding(passed: bool, residual: f64, bound: f64, samples: usize, detail: String) -> Finding {
    Finding {
        passed: passed && residual <= bound,
        residual,
        bound,
        samples,
        detail,
    }
}

struct LocalChannelCommutant;

impl PropertyCheck for LocalChannelCommutant {
    fn name(&self) -> &'static str {
        "local_channel_commutant"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let id2 = identity_channel(2);
        let locals: Vec<Channel> = (0..20)
            .map(|_| Ok(random_channel(2, rng, t)?.tensor(&id2)))
            .collect::<Result<_>>()?;
        let basis = superop_commutant_basis(&locals, t)?;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let b = id2.tensor(&random_channel(2, rng, t)?);
            let (span, tp) = commutant_residuals(&basis, &b);
            worst = worst.max(span).max(tp);
            for a in &locals {
                worst = worst.max(commutator_norm(a, &b));
            }
        }
        let mut closest = f64::INFINITY;
        for _ in 0..20 {
            closest = closest.min(commutant_residuals(&basis, &random_channel(4, rng, t)?).0);
        }
        Ok(finding(
            closest >= 1e-4,
            worst,
            COMMUTE_BOUND,
            60,
            format!(
                "commutant dimension {}; closest non-local channel at {closest:.3e}",
                basis.ncols()
            ),
        ))
    }
}

struct AlgebraDuality;

impl PropertyCheck for AlgebraDuality {
    fn name(&self) -> &'static str {
        "algebra_duality"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let algebras = shared_algebras(cfg)?;
        let mut worst: f64 = 0.0;
        for alg in &algebras {
            let dec = block_decompose(alg, rng.random(), t)?;
            let on_a: Vec<Channel> = (0..3)
                .map(|_| random_algebra_channel(&dec, 2, rng))
                .collect();
            let on_b: Vec<Channel> = (0..3)
                .map(|_| random_commutant_channel(&dec, 2, rng))
                .collect();
            for b in &on_b {
                for a in &on_a {
                    worst = worst.max(commutator_norm(a, b));
                }
                for x in alg.basis() {
                    worst = worst.max(max_abs_diff(&b.adjoint_apply(x)?, x));
                }
            }
        }
        Ok(finding(
            true,
            worst,
            COMMUTE_BOUND,
            algebras.len(),
            "Chan(A) against Chan(A') and adjoint fixed points".into(),
        ))
    }
}

struct WedderburnInvariants;

impl PropertyCheck for WedderburnInvariants {
    fn name(&self) -> &'static str {
        "wedderburn_invariants"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let algebras = shared_algebras(cfg)?;
        let mut worst: f64 = 0.0;
        let mut mismatches = 0;
        for alg in &algebras {
            let dec = block_decompose(alg, rng.random(), t)?;
            for x in alg.basis() {
                worst = worst.max(dec.algebra_parts(x).1);
            }
            let sum_a: usize = dec.blocks.iter().map(|(a, _)| a * a).sum();
            let sum_b: usize = dec.blocks.iter().map(|(_, b)| b * b).sum();
            if sum_a != alg.span_dim()
                || sum_b != commutant(alg, t)?.span_dim()
                || !double_commutant_check(alg, t)?
            {
                mismatches += 1;
            }
        }
        Ok(finding(
            mismatches == 0,
            worst,
            1e-7,
            algebras.len(),
            format!("{mismatches} dimension or bicommutant mismatches"),
        ))
    }
}

struct NoSignalling;

impl PropertyCheck for NoSignalling {
    fn name(&self) -> &'static str {
        "no_signalling"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let tensor = Agent::Algebra {
            dim: 4,
            generators: vec![
                kron(&pauli_x(), &identity(2)),
                kron(&pauli_z(), &identity(2)),
            ],
        };
        let random = random_algebra(4, rng, t)?;
        let families = vec![
            tensor,
            Agent::Algebra {
                dim: 4,
                generators: random.generators().to_vec(),
            },
            Agent::named("multiphase_covariant", 3)?,
            Agent::named("basis_preserving", 3)?,
        ];
        let mut worst: f64 = 0.0;
        let mut samples = 0;
        for agent in &families {
            let sub = carve(agent, rng.random(), &cfg.carve_options(), t)?;
            let adversary: Vec<Channel> = (0..50)
                .map(|_| sub.adversary.sample(rng, t))
                .collect::<Result<_>>()?;
            let states: Vec<StateDM> = (0..20)
                .map(|_| random_state(agent.dim(), rng, t))
                .collect::<Result<_>>()?;
            let report = check_no_signalling(&sub, &adversary, &states, t)?;
            worst = worst.max(report.max_deviation);
            samples += report.samples;
        }
        Ok(finding(
            true,
            worst,
            COMMUTE_BOUND,
            samples,
            "tensor, random algebra, multiphase, basis-preserving".into(),
        ))
    }
}

struct MultiphaseBasisPreservingDuality;

impl PropertyCheck for MultiphaseBasisPreservingDuality {
    fn name(&self) -> &'static str {
        "multiphase_basis_preserving_duality"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut worst: f64 = 0.0;
        let mut weakest = f64::INFINITY;
        for d in 2..=4 {
            for _ in 0..100 {
                let a = sample_multiphase_covariant(d, rng, t)?;
                let b = sample_basis_preserving(d, rng, t)?;
                worst = worst.max(commutator_norm(&a, &b));
            }
            let mut found = 0;
            while found < 20 {
                let ch = random_channel(d, rng, t)?;
                if multiphase_pattern_residual(&ch) <= 1e-6 {
                    continue;
                }
                found += 1;
                weakest = weakest.min(basis_preserving_witness(&ch).1);
            }
        }
        Ok(finding(
            weakest >= 1e-4,
            worst,
            COMMUTE_BOUND,
            360,
            format!("weakest witness commutator {weakest:.3e}"),
        ))
    }
}

struct ClassicalSubsystem;

/// Largest violation of column-stochasticity.
fn stochastic_defect(p: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..p.ncols() {
        let mut sum = 0.0;
        for i in 0..p.nrows() {
            let z = p[(i, j)];
            worst = worst.max(z.im.abs()).max((-z.re).max(0.0));
            sum += z.re;
        }
        worst = worst.max((sum - 1.0).abs());
    }
    worst
}

impl PropertyCheck for ClassicalSubsystem {
    fn name(&self) -> &'static str {
        "classical_subsystem"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut worst: f64 = 0.0;
        let mut wrong = Vec::new();
        for name in [
            "strictly_incoherent",
            "dephasing_covariant",
            "phase_covariant",
            "multiphase_covariant",
            "classical",
        ] {
            for d in 2..=3 {
                let agent = Agent::named(name, d)?;
                let Agent::Named { monoid, .. } = &agent else {
                    unreachable!()
                };
                let sub = carve(&agent, rng.random(), &cfg.carve_options(), t)?;
                if sub.state_space.tag() != "diagonal_probabilities" {
                    wrong.push(format!("{name}({d})"));
                }
                for _ in 0..10 {
                    let p = classical_quotient_channel(&monoid.sample(d, rng, t)?)?;
                    worst = worst.max(stochastic_defect(&p));
                }
            }
        }
        for name in ["incoherent", "maximally_incoherent"] {
            for d in 2..=3 {
                let sub = carve(
                    &Agent::named(name, d)?,
                    rng.random(),
                    &cfg.carve_options(),
                    t,
                )?;
                let family: Vec<Channel> = (0..10)
                    .map(|_| c_psi(&random_state_vector(d, rng), t))
                    .collect::<Result<_>>()?;
                if sub.state_space.tag() != "full" || schur_commutant_dim(&family, t)? != 1 {
                    wrong.push(format!("{name}({d})"));
                }
            }
        }
        Ok(finding(
            wrong.is_empty(),
            worst,
            1e-10,
            14,
            if wrong.is_empty() {
                "all monoids carve as expected".into()
            } else {
                format!("unexpected: {}", wrong.join(", "))
            },
        ))
    }
}

struct PhaseFlipGolden;

impl PropertyCheck for PhaseFlipGolden {
    fn name(&self) -> &'static str {
        "phase_flip_golden"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let z = pauli_z();
        let rep = close_group(2, std::slice::from_ref(&z), cfg.max_order, t)?;
        let iso = isotypic_decompose(&rep, rng.random(), t)?;
        let adv = adversarial_group(&iso, rng.random(), t)?;
        let mut problems = Vec::new();
        if rep.order() != 2
            || iso.blocks.len() != 2
            || iso.blocks.iter().any(|b| b.dim != 1 || b.mult != 1)
        {
            problems.push("irreps");
        }
        let mut worst: f64 = 0.0;
        if adv.commutant_basis.len() != 2 {
            problems.push("commutant dimension");
        }
        for x in &adv.commutant_basis {
            worst = worst.max(x[(0, 1)].norm()).max(x[(1, 0)].norm());
        }
        let zi = rep
            .elements()
            .iter()
            .position(|e| max_abs_diff(e, &z) <= t.eq_tol)
            .expect("Z is in its group");
        if adv.permutations.len() != 2 {
            problems.push("permutation group order");
        }
        for p in &adv.permutations {
            let expected = if p.perm == [1, 0] { -1.0 } else { 1.0 };
            worst = worst.max((p.omega[zi] - c(expected, 0.0)).norm());
        }
        let agent = Agent::Group {
            dim: 2,
            unitaries: vec![z.clone()],
        };
        let sub = carve(&agent, rng.random(), &cfg.carve_options(), t)?;
        for _ in 0..10 {
            let p: f64 = rng.random();
            let phase: f64 = rng.random_range(0.0..TAU);
            let psi = CMatrix::from_column_slice(
                2,
                1,
                &[
                    c(p.sqrt(), 0.0),
                    c(
                        (1.0 - p).sqrt() * phase.cos(),
                        (1.0 - p).sqrt() * phase.sin(),
                    ),
                ],
            );
            match sub.quotient(&StateDM::pure(&psi)?, t)? {
                CanonicalState::SpectraUnordered { mut weights } => {
                    weights.sort_by(f64::total_cmp);
                    worst = worst
                        .max((weights[0] - p.min(1.0 - p)).abs())
                        .max((weights[1] - p.max(1.0 - p)).abs());
                }
                _ => problems.push("quotient kind"),
            }
        }
        for g in [identity(2), z] {
            if !matches!(
                sub.restrict(&unitary(&g, t)?, t)?,
                ReducedTransformation::Identity
            ) {
                problems.push("restricted monoid");
            }
        }
        Ok(finding(
            problems.is_empty(),
            worst,
            1e-10,
            10,
            if problems.is_empty() {
                "matches the golden case".into()
            } else {
                problems.join(", ")
            },
        ))
    }
}

/// Random finite unitary group of order at most 48 from monomial generators
/// in a random basis.
fn random_group(rng: &mut Rng, tol: &Tolerance) -> Result<FiniteGroupRep> {
    for _ in 0..1000 {
        let d = rng.random_range(2..=4);
        let v = random_unitary(d, rng);
        let gens: Vec<CMatrix> = (0..rng.random_range(1..=2))
            .map(|_| {
                let n = rng.random_range(1..=4);
                let phases: Vec<f64> = (0..d)
                    .map(|_| TAU * rng.random_range(0..n) as f64 / n as f64)
                    .collect();
                let m = permutation_matrix(&random_permutation(d, rng))
                    * diagonal_unitary_matrix(&phases);
                &v * m * v.adjoint()
            })
            .collect();
        match close_group(d, &gens, 48, tol) {
            Err(Error::ResourceExceeded(_)) => continue,
            other => return other,
        }
    }
    Err(Error::ResourceExceeded(
        "no group of order at most 48 sampled".into(),
    ))
}

struct AdversarialGroupStructure;

impl PropertyCheck for AdversarialGroupStructure {
    fn name(&self) -> &'static str {
        "adversarial_group_structure"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut worst: f64 = 0.0;
        let mut non_abelian = 0;
        let mut orders = Vec::new();
        for _ in 0..10 {
            let rep = random_group(rng, t)?;
            orders.push(rep.order());
            let iso = isotypic_decompose(&rep, rng.random(), t)?;
            let adv = adversarial_group(&iso, rng.random(), t)?;
            if !adv.permutations_commute() {
                non_abelian += 1;
            }
            let group: Vec<Channel> = rep
                .elements()
                .iter()
                .map(|u| unitary(u, t))
                .collect::<Result<_>>()?;
            let mut elements: Vec<CMatrix> =
                adv.permutations.iter().map(|p| p.unitary.clone()).collect();
            elements.extend((0..5).map(|_| adv.sample(rng)));
            for v in &elements {
                let cv = unitary(v, t)?;
                for g in &group {
                    worst = worst.max(commutator_norm(&cv, g));
                }
                for x in &adv.commutant_basis {
                    worst = worst.max(span_residual(&adv.commutant_basis, &(v * x * v.adjoint())));
                }
            }
            let table = rep.table();
            for p in &adv.permutations {
                for (a, row) in table.iter().enumerate() {
                    for (b, &ab) in row.iter().enumerate() {
                        worst = worst.max((p.omega[ab] - p.omega[a] * p.omega[b]).norm());
                    }
                }
            }
        }
        Ok(finding(
            non_abelian == 0,
            worst,
            COMMUTE_BOUND,
            10,
            format!("group orders {orders:?}; {non_abelian} non-abelian permutation groups"),
        ))
    }
}

struct Purification;

impl PropertyCheck for Purification {
    fn name(&self) -> &'static str {
        "purification"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut round_trip: f64 = 0.0;
        let mut connect: f64 = 0.0;
        for _ in 0..100 {
            let blocks: Vec<(usize, usize)> = (0..rng.random_range(1..=3))
                .map(|_| (rng.random_range(1..=3), rng.random_range(1..=3)))
                .collect();
            let dec = BlockDecomposition::standard(&blocks)?;
            let p = random_probabilities(blocks.len(), rng);
            let reduced: Vec<BlockReduced> = blocks
                .iter()
                .zip(&p)
                .map(|(&(dr, dm), &p)| {
                    let rank = rng.random_range(1..=dr.min(dm));
                    BlockReduced {
                        p,
                        rho: random_density(dr, rank, rng),
                    }
                })
                .collect();
            let psi = purify(&dec, &reduced, t)?.global_pure;
            for (m, r) in partial_trace_over_commutant(&dec, &StateDM::pure(&psi)?, t)?
                .iter()
                .zip(&reduced)
            {
                round_trip = round_trip.max(max_abs_diff(
                    &m.state.matrix().scale(m.weight),
                    &r.rho.scale(r.p),
                ));
            }
            let parts: Vec<CMatrix> = blocks
                .iter()
                .map(|&(_, m)| random_unitary(m, rng))
                .collect();
            let psi2 = dec.embed_commutant(&parts)? * &psi;
            let u = connect_purifications(&dec, &psi, &psi2, t)?
                .connecting_unitary
                .expect("connection has a unitary");
            connect = connect
                .max((&u * &psi - &psi2).norm())
                .max(dec.commutant_parts(&u).1)
                .max(unitarity_residual(&u));
        }
        let mut coherent: f64 = 0.0;
        for _ in 0..10 {
            let d = rng.random_range(2..=4);
            let dec = BlockDecomposition::standard(&vec![(1, 1); d])?;
            let amps: Vec<f64> = random_probabilities(d, rng)
                .iter()
                .map(|p| p.sqrt())
                .collect();
            let psi = CMatrix::from_iterator(d, 1, amps.iter().map(|&a| c(a, 0.0)));
            let phases: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..TAU)).collect();
            let target = diag(
                &phases
                    .iter()
                    .map(|&th| c(th.cos(), th.sin()))
                    .collect::<Vec<_>>(),
            );
            let u = connect_purifications(&dec, &psi, &(&target * &psi), t)?
                .connecting_unitary
                .expect("unitary");
            coherent = coherent.max(max_abs_diff(&u, &target));
        }
        Ok(finding(
            round_trip <= 1e-9 && coherent <= 1e-10,
            connect,
            COMMUTE_BOUND,
            110,
            format!("round trip {round_trip:.3e}; coherent superposition {coherent:.3e}"),
        ))
    }
}

struct IsometryRegularity;

impl PropertyCheck for IsometryRegularity {
    fn name(&self) -> &'static str {
        "isometry_regularity"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let m = rng.random_range(1..=5);
            let v = random_isometry(m, rng.random_range(m..=9), rng);
            let v2 = random_isometry(m, rng.random_range(m..=9), rng);
            let (dir, w) = extend_isometry(&v, &v2, t)?;
            let res = match dir {
                Direction::Forward => max_abs_diff(&(&w * &v), &v2),
                Direction::Backward => max_abs_diff(&(&w * &v2), &v),
            };
            worst = worst.max(res).max(isometry_residual(&w));
        }
        Ok(finding(
            true,
            worst,
            1e-9,
            100,
            "W V = V' or W V' = V with W isometric".into(),
        ))
    }
}

struct ConservationOfInformation;

impl PropertyCheck for ConservationOfInformation {
    fn name(&self) -> &'static str {
        "conservation_of_information"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut wrong = 0usize;
        let mut verdict = |ch: &Channel, logical: bool, physical: bool| {
            if is_logically_invertible(ch, t) != logical
                || is_physically_reversible(ch, t) != physical
            {
                wrong += 1;
            }
        };
        for _ in 0..50 {
            let d = rng.random_range(2..=4);
            verdict(&unitary(&random_unitary(d, rng), t)?, true, true);
            let target = random_state(d, rng, t)?;
            verdict(&erasure_to(&target, d)?, false, false);
            let rot = unitary(&random_unitary(d, rng), t)?;
            let rot_back = unitary(&rot.kraus()[0].adjoint(), t)?;
            verdict(&rot_back.compose(&dephase(d))?.compose(&rot)?, false, false);
            let parts: Vec<Channel> = (0..rng.random_range(2..=3))
                .map(|_| unitary(&random_unitary(d, rng), t))
                .collect::<Result<_>>()?;
            let w = random_probabilities(parts.len(), rng);
            let mix: Vec<(f64, &Channel)> = w.iter().copied().zip(&parts).collect();
            verdict(&Channel::mixture(&mix, t)?, true, false);
        }
        Ok(finding(
            wrong == 0,
            wrong as f64,
            0.0,
            200,
            format!("{wrong} misclassifications"),
        ))
    }
}

struct ChainCertificates;

impl PropertyCheck for ChainCertificates {
    fn name(&self) -> &'static str {
        "chain_certificates"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let search = cfg.chain_search();
        let mut worst: f64 = 0.0;
        let mut problems = 0;
        for d in [4, 6] {
            let alg = random_algebra(d, rng, t)?;
            let dec = block_decompose(&alg, rng.random(), t)?;
            let agent = Agent::Algebra {
                dim: d,
                generators: alg.generators().to_vec(),
            };
            let sub: SubsystemDescription = carve(&agent, rng.random(), &cfg.carve_options(), t)?;
            let d0 = d0_channel(&dec);
            for _ in 0..5 {
                let rho = random_state(d, rng, t)?;
                let rep = sub.embed(&sub.quotient(&rho, t)?, t)?;
                match states_equivalent_by_chain(&rho, &rep, std::slice::from_ref(&d0), &search, t)?
                {
                    Some(cert) if cert.len() <= 2 => worst = worst.max(cert.max_residual()?),
                    _ => problems += 1,
                }
                let other = random_state(d, rng, t)?;
                let differs = sub.quotient(&other, t)?.distance(&sub.quotient(&rho, t)?) > 1e-6;
                if differs
                    && states_equivalent_by_chain(
                        &rho,
                        &other,
                        std::slice::from_ref(&d0),
                        &search,
                        t,
                    )?
                    .is_some()
                {
                    problems += 1;
                }
            }
        }
        Ok(finding(
            problems == 0,
            worst,
            10.0 * t.eq_tol,
            10,
            format!("{problems} missing or spurious certificates"),
        ))
    }
}

struct RegularityChain;

impl PropertyCheck for RegularityChain {
    fn name(&self) -> &'static str {
        "regularity_chain"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut worst: f64 = 0.0;
        let mut problems = 0;
        for _ in 0..5 {
            let d = rng.random_range(2..=4);
            let thetas: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..TAU)).collect();
            let u = diagonal_unitary_matrix(&thetas);
            let psi = StateDM::pure(&random_state_vector(d, rng))?;
            for (power, words, len) in [(0, 1, 1), (1, 1, 2), (2, 1, 3)] {
                let mut m = psi.matrix().clone();
                for _ in 0..power {
                    m = &u * m * u.adjoint();
                }
                let target = StateDM::new(m, t)?;
                let search = ChainSearch {
                    max_len: cfg.max_chain,
                    max_words: words,
                    ..ChainSearch::default()
                };
                match check_regularity_chain(
                    &psi,
                    &target,
                    &[diagonal_unitary(&thetas)],
                    &search,
                    t,
                )? {
                    Some(w) if w.chain_length == len => {
                        worst = worst.max(w.residual).max(unitarity_residual(&w.unitary));
                    }
                    _ => problems += 1,
                }
            }
        }
        Ok(finding(
            problems == 0,
            worst,
            10.0 * t.eq_tol,
            15,
            format!("{problems} chains of unexpected length"),
        ))
    }
}

struct CarveConsistency;

impl PropertyCheck for CarveConsistency {
    fn name(&self) -> &'static str {
        "carve_consistency"
    }
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> Result<Finding> {
        let t = &cfg.tol;
        let mut agents = vec![
            Agent::Algebra {
                dim: 4,
                generators: vec![
                    kron(&pauli_x(), &identity(2)),
                    kron(&pauli_z(), &identity(2)),
                ],
            },
            Agent::Group {
                dim: 2,
                unitaries: vec![pauli_z()],
            },
        ];
        for name in subcarve::carver::monoid_names() {
            agents.push(Agent::named(name, 3)?);
        }
        let mut worst: f64 = 0.0;
        let mut failed = Vec::new();
        for agent in &agents {
            let sub = carve(agent, rng.random(), &cfg.carve_options(), t)?;
            for check in carve_checks(agent, &sub, rng.random(), t)? {
                worst = worst.max(check.residual);
                if !check.passed {
                    failed.push(format!("{}:{}", agent.kind(), check.name));
                }
            }
        }
        Ok(finding(
            failed.is_empty(),
            worst,
            10.0 * t.eq_tol,
            agents.len(),
            if failed.is_empty() {
                "all carved subsystems consistent".into()
            } else {
                failed.join(", ")
            },
        ))
    }
}
