//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines always reach the test log.

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng as _;
use subcarve::carver::{carve, Agent, CanonicalState, CarveOptions, ReducedTransformation};
use subcarve::channels::named::{
    dephase, diagonal_unitary_matrix, erasure_to, identity_channel, unitary,
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
    random_probabilities, random_state_vector, random_unitary, Rng, SeedSplitter,
};
use subcarve::numerics::{
    c, diag, identity, isometry_residual, kron, max_abs_diff, pauli_x, pauli_z, span_residual,
    unitarity_residual, CMatrix, Tolerance,
};
use subcarve::purification::{
    connect_purifications, extend_isometry, purify, BlockReduced, Direction,
};
use subcarve::star_algebra::{
    block_decompose, commutant, double_commutant_check, generate_algebra,
    partial_trace_over_commutant, random_algebra_channel, random_commutant_channel,
    BlockDecomposition, StarAlgebra,
};
use subcarve::Result;

type Complex = subcarve::numerics::Complex64;

/// Generated algebra with the block structure it was drawn from.
type DrawnAlgebra = (StarAlgebra, Vec<(usize, usize)>);

type Criterion = (&'static str, fn() -> Result<Verdict>, Option<u64>);

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn rng(label: &str) -> Rng {
    SeedSplitter::new(SEED).child(label)
}

fn random_channel(d: usize, rng: &mut Rng, t: &Tolerance) -> Result<Channel> {
    let k = rng.random_range(1..=(d * d).min(4));
    Channel::from_kraus(random_kraus(d, d, k, rng), t)
}

fn random_state(d: usize, rng: &mut Rng, t: &Tolerance) -> Result<StateDM> {
    let rank = rng.random_range(1..=d);
    StateDM::new(random_density(d, rank, rng), t)
}

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

fn random_algebra(d: usize, rng: &mut Rng, t: &Tolerance) -> Result<DrawnAlgebra> {
    let blocks = random_blocks(d, rng);
    let model = StarAlgebra::from_block_structure(&blocks, &random_unitary(d, rng))?;
    let gens = [model.random_element(rng), model.random_element(rng)];
    Ok((generate_algebra(d, &gens, t)?, blocks))
}

fn algebras(t: &Tolerance) -> Result<Vec<DrawnAlgebra>> {
    let mut g = rng("algebras");
    [3, 4, 6]
        .iter()
        .cycle()
        .take(20)
        .map(|&d| random_algebra(d, &mut g, t))
        .collect()
}

fn criterion_1() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c1");
    let id2 = identity_channel(2);
    let locals: Vec<Channel> = (0..20)
        .map(|_| Ok(random_channel(2, &mut g, &t)?.tensor(&id2)))
        .collect::<Result<_>>()?;
    let basis = superop_commutant_basis(&locals, &t)?;
    // Only multiples of the identity commute with every qubit channel, so the
    // commutant is ℐ ⊗ End(M₂).
    let dim_ok = basis.ncols() == 16;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let b = id2.tensor(&random_channel(2, &mut g, &t)?);
        let (span, tp) = commutant_residuals(&basis, &b);
        worst = worst.max(span).max(tp);
        for a in &locals {
            worst = worst.max(commutator_norm(a, &b));
        }
    }
    let mut closest = f64::INFINITY;
    for _ in 0..20 {
        closest = closest.min(commutant_residuals(&basis, &random_channel(4, &mut g, &t)?).0);
    }
    verdict(
        dim_ok && worst <= 1e-8 && closest > 1e-4,
        format!(
            "commutant dim {}; commutator {worst:.1e}; nearest non-local {closest:.1e}",
            basis.ncols()
        ),
    )
}

fn criterion_2() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c2");
    let mut worst: f64 = 0.0;
    for (alg, _) in algebras(&t)? {
        let dec = block_decompose(&alg, g.random(), &t)?;
        let on_a: Vec<Channel> = (0..3)
            .map(|_| random_algebra_channel(&dec, 2, &mut g))
            .collect();
        let on_b: Vec<Channel> = (0..3)
            .map(|_| random_commutant_channel(&dec, 2, &mut g))
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
    verdict(
        worst <= 1e-8,
        format!("20 algebras; worst residual {worst:.1e}"),
    )
}

fn criterion_3() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c3");
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for (alg, mut drawn) in algebras(&t)? {
        let dec = block_decompose(&alg, g.random(), &t)?;
        for x in alg.basis() {
            worst = worst.max(dec.algebra_parts(x).1);
        }
        let mut found = dec.blocks.clone();
        found.sort();
        drawn.sort();
        let sum_a: usize = found.iter().map(|(a, _)| a * a).sum();
        let sum_b: usize = found.iter().map(|(_, b)| b * b).sum();
        if found != drawn
            || sum_a != alg.span_dim()
            || sum_b != commutant(&alg, &t)?.span_dim()
            || !double_commutant_check(&alg, &t)?
        {
            bad += 1;
        }
    }
    verdict(
        bad == 0 && worst <= 1e-7,
        format!("{bad} mismatches; block residual {worst:.1e}"),
    )
}

fn criterion_4() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c4");
    let (alg, _) = random_algebra(4, &mut g, &t)?;
    let agents = [
        Agent::Algebra {
            dim: 4,
            generators: vec![
                kron(&pauli_x(), &identity(2)),
                kron(&pauli_z(), &identity(2)),
            ],
        },
        Agent::Algebra {
            dim: 4,
            generators: alg.generators().to_vec(),
        },
        Agent::named("multiphase_covariant", 3)?,
        Agent::named("basis_preserving", 3)?,
    ];
    let mut worst: f64 = 0.0;
    for agent in &agents {
        let sub = carve(agent, g.random(), &CarveOptions::default(), &t)?;
        let adversary: Vec<Channel> = (0..50)
            .map(|_| sub.adversary.sample(&mut g, &t))
            .collect::<Result<_>>()?;
        for _ in 0..20 {
            let rho = random_state(agent.dim(), &mut g, &t)?;
            let q = sub.quotient(&rho, &t)?;
            for b in &adversary {
                worst = worst.max(sub.quotient(&b.apply(&rho)?, &t)?.distance(&q));
            }
        }
    }
    verdict(
        worst <= 1e-8,
        format!("4 families x 50 x 20; deviation {worst:.1e}"),
    )
}

fn criterion_5() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c5");
    let mut worst: f64 = 0.0;
    let mut weakest = f64::INFINITY;
    for d in 2..=4 {
        for _ in 0..100 {
            let a = sample_multiphase_covariant(d, &mut g, &t)?;
            let b = sample_basis_preserving(d, &mut g, &t)?;
            worst = worst.max(commutator_norm(&a, &b));
        }
        let mut found = 0;
        while found < 20 {
            let ch = random_channel(d, &mut g, &t)?;
            if multiphase_pattern_residual(&ch) > 1e-6 {
                found += 1;
                weakest = weakest.min(basis_preserving_witness(&ch).1);
            }
        }
    }
    verdict(
        worst <= 1e-8 && weakest >= 1e-4,
        format!("commutator {worst:.1e}; weakest witness {weakest:.1e}"),
    )
}

fn stochastic_defect(p: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..p.ncols() {
        let col = p.column(j);
        let sum: f64 = col.iter().map(|z| z.re).sum();
        worst = worst.max((sum - 1.0).abs());
        for z in col.iter() {
            worst = worst.max(z.im.abs()).max(-z.re);
        }
    }
    worst
}

fn criterion_6() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c6");
    let mut wrong = Vec::new();
    let mut worst: f64 = 0.0;
    for name in [
        "strictly_incoherent",
        "dephasing_covariant",
        "phase_covariant",
        "multiphase_covariant",
        "classical",
    ] {
        for d in 2..=4 {
            let agent = Agent::named(name, d)?;
            let sub = carve(&agent, g.random(), &CarveOptions::default(), &t)?;
            if sub.state_space.tag() != "diagonal_probabilities" {
                wrong.push(format!("{name}({d})"));
            }
            let Agent::Named { monoid, .. } = &agent else {
                unreachable!()
            };
            for _ in 0..10 {
                worst = worst.max(stochastic_defect(&classical_quotient_channel(
                    &monoid.sample(d, &mut g, &t)?,
                )?));
            }
        }
    }
    for name in ["incoherent", "maximally_incoherent"] {
        for d in 2..=4 {
            let sub = carve(
                &Agent::named(name, d)?,
                g.random(),
                &CarveOptions::default(),
                &t,
            )?;
            let family: Vec<Channel> = (0..10)
                .map(|_| c_psi(&random_state_vector(d, &mut g), &t))
                .collect::<Result<_>>()?;
            if sub.state_space.tag() != "full" || schur_commutant_dim(&family, &t)? != 1 {
                wrong.push(format!("{name}({d})"));
            }
        }
    }
    let carved = if wrong.is_empty() {
        "all monoids carve as expected".to_string()
    } else {
        format!("unexpected {}", wrong.join(", "))
    };
    verdict(
        wrong.is_empty() && worst <= 1e-10,
        format!("{carved}; stochastic defect {worst:.1e}"),
    )
}

fn criterion_7() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c7");
    let z = pauli_z();
    let rep = close_group(2, std::slice::from_ref(&z), 512, &t)?;
    let iso = isotypic_decompose(&rep, g.random(), &t)?;
    let adv = adversarial_group(&iso, g.random(), &t)?;
    let mut ok = rep.order() == 2
        && iso.blocks.len() == 2
        && iso.blocks.iter().all(|b| b.dim == 1 && b.mult == 1)
        && adv.commutant_basis.len() == 2
        && adv.permutations.len() == 2;
    let mut worst: f64 = 0.0;
    for x in &adv.commutant_basis {
        worst = worst.max(x[(0, 1)].norm()).max(x[(1, 0)].norm());
    }
    let zi = rep
        .elements()
        .iter()
        .position(|e| max_abs_diff(e, &z) < 1e-12)
        .expect("Z is an element");
    for p in &adv.permutations {
        let want = if p.perm == [1, 0] { -1.0 } else { 1.0 };
        worst = worst.max((p.omega[zi] - c(want, 0.0)).norm());
    }
    let sub = carve(
        &Agent::Group {
            dim: 2,
            unitaries: vec![z.clone()],
        },
        g.random(),
        &CarveOptions::default(),
        &t,
    )?;
    for _ in 0..20 {
        let p: f64 = g.random();
        let th: f64 = g.random_range(0.0..TAU);
        let q = (1.0 - p).sqrt();
        let psi =
            CMatrix::from_column_slice(2, 1, &[c(p.sqrt(), 0.0), c(q * th.cos(), q * th.sin())]);
        match sub.quotient(&StateDM::pure(&psi)?, &t)? {
            CanonicalState::SpectraUnordered { mut weights } => {
                weights.sort_by(f64::total_cmp);
                worst = worst
                    .max((weights[0] - p.min(1.0 - p)).abs())
                    .max((weights[1] - p.max(1.0 - p)).abs());
            }
            _ => ok = false,
        }
    }
    for u in [identity(2), z] {
        ok &= matches!(
            sub.restrict(&unitary(&u, &t)?, &t)?,
            ReducedTransformation::Identity
        );
    }
    verdict(
        ok && worst <= 1e-10,
        format!(
            "structure {}; residual {worst:.1e}",
            if ok { "matches" } else { "differs" }
        ),
    )
}

fn random_group(g: &mut Rng, t: &Tolerance) -> Result<FiniteGroupRep> {
    loop {
        let d = g.random_range(2..=4);
        let v = random_unitary(d, g);
        let gens: Vec<CMatrix> = (0..g.random_range(1..=2))
            .map(|_| {
                let n = g.random_range(1..=4);
                let phases: Vec<f64> = (0..d)
                    .map(|_| TAU * g.random_range(0..n) as f64 / n as f64)
                    .collect();
                &v * permutation_matrix(&random_permutation(d, g))
                    * diagonal_unitary_matrix(&phases)
                    * v.adjoint()
            })
            .collect();
        match close_group(d, &gens, 48, t) {
            Err(subcarve::Error::ResourceExceeded(_)) => continue,
            other => return other,
        }
    }
}

fn criterion_8() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c8");
    let mut worst: f64 = 0.0;
    let mut abelian = true;
    let mut orders = Vec::new();
    for _ in 0..10 {
        let rep = random_group(&mut g, &t)?;
        orders.push(rep.order());
        let iso = isotypic_decompose(&rep, g.random(), &t)?;
        let adv = adversarial_group(&iso, g.random(), &t)?;
        abelian &= adv.permutations_commute();
        let group: Vec<Channel> = rep
            .elements()
            .iter()
            .map(|u| unitary(u, &t))
            .collect::<Result<_>>()?;
        let mut elements: Vec<CMatrix> =
            adv.permutations.iter().map(|p| p.unitary.clone()).collect();
        elements.extend((0..5).map(|_| adv.sample(&mut g)));
        for v in &elements {
            let cv = unitary(v, &t)?;
            for u in &group {
                worst = worst.max(commutator_norm(&cv, u));
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
    verdict(
        abelian && worst <= 1e-8,
        format!("orders {orders:?}; residual {worst:.1e}"),
    )
}

fn criterion_9() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c9");
    let (mut round_trip, mut connect): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let blocks: Vec<(usize, usize)> = (0..g.random_range(1..=3))
            .map(|_| (g.random_range(1..=3), g.random_range(1..=3)))
            .collect();
        let dec = BlockDecomposition::standard(&blocks)?;
        let p = random_probabilities(blocks.len(), &mut g);
        let reduced: Vec<BlockReduced> = blocks
            .iter()
            .zip(&p)
            .map(|(&(dr, dm), &p)| {
                let rank = g.random_range(1..=dr.min(dm));
                BlockReduced {
                    p,
                    rho: random_density(dr, rank, &mut g),
                }
            })
            .collect();
        let psi = purify(&dec, &reduced, &t)?.global_pure;
        for (m, r) in partial_trace_over_commutant(&dec, &StateDM::pure(&psi)?, &t)?
            .iter()
            .zip(&reduced)
        {
            round_trip = round_trip.max(max_abs_diff(
                &m.state.matrix().scale(m.weight),
                &r.rho.scale(r.p),
            ));
        }
        // A second purification in an independently rotated multiplicity basis.
        let parts: Vec<CMatrix> = blocks
            .iter()
            .map(|&(_, m)| random_unitary(m, &mut g))
            .collect();
        let psi2 = dec.embed_commutant(&parts)? * &psi;
        let u = connect_purifications(&dec, &psi, &psi2, &t)?
            .connecting_unitary
            .expect("unitary");
        connect = connect
            .max((&u * &psi - &psi2).norm())
            .max(dec.commutant_parts(&u).1)
            .max(unitarity_residual(&u));
    }
    let mut coherent: f64 = 0.0;
    for d in 2..=4 {
        let dec = BlockDecomposition::standard(&vec![(1, 1); d])?;
        let psi = CMatrix::from_iterator(
            d,
            1,
            random_probabilities(d, &mut g)
                .iter()
                .map(|p| c(p.sqrt(), 0.0)),
        );
        let phases: Vec<Complex> = (0..d)
            .map(|_| {
                let th: f64 = g.random_range(0.0..TAU);
                c(th.cos(), th.sin())
            })
            .collect();
        let target = diag(&phases);
        let u = connect_purifications(&dec, &psi, &(&target * &psi), &t)?
            .connecting_unitary
            .expect("unitary");
        coherent = coherent.max(max_abs_diff(&u, &target));
    }
    verdict(
        round_trip <= 1e-9 && connect <= 1e-8 && coherent <= 1e-10,
        format!("round trip {round_trip:.1e}; connection {connect:.1e}; coherent {coherent:.1e}"),
    )
}

fn criterion_10() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c10");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = g.random_range(1..=5);
        let v = random_isometry(m, g.random_range(m..=9), &mut g);
        let v2 = random_isometry(m, g.random_range(m..=9), &mut g);
        let (dir, w) = extend_isometry(&v, &v2, &t)?;
        let res = match dir {
            Direction::Forward => max_abs_diff(&(&w * &v), &v2),
            Direction::Backward => max_abs_diff(&(&w * &v2), &v),
        };
        worst = worst.max(res).max(isometry_residual(&w));
    }
    verdict(worst <= 1e-9, format!("100 pairs; residual {worst:.1e}"))
}

fn criterion_11() -> Result<Verdict> {
    let t = tol();
    let mut g = rng("c11");
    let mut wrong = 0;
    let mut check = |ch: &Channel, logical: bool, physical: bool| {
        wrong += usize::from(
            is_logically_invertible(ch, &t) != logical
                || is_physically_reversible(ch, &t) != physical,
        );
    };
    for _ in 0..50 {
        let d = g.random_range(2..=4);
        check(&unitary(&random_unitary(d, &mut g), &t)?, true, true);
        check(&erasure_to(&random_state(d, &mut g, &t)?, d)?, false, false);
        check(&dephase(d), false, false);
        let parts: Vec<Channel> = (0..3)
            .map(|_| unitary(&random_unitary(d, &mut g), &t))
            .collect::<Result<_>>()?;
        let w = random_probabilities(3, &mut g);
        let mix: Vec<(f64, &Channel)> = w.iter().copied().zip(&parts).collect();
        check(&Channel::mixture(&mix, &t)?, true, false);
    }
    verdict(
        wrong == 0,
        format!("{wrong} misclassifications over 200 channels"),
    )
}

fn criterion_12() -> Result<Verdict> {
    let run = || {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_subcarve"))
            .args(["verify", "--seed", "42"])
            .output()
            .expect("binary runs");
        (out, start.elapsed())
    };
    let (first, t1) = run();
    let (second, t2) = run();
    let slowest = t1.max(t2);
    let identical = first.stdout == second.stdout && !first.stdout.is_empty();
    let passed = identical && first.status.success() && slowest < Duration::from_secs(300);
    verdict(
        passed,
        format!(
            "byte-identical {identical}; exit {:?}; slowest run {:.1}s",
            first.status.code(),
            slowest.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("local-channel commutant", criterion_1, Some(10)),
        ("algebra duality", criterion_2, Some(60)),
        ("Wedderburn invariants", criterion_3, None),
        ("no-signalling", criterion_4, None),
        ("multiphase/basis-preserving duality", criterion_5, None),
        ("classical subsystem", criterion_6, None),
        ("phase-flip golden case", criterion_7, None),
        ("adversarial group structure", criterion_8, Some(120)),
        ("purification", criterion_9, None),
        ("isometry regularity", criterion_10, None),
        ("conservation of information", criterion_11, None),
        ("CLI determinism", criterion_12, None),
    ];
    let mut failures = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l as f64);
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed && in_time, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!(
            "{} criterion {:>2} {name}: {detail} ({secs:.2}s)",
            if passed { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
