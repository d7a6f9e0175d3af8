use rand::Rng as _;
use serde::Serialize;

use super::{Agent, StateSpace, SubsystemDescription};
use crate::channels::{Channel, StateDM};
use crate::error::Result;
use crate::numerics::random::{random_density, Rng, SeedSplitter};
use crate::numerics::{max_abs_diff, Tolerance};
use crate::star_algebra::{center, commutant, random_algebra_channel, StarAlgebra};

#[derive(Debug, Clone, Serialize)]
pub struct NoSignallingReport {
    pub samples: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

/// `quotient(ℬ(ρ)) = quotient(ρ)` over all sampled pairs, to `10·eq_tol`.
pub fn check_no_signalling(
    sub: &SubsystemDescription,
    adversary_samples: &[Channel],
    state_samples: &[StateDM],
    tol: &Tolerance,
) -> Result<NoSignallingReport> {
    let mut worst: f64 = 0.0;
    for rho in state_samples {
        let q = sub.quotient(rho, tol)?;
        for b in adversary_samples {
            worst = worst.max(sub.quotient(&b.apply(rho)?, tol)?.distance(&q));
        }
    }
    Ok(NoSignallingReport {
        samples: adversary_samples.len() * state_samples.len(),
        max_deviation: worst,
        passed: worst <= 10.0 * tol.eq_tol,
    })
}

/// True iff some sampled transformation sends every sampled state to one state.
pub fn check_causality(
    transf_samples: &[Channel],
    state_samples: &[StateDM],
    tol: &Tolerance,
) -> bool {
    if state_samples.len() <= 1 {
        return true;
    }
    transf_samples.iter().any(|t| {
        let Ok(first) = t.apply(&state_samples[0]) else {
            return false;
        };
        state_samples[1..].iter().all(|s| {
            t.apply(s)
                .map(|o| max_abs_diff(o.matrix(), first.matrix()) <= tol.eq_tol)
                .unwrap_or(false)
        })
    })
}

fn same_span(a: &StarAlgebra, b: &StarAlgebra, tol: &Tolerance) -> bool {
    a.dim() == b.dim()
        && a.span_dim() == b.span_dim()
        && a.basis().iter().all(|m| b.contains(m, tol))
}

/// `a′ = b` and `b′ = a`.
pub fn check_dual_pair(a: &StarAlgebra, b: &StarAlgebra, tol: &Tolerance) -> Result<bool> {
    Ok(same_span(&commutant(a, tol)?, b, tol) && same_span(&commutant(b, tol)?, a, tol))
}

/// Trivial center.
pub fn check_non_overlapping(a: &StarAlgebra, tol: &Tolerance) -> Result<bool> {
    Ok(center(a, tol)?.span_dim() == 1)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

const SAMPLES: usize = 6;

fn agent_sample(
    agent: &Agent,
    sub: &SubsystemDescription,
    rng: &mut Rng,
    tol: &Tolerance,
) -> Result<Channel> {
    match agent {
        Agent::Algebra { .. } => match &sub.state_space {
            StateSpace::BlockStates { decomposition, .. } => {
                Ok(random_algebra_channel(decomposition, 2, rng))
            }
            _ => unreachable!("algebra agents carve block states"),
        },
        Agent::Channels { channels, .. } => {
            let len = rng.random_range(1..=3);
            let mut w = channels[rng.random_range(0..channels.len())].clone();
            for _ in 1..len {
                w = channels[rng.random_range(0..channels.len())].compose(&w)?;
            }
            Ok(w)
        }
        Agent::Group { unitaries, .. } => {
            let u = &unitaries[rng.random_range(0..unitaries.len())];
            crate::channels::named::unitary(u, tol)
        }
        Agent::Named { monoid, dim } => monoid.sample(*dim, rng, tol),
    }
}

/// Sampled consistency checks of a carved subsystem, sorted by name.
pub fn carve_checks(
    agent: &Agent,
    sub: &SubsystemDescription,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<CheckOutcome>> {
    let split = SeedSplitter::new(seed);
    let mut rng = split.child("carve-checks");
    let d = sub.source_dim;
    let states: Vec<StateDM> = (0..SAMPLES)
        .map(|i| StateDM::new(random_density(d, 1 + i % d, &mut rng), tol))
        .collect::<Result<_>>()?;
    let adversary: Vec<Channel> = (0..SAMPLES)
        .map(|_| sub.adversary.sample(&mut rng, tol))
        .collect::<Result<_>>()?;
    let actions: Vec<Channel> = (0..SAMPLES)
        .map(|_| agent_sample(agent, sub, &mut rng, tol))
        .collect::<Result<_>>()?;
    let bound = 10.0 * tol.eq_tol;
    let mut out = Vec::new();

    let ns = check_no_signalling(sub, &adversary, &states, tol)?;
    out.push(CheckOutcome {
        name: "no_signalling".into(),
        passed: ns.passed,
        residual: ns.max_deviation,
    });

    let mut idem: f64 = 0.0;
    for rho in &states {
        let q = sub.quotient(rho, tol)?;
        idem = idem.max(sub.quotient(&sub.embed(&q, tol)?, tol)?.distance(&q));
    }
    out.push(CheckOutcome {
        name: "quotient_section".into(),
        passed: idem <= bound,
        residual: idem,
    });

    // Agent action is independent of the class representative.
    let mut well: f64 = 0.0;
    for ((rho, b), t) in states.iter().zip(&adversary).zip(&actions) {
        let lhs = sub.quotient(&t.apply(&b.apply(rho)?)?, tol)?;
        let rhs = sub.quotient(&t.apply(rho)?, tol)?;
        well = well.max(lhs.distance(&rhs));
    }
    out.push(CheckOutcome {
        name: "well_posed_action".into(),
        passed: well <= bound,
        residual: well,
    });

    let mut hom: f64 = 0.0;
    for pair in actions.windows(2) {
        let lhs = sub.restrict(&pair[0].compose(&pair[1])?, tol)?;
        let rhs = sub
            .restrict(&pair[0], tol)?
            .compose(&sub.restrict(&pair[1], tol)?)?;
        hom = hom.max(lhs.distance(&rhs));
    }
    out.push(CheckOutcome {
        name: "restriction_homomorphism".into(),
        passed: hom <= bound,
        residual: hom,
    });

    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{carve, CarveOptions};
    use super::*;
    use crate::channels::named::{erasure_to, identity_channel, unitary};
    use crate::numerics::random::random_unitary;
    use crate::numerics::{diag_real, identity, kron, pauli_x, pauli_z};
    use crate::star_algebra::generate_algebra;
    use rand::SeedableRng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn dual_pair_examples() {
        let t = tol();
        let a = generate_algebra(
            4,
            &[
                kron(&pauli_x(), &identity(2)),
                kron(&pauli_z(), &identity(2)),
            ],
            &t,
        )
        .unwrap();
        let b = generate_algebra(
            4,
            &[
                kron(&identity(2), &pauli_x()),
                kron(&identity(2), &pauli_z()),
            ],
            &t,
        )
        .unwrap();
        assert!(check_dual_pair(&a, &b, &t).unwrap());
        assert!(check_non_overlapping(&a, &t).unwrap());
        let dg = StarAlgebra::diagonals(3);
        assert!(check_dual_pair(&dg, &dg, &t).unwrap());
        assert!(!check_non_overlapping(&dg, &t).unwrap());
        let scalars = generate_algebra(3, &[identity(3)], &t).unwrap();
        assert!(check_dual_pair(&scalars, &StarAlgebra::full(3), &t).unwrap());
        assert!(check_non_overlapping(&scalars, &t).unwrap());
        assert!(!check_dual_pair(&a, &a, &t).unwrap());
    }

    #[test]
    fn causality_examples() {
        let t = tol();
        let mut g = Rng::seed_from_u64(100);
        let states: Vec<StateDM> = (0..4)
            .map(|_| StateDM::new(random_density(3, 3, &mut g), &t).unwrap())
            .collect();
        let erase = erasure_to(&StateDM::basis(3, 1), 3).unwrap();
        assert!(check_causality(&[identity_channel(3), erase], &states, &t));
        let a = StateDM::new(diag_real(&[0.7, 0.2, 0.1]), &t).unwrap();
        let b = StateDM::new(diag_real(&[0.4, 0.3, 0.3]), &t).unwrap();
        let us: Vec<Channel> = (0..5)
            .map(|_| unitary(&random_unitary(3, &mut g), &t).unwrap())
            .collect();
        assert!(!check_causality(&us, &[a.clone(), b], &t));
        assert!(check_causality(&us, &[a], &t));
    }

    #[test]
    fn carve_checks_pass_for_every_supported_kind() {
        let t = tol();
        let o = CarveOptions::default();
        let agents = vec![
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
            Agent::named("multiphase_covariant", 3).unwrap(),
            Agent::named("phase_covariant", 3).unwrap(),
            Agent::named("incoherent", 2).unwrap(),
            Agent::named("basis_preserving", 2).unwrap(),
        ];
        for agent in &agents {
            let sub = carve(agent, 7, &o, &t).unwrap();
            for c in carve_checks(agent, &sub, 7, &t).unwrap() {
                assert!(c.passed, "{} / {}: {}", agent.kind(), c.name, c.residual);
            }
        }
    }
}
