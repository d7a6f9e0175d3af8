use rand::Rng as _;

use super::{Adversary, StateSpace};
use crate::channels::named::{classical_from_stochastic, permutation_unitary};
use crate::channels::Channel;
use crate::coherence::{
    c_psi, is_basis_preserving, is_classical, is_dephasing_covariant, is_incoherent_kraus,
    is_maximally_incoherent, is_multiphase_covariant, is_phase_covariant, is_strictly_incoherent,
    random_incoherent, random_phase_covariant, random_strictly_incoherent, sample_basis_preserving,
    sample_multiphase_covariant,
};
use crate::error::Result;
use crate::numerics::random::{
    random_kraus, random_permutation, random_state_vector, random_stochastic, Rng,
};
use crate::numerics::Tolerance;

/// A monoid of channels selected by name.
pub trait NamedMonoid: Send + Sync {
    fn name(&self) -> &'static str;
    /// Membership test for a single channel.
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool;
    /// Random element of the monoid.
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel>;
    fn state_space(&self, d: usize) -> StateSpace;
    fn adversary(&self, d: usize) -> Adversary;
}

struct MultiphaseCovariant;
struct DephasingCovariant;
struct StrictlyIncoherent;
struct PhaseCovariant;
struct Classical;
struct BasisPreserving;
struct Incoherent;
struct MaximallyIncoherent;
struct FullMonoid;

fn classical_space(d: usize) -> StateSpace {
    StateSpace::DiagonalProbabilities { dim: d }
}

impl NamedMonoid for MultiphaseCovariant {
    fn name(&self) -> &'static str {
        "multiphase_covariant"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_multiphase_covariant(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        sample_multiphase_covariant(d, rng, tol)
    }
    fn state_space(&self, d: usize) -> StateSpace {
        classical_space(d)
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::BasisPreserving(d)
    }
}

impl NamedMonoid for DephasingCovariant {
    fn name(&self) -> &'static str {
        "dephasing_covariant"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_dephasing_covariant(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        let m = sample_multiphase_covariant(d, rng, tol)?;
        permutation_unitary(&random_permutation(d, rng))?.compose(&m)
    }
    fn state_space(&self, d: usize) -> StateSpace {
        classical_space(d)
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::UniformSchur(d)
    }
}

impl NamedMonoid for StrictlyIncoherent {
    fn name(&self) -> &'static str {
        "strictly_incoherent"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_strictly_incoherent(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        random_strictly_incoherent(d, rng, tol)
    }
    fn state_space(&self, d: usize) -> StateSpace {
        classical_space(d)
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::UniformSchur(d)
    }
}

impl NamedMonoid for PhaseCovariant {
    fn name(&self) -> &'static str {
        "phase_covariant"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_phase_covariant(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        random_phase_covariant(d, rng, tol)
    }
    fn state_space(&self, d: usize) -> StateSpace {
        classical_space(d)
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::UniformSchur(d)
    }
}

impl NamedMonoid for Classical {
    fn name(&self) -> &'static str {
        "classical"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_classical(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        classical_from_stochastic(&random_stochastic(d, rng), tol)
    }
    fn state_space(&self, d: usize) -> StateSpace {
        classical_space(d)
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::UniformSchur(d)
    }
}

impl NamedMonoid for BasisPreserving {
    fn name(&self) -> &'static str {
        "basis_preserving"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_basis_preserving(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        sample_basis_preserving(d, rng, tol)
    }
    // The multiphase-covariant adversary contains every erasure to a basis state.
    fn state_space(&self, _d: usize) -> StateSpace {
        StateSpace::Trivial
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::MultiphaseCovariant(d)
    }
}

impl NamedMonoid for Incoherent {
    fn name(&self) -> &'static str {
        "incoherent"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_incoherent_kraus(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        if d >= 2 && rng.random_bool(0.3) {
            c_psi(&random_state_vector(d, rng), tol)
        } else {
            random_incoherent(d, rng, tol)
        }
    }
    fn state_space(&self, d: usize) -> StateSpace {
        StateSpace::Full { dim: d }
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::Identity(d)
    }
}

impl NamedMonoid for MaximallyIncoherent {
    fn name(&self) -> &'static str {
        "maximally_incoherent"
    }
    fn contains(&self, t: &Channel, tol: &Tolerance) -> bool {
        is_maximally_incoherent(t, tol)
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        let a = random_incoherent(d, rng, tol)?;
        if d < 2 {
            return Ok(a);
        }
        let b = c_psi(&random_state_vector(d, rng), tol)?;
        let p: f64 = rng.random();
        Channel::mixture(&[(p, &a), (1.0 - p, &b)], tol)
    }
    fn state_space(&self, d: usize) -> StateSpace {
        StateSpace::Full { dim: d }
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::Identity(d)
    }
}

impl NamedMonoid for FullMonoid {
    fn name(&self) -> &'static str {
        "full"
    }
    fn contains(&self, t: &Channel, _tol: &Tolerance) -> bool {
        t.is_square()
    }
    fn sample(&self, d: usize, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        let r = rng.random_range(1..=(d * d).min(4));
        Channel::from_kraus(random_kraus(d, d, r, rng), tol)
    }
    fn state_space(&self, d: usize) -> StateSpace {
        StateSpace::Full { dim: d }
    }
    fn adversary(&self, d: usize) -> Adversary {
        Adversary::Identity(d)
    }
}

static REGISTRY: &[&dyn NamedMonoid] = &[
    &MultiphaseCovariant,
    &BasisPreserving,
    &DephasingCovariant,
    &StrictlyIncoherent,
    &PhaseCovariant,
    &Classical,
    &Incoherent,
    &MaximallyIncoherent,
    &FullMonoid,
];

pub fn monoid_registry() -> &'static [&'static dyn NamedMonoid] {
    REGISTRY
}

pub fn find_monoid(name: &str) -> Option<&'static dyn NamedMonoid> {
    REGISTRY.iter().copied().find(|m| m.name() == name)
}

pub fn monoid_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|m| m.name()).collect()
}
