//! Subsystems carved out of a system by an agent: the maximal adversary, the
//! quotient of states by degradation equivalence, and the induced action of
//! the agent's transformations on the quotient.

mod chain;
mod checks;
mod monoids;

pub use chain::{states_equivalent_by_chain, ChainCertificate, ChainSearch};
pub use checks::{
    carve_checks, check_causality, check_dual_pair, check_no_signalling, check_non_overlapping,
    CheckOutcome, NoSignallingReport,
};
pub use monoids::{find_monoid, monoid_names, monoid_registry, NamedMonoid};

use rand::Rng as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::channels::named::identity_channel;
use crate::channels::ChannelJson;
use crate::channels::{Channel, StateDM};
use crate::coherence::{
    classical_quotient_channel, classify_monoid, is_dephasing_covariant, sample_basis_preserving,
    sample_multiphase_covariant, uniform_schur, ClassicalVerdict, CoherenceClassReport,
};
use crate::error::{Error, Result};
use crate::group_rep::{
    adversarial_group, close_group, isotypic_decompose, AdversarialGroupStructure,
};
use crate::numerics::random::{random_kraus, Rng, SeedSplitter};
use crate::numerics::{
    diag_real, identity, kron, max_abs_diff, serialize_matrix, unitarity_residual, zeros, CMatrix,
    MatrixJson, Tolerance,
};
use crate::star_algebra::{
    block_decompose, d0_channel, generate_algebra, partial_trace_over_commutant,
    random_commutant_channel, restrict_homomorphism, BlockDecomposition,
};

/// Wire form of an agent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSpec {
    #[serde(alias = "dimension")]
    pub dim: usize,
    #[serde(flatten)]
    pub payload: AgentPayload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentPayload {
    AlgebraGenerators {
        matrices: Vec<MatrixJson>,
    },
    ChannelGenerators {
        channels: Vec<ChannelJson>,
        /// The caller guarantees every classical channel is an agent operation.
        #[serde(default)]
        contains_classical: bool,
    },
    GroupRep {
        unitaries: Vec<MatrixJson>,
    },
    NamedMonoid {
        name: String,
    },
}

/// Validated agent.
#[derive(Clone)]
pub enum Agent {
    Algebra {
        dim: usize,
        generators: Vec<CMatrix>,
    },
    Channels {
        dim: usize,
        channels: Vec<Channel>,
        contains_classical: bool,
    },
    Group {
        dim: usize,
        unitaries: Vec<CMatrix>,
    },
    Named {
        dim: usize,
        monoid: &'static dyn NamedMonoid,
    },
}

impl std::fmt::Debug for Agent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Agent::{}(dim = {})", self.kind(), self.dim())
    }
}

impl Agent {
    pub fn dim(&self) -> usize {
        match self {
            Agent::Algebra { dim, .. }
            | Agent::Channels { dim, .. }
            | Agent::Group { dim, .. }
            | Agent::Named { dim, .. } => *dim,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Agent::Algebra { .. } => "algebra_generators",
            Agent::Channels { .. } => "channel_generators",
            Agent::Group { .. } => "group_rep",
            Agent::Named { .. } => "named_monoid",
        }
    }

    pub fn named(name: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "agent dimension must be positive".into(),
            ));
        }
        let monoid = find_monoid(name).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown monoid '{name}'; expected one of {}",
                monoid_names().join(", ")
            ))
        })?;
        Ok(Agent::Named { dim, monoid })
    }
}

impl AgentSpec {
    pub fn resolve(&self, tol: &Tolerance) -> Result<Agent> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::InvalidInput(
                "agent dimension must be positive".into(),
            ));
        }
        let square = |m: &MatrixJson, what: &str| -> Result<CMatrix> {
            let m = m.to_matrix()?;
            if m.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "{what} of shape {:?} for dimension {d}",
                    m.shape()
                )));
            }
            Ok(m)
        };
        match &self.payload {
            AgentPayload::AlgebraGenerators { matrices } => Ok(Agent::Algebra {
                dim: d,
                generators: matrices
                    .iter()
                    .map(|m| square(m, "generator"))
                    .collect::<Result<_>>()?,
            }),
            AgentPayload::ChannelGenerators {
                channels,
                contains_classical,
            } => {
                if channels.is_empty() {
                    return Err(Error::InvalidInput("no channel generators".into()));
                }
                let channels: Vec<Channel> = channels
                    .iter()
                    .map(|c| c.to_channel(tol))
                    .collect::<Result<_>>()?;
                if let Some(c) = channels
                    .iter()
                    .find(|c| c.dim_in() != d || c.dim_out() != d)
                {
                    return Err(Error::DimensionMismatch(format!(
                        "channel {}→{} for dimension {d}",
                        c.dim_in(),
                        c.dim_out()
                    )));
                }
                Ok(Agent::Channels {
                    dim: d,
                    channels,
                    contains_classical: *contains_classical,
                })
            }
            AgentPayload::GroupRep { unitaries } => {
                let unitaries: Vec<CMatrix> = unitaries
                    .iter()
                    .map(|m| square(m, "unitary"))
                    .collect::<Result<_>>()?;
                for u in &unitaries {
                    let res = unitarity_residual(u);
                    if res > tol.eq_tol {
                        return Err(Error::NotUnitary(res));
                    }
                }
                Ok(Agent::Group { dim: d, unitaries })
            }
            AgentPayload::NamedMonoid { name } => Agent::named(name, d),
        }
    }
}

/// Parametrization of the quotient state space.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpace {
    BlockStates {
        blocks: Vec<(usize, usize)>,
        #[serde(skip)]
        decomposition: BlockDecomposition,
    },
    DiagonalProbabilities {
        dim: usize,
    },
    /// Block weights up to the listed permutations of blocks.
    SpectraUnordered {
        dim: usize,
        permutations: Vec<Vec<usize>>,
        #[serde(skip)]
        projectors: Vec<CMatrix>,
    },
    Full {
        dim: usize,
    },
    Trivial,
}

impl StateSpace {
    pub fn tag(&self) -> &'static str {
        match self {
            StateSpace::BlockStates { .. } => "block_states",
            StateSpace::DiagonalProbabilities { .. } => "diagonal_probabilities",
            StateSpace::SpectraUnordered { .. } => "spectra_unordered",
            StateSpace::Full { .. } => "full",
            StateSpace::Trivial => "trivial",
        }
    }
}

/// A maximal adversary, or a sampleable subfamily of it.
#[derive(Debug, Clone)]
pub enum Adversary {
    /// Only the identity channel.
    Identity(usize),
    /// Every channel.
    AllChannels(usize),
    /// Channels with Kraus operators in the commutant algebra.
    Commutant(BlockDecomposition),
    /// `c ℐ + (1 − c) 𝒟` for `c ∈ [−1/(d−1), 1]`.
    UniformSchur(usize),
    BasisPreserving(usize),
    MultiphaseCovariant(usize),
    /// Unitary channels of the adversarial group `𝒜 ⋉ U′`.
    Unitaries(Box<AdversarialGroupStructure>),
}

impl Adversary {
    pub fn kind(&self) -> &'static str {
        match self {
            Adversary::Identity(_) => "identity",
            Adversary::AllChannels(_) => "all_channels",
            Adversary::Commutant(_) => "commutant_channels",
            Adversary::UniformSchur(_) => "uniform_schur",
            Adversary::BasisPreserving(_) => "basis_preserving",
            Adversary::MultiphaseCovariant(_) => "multiphase_covariant",
            Adversary::Unitaries(_) => "adversarial_group",
        }
    }

    pub fn description(&self) -> String {
        match self {
            Adversary::Identity(_) => "trivial: only the identity channel".into(),
            Adversary::AllChannels(_) => "every channel on the system".into(),
            Adversary::Commutant(dec) => format!(
                "channels with Kraus operators in the commutant, blocks {:?}",
                dec.blocks
            ),
            Adversary::UniformSchur(d) => format!(
                "contains c·id + (1-c)·dephase for c in [-1/{}, 1]",
                d.saturating_sub(1).max(1)
            ),
            Adversary::BasisPreserving(_) => "basis-preserving channels".into(),
            Adversary::MultiphaseCovariant(_) => "multiphase-covariant channels".into(),
            Adversary::Unitaries(g) => format!(
                "unitaries U_pi V0 with V0 in the commutant; {} coset(s)",
                g.permutations.len()
            ),
        }
    }

    /// One random element.
    pub fn sample(&self, rng: &mut Rng, tol: &Tolerance) -> Result<Channel> {
        match self {
            Adversary::Identity(d) => Ok(identity_channel(*d)),
            Adversary::AllChannels(d) => {
                let r = rng.random_range(1..=(*d * *d).min(4));
                Channel::from_kraus(random_kraus(*d, *d, r, rng), tol)
            }
            Adversary::Commutant(dec) => {
                if rng.random_bool(0.25) {
                    Ok(d0_channel(dec))
                } else {
                    Ok(random_commutant_channel(dec, 2, rng))
                }
            }
            Adversary::UniformSchur(d) => {
                let lo = if *d > 1 {
                    -1.0 / (*d as f64 - 1.0)
                } else {
                    0.0
                };
                uniform_schur(*d, rng.random_range(lo..=1.0), tol)
            }
            Adversary::BasisPreserving(d) => sample_basis_preserving(*d, rng, tol),
            Adversary::MultiphaseCovariant(d) => sample_multiphase_covariant(*d, rng, tol),
            Adversary::Unitaries(g) => crate::channels::named::unitary(&g.sample(rng), tol),
        }
    }
}

impl Adversary {
    /// An adversary operation sending every state and its canonical
    /// representative to the same state, when one exists in closed form.
    pub fn collapse(&self) -> Option<Channel> {
        match self {
            Adversary::Identity(d) => Some(identity_channel(*d)),
            Adversary::AllChannels(d) | Adversary::MultiphaseCovariant(d) => {
                crate::channels::named::erasure_to(&StateDM::basis(*d, 0), *d).ok()
            }
            Adversary::Commutant(dec) => Some(d0_channel(dec)),
            Adversary::UniformSchur(d) | Adversary::BasisPreserving(d) => {
                Some(crate::channels::named::dephase(*d))
            }
            Adversary::Unitaries(_) => None,
        }
    }
}

impl Serialize for Adversary {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Adversary", 2)?;
        st.serialize_field("kind", self.kind())?;
        st.serialize_field("description", &self.description())?;
        st.end()
    }
}

/// Canonical representative of an equivalence class of states.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalState {
    BlockStates {
        blocks: Vec<CanonicalBlock>,
    },
    DiagonalProbabilities {
        p: Vec<f64>,
    },
    SpectraUnordered {
        weights: Vec<f64>,
    },
    Full {
        #[serde(serialize_with = "serialize_matrix")]
        rho: CMatrix,
    },
    Trivial,
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalBlock {
    pub weight: f64,
    /// Normalized block state; maximally mixed when the weight vanishes.
    #[serde(serialize_with = "serialize_matrix")]
    pub state: CMatrix,
}

impl CanonicalState {
    /// Max-abs distance between representatives; infinite across kinds or shapes.
    pub fn distance(&self, other: &CanonicalState) -> f64 {
        let vec_dist = |a: &[f64], b: &[f64]| {
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        match (self, other) {
            (
                CanonicalState::BlockStates { blocks: a },
                CanonicalState::BlockStates { blocks: b },
            ) => {
                if a.len() != b.len() {
                    return f64::INFINITY;
                }
                a.iter()
                    .zip(b)
                    .map(|(x, y)| {
                        if x.state.shape() != y.state.shape() {
                            f64::INFINITY
                        } else {
                            max_abs_diff(&x.state.scale(x.weight), &y.state.scale(y.weight))
                        }
                    })
                    .fold(0.0, f64::max)
            }
            (
                CanonicalState::DiagonalProbabilities { p: a },
                CanonicalState::DiagonalProbabilities { p: b },
            ) => vec_dist(a, b),
            (
                CanonicalState::SpectraUnordered { weights: a },
                CanonicalState::SpectraUnordered { weights: b },
            ) => vec_dist(a, b),
            (CanonicalState::Full { rho: a }, CanonicalState::Full { rho: b }) => {
                if a.shape() != b.shape() {
                    f64::INFINITY
                } else {
                    max_abs_diff(a, b)
                }
            }
            (CanonicalState::Trivial, CanonicalState::Trivial) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

/// Action of an agent transformation on the quotient.
#[derive(Debug, Clone)]
pub enum ReducedTransformation {
    BlockChannels(Vec<Channel>),
    Stochastic(CMatrix),
    Channel(Channel),
    Identity,
}

impl ReducedTransformation {
    /// `self ∘ first`.
    pub fn compose(&self, first: &ReducedTransformation) -> Result<ReducedTransformation> {
        use ReducedTransformation as R;
        match (self, first) {
            (R::Identity, x) | (x, R::Identity) => Ok(x.clone()),
            (R::BlockChannels(a), R::BlockChannels(b)) if a.len() == b.len() => {
                Ok(R::BlockChannels(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| x.compose(y))
                        .collect::<Result<_>>()?,
                ))
            }
            (R::Stochastic(a), R::Stochastic(b)) if a.ncols() == b.nrows() => {
                Ok(R::Stochastic(a * b))
            }
            (R::Channel(a), R::Channel(b)) => Ok(R::Channel(a.compose(b)?)),
            _ => Err(Error::DimensionMismatch(
                "incompatible reduced transformations".into(),
            )),
        }
    }

    pub fn distance(&self, other: &ReducedTransformation) -> f64 {
        use ReducedTransformation as R;
        match (self, other) {
            (R::Identity, R::Identity) => 0.0,
            (R::BlockChannels(a), R::BlockChannels(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.distance(y))
                .fold(0.0, f64::max),
            (R::Stochastic(a), R::Stochastic(b)) if a.shape() == b.shape() => max_abs_diff(a, b),
            (R::Channel(a), R::Channel(b)) => a.distance(b),
            _ => f64::INFINITY,
        }
    }
}

impl Serialize for ReducedTransformation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ReducedTransformation", 2)?;
        match self {
            ReducedTransformation::BlockChannels(chs) => {
                st.serialize_field("kind", "block_channels")?;
                let wire: Vec<ChannelJson> = chs.iter().map(ChannelJson::from_channel).collect();
                st.serialize_field("channels", &wire)?;
            }
            ReducedTransformation::Stochastic(p) => {
                st.serialize_field("kind", "stochastic")?;
                st.serialize_field("matrix", &MatrixJson::from(p))?;
            }
            ReducedTransformation::Channel(ch) => {
                st.serialize_field("kind", "channel")?;
                st.serialize_field("channel", &ChannelJson::from_channel(ch))?;
            }
            ReducedTransformation::Identity => {
                st.serialize_field("kind", "identity")?;
                st.skip_field("channels")?;
            }
        }
        st.end()
    }
}

/// A carved subsystem.
#[derive(Debug, Clone, Serialize)]
pub struct SubsystemDescription {
    pub source_dim: usize,
    pub state_space: StateSpace,
    pub adversary: Adversary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<CoherenceClassReport>,
}

impl SubsystemDescription {
    fn check_state(&self, rho: &StateDM) -> Result<()> {
        if rho.dim() != self.source_dim {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for a system of dimension {}",
                rho.dim(),
                self.source_dim
            )));
        }
        Ok(())
    }

    pub fn quotient(&self, rho: &StateDM, tol: &Tolerance) -> Result<CanonicalState> {
        self.check_state(rho)?;
        Ok(match &self.state_space {
            StateSpace::BlockStates { decomposition, .. } => CanonicalState::BlockStates {
                blocks: partial_trace_over_commutant(decomposition, rho, tol)?
                    .into_iter()
                    .map(|m| CanonicalBlock {
                        weight: if m.zero { 0.0 } else { m.weight },
                        state: m.state.into_matrix(),
                    })
                    .collect(),
            },
            StateSpace::DiagonalProbabilities { dim } => CanonicalState::DiagonalProbabilities {
                p: (0..*dim).map(|k| rho.matrix()[(k, k)].re).collect(),
            },
            StateSpace::SpectraUnordered {
                permutations,
                projectors,
                ..
            } => {
                let w: Vec<f64> = projectors
                    .iter()
                    .map(|p| (p * rho.matrix()).trace().re)
                    .collect();
                CanonicalState::SpectraUnordered {
                    weights: lex_max_orbit(&w, permutations, tol.eq_tol),
                }
            }
            StateSpace::Full { .. } => CanonicalState::Full {
                rho: rho.matrix().clone(),
            },
            StateSpace::Trivial => CanonicalState::Trivial,
        })
    }

    /// Deterministic state whose quotient is `canonical`.
    pub fn embed(&self, canonical: &CanonicalState, tol: &Tolerance) -> Result<StateDM> {
        let bad = |msg: &str| Error::InvalidInput(format!("canonical form: {msg}"));
        let probs = |p: &[f64], n: usize| -> Result<()> {
            if p.len() != n {
                return Err(bad("wrong number of weights"));
            }
            if p.iter().any(|&x| !x.is_finite() || x < -tol.eq_tol)
                || (p.iter().sum::<f64>() - 1.0).abs() > tol.eq_tol
            {
                return Err(bad("weights are not a probability vector"));
            }
            Ok(())
        };
        let m = match (&self.state_space, canonical) {
            (
                StateSpace::BlockStates {
                    decomposition: dec, ..
                },
                CanonicalState::BlockStates { blocks },
            ) => {
                let w: Vec<f64> = blocks.iter().map(|b| b.weight).collect();
                probs(&w, dec.blocks.len())?;
                let d = dec.dim();
                let mut m = zeros(d, d);
                for ((&(da, db), off), b) in dec.blocks.iter().zip(dec.offsets()).zip(blocks) {
                    if b.state.shape() != (da, da) {
                        return Err(bad("block state of the wrong shape"));
                    }
                    let local = kron(&b.state.scale(b.weight), &identity(db).unscale(db as f64));
                    m.view_mut((off, off), (da * db, da * db)).copy_from(&local);
                }
                dec.unitary.adjoint() * m * &dec.unitary
            }
            (
                StateSpace::DiagonalProbabilities { dim },
                CanonicalState::DiagonalProbabilities { p },
            ) => {
                probs(p, *dim)?;
                diag_real(p)
            }
            (
                StateSpace::SpectraUnordered {
                    projectors,
                    permutations,
                    ..
                },
                CanonicalState::SpectraUnordered { weights },
            ) => {
                probs(weights, projectors.len())?;
                if lex_max_orbit(weights, permutations, tol.eq_tol)
                    .iter()
                    .zip(weights)
                    .any(|(a, b)| (a - b).abs() > tol.eq_tol)
                {
                    return Err(bad("weights are not in canonical order"));
                }
                let d = self.source_dim;
                projectors
                    .iter()
                    .zip(weights)
                    .fold(zeros(d, d), |acc, (p, &w)| {
                        let rank = p.trace().re.round().max(1.0);
                        acc + p.scale(w / rank)
                    })
            }
            (StateSpace::Full { .. }, CanonicalState::Full { rho }) => rho.clone(),
            (StateSpace::Trivial, CanonicalState::Trivial) => {
                return Ok(StateDM::maximally_mixed(self.source_dim))
            }
            _ => return Err(bad("kind does not match the state space")),
        };
        StateDM::new(m, tol)
    }

    /// `[𝒯]_A` for an agent transformation `𝒯`.
    pub fn restrict(&self, ch: &Channel, tol: &Tolerance) -> Result<ReducedTransformation> {
        if ch.dim_in() != self.source_dim || ch.dim_out() != self.source_dim {
            return Err(Error::DimensionMismatch(
                "channel does not act on the system".into(),
            ));
        }
        Ok(match &self.state_space {
            StateSpace::BlockStates { decomposition, .. } => {
                ReducedTransformation::BlockChannels(restrict_homomorphism(decomposition, ch, tol)?)
            }
            StateSpace::DiagonalProbabilities { .. } => {
                if !is_dephasing_covariant(ch, tol) {
                    return Err(Error::InvalidChannel(
                        "channel does not commute with complete dephasing".into(),
                    ));
                }
                ReducedTransformation::Stochastic(classical_quotient_channel(ch)?)
            }
            StateSpace::Full { .. } => ReducedTransformation::Channel(ch.clone()),
            StateSpace::SpectraUnordered { .. } | StateSpace::Trivial => {
                ReducedTransformation::Identity
            }
        })
    }
}

pub fn quotient_state(
    sub: &SubsystemDescription,
    rho: &StateDM,
    tol: &Tolerance,
) -> Result<CanonicalState> {
    sub.quotient(rho, tol)
}

pub fn embed_representative(
    sub: &SubsystemDescription,
    canonical: &CanonicalState,
    tol: &Tolerance,
) -> Result<StateDM> {
    sub.embed(canonical, tol)
}

/// Lexicographically largest rearrangement `q[π(k)] = w[k]` over `perms`,
/// comparing entries up to `eps`.
fn lex_max_orbit(w: &[f64], perms: &[Vec<usize>], eps: f64) -> Vec<f64> {
    let apply = |perm: &[usize]| {
        let mut q = vec![0.0; w.len()];
        for (k, &p) in perm.iter().enumerate() {
            q[p] = w[k];
        }
        q
    };
    let greater = |a: &[f64], b: &[f64]| {
        for (x, y) in a.iter().zip(b) {
            if x - y > eps {
                return true;
            }
            if y - x > eps {
                return false;
            }
        }
        false
    };
    let mut best = w.to_vec();
    for p in perms {
        let q = apply(p);
        if greater(&q, &best) {
            best = q;
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct CarveOptions {
    pub max_words: usize,
    pub max_order: usize,
}

impl Default for CarveOptions {
    fn default() -> Self {
        CarveOptions {
            max_words: 6,
            max_order: 512,
        }
    }
}

/// Assembles the subsystem associated with `agent`.
pub fn carve(
    agent: &Agent,
    seed: u64,
    opts: &CarveOptions,
    tol: &Tolerance,
) -> Result<SubsystemDescription> {
    let split = SeedSplitter::new(seed);
    let d = agent.dim();
    let (state_space, adversary, classification) = match agent {
        Agent::Algebra { generators, .. } => {
            let alg = generate_algebra(d, generators, tol)?;
            let dec = block_decompose(&alg, split.child_seed("blocks"), tol)?;
            (
                StateSpace::BlockStates {
                    blocks: dec.blocks.clone(),
                    decomposition: dec.clone(),
                },
                Adversary::Commutant(dec),
                None,
            )
        }
        Agent::Channels {
            channels,
            contains_classical,
            ..
        } => {
            let report = classify_monoid(channels, *contains_classical, opts.max_words, tol)?;
            let (space, adv) = match report.classical_subsystem_verdict {
                ClassicalVerdict::Classical { dim } => (
                    StateSpace::DiagonalProbabilities { dim },
                    Adversary::UniformSchur(dim),
                ),
                ClassicalVerdict::WholeSystem => {
                    (StateSpace::Full { dim: d }, Adversary::Identity(d))
                }
                ClassicalVerdict::Undetermined => {
                    return Err(Error::Unsupported(
                        "channel generators: the classical-subsystem verdict is undetermined"
                            .into(),
                    ))
                }
            };
            (space, adv, Some(report))
        }
        Agent::Group { unitaries, .. } => {
            let rep = close_group(d, unitaries, opts.max_order, tol)?;
            let iso = isotypic_decompose(&rep, split.child_seed("isotypic"), tol)?;
            let adv = adversarial_group(&iso, split.child_seed("adversarial"), tol)?;
            let space = if iso.blocks.iter().all(|b| b.dim == 1) {
                StateSpace::SpectraUnordered {
                    dim: iso.blocks.len(),
                    permutations: adv.permutations.iter().map(|p| p.perm.clone()).collect(),
                    projectors: iso.decomposition.projectors.clone(),
                }
            } else if adv.permutations.len() == 1 {
                StateSpace::BlockStates {
                    blocks: iso.decomposition.blocks.clone(),
                    decomposition: iso.decomposition.clone(),
                }
            } else {
                return Err(Error::Unsupported(
                    "group representation with higher-dimensional irreps and nontrivial twisted permutations"
                        .into(),
                ));
            };
            (space, Adversary::Unitaries(Box::new(adv)), None)
        }
        Agent::Named { monoid, .. } => (monoid.state_space(d), monoid.adversary(d), None),
    };
    Ok(SubsystemDescription {
        source_dim: d,
        state_space,
        adversary,
        classification,
    })
}
