//! Quantum channels held in three mutually consistent representations.
//!
//! * Kraus: `T(ρ) = Σᵢ Kᵢ ρ Kᵢ†`.
//! * Choi, on `out ⊗ in` with the output factor first:
//!   `M = Σᵢⱼ T(|i⟩⟨j|) ⊗ |i⟩⟨j|`, so `⟨a,i|M|b,j⟩ = ⟨a|T(|i⟩⟨j|)|b⟩`.
//! * Superoperator acting on column-stacked vectors: `S = Σᵢ conj(Kᵢ) ⊗ Kᵢ`.
//!
//! All three are computed once at construction; a `Channel` is immutable.

mod invertibility;
mod json;
pub mod named;

pub use invertibility::{inverse_map, is_logically_invertible, is_physically_reversible};
pub use json::ChannelJson;

use crate::error::{Error, Result};
use crate::numerics::{
    self, approx_eq, eig_hermitian_unchecked, hermitian_part, hermitian_residual, identity,
    max_abs, max_abs_diff, zeros, CMatrix, Tolerance,
};

/// A completely positive trace-preserving map `M_{dim_in} → M_{dim_out}`.
#[derive(Debug, Clone)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    choi: CMatrix,
    superop: CMatrix,
}

impl Channel {
    /// Builds a channel from Kraus operators, keeping the supplied set.
    pub fn from_kraus(ops: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let (dim_out, dim_in) = first.shape();
        if ops.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch(
                "Kraus operators have different shapes".into(),
            ));
        }
        let s = ops
            .iter()
            .fold(zeros(dim_in, dim_in), |acc, k| acc + k.adjoint() * k);
        let tp = max_abs_diff(&s, &identity(dim_in));
        if tp > tol.eq_tol {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (residual {tp:.3e})"
            )));
        }
        Ok(Self::assemble(dim_in, dim_out, ops))
    }

    pub(crate) fn assemble(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Self {
        let superop = kraus
            .iter()
            .fold(zeros(dim_out * dim_out, dim_in * dim_in), |acc, k| {
                acc + numerics::kron(&k.conjugate(), k)
            });
        let choi = superop_to_choi(&superop, dim_in, dim_out);
        Channel {
            dim_in,
            dim_out,
            kraus,
            choi,
            superop,
        }
    }

    /// Builds a channel from its Choi matrix; Kraus operators are the
    /// scaled eigenvectors with eigenvalue above `rank_tol`.
    pub fn from_choi(
        choi: CMatrix,
        dim_in: usize,
        dim_out: usize,
        tol: &Tolerance,
    ) -> Result<Self> {
        if choi.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix of shape {:?} does not match {dim_out}x{dim_in} channel",
                choi.shape()
            )));
        }
        let scale = max_abs(&choi).max(1.0);
        let herm = hermitian_residual(&choi);
        if herm > tol.eq_tol * scale {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not Hermitian (residual {herm:.3e})"
            )));
        }
        let choi = hermitian_part(&choi);
        let tr_out = numerics::partial_trace_first(&choi, dim_out, dim_in);
        let tp = max_abs_diff(&tr_out, &identity(dim_in));
        if tp > tol.eq_tol {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not trace preserving (residual {tp:.3e})"
            )));
        }
        let eig = eig_hermitian_unchecked(&choi);
        let lmin = eig.values.first().copied().unwrap_or(0.0);
        if lmin < -tol.rank_tol * scale {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not positive semidefinite (eigenvalue {lmin:.3e})"
            )));
        }
        let kraus: Vec<CMatrix> = eig
            .values
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &l)| l > tol.rank_tol)
            .map(|(k, &l)| {
                let v = eig.vectors.column(k);
                CMatrix::from_fn(dim_out, dim_in, |a, i| v[a * dim_in + i] * l.sqrt())
            })
            .collect();
        let superop = choi_to_superop(&choi, dim_in, dim_out);
        Ok(Channel {
            dim_in,
            dim_out,
            kraus,
            choi,
            superop,
        })
    }

    pub fn from_superop(
        s: CMatrix,
        dim_in: usize,
        dim_out: usize,
        tol: &Tolerance,
    ) -> Result<Self> {
        if s.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator of shape {:?} does not match {dim_out}x{dim_in} channel",
                s.shape()
            )));
        }
        Self::from_choi(superop_to_choi(&s, dim_in, dim_out), dim_in, dim_out, tol)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    /// Minimal Kraus set recomputed from the Choi matrix.
    pub fn minimal_kraus(&self, tol: &Tolerance) -> Vec<CMatrix> {
        Channel::from_choi(self.choi.clone(), self.dim_in, self.dim_out, &relaxed(tol))
            .map(|c| c.kraus)
            .unwrap_or_else(|_| self.kraus.clone())
    }

    /// `self ∘ first`: `first` acts, then `self`.
    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        if self.dim_in != first.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}->{} after {}->{}",
                self.dim_in, self.dim_out, first.dim_in, first.dim_out
            )));
        }
        let count = self.kraus.len() * first.kraus.len();
        let superop = &self.superop * &first.superop;
        let choi = superop_to_choi(&superop, first.dim_in, self.dim_out);
        let kraus = if count <= first.dim_in * self.dim_out {
            self.kraus
                .iter()
                .flat_map(|a| first.kraus.iter().map(move |b| a * b))
                .collect()
        } else {
            let tol = Tolerance::default();
            Channel::from_choi(choi.clone(), first.dim_in, self.dim_out, &relaxed(&tol))
                .map(|c| c.kraus)
                .map_err(|e| Error::Numeric(format!("composition lost positivity: {e}")))?
        };
        Ok(Channel {
            dim_in: first.dim_in,
            dim_out: self.dim_out,
            kraus,
            choi,
            superop,
        })
    }

    /// Applies the channel to an arbitrary operator.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "operator of shape {:?} fed to channel on dimension {}",
                m.shape(),
                self.dim_in
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(zeros(self.dim_out, self.dim_out), |acc, k| {
                acc + k * m * k.adjoint()
            }))
    }

    pub fn apply(&self, rho: &StateDM) -> Result<StateDM> {
        let out = self.apply_matrix(rho.matrix())?;
        Ok(StateDM::new_unchecked(hermitian_part(&out)))
    }

    /// Heisenberg-picture action `X ↦ Σ Kᵢ† X Kᵢ`.
    pub fn adjoint_apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::DimensionMismatch("observable dimension".into()));
        }
        Ok(self
            .kraus
            .iter()
            .fold(zeros(self.dim_in, self.dim_in), |acc, k| {
                acc + k.adjoint() * x * k
            }))
    }

    /// `self ⊗ other` on the tensor product of the inputs.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| numerics::kron(a, b)))
            .collect();
        Self::assemble(
            self.dim_in * other.dim_in,
            self.dim_out * other.dim_out,
            kraus,
        )
    }

    /// Convex mixture `Σ pᵢ Tᵢ`.
    pub fn mixture(parts: &[(f64, &Channel)], tol: &Tolerance) -> Result<Channel> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty mixture".into()))?
            .1;
        let total: f64 = parts.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > tol.eq_tol || parts.iter().any(|(p, _)| *p < 0.0) {
            return Err(Error::InvalidChannel(
                "mixture weights must form a distribution".into(),
            ));
        }
        let mut kraus = Vec::new();
        for (p, ch) in parts {
            if ch.dim_in != first.dim_in || ch.dim_out != first.dim_out {
                return Err(Error::DimensionMismatch(
                    "mixture of unequal channels".into(),
                ));
            }
            if *p > 0.0 {
                kraus.extend(ch.kraus.iter().map(|k| k.scale(p.sqrt())));
            }
        }
        Ok(Self::assemble(first.dim_in, first.dim_out, kraus))
    }

    /// Superoperator distance `‖S(a) − S(b)‖_max`.
    pub fn distance(&self, other: &Channel) -> f64 {
        max_abs_diff(&self.superop, &other.superop)
    }

    pub fn approx_eq(&self, other: &Channel, tol: &Tolerance) -> bool {
        approx_eq(&self.superop, &other.superop, tol.eq_tol)
    }

    /// The single Kraus operator, when the channel was built as a unitary or
    /// isometric channel (or a product of such).
    pub fn single_kraus(&self) -> Option<&CMatrix> {
        match self.kraus.as_slice() {
            [k] => Some(k),
            _ => None,
        }
    }
}

fn relaxed(tol: &Tolerance) -> Tolerance {
    Tolerance {
        eq_tol: tol.eq_tol.max(1e-7),
        rank_tol: tol.rank_tol.max(1e-10),
    }
}

/// Reshuffles a column-stacking superoperator into the `out ⊗ in` Choi matrix.
pub fn superop_to_choi(s: &CMatrix, dim_in: usize, dim_out: usize) -> CMatrix {
    let n = dim_in * dim_out;
    CMatrix::from_fn(n, n, |row, col| {
        let (a, i) = (row / dim_in, row % dim_in);
        let (b, j) = (col / dim_in, col % dim_in);
        s[(b * dim_out + a, j * dim_in + i)]
    })
}

/// Inverse of [`superop_to_choi`].
pub fn choi_to_superop(m: &CMatrix, dim_in: usize, dim_out: usize) -> CMatrix {
    CMatrix::from_fn(dim_out * dim_out, dim_in * dim_in, |row, col| {
        let (b, a) = (row / dim_out, row % dim_out);
        let (j, i) = (col / dim_in, col % dim_in);
        m[(a * dim_in + i, b * dim_in + j)]
    })
}

/// True iff `‖S(a)S(b) − S(b)S(a)‖_max ≤ eq_tol`.
pub fn channels_commute(a: &Channel, b: &Channel, tol: &Tolerance) -> bool {
    commutator_norm(a, b) <= tol.eq_tol
}

/// `‖S(a)S(b) − S(b)S(a)‖_max`, or infinity when dimensions differ.
pub fn commutator_norm(a: &Channel, b: &Channel) -> f64 {
    if a.superop.shape() != b.superop.shape() || !a.is_square() || !b.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(&a.superop * &b.superop - &b.superop * &a.superop))
}

/// Orthonormal basis (columns are `vec(X)`) of the linear superoperators
/// commuting with every generator.
pub fn superop_commutant_basis(gens: &[Channel], tol: &Tolerance) -> Result<CMatrix> {
    let d = gens
        .first()
        .ok_or_else(|| Error::InvalidInput("empty generator list".into()))?
        .dim_in();
    if gens.iter().any(|g| g.dim_in() != d || g.dim_out() != d) {
        return Err(Error::DimensionMismatch(
            "generators act on different spaces".into(),
        ));
    }
    let n = d * d;
    let id = identity(n);
    let rows: Vec<CMatrix> = gens
        .iter()
        .map(|g| numerics::kron(&id, &g.superop) - numerics::kron(&g.superop.transpose(), &id))
        .collect();
    numerics::nullspace_of_stack(rows.iter(), n * n, tol)
}

/// Distance of `ch` from the span of `basis` (columns `vec(X)`), and its
/// trace-preservation defect `‖vec(I)†S − vec(I)†‖_max`.
pub fn commutant_residuals(basis: &CMatrix, ch: &Channel) -> (f64, f64) {
    let v = numerics::vec(&ch.superop);
    if v.nrows() != basis.nrows() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let proj = basis * (basis.adjoint() * &v);
    let vi = numerics::vec(&identity(ch.dim_out));
    let tp = max_abs(&(vi.adjoint() * &ch.superop - numerics::vec(&identity(ch.dim_in)).adjoint()));
    (max_abs(&(v - proj)), tp)
}

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone)]
pub struct StateDM {
    matrix: CMatrix,
}

impl StateDM {
    pub fn new(m: CMatrix, tol: &Tolerance) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm = hermitian_residual(&m);
        if herm > tol.eq_tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (residual {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr - numerics::ONE).norm() > tol.eq_tol {
            return Err(Error::InvalidState(format!("trace is {tr}, not 1")));
        }
        let m = hermitian_part(&m);
        let lmin = eig_hermitian_unchecked(&m).values[0];
        if lmin < -tol.rank_tol {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (eigenvalue {lmin:.3e})"
            )));
        }
        Ok(StateDM { matrix: m })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        StateDM { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a column vector, normalized.
    pub fn pure(psi: &CMatrix) -> Result<Self> {
        if psi.ncols() != 1 || psi.nrows() == 0 {
            return Err(Error::InvalidState(
                "pure state needs a nonzero column vector".into(),
            ));
        }
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = psi.unscale(n);
        Ok(StateDM {
            matrix: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        StateDM {
            matrix: identity(d).unscale(d as f64),
        }
    }

    pub fn basis(d: usize, k: usize) -> Self {
        StateDM {
            matrix: numerics::basis_projector(d, k),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn approx_eq(&self, other: &StateDM, tol: &Tolerance) -> bool {
        approx_eq(&self.matrix, &other.matrix, tol.eq_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;
    use crate::numerics::random::{
        random_density, random_kraus, random_stochastic, random_unitary, Rng,
    };
    use crate::numerics::{kron, vec};
    use rand::SeedableRng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn random_channel(d: usize, g: &mut Rng) -> Channel {
        Channel::from_kraus(random_kraus(d, d, 3, g), &tol()).unwrap()
    }

    #[test]
    fn superop_matches_vec_convention() {
        let mut g = Rng::seed_from_u64(1);
        let t = random_channel(3, &mut g);
        let rho = random_density(3, 3, &mut g);
        let direct = t.apply_matrix(&rho).unwrap();
        let via = t.superop() * vec(&rho);
        assert!(approx_eq(&vec(&direct), &via, 1e-12));
    }

    #[test]
    fn choi_matches_definition() {
        let mut g = Rng::seed_from_u64(2);
        let t = random_channel(2, &mut g);
        let mut m = zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                let e = numerics::matrix_unit(2, i, j);
                m += kron(&t.apply_matrix(&e).unwrap(), &e);
            }
        }
        assert!(approx_eq(t.choi(), &m, 1e-12));
    }

    #[test]
    fn representation_round_trips() {
        let mut g = Rng::seed_from_u64(3);
        for d in 1..=5 {
            let t = random_channel(d, &mut g);
            let from_choi = Channel::from_choi(t.choi().clone(), d, d, &tol()).unwrap();
            assert!(from_choi.distance(&t) < 1e-10, "d={d}");
            assert!(from_choi.kraus().len() <= d * d);
            let from_s = Channel::from_superop(t.superop().clone(), d, d, &tol()).unwrap();
            assert!(approx_eq(from_s.choi(), t.choi(), 1e-10));
            assert!(approx_eq(
                &choi_to_superop(&superop_to_choi(t.superop(), d, d), d, d),
                t.superop(),
                0.0
            ));
        }
    }

    #[test]
    fn rectangular_channels() {
        let mut g = Rng::seed_from_u64(4);
        let t = Channel::from_kraus(random_kraus(2, 3, 2, &mut g), &tol()).unwrap();
        assert_eq!((t.dim_in(), t.dim_out()), (2, 3));
        let back = Channel::from_choi(t.choi().clone(), 2, 3, &tol()).unwrap();
        assert!(back.distance(&t) < 1e-10);
        let rho = StateDM::maximally_mixed(2);
        assert!((t.apply(&rho).unwrap().matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_tp_and_non_cp() {
        let t = tol();
        assert!(Channel::from_kraus(vec![identity(2).scale(0.5)], &t).is_err());
        let bad = numerics::diag_real(&[1.5, -0.5, 0.0, 0.0]);
        assert!(Channel::from_choi(bad, 2, 2, &t).is_err());
        assert!(Channel::from_kraus(vec![], &t).is_err());
    }

    #[test]
    fn compose_examples() {
        let t = tol();
        let mut g = Rng::seed_from_u64(5);
        let ch = random_channel(3, &mut g);
        assert!(identity_channel(3).compose(&ch).unwrap().distance(&ch) < 1e-12);
        let u = random_unitary(3, &mut g);
        let uc = unitary(&u, &t).unwrap();
        let uinv = unitary(&u.adjoint(), &t).unwrap();
        assert!(uc.compose(&uinv).unwrap().distance(&identity_channel(3)) < 1e-12);
        let dd = dephase(3).compose(&dephase(3)).unwrap();
        assert!(dd.distance(&dephase(3)) < 1e-14);
        assert!(identity_channel(2).compose(&ch).is_err());
    }

    #[test]
    fn compose_is_t2_first() {
        let t = tol();
        // erase to |0⟩ then flip gives |1⟩; the other order gives |0⟩.
        let erase = erasure_to(&StateDM::basis(2, 0), 2).unwrap();
        let flip = unitary(&numerics::pauli_x(), &t).unwrap();
        let rho = StateDM::maximally_mixed(2);
        let out = flip.compose(&erase).unwrap().apply(&rho).unwrap();
        assert!(out.approx_eq(&StateDM::basis(2, 1), &t));
    }

    #[test]
    fn apply_examples() {
        let t = tol();
        let mut g = Rng::seed_from_u64(6);
        let rho = StateDM::new(random_density(3, 3, &mut g), &t).unwrap();
        assert!(identity_channel(3).apply(&rho).unwrap().approx_eq(&rho, &t));
        let e = erasure_to(&StateDM::basis(3, 2), 3).unwrap();
        assert!(e.apply(&rho).unwrap().approx_eq(&StateDM::basis(3, 2), &t));
        let out = dephase(3).apply(&rho).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j {
                    rho.matrix()[(i, j)]
                } else {
                    numerics::ZERO
                };
                assert!((out.matrix()[(i, j)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn commute_examples() {
        let t = tol();
        let mut g = Rng::seed_from_u64(7);
        let a = random_channel(2, &mut g);
        let b = random_channel(2, &mut g);
        assert!(channels_commute(&a, &identity_channel(2), &t));
        let ai = a.tensor(&identity_channel(2));
        let ib = identity_channel(2).tensor(&b);
        assert!(channels_commute(&ai, &ib, &t));
        let x = unitary(&numerics::pauli_x(), &t).unwrap();
        assert!(channels_commute(&x, &dephase(2), &t));
        let h = unitary(&numerics::hadamard(), &t).unwrap();
        assert!(!channels_commute(&h, &dephase(2), &t));
    }

    #[test]
    fn named_constructor_examples() {
        let t = tol();
        let mut g = Rng::seed_from_u64(8);
        assert!(diagonal_unitary(&[0.0, 0.0, 0.0]).distance(&identity_channel(3)) < 1e-15);
        let id = classical_from_stochastic(&identity(3), &t).unwrap();
        assert!(id.compose(&dephase(3)).unwrap().distance(&dephase(3)) < 1e-14);
        let p = random_stochastic(3, &mut g);
        let cp = classical_from_stochastic(&p, &t).unwrap();
        for k in 0..3 {
            let out = cp.apply(&StateDM::basis(3, k)).unwrap();
            for j in 0..3 {
                assert!((out.matrix()[(j, j)] - p[(j, k)]).norm() < 1e-14);
            }
        }
        let mut bad = p.clone();
        bad[(0, 0)] += numerics::r(0.1);
        assert!(classical_from_stochastic(&bad, &t).is_err());
        assert!(unitary(&numerics::diag_real(&[1.0, 0.5]), &t).is_err());
    }

    #[test]
    fn compose_associative() {
        let mut g = Rng::seed_from_u64(9);
        let (a, b, c) = (
            random_channel(3, &mut g),
            random_channel(3, &mut g),
            random_channel(3, &mut g),
        );
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        assert!(left.distance(&right) < 1e-12);
    }

    #[test]
    fn apply_preserves_state_invariants() {
        let t = tol();
        let mut g = Rng::seed_from_u64(10);
        for d in 2..=5 {
            let ch = random_channel(d, &mut g);
            let rho = StateDM::new(random_density(d, 2, &mut g), &t).unwrap();
            let out = ch.apply(&rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < t.eq_tol);
            let lmin = eig_hermitian_unchecked(out.matrix()).values[0];
            assert!(lmin >= -10.0 * t.rank_tol);
        }
    }
}
