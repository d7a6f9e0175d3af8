//! Unital *-subalgebras of `M_d(ℂ)` and their Wedderburn block structure.
//!
//! An algebra is stored as a Hilbert–Schmidt orthonormal basis of its span.
//! [`block_decompose`] finds a unitary `U` with
//! `U C U† = ⊕ₖ (Cₖ ⊗ I_{Bₖ})` for every element `C`.

mod decomposition;

pub use decomposition::{
    block_decompose, block_decompose_with, d0_channel, partial_trace_over_commutant,
    random_algebra_channel, random_commutant_channel, restrict_homomorphism, BlockDecomposition,
    BlockMarginal,
};

use crate::error::{Error, Result};
use crate::numerics::random::{ginibre, Rng};
use crate::numerics::{
    commutator, gram_schmidt_hs, hermitian_part, identity, kron, matrix_unit, nullspace_of_stack,
    orthonormal_residual, span_residual, unvec, vec, zeros, CMatrix, Tolerance,
};

#[derive(Debug, Clone)]
pub struct StarAlgebra {
    dim: usize,
    basis: Vec<CMatrix>,
    generators: Vec<CMatrix>,
}

impl StarAlgebra {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the algebra as a vector space.
    pub fn span_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    /// Max-abs residual of `m` after projecting onto the algebra.
    pub fn membership_residual(&self, m: &CMatrix) -> f64 {
        if m.shape() != (self.dim, self.dim) {
            return f64::INFINITY;
        }
        span_residual(&self.basis, m)
    }

    pub fn contains(&self, m: &CMatrix, tol: &Tolerance) -> bool {
        self.membership_residual(m) <= tol.eq_tol
    }

    /// Largest residual of the products of basis pairs outside the span.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            worst = worst.max(span_residual(&self.basis, &a.adjoint()));
            for b in &self.basis {
                worst = worst.max(span_residual(&self.basis, &(a * b)));
            }
        }
        worst
    }

    /// Random element with complex Gaussian coefficients in the basis.
    pub fn random_element(&self, rng: &mut Rng) -> CMatrix {
        let coeffs = ginibre(self.basis.len(), 1, rng);
        self.basis
            .iter()
            .zip(coeffs.iter())
            .fold(zeros(self.dim, self.dim), |acc, (b, z)| acc + b * *z)
    }

    pub fn random_hermitian_element(&self, rng: &mut Rng) -> CMatrix {
        hermitian_part(&self.random_element(rng))
    }

    /// The full matrix algebra `M_d`.
    pub fn full(d: usize) -> Self {
        let basis: Vec<_> = (0..d * d).map(|k| matrix_unit(d, k / d, k % d)).collect();
        StarAlgebra {
            dim: d,
            generators: basis.clone(),
            basis,
        }
    }

    /// Diagonal matrices in the computational basis.
    pub fn diagonals(d: usize) -> Self {
        let basis: Vec<_> = (0..d).map(|k| matrix_unit(d, k, k)).collect();
        StarAlgebra {
            dim: d,
            generators: basis.clone(),
            basis,
        }
    }

    /// `V† (⊕ₖ M_{d_Aₖ} ⊗ I_{d_Bₖ}) V` for a block structure and a unitary `V`.
    pub fn from_block_structure(blocks: &[(usize, usize)], v: &CMatrix) -> Result<Self> {
        let d: usize = blocks.iter().map(|(a, b)| a * b).sum();
        if v.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "block structure has dimension {d}, unitary is {:?}",
                v.shape()
            )));
        }
        let mut basis = Vec::new();
        let mut off = 0;
        for &(da, db) in blocks {
            let norm = (db as f64).sqrt();
            for i in 0..da {
                for j in 0..da {
                    let local = kron(&matrix_unit(da, i, j), &identity(db)).unscale(norm);
                    let mut m = zeros(d, d);
                    m.view_mut((off, off), (da * db, da * db)).copy_from(&local);
                    basis.push(v.adjoint() * m * v);
                }
            }
            off += da * db;
        }
        Ok(StarAlgebra {
            dim: d,
            generators: basis.clone(),
            basis,
        })
    }

    /// Builds an algebra from a spanning set that is already closed; the
    /// set is orthonormalized but not closed further.
    pub(crate) fn from_closed_span(d: usize, span: Vec<CMatrix>, tol: &Tolerance) -> Self {
        let basis = gram_schmidt_hs(&span, tol);
        StarAlgebra {
            dim: d,
            generators: span,
            basis,
        }
    }
}

/// Smallest unital *-algebra containing `gens`.
pub fn generate_algebra(d: usize, gens: &[CMatrix], tol: &Tolerance) -> Result<StarAlgebra> {
    if d == 0 {
        return Err(Error::InvalidInput(
            "algebra dimension must be positive".into(),
        ));
    }
    if let Some(g) = gens.iter().find(|g| g.shape() != (d, d)) {
        return Err(Error::DimensionMismatch(format!(
            "generator of shape {:?} in M_{d}",
            g.shape()
        )));
    }
    let mut seed = vec![identity(d)];
    for g in gens {
        seed.push(g.clone());
        seed.push(g.adjoint());
    }
    let seed = gram_schmidt_hs(&seed, tol);
    let mut basis = seed.clone();
    let mut frontier = 0;
    // Words in a *-closed set span a *-algebra; extend by left multiplication.
    while frontier < basis.len() && basis.len() < d * d {
        let end = basis.len();
        for k in frontier..end {
            for s in &seed {
                let p = s * &basis[k];
                if let Some(b) = orthonormal_residual(&basis, &p, tol) {
                    basis.push(b);
                }
            }
        }
        frontier = end;
    }
    Ok(StarAlgebra {
        dim: d,
        basis,
        generators: gens.to_vec(),
    })
}

/// `{X : XG = GX for all G in a}`.
pub fn commutant(a: &StarAlgebra, tol: &Tolerance) -> Result<StarAlgebra> {
    let d = a.dim;
    let id = identity(d);
    let rows: Vec<CMatrix> = a
        .basis
        .iter()
        .map(|g| kron(&id, g) - kron(&g.transpose(), &id))
        .collect();
    let ns = nullspace_of_stack(rows.iter(), d * d, tol)?;
    let span = (0..ns.ncols())
        .map(|k| {
            unvec(
                &CMatrix::from_column_slice(d * d, 1, ns.column(k).as_slice()),
                d,
                d,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StarAlgebra::from_closed_span(d, span, tol))
}

/// True iff `a″` and `a` have the same span.
pub fn double_commutant_check(a: &StarAlgebra, tol: &Tolerance) -> Result<bool> {
    let aa = commutant(&commutant(a, tol)?, tol)?;
    Ok(aa.span_dim() == a.span_dim()
        && a.basis
            .iter()
            .all(|b| aa.membership_residual(b) <= tol.eq_tol)
        && aa
            .basis
            .iter()
            .all(|b| a.membership_residual(b) <= tol.eq_tol))
}

/// `a ∩ a′`, solved in the coefficient space of `a`'s basis.
pub fn center(a: &StarAlgebra, tol: &Tolerance) -> Result<StarAlgebra> {
    let n = a.basis.len();
    let d = a.dim;
    let rows: Vec<CMatrix> = a
        .basis
        .iter()
        .map(|bj| {
            let mut m = zeros(d * d, n);
            for (i, bi) in a.basis.iter().enumerate() {
                m.set_column(i, &vec(&commutator(bi, bj)).column(0));
            }
            m
        })
        .collect();
    let ns = nullspace_of_stack(rows.iter(), n, tol)?;
    let span = (0..ns.ncols())
        .map(|k| {
            a.basis
                .iter()
                .enumerate()
                .fold(zeros(d, d), |acc, (i, b)| acc + b * ns[(i, k)])
        })
        .collect();
    Ok(StarAlgebra::from_closed_span(d, span, tol))
}
