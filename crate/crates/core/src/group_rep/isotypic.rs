use num_complex::Complex64;
use rand::SeedableRng;

use super::FiniteGroupRep;
use crate::error::{Error, Result};
use crate::numerics::random::Rng;
use crate::numerics::{kron, max_abs, max_abs_diff, unitarity_residual, unvec, CMatrix, Tolerance};
use crate::star_algebra::{block_decompose_with, generate_algebra, BlockDecomposition};

/// One irreducible component `U^{(j)}` together with its multiplicity.
#[derive(Debug, Clone)]
pub struct IrrepBlock {
    pub dim: usize,
    pub mult: usize,
    /// `U_g^{(j)}` indexed like the group elements.
    pub matrices: Vec<CMatrix>,
}

/// `U_g = U† (⊕ⱼ U_g^{(j)} ⊗ I_{Mⱼ}) U` with `U = decomposition.unitary`.
#[derive(Debug, Clone)]
pub struct IsotypicData {
    pub blocks: Vec<IrrepBlock>,
    pub decomposition: BlockDecomposition,
    generators: Vec<usize>,
    table: Vec<Vec<usize>>,
}

impl IsotypicData {
    pub fn unitary(&self) -> &CMatrix {
        &self.decomposition.unitary
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

/// Isotypic decomposition through the Wedderburn blocks of the algebra
/// generated by the representation.
pub fn isotypic_decompose(
    rep: &FiniteGroupRep,
    seed: u64,
    tol: &Tolerance,
) -> Result<IsotypicData> {
    let alg = generate_algebra(rep.dim(), &rep.generator_matrices(), tol)?;
    let mut rng = Rng::seed_from_u64(seed);
    let dec = block_decompose_with(&alg, &mut rng, tol)?;
    let mut matrices: Vec<Vec<CMatrix>> = vec![Vec::with_capacity(rep.order()); dec.blocks.len()];
    for u in rep.elements() {
        let (parts, res) = dec.algebra_parts(u);
        if res > 10.0 * tol.eq_tol {
            return Err(Error::Decomposition(format!(
                "group element off isotypic form by {res:.3e}"
            )));
        }
        for (slot, p) in matrices.iter_mut().zip(parts) {
            slot.push(p);
        }
    }
    let blocks = dec
        .blocks
        .iter()
        .zip(matrices)
        .map(|(&(dim, mult), matrices)| IrrepBlock {
            dim,
            mult,
            matrices,
        })
        .collect();
    Ok(IsotypicData {
        blocks,
        decomposition: dec,
        generators: rep.generator_indices().to_vec(),
        table: rep.table().to_vec(),
    })
}

/// A solution `X U_g^{(k)} = ω(g) U_g^{(j)} X` with `X` unitary.
#[derive(Debug, Clone)]
pub struct Twist {
    pub omega: Vec<Complex64>,
    pub x: CMatrix,
}

/// All twisted intertwiners from irrep `k` to irrep `j`, one per character.
pub fn twisted_intertwiners(
    iso: &IsotypicData,
    j: usize,
    k: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<Twist>> {
    let (bj, bk) = match (iso.blocks.get(j), iso.blocks.get(k)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidInput(format!(
                "irrep index ({j},{k}) out of range"
            )))
        }
    };
    if bj.dim != bk.dim {
        return Ok(Vec::new());
    }
    let r = bj.dim;
    // vec(U^{(j)†} X U^{(k)}) = (U^{(k)ᵀ} ⊗ U^{(j)†}) vec X.
    let w: Vec<CMatrix> = (0..iso.order())
        .map(|g| kron(&bk.matrices[g].transpose(), &bj.matrices[g].adjoint()))
        .collect();
    let gens: Vec<CMatrix> = iso.generators.iter().map(|&g| w[g].clone()).collect();
    let alg = generate_algebra(r * r, &gens, tol)?;
    let dec = block_decompose_with(&alg, &mut Rng::seed_from_u64(seed), tol)?;
    let mut out = Vec::new();
    for (block, off) in dec.blocks.iter().zip(dec.offsets()) {
        if block.0 != 1 {
            continue;
        }
        for col in 0..block.1 {
            let v = dec.unitary.row(off + col).adjoint();
            let v = CMatrix::from_column_slice(r * r, 1, v.as_slice());
            let omega: Vec<Complex64> =
                w.iter().map(|wg| (v.adjoint() * wg * &v)[(0, 0)]).collect();
            let x = canonical_phase(unvec(&v, r, r)?.scale((r as f64).sqrt()));
            if unitarity_residual(&x) > 10.0 * tol.eq_tol {
                return Err(Error::Numeric("twisted intertwiner is not unitary".into()));
            }
            for (g, (mk, mj)) in bk.matrices.iter().zip(&bj.matrices).enumerate() {
                let lhs = &x * mk;
                let rhs = mj * &x * omega[g];
                if max_abs_diff(&lhs, &rhs) > 10.0 * tol.eq_tol {
                    return Err(Error::Numeric(format!(
                        "twisted relation fails for element {g}"
                    )));
                }
            }
            out.push(Twist { omega, x });
        }
    }
    Ok(out)
}

/// Fixes the global phase so the first entry of maximal modulus is real positive.
fn canonical_phase(x: CMatrix) -> CMatrix {
    let m = max_abs(&x);
    let pivot = x
        .iter()
        .find(|z| z.norm() >= m * (1.0 - 1e-9))
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    x * phase
}
