use rand::SeedableRng;

use super::{center, StarAlgebra};
use crate::channels::{Channel, StateDM};
use crate::error::{Error, Result};
use crate::numerics::random::{random_kraus, Rng};
use crate::numerics::{
    eig_hermitian_unchecked, hermitian_part, identity, kron, matrix_unit, max_abs,
    partial_trace_first, partial_trace_second, polar_unitary, unitarity_residual, zeros, CMatrix,
    Tolerance,
};

const MAX_ATTEMPTS: usize = 5;

/// Change of basis exposing `⊕ₖ H_{Aₖ} ⊗ H_{Bₖ}`.
///
/// Column `offset(k) + i·d_Bₖ + j` of `unitary†` is the basis vector `|i⟩⊗|j⟩`
/// of block `k`.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub unitary: CMatrix,
    pub blocks: Vec<(usize, usize)>,
    pub projectors: Vec<CMatrix>,
}

impl BlockDecomposition {
    /// Blocks laid out consecutively in the computational basis.
    pub fn standard(blocks: &[(usize, usize)]) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(Error::InvalidInput(
                "block dimensions must be positive".into(),
            ));
        }
        let d: usize = blocks.iter().map(|(a, b)| a * b).sum();
        let mut projectors = Vec::with_capacity(blocks.len());
        let mut off = 0;
        for &(a, b) in blocks {
            let mut p = zeros(d, d);
            for i in off..off + a * b {
                p[(i, i)] = crate::numerics::ONE;
            }
            projectors.push(p);
            off += a * b;
        }
        Ok(BlockDecomposition {
            unitary: identity(d),
            blocks: blocks.to_vec(),
            projectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, &(a, b)| {
                let o = *acc;
                *acc += a * b;
                Some(o)
            })
            .collect()
    }

    fn conjugated(&self, m: &CMatrix) -> CMatrix {
        &self.unitary * m * self.unitary.adjoint()
    }

    /// `(Cₖ)ₖ` with `U m U† ≈ ⊕ₖ Cₖ ⊗ I`, and the max-abs deviation from that form.
    pub fn algebra_parts(&self, m: &CMatrix) -> (Vec<CMatrix>, f64) {
        self.parts(m, true)
    }

    /// `(Dₖ)ₖ` with `U m U† ≈ ⊕ₖ I ⊗ Dₖ`, and the max-abs deviation from that form.
    pub fn commutant_parts(&self, m: &CMatrix) -> (Vec<CMatrix>, f64) {
        self.parts(m, false)
    }

    fn parts(&self, m: &CMatrix, algebra_side: bool) -> (Vec<CMatrix>, f64) {
        let c = self.conjugated(m);
        let mut model = zeros(c.nrows(), c.ncols());
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (&(da, db), off) in self.blocks.iter().zip(self.offsets()) {
            let n = da * db;
            let local = c.view((off, off), (n, n)).into_owned();
            let (part, lifted) = if algebra_side {
                let p = partial_trace_second(&local, da, db).unscale(db as f64);
                let l = kron(&p, &identity(db));
                (p, l)
            } else {
                let p = partial_trace_first(&local, da, db).unscale(da as f64);
                let l = kron(&identity(da), &p);
                (p, l)
            };
            model.view_mut((off, off), (n, n)).copy_from(&lifted);
            parts.push(part);
        }
        let residual = max_abs(&(c - model));
        (parts, residual)
    }

    /// `U† (⊕ₖ Cₖ ⊗ I) U`.
    pub fn embed_algebra(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        self.embed(parts, true)
    }

    /// `U† (⊕ₖ I ⊗ Dₖ) U`.
    pub fn embed_commutant(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        self.embed(parts, false)
    }

    fn embed(&self, parts: &[CMatrix], algebra_side: bool) -> Result<CMatrix> {
        if parts.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} parts for {} blocks",
                parts.len(),
                self.blocks.len()
            )));
        }
        let d = self.dim();
        let mut m = zeros(d, d);
        for ((&(da, db), off), p) in self.blocks.iter().zip(self.offsets()).zip(parts) {
            let want = if algebra_side { da } else { db };
            if p.shape() != (want, want) {
                return Err(Error::DimensionMismatch(format!(
                    "block part of shape {:?}, expected {want}x{want}",
                    p.shape()
                )));
            }
            let lifted = if algebra_side {
                kron(p, &identity(db))
            } else {
                kron(&identity(da), p)
            };
            m.view_mut((off, off), (da * db, da * db))
                .copy_from(&lifted);
        }
        Ok(self.unitary.adjoint() * m * &self.unitary)
    }
}

/// Wedderburn decomposition of `a`, seeded for reproducibility.
pub fn block_decompose(a: &StarAlgebra, seed: u64, tol: &Tolerance) -> Result<BlockDecomposition> {
    block_decompose_with(a, &mut Rng::seed_from_u64(seed), tol)
}

pub fn block_decompose_with(
    a: &StarAlgebra,
    rng: &mut Rng,
    tol: &Tolerance,
) -> Result<BlockDecomposition> {
    let z = center(a, tol)?;
    let mut last = String::new();
    for _ in 0..MAX_ATTEMPTS {
        match attempt(a, &z, rng, tol) {
            Ok(dec) => return Ok(dec),
            Err(e) => last = e,
        }
    }
    Err(Error::Decomposition(format!(
        "no consistent block structure after {MAX_ATTEMPTS} attempts: {last}"
    )))
}

struct RawBlock {
    d_a: usize,
    d_b: usize,
    columns: CMatrix,
    projector: CMatrix,
    moment: f64,
}

fn attempt(
    a: &StarAlgebra,
    z: &StarAlgebra,
    rng: &mut Rng,
    tol: &Tolerance,
) -> std::result::Result<BlockDecomposition, String> {
    let d = a.dim();
    let gap = tol.cluster_gap();
    let central = eig_hermitian_unchecked(&z.random_hermitian_element(rng));
    let mut raw = Vec::new();
    for cluster in central.clusters(gap) {
        let e = central.columns(&cluster);
        let n = e.ncols();
        let h = hermitian_part(&(e.adjoint() * a.random_hermitian_element(rng) * &e));
        let local = eig_hermitian_unchecked(&h);
        let groups = local.clusters(gap);
        let d_b = groups[0].len();
        if groups.iter().any(|g| g.len() != d_b) {
            return Err("eigenvalue multiplicities are not uniform inside a block".into());
        }
        let d_a = groups.len();
        let x = e.adjoint() * a.random_element(rng) * &e;
        let f1 = local.columns(&groups[0]);
        let mut cols = zeros(n, n);
        cols.view_mut((0, 0), (n, d_b)).copy_from(&f1);
        let scale = max_abs(&x).max(f64::MIN_POSITIVE);
        for (i, g) in groups.iter().enumerate().skip(1) {
            let fi = local.columns(g);
            let (u, smin) = polar_unitary(&(fi.adjoint() * &x * &f1)).map_err(|e| e.to_string())?;
            if smin <= gap * scale {
                return Err("rank-deficient transfer between isotypic eigenspaces".into());
            }
            cols.view_mut((0, i * d_b), (n, d_b)).copy_from(&(fi * u));
        }
        let columns = &e * cols;
        let projector = &e * e.adjoint();
        let moment = (0..d).map(|i| i as f64 * projector[(i, i)].re).sum();
        raw.push(RawBlock {
            d_a,
            d_b,
            columns,
            projector,
            moment,
        });
    }
    raw.sort_by(|p, q| {
        (p.d_a, p.d_b)
            .cmp(&(q.d_a, q.d_b))
            .then(p.moment.total_cmp(&q.moment))
    });
    let mut basis = zeros(d, d);
    let mut off = 0;
    for b in &raw {
        basis
            .view_mut((0, off), (d, b.columns.ncols()))
            .copy_from(&b.columns);
        off += b.columns.ncols();
    }
    let dec = BlockDecomposition {
        unitary: basis.adjoint(),
        blocks: raw.iter().map(|b| (b.d_a, b.d_b)).collect(),
        projectors: raw.into_iter().map(|b| b.projector).collect(),
    };
    let span: usize = dec.blocks.iter().map(|(a, _)| a * a).sum();
    if span != a.span_dim() {
        return Err(format!(
            "blocks account for dimension {span}, algebra has {}",
            a.span_dim()
        ));
    }
    if unitarity_residual(&dec.unitary) > tol.eq_tol {
        return Err("assembled basis is not unitary".into());
    }
    for b in a.basis() {
        let (_, res) = dec.algebra_parts(b);
        if res > 10.0 * tol.eq_tol {
            return Err(format!("algebra element off block form by {res:.3e}"));
        }
    }
    Ok(dec)
}

/// Marginal of a state on one block after tracing out the commutant factor.
#[derive(Debug, Clone)]
pub struct BlockMarginal {
    pub weight: f64,
    /// Normalized block state; maximally mixed placeholder when `zero`.
    pub state: StateDM,
    pub zero: bool,
}

/// `Tr_𝖡(ρ) = ⊕ₖ Tr_{Bₖ}[Πₖ ρ Πₖ]`, split into weights and normalized block states.
pub fn partial_trace_over_commutant(
    dec: &BlockDecomposition,
    rho: &StateDM,
    tol: &Tolerance,
) -> Result<Vec<BlockMarginal>> {
    if rho.dim() != dec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for decomposition of dimension {}",
            rho.dim(),
            dec.dim()
        )));
    }
    let c = dec.conjugated(rho.matrix());
    Ok(dec
        .blocks
        .iter()
        .zip(dec.offsets())
        .map(|(&(da, db), off)| {
            let n = da * db;
            let local = c.view((off, off), (n, n)).into_owned();
            let marg = partial_trace_second(&local, da, db);
            let weight = marg.trace().re;
            if weight <= tol.rank_tol {
                BlockMarginal {
                    weight,
                    state: StateDM::maximally_mixed(da),
                    zero: true,
                }
            } else {
                BlockMarginal {
                    weight,
                    state: StateDM::new_unchecked(hermitian_part(&marg).unscale(weight)),
                    zero: false,
                }
            }
        })
        .collect())
}

/// Per-block channels `𝒜ₖ` of a channel whose Kraus operators lie in the algebra.
pub fn restrict_homomorphism(
    dec: &BlockDecomposition,
    ch: &Channel,
    tol: &Tolerance,
) -> Result<Vec<Channel>> {
    if ch.dim_in() != dec.dim() || ch.dim_out() != dec.dim() {
        return Err(Error::DimensionMismatch(
            "channel does not act on the decomposed space".into(),
        ));
    }
    let mut per_block: Vec<Vec<CMatrix>> = vec![Vec::new(); dec.blocks.len()];
    for k in ch.kraus() {
        let (parts, res) = dec.algebra_parts(k);
        if res > tol.eq_tol {
            return Err(Error::NotInAlgebra(res));
        }
        for (slot, p) in per_block.iter_mut().zip(parts) {
            if max_abs(&p) > tol.rank_tol {
                slot.push(p);
            }
        }
    }
    per_block
        .into_iter()
        .map(|ops| Channel::from_kraus(ops, tol))
        .collect()
}

/// `𝒟₀(ρ) = ⊕ₖ Tr_{Bₖ}[Πₖ ρ Πₖ] ⊗ I_{Bₖ}/d_{Bₖ}`; its Kraus operators lie in the commutant.
pub fn d0_channel(dec: &BlockDecomposition) -> Channel {
    let mut kraus = Vec::new();
    for (k, &(_, db)) in dec.blocks.iter().enumerate() {
        for m in 0..db {
            for n in 0..db {
                let mut parts: Vec<CMatrix> =
                    dec.blocks.iter().map(|&(_, b)| zeros(b, b)).collect();
                parts[k] = matrix_unit(db, m, n).unscale((db as f64).sqrt());
                kraus.push(dec.embed_commutant(&parts).expect("shapes match"));
            }
        }
    }
    Channel::assemble(dec.dim(), dec.dim(), kraus)
}

/// Random channel with Kraus operators `⊕ₖ I ⊗ Dᵢₖ` in the commutant.
pub fn random_commutant_channel(dec: &BlockDecomposition, count: usize, rng: &mut Rng) -> Channel {
    random_blockwise(dec, count, rng, false)
}

/// Random channel with Kraus operators `⊕ₖ Cᵢₖ ⊗ I` in the algebra.
pub fn random_algebra_channel(dec: &BlockDecomposition, count: usize, rng: &mut Rng) -> Channel {
    random_blockwise(dec, count, rng, true)
}

fn random_blockwise(
    dec: &BlockDecomposition,
    count: usize,
    rng: &mut Rng,
    algebra_side: bool,
) -> Channel {
    let count = count.max(1);
    let per_block: Vec<Vec<CMatrix>> = dec
        .blocks
        .iter()
        .map(|&(da, db)| {
            let n = if algebra_side { da } else { db };
            random_kraus(n, n, count, rng)
        })
        .collect();
    let kraus = (0..count)
        .map(|i| {
            let parts: Vec<CMatrix> = per_block.iter().map(|ks| ks[i].clone()).collect();
            dec.embed(&parts, algebra_side).expect("shapes match")
        })
        .collect();
    Channel::assemble(dec.dim(), dec.dim(), kraus)
}
