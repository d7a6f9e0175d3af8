use num_complex::Complex64;
use rayon::prelude::*;

use super::isotypic::{twisted_intertwiners, IsotypicData, Twist};
use crate::error::{Error, Result};
use crate::numerics::random::{random_unitary, Rng, SeedSplitter};
use crate::numerics::{identity, matrix_unit, unitarity_residual, zeros, CMatrix, Tolerance};
use crate::star_algebra::{commutant, generate_algebra, BlockDecomposition};
use rand::Rng as _;

/// One coset `U_π U′` of the adversarial group.
#[derive(Debug, Clone)]
pub struct TwistedPermutation {
    /// Block `k` is sent to block `perm[k]`.
    pub perm: Vec<usize>,
    /// `U_π U_g U_π† = ω(g) U_g`.
    pub omega: Vec<Complex64>,
    /// `T_{π(k),k}` for each `k`.
    pub intertwiners: Vec<CMatrix>,
    /// `S_{π(k),k}`; identities in the block-local bases.
    pub multiplicity_isometries: Vec<CMatrix>,
    pub unitary: CMatrix,
}

/// A character whose induced block map fails to be an admissible permutation.
#[derive(Debug, Clone)]
pub struct ExcludedTwist {
    pub omega: Vec<Complex64>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct AdversarialGroupStructure {
    pub commutant_basis: Vec<CMatrix>,
    pub permutations: Vec<TwistedPermutation>,
    pub excluded: Vec<ExcludedTwist>,
    decomposition: BlockDecomposition,
}

impl AdversarialGroupStructure {
    /// Index of the coset containing `v`, when `v = U_π V₀` with `V₀ ∈ U′`.
    pub fn membership(&self, v: &CMatrix, tol: &Tolerance) -> Option<usize> {
        if v.shape() != self.decomposition.unitary.shape() || unitarity_residual(v) > tol.eq_tol {
            return None;
        }
        self.permutations.iter().position(|p| {
            let v0 = p.unitary.adjoint() * v;
            self.decomposition.commutant_parts(&v0).1 <= 10.0 * tol.eq_tol
        })
    }

    /// Random element `U_π V₀` with `π` uniform over the listed cosets.
    pub fn sample(&self, rng: &mut Rng) -> CMatrix {
        let p = &self.permutations[rng.random_range(0..self.permutations.len())];
        let parts: Vec<CMatrix> = self
            .decomposition
            .blocks
            .iter()
            .map(|&(_, m)| random_unitary(m, rng))
            .collect();
        let v0 = self
            .decomposition
            .embed_commutant(&parts)
            .expect("block shapes match");
        &p.unitary * v0
    }

    /// True iff the listed permutations commute pairwise.
    pub fn permutations_commute(&self) -> bool {
        let compose = |a: &[usize], b: &[usize]| b.iter().map(|&k| a[k]).collect::<Vec<_>>();
        self.permutations.iter().all(|p| {
            self.permutations
                .iter()
                .all(|q| compose(&p.perm, &q.perm) == compose(&q.perm, &p.perm))
        })
    }

    /// Dimension of the commutant of the whole adversarial group; 1 means irreducible.
    pub fn group_commutant_dim(&self, tol: &Tolerance) -> Result<usize> {
        let mut gens: Vec<CMatrix> = self.commutant_basis.clone();
        gens.extend(self.permutations.iter().map(|p| p.unitary.clone()));
        let d = self.decomposition.dim();
        Ok(commutant(&generate_algebra(d, &gens, tol)?, tol)?.span_dim())
    }
}

/// Builds the adversarial group `𝒜 ⋉ U′` of the representation in `iso`.
pub fn adversarial_group(
    iso: &IsotypicData,
    seed: u64,
    tol: &Tolerance,
) -> Result<AdversarialGroupStructure> {
    let n = iso.blocks.len();
    let dec = &iso.decomposition;
    let split = SeedSplitter::new(seed);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .filter(|&(j, k)| iso.blocks[j].dim == iso.blocks[k].dim)
        .collect();
    let found: Vec<(usize, usize, Vec<Twist>)> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let s = split.child_seed(&format!("twist-{j}-{k}"));
            twisted_intertwiners(iso, j, k, s, tol).map(|t| (j, k, t))
        })
        .collect::<Result<_>>()?;

    // Group solutions by character.
    let close = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() <= tol.cluster_gap())
    };
    let mut characters: Vec<Vec<Complex64>> = Vec::new();
    for (_, _, twists) in &found {
        for t in twists {
            if !characters.iter().any(|c| close(c, &t.omega)) {
                characters.push(t.omega.clone());
            }
        }
    }

    let mut permutations = Vec::new();
    let mut excluded = Vec::new();
    for omega in characters {
        check_multiplicative(&omega, iso.table(), tol)?;
        let mut image: Vec<Option<(usize, CMatrix)>> = vec![None; n];
        for (j, k, twists) in &found {
            if let Some(t) = twists.iter().find(|t| close(&t.omega, &omega)) {
                image[*k] = Some((*j, t.x.clone()));
            }
        }
        match admissible(&image, iso) {
            Ok(()) => {
                let (perm, intertwiners): (Vec<usize>, Vec<CMatrix>) =
                    image.into_iter().map(|e| e.expect("checked total")).unzip();
                let multiplicity_isometries: Vec<CMatrix> =
                    iso.blocks.iter().map(|b| identity(b.mult)).collect();
                let unitary = assemble(dec, &perm, &intertwiners);
                permutations.push(TwistedPermutation {
                    perm,
                    omega,
                    intertwiners,
                    multiplicity_isometries,
                    unitary,
                });
            }
            Err(reason) => excluded.push(ExcludedTwist { omega, reason }),
        }
    }
    let id: Vec<usize> = (0..n).collect();
    permutations.sort_by(|p, q| {
        let trivial = |t: &TwistedPermutation| {
            t.perm != id || t.omega.iter().any(|w| (w - 1.0).norm() > 1e-6)
        };
        trivial(p)
            .cmp(&trivial(q))
            .then_with(|| p.perm.cmp(&q.perm))
            .then_with(|| {
                let key =
                    |t: &TwistedPermutation| t.omega.iter().map(|w| w.arg()).collect::<Vec<_>>();
                key(p)
                    .partial_cmp(&key(q))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    if permutations.first().map(|p| p.perm != id).unwrap_or(true) {
        return Err(Error::Numeric(
            "identity coset missing from adversarial group".into(),
        ));
    }

    let mut commutant_basis = Vec::new();
    for (k, b) in iso.blocks.iter().enumerate() {
        for m in 0..b.mult {
            for l in 0..b.mult {
                let mut parts: Vec<CMatrix> =
                    iso.blocks.iter().map(|x| zeros(x.mult, x.mult)).collect();
                parts[k] = matrix_unit(b.mult, m, l).unscale((b.dim as f64).sqrt());
                commutant_basis.push(dec.embed_commutant(&parts)?);
            }
        }
    }

    Ok(AdversarialGroupStructure {
        commutant_basis,
        permutations,
        excluded,
        decomposition: dec.clone(),
    })
}

fn check_multiplicative(omega: &[Complex64], table: &[Vec<usize>], tol: &Tolerance) -> Result<()> {
    for (a, row) in table.iter().enumerate() {
        for (b, &ab) in row.iter().enumerate() {
            if (omega[ab] - omega[a] * omega[b]).norm() > 10.0 * tol.eq_tol {
                return Err(Error::Numeric(format!(
                    "character is not multiplicative at ({a},{b})"
                )));
            }
        }
    }
    Ok(())
}

fn admissible(
    image: &[Option<(usize, CMatrix)>],
    iso: &IsotypicData,
) -> std::result::Result<(), String> {
    let n = image.len();
    let mut hit = vec![false; n];
    for (k, e) in image.iter().enumerate() {
        let Some((j, _)) = e else {
            return Err(format!("irrep {k} has no twisted partner"));
        };
        if hit[*j] {
            return Err(format!("irrep {j} is hit twice"));
        }
        hit[*j] = true;
        if iso.blocks[*j].mult != iso.blocks[k].mult {
            return Err(format!(
                "multiplicities differ between irreps {k} ({}) and {j} ({})",
                iso.blocks[k].mult, iso.blocks[*j].mult
            ));
        }
    }
    Ok(())
}

/// `U_π = U† (Σₖ T_{π(k),k} ⊗ I_{Mₖ} : block k → block π(k)) U`.
fn assemble(dec: &BlockDecomposition, perm: &[usize], t: &[CMatrix]) -> CMatrix {
    let d = dec.dim();
    let offsets = dec.offsets();
    let mut m = zeros(d, d);
    for (k, &j) in perm.iter().enumerate() {
        let (r, mult) = dec.blocks[k];
        for a in 0..r {
            for b in 0..r {
                for s in 0..mult {
                    m[(offsets[j] + a * mult + s, offsets[k] + b * mult + s)] = t[k][(a, b)];
                }
            }
        }
    }
    dec.unitary.adjoint() * m * &dec.unitary
}
