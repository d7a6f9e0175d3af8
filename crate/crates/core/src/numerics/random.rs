//! Seeded random matrices. Every randomized routine in the crate draws from
//! an explicit [`Rng`]; nothing touches thread-local entropy.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{c, zeros, CMatrix, Tolerance};

pub type Rng = ChaCha8Rng;

/// Derives independent, reproducible generators from one root seed.
///
/// Children are keyed by label, so adding a new consumer does not shift the
/// streams of existing ones.
#[derive(Debug, Clone, Copy)]
pub struct SeedSplitter {
    root: u64,
}

impl SeedSplitter {
    pub fn new(root: u64) -> Self {
        SeedSplitter { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn child_seed(&self, label: &str) -> u64 {
        // FNV-1a over the label, mixed with the root.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        splitmix(self.root ^ h)
    }

    pub fn child(&self, label: &str) -> Rng {
        Rng::seed_from_u64(self.child_seed(label))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix).
pub fn random_unitary(d: usize, rng: &mut Rng) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<_> = (0..d)
        .map(|k| {
            let z = r[(k, k)];
            if z.norm() == 0.0 {
                c(1.0, 0.0)
            } else {
                z / z.norm()
            }
        })
        .collect();
    q * super::diag(&phases)
}

/// Random isometry `ℂⁿ → ℂᵐ` (first `n` columns of a Haar unitary).
pub fn random_isometry(n: usize, m: usize, rng: &mut Rng) -> CMatrix {
    assert!(n <= m);
    random_unitary(m, rng).columns(0, n).into_owned()
}

pub fn random_hermitian(d: usize, rng: &mut Rng) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Random unit vector as a `d × 1` column.
pub fn random_state_vector(d: usize, rng: &mut Rng) -> CMatrix {
    let g = ginibre(d, 1, rng);
    let n = g.norm();
    g.unscale(n)
}

/// Random density matrix of rank at most `rank` (induced measure).
pub fn random_density(d: usize, rank: usize, rng: &mut Rng) -> CMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m.unscale(t)
}

/// Random column-stochastic matrix with strictly positive entries.
pub fn random_stochastic(d: usize, rng: &mut Rng) -> CMatrix {
    let mut p = zeros(d, d);
    for k in 0..d {
        let col: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
        let s: f64 = col.iter().sum();
        for j in 0..d {
            p[(j, k)] = c(col[j] / s, 0.0);
        }
    }
    p
}

/// Random Kraus set `{K_i}` with `Σ K_i† K_i = I`, from Ginibre operators
/// normalized by `S^{-1/2}`. `count` is raised to `⌈d_in / d_out⌉` when
/// fewer operators could not be trace preserving.
pub fn random_kraus(d_in: usize, d_out: usize, count: usize, rng: &mut Rng) -> Vec<CMatrix> {
    let tol = Tolerance::default();
    let count = count.max(d_in.div_ceil(d_out.max(1))).max(1);
    loop {
        let ops: Vec<CMatrix> = (0..count).map(|_| ginibre(d_out, d_in, rng)).collect();
        let s = ops
            .iter()
            .fold(zeros(d_in, d_in), |acc, k| acc + k.adjoint() * k);
        if let Ok(inv) = super::inverse_sqrt_psd(&s, &tol) {
            return ops.into_iter().map(|k| k * &inv).collect();
        }
    }
}

/// Uniform random probability vector of length `d`.
pub fn random_probabilities(d: usize, rng: &mut Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..d)
        .map(|_| -(rng.random::<f64>().max(1e-300)).ln())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_phases(d: usize, rng: &mut Rng) -> Vec<f64> {
    (0..d)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect()
}

/// Random diagonal matrix with entries drawn from the complex Gaussian.
pub fn random_diagonal(d: usize, rng: &mut Rng) -> CMatrix {
    let g = ginibre(d, 1, rng);
    super::diag(g.as_slice())
}

pub fn random_permutation(d: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Permutation matrix with `P|k⟩ = |perm[k]⟩`.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let d = perm.len();
    let mut m = zeros(d, d);
    for (k, &j) in perm.iter().enumerate() {
        m[(j, k)] = c(1.0, 0.0);
    }
    m
}
