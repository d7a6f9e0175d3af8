use std::collections::VecDeque;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::channels::named::identity_channel;
use crate::channels::{Channel, StateDM};
use crate::error::{Error, Result};
use crate::numerics::index::ApproxIndex;
use crate::numerics::{max_abs_diff, CMatrix, MatrixJson, Tolerance};

/// A chain `ψ₁ ~ ψ₂ ~ … ~ ψₙ` with `ℬᵢ(ψᵢ) = ℬ̃ᵢ(ψᵢ₊₁)` for each link.
///
/// A single-state chain carries one self-link `ℬ(ψ₁) = ℬ̃(ψ₁)`.
#[derive(Debug, Clone)]
pub struct ChainCertificate {
    pub states: Vec<StateDM>,
    pub witnesses: Vec<(Channel, Channel)>,
    /// Generator indices of each witness, applied left to right.
    pub words: Vec<(Vec<usize>, Vec<usize>)>,
}

impl ChainCertificate {
    /// Number of states in the chain.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest link residual `‖ℬᵢ(ψᵢ) − ℬ̃ᵢ(ψᵢ₊₁)‖`.
    pub fn max_residual(&self) -> Result<f64> {
        let expected = self.states.len().saturating_sub(1).max(1);
        if self.states.is_empty() || self.witnesses.len() != expected {
            return Err(Error::InvalidInput("malformed chain certificate".into()));
        }
        let mut worst: f64 = 0.0;
        for (i, (b, bt)) in self.witnesses.iter().enumerate() {
            let left = &self.states[i];
            let right = self.states.get(i + 1).unwrap_or(left);
            let res = max_abs_diff(b.apply(left)?.matrix(), bt.apply(right)?.matrix());
            worst = worst.max(res);
        }
        Ok(worst)
    }

    pub fn verify(&self, tol: &Tolerance) -> Result<bool> {
        Ok(self.max_residual()? <= 10.0 * tol.eq_tol)
    }
}

impl Serialize for ChainCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ChainCertificate", 2)?;
        let states: Vec<MatrixJson> = self
            .states
            .iter()
            .map(|r| MatrixJson::from(r.matrix()))
            .collect();
        st.serialize_field("states", &states)?;
        st.serialize_field("words", &self.words)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChainSearch {
    /// Longest chain, counted in states.
    pub max_len: usize,
    /// Longest adversary word.
    pub max_words: usize,
    /// Cap on distinct adversary words; exceeding it is a resource error.
    pub max_word_pool: usize,
}

impl Default for ChainSearch {
    fn default() -> Self {
        ChainSearch {
            max_len: 8,
            max_words: 6,
            max_word_pool: 256,
        }
    }
}

/// Searches for a degradation chain from `rho` to `sigma`.
///
/// `Ok(None)` means no chain was found within the bounds; it is not a proof
/// of inequivalence. Intermediate states are drawn from the images of the
/// endpoints under adversary words.
pub fn states_equivalent_by_chain(
    rho: &StateDM,
    sigma: &StateDM,
    adversary_gens: &[Channel],
    search: &ChainSearch,
    tol: &Tolerance,
) -> Result<Option<ChainCertificate>> {
    let d = rho.dim();
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch(
            "states of different dimension".into(),
        ));
    }
    if let Some(g) = adversary_gens
        .iter()
        .find(|g| g.dim_in() != d || g.dim_out() != d)
    {
        return Err(Error::DimensionMismatch(format!(
            "adversary channel {}→{} on dimension {d}",
            g.dim_in(),
            g.dim_out()
        )));
    }
    if rho.approx_eq(sigma, tol) {
        let id = identity_channel(d);
        return Ok(Some(ChainCertificate {
            states: vec![rho.clone()],
            witnesses: vec![(id.clone(), id)],
            words: vec![(Vec::new(), Vec::new())],
        }));
    }

    let words = enumerate_words(d, adversary_gens, search, tol)?;

    // Nodes: the endpoints and their images under every word.
    let mut nodes: Vec<CMatrix> = vec![rho.matrix().clone(), sigma.matrix().clone()];
    let mut node_index = ApproxIndex::new(d * d, tol);
    node_index.insert(&nodes[0], 0);
    node_index.insert(&nodes[1], 1);
    for start in [0, 1] {
        let base = nodes[start].clone();
        for (_, ch) in &words {
            let img = ch.apply_matrix(&base)?;
            if node_index.find(&img, &nodes).is_none() {
                node_index.insert(&img, nodes.len());
                nodes.push(img);
            }
        }
    }

    // Degradation images of every node, indexed for intersection queries.
    let mut images: Vec<CMatrix> = Vec::with_capacity(nodes.len() * words.len());
    let mut owner: Vec<(usize, usize)> = Vec::with_capacity(images.capacity());
    // images[n * words.len() + w] = word w applied to node n.
    let mut image_index = ApproxIndex::new(d * d, tol);
    for (n, x) in nodes.iter().enumerate() {
        for (w, (_, ch)) in words.iter().enumerate() {
            let img = ch.apply_matrix(x)?;
            image_index.insert(&img, images.len());
            images.push(img);
            owner.push((n, w));
        }
    }

    // Breadth-first search from rho (node 0) to sigma (node 1).
    let mut parent: Vec<Option<(usize, usize, usize)>> = vec![None; nodes.len()];
    let mut depth = vec![usize::MAX; nodes.len()];
    depth[0] = 1;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        if x == 1 || depth[x] >= search.max_len {
            continue;
        }
        for wx in 0..words.len() {
            let img = &images[x * words.len() + wx];
            for j in image_index.matches(img, &images) {
                let (y, wy) = owner[j];
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some((x, wx, wy));
                    queue.push_back(y);
                }
            }
        }
    }
    if depth[1] == usize::MAX {
        return Ok(None);
    }

    let mut path = vec![1usize];
    let mut links = Vec::new();
    let mut cur = 1;
    while let Some((prev, wx, wy)) = parent[cur] {
        links.push((wx, wy));
        path.push(prev);
        cur = prev;
    }
    path.reverse();
    links.reverse();
    let cert = ChainCertificate {
        states: path
            .iter()
            .map(|&n| StateDM::new(nodes[n].clone(), tol))
            .collect::<Result<_>>()?,
        witnesses: links
            .iter()
            .map(|&(a, b)| (words[a].1.clone(), words[b].1.clone()))
            .collect(),
        words: links
            .iter()
            .map(|&(a, b)| (words[a].0.clone(), words[b].0.clone()))
            .collect(),
    };
    Ok(Some(cert))
}

/// Distinct adversary words up to `max_words` letters, identity first.
fn enumerate_words(
    d: usize,
    gens: &[Channel],
    search: &ChainSearch,
    tol: &Tolerance,
) -> Result<Vec<(Vec<usize>, Channel)>> {
    let mut words: Vec<(Vec<usize>, Channel)> = vec![(Vec::new(), identity_channel(d))];
    let mut superops: Vec<CMatrix> = vec![words[0].1.superop().clone()];
    let mut index = ApproxIndex::new(d * d * d * d, tol);
    index.insert(&superops[0], 0);
    let mut frontier = vec![0usize];
    for _ in 0..search.max_words {
        let mut next = Vec::new();
        for &w in &frontier {
            for (gi, g) in gens.iter().enumerate() {
                let ch = g.compose(&words[w].1)?;
                if index.find(ch.superop(), &superops).is_some() {
                    continue;
                }
                if words.len() >= search.max_word_pool {
                    return Err(Error::ResourceExceeded(format!(
                        "more than {} distinct adversary words",
                        search.max_word_pool
                    )));
                }
                let mut letters = words[w].0.clone();
                letters.push(gi);
                index.insert(ch.superop(), words.len());
                superops.push(ch.superop().clone());
                next.push(words.len());
                words.push((letters, ch));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(words)
}
