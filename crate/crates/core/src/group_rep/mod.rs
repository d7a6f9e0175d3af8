//! Unitary representations of finite groups, their isotypic decomposition and
//! the group of unitaries whose channels commute with every `𝒰_g`.

mod adversarial;
mod isotypic;

pub use adversarial::{
    adversarial_group, AdversarialGroupStructure, ExcludedTwist, TwistedPermutation,
};
pub use isotypic::{isotypic_decompose, twisted_intertwiners, IrrepBlock, IsotypicData, Twist};

use crate::error::{Error, Result};
use crate::numerics::index::ApproxIndex;
use crate::numerics::{identity, kron, max_abs, unitarity_residual, CMatrix, Tolerance};

/// A finite matrix group with its multiplication table.
#[derive(Debug, Clone)]
pub struct FiniteGroupRep {
    dim: usize,
    elements: Vec<CMatrix>,
    table: Vec<Vec<usize>>,
    identity: usize,
    generators: Vec<usize>,
}

impl FiniteGroupRep {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// `table[a][b]` is the index of `U_a U_b`.
    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    /// Indices of the generators the group was closed from.
    pub fn generator_indices(&self) -> &[usize] {
        &self.generators
    }

    pub fn inverse_index(&self, a: usize) -> usize {
        self.table[a]
            .iter()
            .position(|&p| p == self.identity)
            .expect("group tables contain inverses")
    }

    pub fn generator_matrices(&self) -> Vec<CMatrix> {
        self.generators
            .iter()
            .map(|&g| self.elements[g].clone())
            .collect()
    }
}

/// Closes `gens` under multiplication, failing beyond `max_order` elements.
pub fn close_group(
    d: usize,
    gens: &[CMatrix],
    max_order: usize,
    tol: &Tolerance,
) -> Result<FiniteGroupRep> {
    for g in gens {
        if g.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "generator of shape {:?} in dimension {d}",
                g.shape()
            )));
        }
        let res = unitarity_residual(g);
        if res > tol.eq_tol {
            return Err(Error::NotUnitary(res));
        }
    }
    let mut elements = vec![identity(d)];
    let mut lookup = ApproxIndex::new(d * d, tol);
    lookup.insert(&elements[0], 0);
    let mut generators = Vec::with_capacity(gens.len());
    for g in gens {
        let idx = match lookup.find(g, &elements) {
            Some(i) => i,
            None => {
                elements.push(g.clone());
                lookup.insert(g, elements.len() - 1);
                elements.len() - 1
            }
        };
        generators.push(idx);
    }
    let mut frontier = 0;
    while frontier < elements.len() {
        let end = elements.len();
        for e in frontier..end {
            for g in gens {
                let p = g * &elements[e];
                if lookup.find(&p, &elements).is_none() {
                    if elements.len() >= max_order {
                        return Err(Error::ResourceExceeded(format!(
                            "group order exceeds {max_order}"
                        )));
                    }
                    lookup.insert(&p, elements.len());
                    elements.push(p);
                }
            }
        }
        frontier = end;
    }
    let n = elements.len();
    let mut table = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let p = &elements[a] * &elements[b];
            table[a][b] = lookup
                .find(&p, &elements)
                .ok_or_else(|| Error::Numeric("group closure drifted beyond tolerance".into()))?;
        }
    }
    Ok(FiniteGroupRep {
        dim: d,
        elements,
        table,
        identity: 0,
        generators,
    })
}

/// True iff the channel of `v` commutes with the channel of every `U_g`.
pub fn verify_channel_commutation(
    rep: &FiniteGroupRep,
    v: &CMatrix,
    tol: &Tolerance,
) -> Result<bool> {
    if v.shape() != (rep.dim, rep.dim) {
        return Err(Error::DimensionMismatch("unitary dimension".into()));
    }
    let res = unitarity_residual(v);
    if res > tol.eq_tol {
        return Err(Error::NotUnitary(res));
    }
    let sv = kron(&v.conjugate(), v);
    Ok(rep.elements.iter().all(|u| {
        let su = kron(&u.conjugate(), u);
        max_abs(&(&sv * &su - &su * &sv)) <= tol.eq_tol
    }))
}
