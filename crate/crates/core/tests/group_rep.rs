use proptest::prelude::*;
use subcarve::group_rep::{adversarial_group, close_group, isotypic_decompose};
use subcarve::numerics::random::{permutation_matrix, random_unitary, SeedSplitter};
use subcarve::numerics::{approx_eq, pauli_x, pauli_z, CMatrix, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn irreps(gens: &[CMatrix], seed: u64) -> Vec<(usize, usize)> {
    let t = tol();
    let rep = close_group(gens[0].nrows(), gens, 512, &t).unwrap();
    let iso = isotypic_decompose(&rep, seed, &t).unwrap();
    let mut v: Vec<(usize, usize)> = iso.blocks.iter().map(|b| (b.dim, b.mult)).collect();
    v.sort();
    v
}

// Character of the permutation representation of S3 is (3, 1, 0) on the classes
// (e, transpositions, 3-cycles): one trivial and one standard irrep.
#[test]
fn s3_permutation_representation() {
    let gens = [
        permutation_matrix(&[1, 0, 2]),
        permutation_matrix(&[1, 2, 0]),
    ];
    let t = tol();
    assert_eq!(close_group(3, &gens, 512, &t).unwrap().order(), 6);
    assert_eq!(irreps(&gens, 5), vec![(1, 1), (2, 1)]);
}

// Regular representation of Z3: three distinct characters, each once. Twisting
// by a character permutes them cyclically.
#[test]
fn z3_regular_representation() {
    let t = tol();
    let gens = [permutation_matrix(&[1, 2, 0])];
    assert_eq!(irreps(&gens, 2), vec![(1, 1); 3]);
    let rep = close_group(3, &gens, 512, &t).unwrap();
    let iso = isotypic_decompose(&rep, 2, &t).unwrap();
    let adv = adversarial_group(&iso, 3, &t).unwrap();
    assert_eq!(adv.permutations.len(), 3);
    assert!(adv.permutations_commute());
    assert_eq!(adv.commutant_basis.len(), 3);
}

#[test]
fn qubit_pauli_group_is_irreducible() {
    let t = tol();
    let rep = close_group(2, &[pauli_x(), pauli_z()], 512, &t).unwrap();
    assert_eq!(rep.order(), 8);
    assert_eq!(irreps(&[pauli_x(), pauli_z()], 0), vec![(2, 1)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn isotypic_data_is_basis_independent(seed in any::<u64>(), which in 0usize..3) {
        let t = tol();
        let base: Vec<CMatrix> = match which {
            0 => vec![permutation_matrix(&[1, 0, 2]), permutation_matrix(&[1, 2, 0])],
            1 => vec![permutation_matrix(&[1, 2, 0])],
            _ => vec![permutation_matrix(&[1, 0, 2])],
        };
        let mut rng = SeedSplitter::new(seed).child("basis");
        let v = random_unitary(3, &mut rng);
        let conj: Vec<CMatrix> = base.iter().map(|g| &v * g * v.adjoint()).collect();
        prop_assert_eq!(irreps(&conj, seed), irreps(&base, 0));
        let rep = close_group(3, &conj, 512, &t).unwrap();
        let iso = isotypic_decompose(&rep, seed, &t).unwrap();
        let total: usize = iso.blocks.iter().map(|b| b.dim * b.mult).sum();
        prop_assert_eq!(total, 3);
        let sq: usize = iso.blocks.iter().map(|b| b.dim * b.dim).sum();
        prop_assert!(sq <= rep.order());
    }

    #[test]
    fn twisted_permutations_rescale_the_representation(seed in any::<u64>()) {
        let t = tol();
        let mut rng = SeedSplitter::new(seed).child("basis");
        let v = random_unitary(3, &mut rng);
        let gens = [&v * permutation_matrix(&[1, 2, 0]) * v.adjoint()];
        let rep = close_group(3, &gens, 512, &t).unwrap();
        let iso = isotypic_decompose(&rep, seed, &t).unwrap();
        let adv = adversarial_group(&iso, seed, &t).unwrap();
        for p in &adv.permutations {
            for (g, w) in rep.elements().iter().zip(&p.omega) {
                let lhs = &p.unitary * g * p.unitary.adjoint();
                prop_assert!(approx_eq(&lhs, &g.map(|x| x * w), 1e-8));
            }
        }
        for _ in 0..4 {
            let u = adv.sample(&mut rng);
            prop_assert!(adv.membership(&u, &t).is_some());
        }
    }
}
