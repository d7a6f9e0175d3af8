use proptest::prelude::*;
use subcarve::channels::StateDM;
use subcarve::numerics::random::{
    random_density, random_isometry, random_probabilities, random_unitary, SeedSplitter,
};
use subcarve::numerics::{isometry_residual, max_abs_diff, Tolerance};
use subcarve::purification::{
    connect_purifications, extend_isometry, purify, BlockReduced, Direction,
};
use subcarve::star_algebra::{partial_trace_over_commutant, BlockDecomposition};

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Blocks `(d_A, m)` with `m ≥ d_A` so every reduced state is purifiable.
fn blocks() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec(
        (1usize..3, 0usize..2).prop_map(|(a, extra)| (a, a + extra)),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn purification_reproduces_block_marginals(blocks in blocks(), seed in any::<u64>()) {
        let t = tol();
        let mut rng = SeedSplitter::new(seed).child("reduced");
        let dec = BlockDecomposition::standard(&blocks).unwrap();
        let p = random_probabilities(blocks.len(), &mut rng);
        let reduced: Vec<BlockReduced> = blocks
            .iter()
            .zip(&p)
            .map(|(&(a, _), &p)| BlockReduced { p, rho: random_density(a, a, &mut rng) })
            .collect();
        let w = purify(&dec, &reduced, &t).unwrap();
        prop_assert!((w.global_pure.norm() - 1.0).abs() < 1e-10);
        let marg = partial_trace_over_commutant(&dec, &StateDM::pure(&w.global_pure).unwrap(), &t).unwrap();
        for (m, r) in marg.iter().zip(&reduced) {
            prop_assert!((m.weight - r.p).abs() < 1e-9);
            if r.p > 1e-6 {
                prop_assert!(max_abs_diff(m.state.matrix(), &r.rho) < 1e-8);
            }
        }

        let parts = dec.blocks.iter().map(|&(_, m)| random_unitary(m, &mut rng)).collect::<Vec<_>>();
        let second = dec.embed_commutant(&parts).unwrap() * &w.global_pure;
        let c = connect_purifications(&dec, &w.global_pure, &second, &t).unwrap();
        let u = c.connecting_unitary.unwrap();
        prop_assert!(max_abs_diff(&(&u * &w.global_pure), &second) < 1e-8);
        prop_assert!(dec.commutant_parts(&u).1 < 1e-8);
    }

    #[test]
    fn extended_isometry_connects(seed in any::<u64>(), m in 1usize..4, n1 in 0usize..3, n2 in 0usize..3) {
        let t = tol();
        let mut rng = SeedSplitter::new(seed).child("isometries");
        let v = random_isometry(m, m + n1, &mut rng);
        let vp = random_isometry(m, m + n2, &mut rng);
        let (dir, w) = extend_isometry(&v, &vp, &t).unwrap();
        prop_assert!(isometry_residual(&w) < 1e-9);
        match dir {
            Direction::Forward => prop_assert!(max_abs_diff(&(&w * &v), &vp) < 1e-9),
            Direction::Backward => prop_assert!(max_abs_diff(&(&w * &vp), &v) < 1e-9),
        }
        prop_assert_eq!(dir == Direction::Forward, n1 <= n2);
    }
}

#[test]
fn purification_rejects_reduced_rank_above_multiplicity() {
    let t = tol();
    let dec = BlockDecomposition::standard(&[(2, 1)]).unwrap();
    let reduced = [BlockReduced {
        p: 1.0,
        rho: subcarve::numerics::identity(2).unscale(2.0),
    }];
    assert!(purify(&dec, &reduced, &t).is_err());
}
