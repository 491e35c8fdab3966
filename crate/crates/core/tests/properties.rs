//! Algebraic and combinatorial invariants checked on random inputs.

use std::sync::Arc;

use proptest::prelude::*;

use oprank::partition::{is_convex, refine_to_p, refine_to_r};
use oprank::{
    build_eta, canonical_a, canonical_b_t_mod_op, closure, enumerate_p, enumerate_r,
    factor_op_over_o, factor_t_over_op, Budget, ChainContext, FactorTag, Family, Partition,
    Transformation,
};

/// A context with `n <= n_max` and a nonempty `Y`.
fn ctx_up_to(n_max: usize) -> impl Strategy<Value = Arc<ChainContext>> {
    (1..=n_max).prop_flat_map(|n| {
        (1u32..(1 << n)).prop_map(move |mask| {
            let y: Vec<usize> = (1..=n).filter(|x| mask & (1 << (x - 1)) != 0).collect();
            ChainContext::new(n, &y).unwrap()
        })
    })
}

/// A context with `1 < m < n`.
fn proper_ctx_up_to(n_max: usize) -> impl Strategy<Value = Arc<ChainContext>> {
    ctx_up_to(n_max).prop_filter("needs 1 < m < n", |c| c.m() >= 2 && c.m() < c.n())
}

fn map_in(ctx: &Arc<ChainContext>) -> impl Strategy<Value = Transformation> {
    let c = Arc::clone(ctx);
    prop::collection::vec(0..ctx.m(), ctx.n()).prop_map(move |idx| {
        Transformation::new(&c, idx.iter().map(|&i| c.y()[i]).collect()).unwrap()
    })
}

/// An orientation-preserving map: a rotation of a non-decreasing sequence.
fn op_map_in(ctx: &Arc<ChainContext>) -> impl Strategy<Value = Transformation> {
    let c = Arc::clone(ctx);
    (prop::collection::vec(0..ctx.m(), ctx.n()), 0..ctx.n()).prop_map(move |(mut idx, shift)| {
        idx.sort_unstable();
        idx.rotate_left(shift);
        Transformation::new(&c, idx.iter().map(|&i| c.y()[i]).collect()).unwrap()
    })
}

fn ctx_and_maps(
    n_max: usize,
    k: usize,
) -> impl Strategy<Value = (Arc<ChainContext>, Vec<Transformation>)> {
    ctx_up_to(n_max).prop_flat_map(move |c| {
        let maps = prop::collection::vec(map_in(&c), k);
        (Just(c), maps)
    })
}

fn partition(n_max: usize) -> impl Strategy<Value = Partition> {
    (1..=n_max)
        .prop_flat_map(|n| prop::collection::vec(0..n, n))
        .prop_map(|raw| Partition::from_labels(&raw).unwrap())
}

/// A member of `P_k` or `R_k` on `n <= n_max` points, with a target
/// `k <= m <= n - 1`.
fn family_member(n_max: usize, family: Family) -> impl Strategy<Value = (Partition, usize)> {
    (4..=n_max)
        .prop_flat_map(move |n| (Just(n), 2..n))
        .prop_map(move |(n, k)| {
            let members: Vec<Partition> = match family {
                Family::P => enumerate_p(n, k).unwrap().collect(),
                _ => enumerate_r(n, k).collect(),
            };
            (members, k, n)
        })
        .prop_filter("nonempty family", |(members, _, _)| !members.is_empty())
        .prop_flat_map(|(members, k, n)| (prop::sample::select(members), k..n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn composition_is_associative((_, fs) in ctx_and_maps(7, 3)) {
        let left = fs[0].compose(&fs[1]).unwrap().compose(&fs[2]).unwrap();
        let right = fs[0].compose(&fs[1].compose(&fs[2]).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn composition_applies_left_factor_first((_, fs) in ctx_and_maps(7, 2)) {
        let fg = fs[0].compose(&fs[1]).unwrap();
        for x in 1..=fg.n() {
            prop_assert_eq!(fg.apply(x), fs[1].apply(fs[0].apply(x)));
        }
    }

    #[test]
    fn rank_of_product_is_at_most_either_rank((_, fs) in ctx_and_maps(7, 2)) {
        let fg = fs[0].compose(&fs[1]).unwrap();
        prop_assert!(fg.rank() <= fs[0].rank().min(fs[1].rank()));
    }

    #[test]
    fn left_kernel_refines_product_kernel((_, fs) in ctx_and_maps(7, 2)) {
        let fg = fs[0].compose(&fs[1]).unwrap();
        prop_assert!(fs[0].kernel().refines(&fg.kernel()));
        prop_assert_eq!(fs[0].kernel().num_blocks(), fs[0].rank());
    }

    #[test]
    fn restriction_to_y_is_a_homomorphism((_, fs) in ctx_and_maps(7, 2)) {
        let fg = fs[0].compose(&fs[1]).unwrap();
        prop_assert_eq!(
            fg.restrict_to_y(),
            fs[0].restrict_to_y().compose(&fs[1].restrict_to_y()).unwrap()
        );
    }

    #[test]
    fn descent_test_matches_cut_scan_oracle((_, fs) in ctx_and_maps(8, 1)) {
        let f = &fs[0];
        prop_assert_eq!(f.is_orientation_preserving(), f.is_orientation_preserving_oracle());
        if f.is_order_preserving() {
            prop_assert!(f.is_orientation_preserving());
        }
    }

    #[test]
    fn rotations_of_sorted_sequences_are_orientation_preserving(
        (c, f, g) in ctx_up_to(8).prop_flat_map(|c| (Just(c.clone()), op_map_in(&c), op_map_in(&c)))
    ) {
        prop_assert!(f.is_orientation_preserving());
        prop_assert!(f.descents() <= 1);
        // OP(X,Y) is closed under composition.
        prop_assert!(f.compose(&g).unwrap().is_orientation_preserving());
        prop_assert!(build_eta(&c).is_orientation_preserving());
    }

    #[test]
    fn eta_restricts_to_an_m_cycle(c in ctx_up_to(8)) {
        let eta = build_eta(&c).restrict_to_y();
        prop_assert_eq!(eta.order(), Some(c.m()));
        for i in 1..=c.m() {
            prop_assert_eq!(eta.apply(c.a(i)), c.a(i % c.m() + 1));
        }
    }

    #[test]
    fn partition_families_partition_everything(p in partition(8)) {
        let blocks = p.blocks();
        let n = p.n();
        let all_convex = blocks.iter().all(|b| is_convex(b, n));
        let wraps = blocks[0].contains(&n)
            && !is_convex(&blocks[0], n)
            && blocks[1..].iter().all(|b| is_convex(b, n))
            && {
                // The first block is a prefix plus a suffix.
                let first = &blocks[0];
                let prefix = first.iter().enumerate().take_while(|&(i, &x)| x == i + 1).count();
                first[prefix..].iter().enumerate().all(|(i, &x)| x == n - (first.len() - prefix) + 1 + i)
            };
        let expected = if all_convex { Family::Q } else if wraps { Family::P } else { Family::R };
        prop_assert_eq!(p.family(), expected);
        prop_assert_eq!(Partition::parse(&p.to_string()).unwrap(), p.clone());
        prop_assert!(p.refines(&p));
    }

    #[test]
    fn refinement_to_p_lands_in_p_m((p, m) in family_member(8, Family::P)) {
        let q = refine_to_p(&p, m).unwrap();
        prop_assert_eq!(q.family(), Family::P);
        prop_assert_eq!(q.num_blocks(), m);
        prop_assert!(q.refines(&p));
    }

    #[test]
    fn refinement_to_r_stays_in_r((p, m) in family_member(8, Family::R)) {
        let q = refine_to_r(&p, m).unwrap();
        prop_assert_eq!(q.family(), Family::R);
        prop_assert_eq!(q.num_blocks(), m);
        prop_assert!(q.refines(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn op_words_multiply_back(
        (c, beta) in proper_ctx_up_to(8).prop_flat_map(|c| (Just(c.clone()), op_map_in(&c)))
    ) {
        let word = factor_op_over_o(&beta).unwrap();
        prop_assert_eq!(word.product(), Some(beta.clone()));
        let a = canonical_a(&c).unwrap();
        for f in word.factors() {
            match f.tag {
                FactorTag::BaseO => prop_assert!(f.map.is_order_preserving()),
                FactorTag::GeneratorA | FactorTag::EtaPower(_) => prop_assert!(a.contains(&f.map)),
                other => prop_assert!(false, "unexpected tag {:?}", other),
            }
        }
    }

    #[test]
    fn t_words_multiply_back(
        (c, gamma) in proper_ctx_up_to(6).prop_flat_map(|c| (Just(c.clone()), map_in(&c)))
    ) {
        let (b, _) = canonical_b_t_mod_op(&c).unwrap();
        let word = factor_t_over_op(&gamma, &b).unwrap();
        prop_assert_eq!(word.product(), Some(gamma.clone()));
        for f in word.factors() {
            match f.tag {
                FactorTag::BaseO => prop_assert!(f.map.is_order_preserving()),
                FactorTag::BaseOp => prop_assert!(f.map.is_orientation_preserving()),
                FactorTag::GeneratorB => prop_assert!(b.contains(&f.map)),
                FactorTag::EtaPower(_) => prop_assert_eq!(&f.map, &build_eta(&c)),
                FactorTag::GeneratorA => prop_assert!(false, "generator of A in a T word"),
            }
        }
    }

    #[test]
    fn closure_is_closed_idempotent_and_monotone(
        (_, fs) in ctx_and_maps(5, 3)
    ) {
        let budget = Budget::default();
        let small = closure(&fs[..2], None, &budget).unwrap().set;
        prop_assert!(small.verify_closed());
        for f in &fs[..2] {
            prop_assert!(small.contains(f));
        }
        let again = closure(&small.to_vec(), None, &budget).unwrap().set;
        prop_assert!(again.same_members(&small));
        let big = closure(&fs, None, &budget).unwrap().set;
        prop_assert!(small.is_subset(&big));
    }
}
