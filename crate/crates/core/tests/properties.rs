use std::sync::Arc;

use coarsex::homology::{chain_complex, ChainConfig};
use coarsex::maps::are_close;
use coarsex::rips::{rips_filtration, DEFAULT_MAX_DIM};
use coarsex::{Action, Bornology, Entourage, FiniteGroup, PointSet, Space, SpaceMap};
use proptest::prelude::*;

/// Trivial action, or the swap of `2k` and `2k+1` when `n` is even.
fn action(n: usize, swap: bool) -> Action {
    if swap && n.is_multiple_of(2) {
        let group = Arc::new(FiniteGroup::cyclic(2));
        Action::new(group, vec![(0..n).collect(), (0..n).map(|x| x ^ 1).collect()]).unwrap()
    } else {
        Action::trivial(Arc::new(FiniteGroup::trivial()), n)
    }
}

fn entourage(n: usize, pairs: &[(usize, usize)]) -> Entourage {
    Entourage::from_pairs(n, pairs.iter().map(|&(a, b)| (a % n, b % n))).unwrap()
}

prop_compose! {
    fn space_parts()(n in 1usize..=6, swap in any::<bool>(), raw in prop::collection::vec((0usize..6, 0usize..6), 0..8))
        -> (usize, bool, Vec<(usize, usize)>) {
        (n, swap, raw)
    }
}

fn build_space(n: usize, swap: bool, raw: &[(usize, usize)]) -> Space {
    let action = action(n, swap);
    let gen = entourage(n, raw).invariant_hull(&action);
    Space::checked((0..n).map(|i| format!("p{i}")).collect(), action, vec![gen], Bornology::singletons(n)).unwrap()
}

/// Fixpoint of `E ↦ E ∪ E⁻¹ ∪ E∘E` over the invariant hull of the generators and the diagonal.
fn naive_saturation(gens: &[Entourage], action: &Action) -> Entourage {
    let n = action.carrier_size();
    let mut e = Entourage::diagonal(n);
    for g in gens {
        e = e.union(g).unwrap();
    }
    e = e.invariant_hull(action);
    loop {
        let next = e.union(&e.invert()).unwrap().union(&e.compose(&e).unwrap()).unwrap();
        if next == e {
            return e;
        }
        e = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn saturation_is_idempotent_and_matches_iteration((n, swap, raw) in space_parts()) {
        let action = action(n, swap);
        let gens = vec![entourage(n, &raw)];
        let sat = Entourage::saturate(&gens, &action).unwrap();
        prop_assert_eq!(Entourage::saturate(std::slice::from_ref(&sat), &action).unwrap(), sat.clone());
        prop_assert_eq!(naive_saturation(&gens, &action), sat);
    }

    #[test]
    fn thickening_by_a_composite_iterates(
        n in 1usize..=6,
        u in prop::collection::vec((0usize..6, 0usize..6), 0..10),
        v in prop::collection::vec((0usize..6, 0usize..6), 0..10),
        a in prop::collection::btree_set(0usize..6, 0..4),
    ) {
        let (u, v) = (entourage(n, &u), entourage(n, &v));
        let a: PointSet = a.into_iter().map(|x| x % n).collect();
        prop_assert_eq!(u.compose(&v).unwrap().thicken(&a), u.thicken(&v.thicken(&a)));
    }

    #[test]
    fn closeness_is_an_equivalence(
        (n, swap, raw) in space_parts(),
        maps in prop::collection::vec(prop::collection::vec(0usize..6, 6), 3),
    ) {
        let x = Arc::new(build_space(n, swap, &raw));
        let m: Vec<SpaceMap> = maps.iter().map(|f| SpaceMap::new(x.clone(), x.clone(), f[..n].iter().map(|p| p % n).collect()).unwrap()).collect();
        for f in &m {
            prop_assert!(are_close(f, f));
            for g in &m {
                prop_assert_eq!(are_close(f, g), are_close(g, f));
                for h in &m {
                    prop_assert!(!(are_close(f, g) && are_close(g, h)) || are_close(f, h));
                }
            }
        }
    }

    #[test]
    fn boundary_squares_to_zero((n, swap, raw) in space_parts()) {
        let x = build_space(n, swap, &raw);
        let cx = chain_complex(&x, 3, &ChainConfig::default()).unwrap();
        prop_assert_eq!(cx.boundary_defect(), None);
    }

    #[test]
    fn rips_filtration_is_monotone(
        (n, swap, raw) in space_parts(),
        extra in prop::collection::vec((0usize..6, 0usize..6), 0..6),
    ) {
        let x = build_space(n, swap, &raw);
        let u1 = x.generators()[0].union(&Entourage::diagonal(n)).unwrap();
        let inside: Vec<(usize, usize)> = extra.iter().map(|&(a, b)| (a % n, b % n)).filter(|&(a, b)| x.coarse_max().contains(a, b)).collect();
        let u2 = u1.union(&entourage(n, &inside).invariant_hull(x.action())).unwrap();
        let f = rips_filtration(&x, &[Entourage::diagonal(n), u1, u2], DEFAULT_MAX_DIM).unwrap();
        for w in f.stages.windows(2) {
            prop_assert!(w[0].complex.is_subcomplex_of(&w[1].complex));
        }
        prop_assert!(f.inclusions.iter().all(|i| i.holds()));
    }
}
