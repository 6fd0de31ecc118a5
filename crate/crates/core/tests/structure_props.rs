//! Property-based checks of the structural invariants: partial-order
//! axioms, lower-set mutation laws, and path-count decomposition.

use proptest::prelude::*;
use poset_lpp::paths::{enumerate_maximal_paths, path_stats};
use poset_lpp::{ElementId, LowerSet, Oracle, Poset, RateMap};
use std::sync::Arc;

fn lattice3_element() -> impl Strategy<Value = ElementId> {
    (0i64..4, 0i64..4, 0i64..4).prop_map(|(a, b, c)| ElementId::coords(vec![a, b, c]))
}

fn word() -> impl Strategy<Value = ElementId> {
    proptest::collection::vec(prop_oneof![Just('a'), Just('b')], 0..6)
        .prop_map(|cs| ElementId::word(cs.into_iter().collect::<String>()))
}

/// A random lower set of the 2d lattice, built by a random growth sequence.
fn random_lower_set(seed: u64, len: usize) -> LowerSet {
    let p = Arc::new(Poset::lattice(2).unwrap());
    let mut set = LowerSet::empty(p);
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
    for _ in 0..len {
        let sites = set.growth_sites().unwrap();
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let pick = (state as usize) % sites.len();
        set = set.add_site(&sites[pick]).unwrap();
    }
    set
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lattice3_partial_order_axioms(x in lattice3_element(), y in lattice3_element(), z in lattice3_element()) {
        let p = Poset::lattice(3).unwrap();
        prop_assert!(p.leq(&x, &x).unwrap());
        if p.leq(&x, &y).unwrap() && p.leq(&y, &x).unwrap() {
            prop_assert_eq!(&x, &y);
        }
        if p.leq(&x, &y).unwrap() && p.leq(&y, &z).unwrap() {
            prop_assert!(p.leq(&x, &z).unwrap());
        }
    }

    #[test]
    fn word_partial_order_axioms(x in word(), y in word(), z in word()) {
        let p = Poset::tree(vec!['a', 'b']).unwrap();
        prop_assert!(p.leq(&x, &x).unwrap());
        if p.leq(&x, &y).unwrap() && p.leq(&y, &x).unwrap() {
            prop_assert_eq!(&x, &y);
        }
        if p.leq(&x, &y).unwrap() && p.leq(&y, &z).unwrap() {
            prop_assert!(p.leq(&x, &z).unwrap());
        }
    }

    #[test]
    fn add_then_remove_is_identity(seed in any::<u64>(), len in 0usize..10) {
        let set = random_lower_set(seed, len);
        for beta in set.growth_sites().unwrap() {
            let bigger = set.add_site(&beta).unwrap();
            let back = bigger.remove_max(&beta).unwrap();
            prop_assert_eq!(back.elements(), set.elements());
            prop_assert_eq!(back.key(), set.key());
        }
    }

    #[test]
    fn growth_sites_match_definition(seed in any::<u64>(), len in 0usize..10) {
        let set = random_lower_set(seed, len);
        let p = set.poset().clone();
        let sites = set.growth_sites().unwrap();
        // definition scan over a bounding grid
        let bound = 12i64;
        for x in 0..bound {
            for y in 0..bound {
                let e = ElementId::coords(vec![x, y]);
                let in_def = !set.contains(&e)
                    && p.lower_neighbors(&e)
                        .unwrap()
                        .iter()
                        .all(|l| set.contains(l));
                prop_assert_eq!(in_def, sites.binary_search(&e).is_ok());
            }
        }
    }

    #[test]
    fn maximal_path_count_matches_enumeration(seed in any::<u64>(), len in 0usize..9) {
        let set = random_lower_set(seed, len);
        let rates = RateMap::constant(set.poset().clone(), 1.0).unwrap();
        let stats = path_stats(&set, &rates).unwrap();
        let paths = enumerate_maximal_paths(&set, 100_000).unwrap();
        prop_assert_eq!(stats.count_maximal, paths.len().to_string());
        // every enumerated maximal path has length between ell_star and ell
        for path in &paths {
            if !set.is_empty() {
                prop_assert!(path.len() as u64 <= stats.ell);
            }
        }
    }

    #[test]
    fn oracle_mean_is_monotone_under_growth(seed in any::<u64>(), len in 1usize..8) {
        let set = random_lower_set(seed, len);
        let rates = RateMap::constant(set.poset().clone(), 1.0).unwrap();
        let mut oracle = Oracle::new(rates);
        let mean = oracle.mean(&set).unwrap();
        for beta in set.growth_sites().unwrap().into_iter().take(2) {
            let bigger = set.add_site(&beta).unwrap();
            prop_assert!(oracle.mean(&bigger).unwrap() >= mean - 1e-12);
        }
    }
}
