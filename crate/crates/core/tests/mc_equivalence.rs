//! Distributional equivalence of the two simulation constructions and
//! seed-battery agreement with the exact oracle.

use poset_lpp::mc::{estimate, ks_two_sample, sample_values, McMethod};
use poset_lpp::rates::RateRule;
use poset_lpp::tolerances::MC_SIGMA;
use poset_lpp::{ElementId, LowerSet, Oracle, Poset, RateMap};
use std::sync::Arc;

fn coords(v: &[i64]) -> ElementId {
    ElementId::coords(v.to_vec())
}

fn test_sets() -> Vec<(String, LowerSet, RateMap)> {
    let mut out = Vec::new();
    let lat = Arc::new(Poset::lattice(2).unwrap());
    let unit = RateMap::constant(lat.clone(), 1.0).unwrap();
    out.push((
        "square".into(),
        LowerSet::down_set(lat.clone(), &coords(&[1, 1]), 1000).unwrap(),
        unit.clone(),
    ));
    out.push((
        "rectangle-inhomogeneous".into(),
        LowerSet::down_set(lat.clone(), &coords(&[2, 1]), 1000).unwrap(),
        RateMap::new(
            lat.clone(),
            RateRule::RandomUniform {
                lo: 0.5,
                hi: 2.0,
                seed: 77,
            },
        )
        .unwrap(),
    ));
    let tree = Arc::new(Poset::tree(vec!['a', 'b']).unwrap());
    out.push((
        "tree-two-words".into(),
        LowerSet::down_of_many(
            tree.clone(),
            &[ElementId::word("ab"), ElementId::word("ba")],
            1000,
        )
        .unwrap(),
        RateMap::constant(tree.clone(), 1.0).unwrap(),
    ));
    let col = Arc::new(Poset::columnar(vec!["x".into(), "y".into(), "z".into()]).unwrap());
    out.push((
        "columnar-two-layers".into(),
        LowerSet::down_of_many(
            col.clone(),
            &[coords(&[1, 0]), coords(&[1, 1]), coords(&[1, 2])],
            1000,
        )
        .unwrap(),
        RateMap::constant(col.clone(), 1.0).unwrap(),
    ));
    out
}

/// Jump-chain and static-LPP means agree with each other and with the
/// oracle on every test set.
#[test]
fn constructions_agree_in_mean_with_oracle() {
    for (name, set, rates) in test_sets() {
        let mut oracle = Oracle::new(rates.clone());
        let exact = oracle.mean(&set).unwrap();
        let jump = estimate(&set, &rates, McMethod::JumpChain, 60_000, 100).unwrap();
        let stat = estimate(&set, &rates, McMethod::StaticLpp, 60_000, 200).unwrap();
        let combined = (jump.stderr_mean.powi(2) + stat.stderr_mean.powi(2)).sqrt();
        assert!(
            (jump.mean - stat.mean).abs() <= MC_SIGMA * combined,
            "{name}: jump {} vs static {}",
            jump.mean,
            stat.mean
        );
        for est in [&jump, &stat] {
            assert!(
                (est.mean - exact).abs() <= MC_SIGMA * est.stderr_mean,
                "{name} ({}): {} vs exact {exact}",
                est.method,
                est.mean
            );
        }
    }
}

/// Two-sample KS between the constructions passes on at least 19 of 20
/// seeded trials per set.
#[test]
fn ks_battery_nineteen_of_twenty() {
    for (name, set, rates) in test_sets() {
        let mut passes = 0;
        for trial in 0..20u64 {
            let xs = sample_values(&set, &rates, McMethod::JumpChain, 20_000, 1000 + trial).unwrap();
            let ys = sample_values(&set, &rates, McMethod::StaticLpp, 20_000, 2000 + trial).unwrap();
            if ks_two_sample(&xs, &ys).unwrap().pass {
                passes += 1;
            }
        }
        assert!(passes >= 19, "{name}: only {passes}/20 KS trials passed");
    }
}

/// Over a 100-seed battery, the sample mean stays within 4 standard errors
/// of the oracle mean in at least 99 runs.
#[test]
fn hundred_seed_battery() {
    let lat = Arc::new(Poset::lattice(2).unwrap());
    let rates = RateMap::constant(lat.clone(), 1.0).unwrap();
    let set = LowerSet::down_set(lat, &coords(&[1, 1]), 1000).unwrap();
    let mut oracle = Oracle::new(rates.clone());
    let exact = oracle.mean(&set).unwrap();
    let mut hits = 0;
    for seed in 0..100u64 {
        let est = estimate(&set, &rates, McMethod::StaticLpp, 10_000, seed).unwrap();
        if (est.mean - exact).abs() <= MC_SIGMA * est.stderr_mean {
            hits += 1;
        }
    }
    assert!(hits >= 99, "only {hits}/100 seeds within 4 sigma");
}

/// The empirical CDF from a million static draws brackets the uniformized
/// exact CDF within binomial error.
#[test]
fn empirical_cdf_matches_exact_cdf() {
    let lat = Arc::new(Poset::lattice(2).unwrap());
    let rates = RateMap::constant(lat.clone(), 1.0).unwrap();
    let set = LowerSet::down_set(lat, &coords(&[1, 1]), 1000).unwrap();
    let mut oracle = Oracle::new(rates.clone());
    let t = 2.0;
    let exact = oracle.cdf(&set, &[t], 1 << 16).unwrap()[0];
    let n = 1_000_000usize;
    let values = sample_values(&set, &rates, McMethod::StaticLpp, n, 4242).unwrap();
    let hits = values.iter().filter(|&&v| v <= t).count();
    let empirical = hits as f64 / n as f64;
    let se = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!(
        (empirical - exact).abs() <= 3.0 * se,
        "empirical {empirical} vs exact {exact} (se {se})"
    );
}
