//! Rate assignments lambda_alpha > 0 over a poset, with min/max queries.

use crate::element::{stable_hash, ElementId};
use crate::error::{Error, Result};
use crate::numeric::{splitmix64, unit_f64};
use crate::poset::Poset;
use std::collections::HashMap;
use std::sync::Arc;

/// How rates are assigned to elements.
#[derive(Debug, Clone)]
pub enum RateRule {
    /// lambda_x = lambda everywhere.
    Constant(f64),
    /// lambda_x = base * gamma^level(x) with 0 < gamma <= 1; non-increasing
    /// along the order, which is the shape-theorem hypothesis.
    LevelDecay { base: f64, gamma: f64 },
    /// Explicit per-element table, with an optional default.
    Table {
        entries: HashMap<ElementId, f64>,
        default: Option<f64>,
    },
    /// Element-keyed seeded rates, uniform in [lo, hi). Deterministic per
    /// (seed, element) and independent of enumeration order.
    RandomUniform { lo: f64, hi: f64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct RateMap {
    poset: Arc<Poset>,
    rule: RateRule,
    label: String,
}

impl RateMap {
    pub fn new(poset: Arc<Poset>, rule: RateRule) -> Result<Self> {
        let label = match &rule {
            RateRule::Constant(l) => {
                require_positive(*l, "constant rate")?;
                format!("constant({l})")
            }
            RateRule::LevelDecay { base, gamma } => {
                require_positive(*base, "decay base")?;
                if !(*gamma > 0.0 && *gamma <= 1.0) {
                    return Err(Error::Domain(format!(
                        "decay factor must lie in (0, 1], got {gamma}"
                    )));
                }
                format!("level-decay({base},{gamma})")
            }
            RateRule::Table { entries, default } => {
                for (x, l) in entries {
                    require_positive(*l, &format!("rate of {x}"))?;
                }
                if let Some(d) = default {
                    require_positive(*d, "default rate")?;
                }
                "table".to_string()
            }
            RateRule::RandomUniform { lo, hi, seed } => {
                require_positive(*lo, "lower rate bound")?;
                if hi < lo {
                    return Err(Error::Domain(format!("rate range [{lo},{hi}) is empty")));
                }
                format!("random-uniform({lo},{hi},seed={seed})")
            }
        };
        Ok(RateMap { poset, rule, label })
    }

    pub fn constant(poset: Arc<Poset>, lambda: f64) -> Result<Self> {
        RateMap::new(poset, RateRule::Constant(lambda))
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rate(&self, x: &ElementId) -> Result<f64> {
        match &self.rule {
            RateRule::Constant(l) => Ok(*l),
            RateRule::LevelDecay { base, gamma } => {
                let level = self.poset.level(x)?;
                Ok(base * gamma.powi(level.min(i32::MAX as u64) as i32))
            }
            RateRule::Table { entries, default } => {
                entries.get(x).copied().or(*default).ok_or_else(|| {
                    Error::Domain(format!("no rate declared for element {x}"))
                })
            }
            RateRule::RandomUniform { lo, hi, seed } => {
                let u = unit_f64(splitmix64(seed ^ stable_hash(x)));
                Ok(lo + (hi - lo) * u)
            }
        }
    }

    /// (lambda_-, lambda_+) over a set of elements; (0, 0) for the empty set.
    pub fn min_max(&self, elements: &[ElementId]) -> Result<(f64, f64)> {
        if elements.is_empty() {
            return Ok((0.0, 0.0));
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for x in elements {
            let r = self.rate(x)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Ok((lo, hi))
    }

    /// An upper bound for lambda_x valid over the whole poset, not just a
    /// probed fragment. Used by the variance lower bounds whose induction
    /// quantifies over every lower set.
    pub fn global_sup(&self) -> f64 {
        match &self.rule {
            RateRule::Constant(l) => *l,
            RateRule::LevelDecay { base, .. } => *base,
            RateRule::Table { entries, default } => entries
                .values()
                .copied()
                .chain(default.iter().copied())
                .fold(0.0, f64::max),
            RateRule::RandomUniform { hi, .. } => *hi,
        }
    }

    /// Checks lambda_x >= lambda_y on every cover pair x -> y drawn from the
    /// given elements. Cover pairs suffice by transitivity for the rule
    /// families shipped here.
    pub fn is_level_monotone_on(&self, elements: &[ElementId]) -> Result<bool> {
        for x in elements {
            let rx = self.rate(x)?;
            for y in self.poset.upper_neighbors(x)? {
                if elements.binary_search(&y).is_ok() && self.rate(&y)? > rx + 1e-12 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn require_positive(l: f64, what: &str) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive and finite, got {l}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice2() -> Arc<Poset> {
        Arc::new(Poset::lattice(2).unwrap())
    }

    #[test]
    fn constant_rule() {
        let r = RateMap::constant(lattice2(), 1.5).unwrap();
        assert_eq!(r.rate(&ElementId::coords(vec![3, 4])).unwrap(), 1.5);
        let (lo, hi) = r.min_max(&[ElementId::coords(vec![0, 0])]).unwrap();
        assert_eq!((lo, hi), (1.5, 1.5));
        assert_eq!(r.min_max(&[]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn level_decay_is_monotone_along_covers() {
        let p = lattice2();
        let r = RateMap::new(
            p,
            RateRule::LevelDecay {
                base: 2.0,
                gamma: 0.5,
            },
        )
        .unwrap();
        assert_eq!(r.rate(&ElementId::coords(vec![0, 0])).unwrap(), 2.0);
        assert_eq!(r.rate(&ElementId::coords(vec![1, 1])).unwrap(), 0.5);
        let elems: Vec<ElementId> = vec![
            ElementId::coords(vec![0, 0]),
            ElementId::coords(vec![0, 1]),
            ElementId::coords(vec![1, 0]),
            ElementId::coords(vec![1, 1]),
        ];
        assert!(r.is_level_monotone_on(&elems).unwrap());
    }

    #[test]
    fn random_uniform_is_stable_and_in_range() {
        let r = RateMap::new(
            lattice2(),
            RateRule::RandomUniform {
                lo: 0.5,
                hi: 2.0,
                seed: 7,
            },
        )
        .unwrap();
        let x = ElementId::coords(vec![2, 1]);
        let a = r.rate(&x).unwrap();
        let b = r.rate(&x).unwrap();
        assert_eq!(a, b);
        assert!((0.5..2.0).contains(&a));
        // A different seed decorrelates.
        let r2 = RateMap::new(
            lattice2(),
            RateRule::RandomUniform {
                lo: 0.5,
                hi: 2.0,
                seed: 8,
            },
        )
        .unwrap();
        assert_ne!(a, r2.rate(&x).unwrap());
    }

    #[test]
    fn invalid_rates_are_rejected() {
        assert!(RateMap::constant(lattice2(), 0.0).is_err());
        assert!(RateMap::constant(lattice2(), -1.0).is_err());
        assert!(RateMap::new(
            lattice2(),
            RateRule::LevelDecay {
                base: 1.0,
                gamma: 1.5
            }
        )
        .is_err());
    }
}
