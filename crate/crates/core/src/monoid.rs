//! Partially ordered monoid layer: set products and powers, steadiness
//! probes, superadditivity checks, entropy limits of lattice path counts,
//! and shape-function traces for E[tau_{A^n}] / n.

use crate::element::ElementId;
use crate::error::{Error, Result};
use crate::lowerset::LowerSet;
use crate::mc::{estimate, McMethod};
use crate::numeric::ln_multinomial;
use crate::oracle::Oracle;
use crate::paths::path_stats;
use crate::poset::Poset;
use crate::rates::RateMap;
use std::sync::Arc;

/// AB = {x : x <= a b for some a in A, b in B}.
///
/// For the abelian families (lattice, cone) the order is compatible with
/// the operation, so products of the maximal antichains dominate all other
/// pairs and the union of their down-sets suffices. The prefix order on
/// free words is not two-sided compatible (epsilon <= "a" and "b" <= "b"
/// do not give "b" <= "ab"), so there the union runs over all pairs, which
/// is the definition itself.
pub fn set_product(a: &LowerSet, b: &LowerSet, node_budget: usize) -> Result<LowerSet> {
    let poset = a.poset().clone();
    if poset.monoid_identity().is_none() {
        return Err(Error::Precondition(format!(
            "family {} has no monoid structure",
            poset.family_name()
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(LowerSet::empty(poset));
    }
    let mut tops = Vec::new();
    let compatible = !matches!(poset.as_ref(), Poset::Tree { .. });
    if compatible {
        for alpha in a.maximal() {
            for beta in b.maximal() {
                tops.push(poset.monoid_op(alpha, beta)?);
            }
        }
    } else {
        for alpha in a.elements() {
            for beta in b.elements() {
                tops.push(poset.monoid_op(alpha, beta)?);
            }
        }
    }
    LowerSet::down_of_many(poset, &tops, node_budget)
}

/// A^n, with A^0 the down-set of the identity.
pub fn power(a: &LowerSet, n: u32, node_budget: usize) -> Result<LowerSet> {
    let poset = a.poset().clone();
    let identity = poset.monoid_identity().ok_or_else(|| {
        Error::Precondition(format!(
            "family {} has no monoid structure",
            poset.family_name()
        ))
    })?;
    let mut acc = LowerSet::down_set(poset, &identity, node_budget)?;
    for _ in 0..n {
        acc = set_product(a, &acc, node_budget)?;
    }
    Ok(acc)
}

/// Per-element steadiness data: extreme maximal-path step counts to x.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SteadinessProbe {
    pub element: ElementId,
    pub max_steps: u64,
    pub min_steps: u64,
    /// max_steps / min_steps; 1 for graded families.
    pub ratio: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SteadinessReport {
    pub probes: Vec<SteadinessProbe>,
    /// Largest observed ratio; an empirical lower bound for the steadiness
    /// constant.
    pub c_hat: f64,
}

/// Ratio of longest to shortest maximal path (in steps) to each probe
/// element.
pub fn steadiness_probe(
    poset: &Arc<Poset>,
    xs: &[ElementId],
    node_budget: usize,
) -> Result<SteadinessReport> {
    let unit = RateMap::constant(poset.clone(), 1.0)?;
    let mut probes = Vec::with_capacity(xs.len());
    let mut c_hat = 1.0f64;
    for x in xs {
        let down = LowerSet::down_set(poset.clone(), x, node_budget)?;
        let stats = path_stats(&down, &unit)?;
        // For a single-top down-set, every maximal path ends at x, so the
        // longest is ell and the shortest is ell_star.
        let max_steps = stats.ell_steps;
        let min_steps = stats.ell_star_steps;
        let ratio = if min_steps == 0 {
            1.0
        } else {
            max_steps as f64 / min_steps as f64
        };
        c_hat = c_hat.max(ratio);
        probes.push(SteadinessProbe {
            element: x.clone(),
            max_steps,
            min_steps,
            ratio,
        });
    }
    Ok(SteadinessReport { probes, c_hat })
}

/// One clause of the superadditivity report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SuperadditivityClause {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SuperadditivityReport {
    pub clauses: Vec<SuperadditivityClause>,
    pub all_hold: bool,
    /// E[tau_A] + E[tau_B], for reference.
    pub mean_sum: f64,
    /// E[tau_AB], for reference. Note mean_sum <= mean_product does NOT
    /// hold in general: every path passes through the identity exactly
    /// once, so composing optimal paths of A and B shares that weight. The
    /// junction-corrected clause below is the valid statement.
    pub mean_product: f64,
    /// 1 / lambda(identity): the mean weight shared at the junction.
    pub junction_correction: f64,
}

/// Checks, for non-empty A and B in a monoid family:
/// kappa(A) + kappa(B) <= kappa(AB); steps(A) + steps(B) <= steps(AB);
/// star-steps(AB) <= star-steps(A) + star-steps(B); and, when the rates are
/// non-increasing along the order, the junction-corrected mean clause
/// E[tau_A] + E[tau_B] <= E[tau_AB] + 1/lambda(identity) (tight on chains).
/// Element-convention lengths are reported alongside the step-convention
/// clauses that drive the verdict.
pub fn superadditivity_check(
    oracle: &mut Oracle,
    a: &LowerSet,
    b: &LowerSet,
    node_budget: usize,
) -> Result<SuperadditivityReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition(
            "superadditivity check needs non-empty operands".into(),
        ));
    }
    let rates = oracle.rates().clone();
    let ab = set_product(a, b, node_budget)?;
    let sa = path_stats(a, &rates)?;
    let sb = path_stats(b, &rates)?;
    let sab = path_stats(&ab, &rates)?;
    let mut clauses = Vec::new();
    let tol = 1e-9;

    let push = |clauses: &mut Vec<SuperadditivityClause>, name: &str, lhs: f64, rhs: f64| {
        clauses.push(SuperadditivityClause {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs <= rhs + tol,
        });
    };

    push(
        &mut clauses,
        "kappa-superadditive",
        sa.kappa + sb.kappa,
        sab.kappa,
    );
    push(
        &mut clauses,
        "length-steps-superadditive",
        (sa.ell_steps + sb.ell_steps) as f64,
        sab.ell_steps as f64,
    );
    push(
        &mut clauses,
        "star-length-steps-subadditive",
        sab.ell_star_steps as f64,
        (sa.ell_star_steps + sb.ell_star_steps) as f64,
    );
    // element-convention lengths, informational
    push(
        &mut clauses,
        "length-elements (informational)",
        (sa.ell + sb.ell) as f64,
        sab.ell as f64 + 1.0,
    );

    let probe_elems = ab.elements();
    if !rates.is_level_monotone_on(probe_elems)? {
        return Err(Error::Precondition(
            "mean superadditivity clause needs rates non-increasing along the order".into(),
        ));
    }
    let identity = ab
        .poset()
        .monoid_identity()
        .expect("set_product already required a monoid family");
    let junction_correction = 1.0 / rates.rate(&identity)?;
    let mean_sum = oracle.mean(a)? + oracle.mean(b)?;
    let mean_ab = oracle.mean(&ab)?;
    push(
        &mut clauses,
        "mean-superadditive-junction-corrected",
        mean_sum,
        mean_ab + junction_correction,
    );

    let all_hold = clauses.iter().all(|c| c.holds);
    Ok(SuperadditivityReport {
        clauses,
        all_hold,
        mean_sum,
        mean_product: mean_ab,
        junction_correction,
    })
}

/// One row of the entropy-limit trace for kappa(<n alpha>) / steps.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EntropyRow {
    pub n: u64,
    /// kappa(<n alpha>) / (n * sum(alpha)), by log-multinomial evaluation.
    pub value: f64,
    /// -sum p_i log p_i with p_i = alpha_i / sum(alpha).
    pub target: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EntropyTrace {
    pub rows: Vec<EntropyRow>,
    /// Every sampled value sits at or below the target.
    pub from_below: bool,
    /// Values are non-decreasing along the sampled n.
    pub monotone_nondecreasing: bool,
}

/// The lattice path-count entropy: maximal paths of <n alpha> number the
/// multinomial (n sum(alpha); n alpha_1, ..., n alpha_d), and the width per
/// step converges to the entropy of the direction.
pub fn entropy_limit(alpha: &[u64], ns: &[u64]) -> Result<EntropyTrace> {
    if alpha.iter().all(|&c| c == 0) {
        return Err(Error::Domain("entropy limit needs a non-zero direction".into()));
    }
    let total: u64 = alpha.iter().sum();
    let target: f64 = -alpha
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            p * p.ln()
        })
        .sum::<f64>();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if n == 0 {
            return Err(Error::Domain("entropy limit rows need n >= 1".into()));
        }
        let parts: Vec<u64> = alpha.iter().map(|&c| c * n).collect();
        let kappa = ln_multinomial(&parts);
        rows.push(EntropyRow {
            n,
            value: kappa / (n * total) as f64,
            target,
        });
    }
    let from_below = rows.iter().all(|r| r.value <= target + 1e-12);
    let monotone_nondecreasing = rows.windows(2).all(|w| w[0].value <= w[1].value + 1e-12);
    Ok(EntropyTrace {
        rows,
        from_below,
        monotone_nondecreasing,
    })
}

/// One row of a shape trace.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ShapeRow {
    pub n: u32,
    /// E[tau_{A^n}] / n.
    pub value: f64,
    /// Standard error of the value when estimated by Monte Carlo; 0 for
    /// exact rows.
    pub stderr: f64,
    pub method: String,
    pub ell: u64,
    pub ell_star: u64,
    pub kappa: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ShapeTrace {
    pub rows: Vec<ShapeRow>,
    /// Largest computed value: a lower bracket for the shape limit.
    pub lower_bracket: f64,
    /// (sqrt((kappa + eta)/N) + sqrt(ell/N))^2 / lambda_- at the largest
    /// computed N: the finite-n mean upper bound scaled per step.
    pub upper_bound: f64,
    /// Raw values E[tau_{A^n}]/n non-decreasing within the Monte Carlo
    /// tolerance. Every path shares the identity's weight, so raw values
    /// can dip after n = 1; see `monotone_corrected_ok`.
    pub monotone_ok: bool,
    /// (E[tau_{A^n}] - 1/lambda(identity)) / n non-decreasing within the
    /// Monte Carlo tolerance; this is the sequence that superadditivity
    /// actually controls.
    pub monotone_corrected_ok: bool,
    /// 1 / lambda(identity).
    pub junction_correction: f64,
    /// Every junction-corrected value sits below the upper bound. The raw
    /// value at the largest n is bounded directly by the mean-upper
    /// theorem; earlier raw values may exceed the bound only through the
    /// shared junction weight (e.g. chains, where the raw sequence
    /// decreases toward the limit).
    pub below_bound_ok: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ShapeConfig {
    pub n_max: u32,
    /// Largest n computed by the exact oracle; beyond it Monte Carlo.
    pub exact_n_max: u32,
    pub replicas: usize,
    pub seed: u64,
    pub node_budget: usize,
}

/// Traces E[tau_{A^n}] / n for n = 1..=n_max, exact when n <= exact_n_max
/// and by static-construction Monte Carlo beyond, and evaluates the shape
/// upper bound at the largest n. The rate hypothesis (non-increasing along
/// the order) is validated on the largest computed power.
pub fn shape_trace(oracle: &mut Oracle, a: &LowerSet, cfg: &ShapeConfig) -> Result<ShapeTrace> {
    let rates = oracle.rates().clone();
    if a.is_empty() {
        return Ok(ShapeTrace {
            rows: Vec::new(),
            lower_bracket: 0.0,
            upper_bound: 0.0,
            monotone_ok: true,
            monotone_corrected_ok: true,
            junction_correction: 0.0,
            below_bound_ok: true,
        });
    }
    let mut rows: Vec<ShapeRow> = Vec::new();
    let mut current = a.clone();
    let mut last_stats = None;
    let mut last_lambda_min = 0.0;
    for n in 1..=cfg.n_max {
        if n > 1 {
            current = set_product(a, &current, cfg.node_budget)?;
        }
        if !rates.is_level_monotone_on(current.elements())? {
            return Err(Error::Precondition(
                "shape trace hypothesis: rates must be non-increasing along the order".into(),
            ));
        }
        let stats = path_stats(&current, &rates)?;
        let (lambda_min, _) = rates.min_max(current.elements())?;
        let (value, stderr, method) = if n <= cfg.exact_n_max {
            (oracle.mean(&current)? / n as f64, 0.0, "exact")
        } else {
            let est = estimate(
                &current,
                &rates,
                McMethod::StaticLpp,
                cfg.replicas,
                cfg.seed.wrapping_add(n as u64),
            )?;
            (est.mean / n as f64, est.stderr_mean / n as f64, "mc")
        };
        rows.push(ShapeRow {
            n,
            value,
            stderr,
            method: method.to_string(),
            ell: stats.ell,
            ell_star: stats.ell_star,
            kappa: stats.kappa,
        });
        last_stats = Some(stats);
        last_lambda_min = lambda_min;
    }
    let stats = last_stats.expect("n_max >= 1 produced rows");
    let big_n = cfg.n_max as f64;
    let upper_bound = {
        let s = ((stats.kappa + stats.eta) / big_n).sqrt() + (stats.ell as f64 / big_n).sqrt();
        s * s / last_lambda_min
    };
    let identity = a
        .poset()
        .monoid_identity()
        .expect("set_product already required a monoid family");
    let junction_correction = 1.0 / rates.rate(&identity)?;
    let lower_bracket = rows.iter().map(|r| r.value).fold(0.0f64, f64::max);
    let monotone_within = |corr: f64| {
        rows.windows(2).all(|w| {
            let slack = 4.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            let a = w[0].value - corr / w[0].n as f64;
            let b = w[1].value - corr / w[1].n as f64;
            a <= b + slack + 1e-12
        })
    };
    let monotone_ok = monotone_within(0.0);
    let monotone_corrected_ok = monotone_within(junction_correction);
    let below_bound_ok = rows.iter().all(|r| {
        r.value - junction_correction / r.n as f64 <= upper_bound + 4.0 * r.stderr + 1e-12
    });
    Ok(ShapeTrace {
        rows,
        lower_bracket,
        upper_bound,
        monotone_ok,
        monotone_corrected_ok,
        junction_correction,
        below_bound_ok,
    })
}

/// Monoid law probes on concrete fragments: associativity of the set
/// product and the power-consistency identity A^{m+n} = A^m A^n.
pub fn monoid_law_checks(
    a: &LowerSet,
    b: &LowerSet,
    c: &LowerSet,
    node_budget: usize,
) -> Result<bool> {
    let left = set_product(&set_product(a, b, node_budget)?, c, node_budget)?;
    let right = set_product(a, &set_product(b, c, node_budget)?, node_budget)?;
    if left.key() != right.key() {
        return Ok(false);
    }
    for (m, n) in [(1u32, 1u32), (1, 2), (2, 1)] {
        let via_split = set_product(
            &power(a, m, node_budget)?,
            &power(a, n, node_budget)?,
            node_budget,
        )?;
        let direct = power(a, m + n, node_budget)?;
        if via_split.key() != direct.key() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Verifies monoid compatibility on a probe set: x1 <= x2 and y1 <= y2
/// imply x1 y1 <= x2 y2, plus the identity law.
pub fn compatibility_probe(poset: &Arc<Poset>, xs: &[ElementId]) -> Result<bool> {
    let identity = poset.monoid_identity().ok_or_else(|| {
        Error::Precondition(format!(
            "family {} has no monoid structure",
            poset.family_name()
        ))
    })?;
    for x in xs {
        if poset.monoid_op(x, &identity)? != *x || poset.monoid_op(&identity, x)? != *x {
            return Ok(false);
        }
    }
    for x1 in xs {
        for x2 in xs {
            if !poset.leq(x1, x2)? {
                continue;
            }
            for y1 in xs {
                for y2 in xs {
                    if !poset.leq(y1, y2)? {
                        continue;
                    }
                    let p1 = poset.monoid_op(x1, y1)?;
                    let p2 = poset.monoid_op(x2, y2)?;
                    if !poset.leq(&p1, &p2)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Associativity probe over explicit triples.
pub fn associativity_probe(poset: &Arc<Poset>, xs: &[ElementId]) -> Result<bool> {
    for x in xs {
        for y in xs {
            for z in xs {
                let left = poset.monoid_op(&poset.monoid_op(x, y)?, z)?;
                let right = poset.monoid_op(x, &poset.monoid_op(y, z)?)?;
                if left != right {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The steadiness witness used by the shape theorem for the worked cone
/// example: the element 3a = b + c, whose longest path has 3 steps and
/// shortest has 2.
pub fn example_cone() -> Result<Arc<Poset>> {
    Ok(Arc::new(Poset::cone(vec![
        vec![1, 1],
        vec![2, 1],
        vec![1, 2],
    ])?))
}
