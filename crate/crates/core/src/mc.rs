//! Monte Carlo simulation of tau_A by both constructions: the jump chain of
//! the growth process restricted to the target set, and the static
//! last-passage form max over maximal paths of the summed weights.
//!
//! Replica r draws from a ChaCha8 stream selected by set_stream(r) under the
//! master seed, so results are reproducible bit-for-bit and independent of
//! how replicas are split across threads.

use crate::element::ElementId;
use crate::error::{Error, Result};
use crate::lowerset::LowerSet;
use crate::paths::SetDag;
use crate::rates::RateMap;
use crate::tolerances::{KS_ALPHA, KS_MIN_SAMPLES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Identifier of the pinned replica-stream generator, recorded in
/// provenance blocks.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Per-element weight distributions for the static construction. All kinds
/// sample by inverse CDF from one uniform draw per element, which supports
/// monotone coupling between samplers.
#[derive(Debug, Clone)]
pub enum WeightSampler {
    /// Exponential with the per-element rates of the map.
    Exponential(RateMap),
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    ShiftedExponential { shift: f64, rate: f64 },
}

impl WeightSampler {
    pub fn inverse_cdf(&self, x: &ElementId, u: f64) -> Result<f64> {
        Ok(match self {
            WeightSampler::Exponential(rates) => -(1.0 - u).ln() / rates.rate(x)?,
            WeightSampler::Constant(c) => *c,
            WeightSampler::Uniform { lo, hi } => lo + (hi - lo) * u,
            WeightSampler::ShiftedExponential { shift, rate } => {
                shift + (-(1.0 - u).ln() / rate)
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSampler::Exponential(_) => Ok(()),
            WeightSampler::Constant(c) if *c >= 0.0 && c.is_finite() => Ok(()),
            WeightSampler::Uniform { lo, hi } if *lo >= 0.0 && hi >= lo => Ok(()),
            WeightSampler::ShiftedExponential { shift, rate }
                if *shift >= 0.0 && *rate > 0.0 =>
            {
                Ok(())
            }
            _ => Err(Error::Domain("weight sampler parameters must be non-negative".into())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            WeightSampler::Exponential(r) => format!("exponential[{}]", r.label()),
            WeightSampler::Constant(c) => format!("constant({c})"),
            WeightSampler::Uniform { lo, hi } => format!("uniform({lo},{hi})"),
            WeightSampler::ShiftedExponential { shift, rate } => {
                format!("shifted-exponential({shift},{rate})")
            }
        }
    }
}

/// Which construction drives a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McMethod {
    JumpChain,
    StaticLpp,
}

impl McMethod {
    pub fn label(&self) -> &'static str {
        match self {
            McMethod::JumpChain => "jump-chain",
            McMethod::StaticLpp => "static-lpp",
        }
    }
}

/// Aggregate of a replicated simulation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MCEstimate {
    pub n_replicas: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub stderr_mean: f64,
    pub seed: u64,
    pub method: String,
    /// Wall time; excluded from serialized reports so that reruns of a
    /// seeded experiment emit byte-identical files.
    #[serde(skip_serializing)]
    pub elapsed_secs: f64,
}

/// Precomputed simulation context for one target set: index-based cover
/// lists, a processing order, and per-element rates.
pub struct SimContext {
    pub dag: SetDag,
    rates: Vec<f64>,
}

impl SimContext {
    pub fn build(set: &LowerSet, rates: &RateMap) -> Result<SimContext> {
        let dag = SetDag::build(set)?;
        let rate_vec: Result<Vec<f64>> = dag.elements.iter().map(|e| rates.rate(e)).collect();
        Ok(SimContext {
            dag,
            rates: rate_vec?,
        })
    }

    pub fn len(&self) -> usize {
        self.dag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dag.is_empty()
    }
}

fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// One passage time from the jump chain: repeatedly pick an available cell
/// with probability proportional to its rate and advance time by an
/// exponential holding time with the total available rate. The chain runs
/// restricted to the target's down-set, which preserves the law of tau_A.
pub fn sample_tau_jump_chain(ctx: &SimContext, rng: &mut impl Rng) -> f64 {
    let n = ctx.len();
    if n == 0 {
        return 0.0;
    }
    let mut remaining: Vec<usize> = ctx.dag.lower.iter().map(|l| l.len()).collect();
    let mut available: Vec<usize> = ctx.dag.minimal.clone();
    let mut filled = 0usize;
    let mut t = 0.0f64;
    while filled < n {
        let total: f64 = available.iter().map(|&i| ctx.rates[i]).sum();
        // holding time at the current state
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / total;
        // pick the next cell proportionally to its rate
        let pick: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen_slot = available.len() - 1;
        for (slot, &i) in available.iter().enumerate() {
            acc += ctx.rates[i];
            if pick < acc {
                chosen_slot = slot;
                break;
            }
        }
        let chosen = available.swap_remove(chosen_slot);
        filled += 1;
        for &j in &ctx.dag.upper[chosen] {
            remaining[j] -= 1;
            if remaining[j] == 0 {
                available.push(j);
            }
        }
    }
    t
}

/// One passage time from the static construction: draw every weight, then
/// T(x) = G_x + max over lower covers of T, and tau is the maximum of T
/// over the maximal elements. Weights are drawn in canonical element order.
pub fn sample_tau_static(
    ctx: &SimContext,
    sampler: &WeightSampler,
    rng: &mut impl Rng,
) -> Result<f64> {
    let n = ctx.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut weights = Vec::with_capacity(n);
    for elem in &ctx.dag.elements {
        let u: f64 = rng.gen();
        weights.push(sampler.inverse_cdf(elem, u)?);
    }
    Ok(static_lpp_value(ctx, &weights))
}

fn static_lpp_value(ctx: &SimContext, weights: &[f64]) -> f64 {
    let n = ctx.len();
    let mut t = vec![0.0f64; n];
    for &i in &ctx.dag.topo {
        let below = ctx.dag.lower[i]
            .iter()
            .map(|&j| t[j])
            .fold(0.0f64, f64::max);
        t[i] = weights[i] + below;
    }
    ctx.dag
        .maximal
        .iter()
        .map(|&m| t[m])
        .fold(0.0f64, f64::max)
}

/// Static sampler with exponential weights matching the rate map.
pub fn sample_tau_static_lpp(ctx: &SimContext, rates: &RateMap, rng: &mut impl Rng) -> Result<f64> {
    sample_tau_static(ctx, &WeightSampler::Exponential(rates.clone()), rng)
}

/// Runs `n_replicas` independent replicas of the chosen construction.
/// Replica streams depend only on (seed, replica index); aggregation is a
/// sequential pass over the ordered replica values, so the estimate is
/// identical regardless of thread count.
pub fn estimate(
    set: &LowerSet,
    rates: &RateMap,
    method: McMethod,
    n_replicas: usize,
    seed: u64,
) -> Result<MCEstimate> {
    let ctx = SimContext::build(set, rates)?;
    let sampler = WeightSampler::Exponential(rates.clone());
    let values: Result<Vec<f64>> = (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            match method {
                McMethod::JumpChain => Ok(sample_tau_jump_chain(&ctx, &mut rng)),
                McMethod::StaticLpp => sample_tau_static(&ctx, &sampler, &mut rng),
            }
        })
        .collect();
    aggregate(values?, seed, method.label())
}

/// Runs the static construction under an arbitrary weight sampler.
pub fn estimate_with_sampler(
    set: &LowerSet,
    rates: &RateMap,
    sampler: &WeightSampler,
    n_replicas: usize,
    seed: u64,
) -> Result<MCEstimate> {
    sampler.validate()?;
    let ctx = SimContext::build(set, rates)?;
    let values: Result<Vec<f64>> = (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            sample_tau_static(&ctx, sampler, &mut rng)
        })
        .collect();
    aggregate(values?, seed, "static-lpp")
}

/// Per-replica passage times, for sample emission and distribution tests.
pub fn sample_values(
    set: &LowerSet,
    rates: &RateMap,
    method: McMethod,
    n_replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let ctx = SimContext::build(set, rates)?;
    let sampler = WeightSampler::Exponential(rates.clone());
    (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            match method {
                McMethod::JumpChain => Ok(sample_tau_jump_chain(&ctx, &mut rng)),
                McMethod::StaticLpp => sample_tau_static(&ctx, &sampler, &mut rng),
            }
        })
        .collect()
}

fn aggregate(values: Vec<f64>, seed: u64, method: &str) -> Result<MCEstimate> {
    let started = std::time::Instant::now();
    let n = values.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 replicas, got {n}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let variance = ss / (n - 1) as f64;
    Ok(MCEstimate {
        n_replicas: n,
        mean,
        variance,
        stderr_mean: (variance / n as f64).sqrt(),
        seed,
        method: method.to_string(),
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

/// Report of a coupled stochastic-dominance run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DominanceReport {
    pub n_replicas: usize,
    pub violations: usize,
    pub mean_gap: f64,
    pub stderr_gap: f64,
    pub sampler_low: String,
    pub sampler_high: String,
}

/// Couples the two samplers through one shared uniform per element (inverse
/// CDF in both), so per-replica tau_low <= tau_high must hold whenever the
/// low sampler is pointwise below the high one. A violated replica
/// signals a bug in the declared pair and is returned as an error.
pub fn dominance_check(
    set: &LowerSet,
    rates: &RateMap,
    sampler_low: &WeightSampler,
    sampler_high: &WeightSampler,
    n_replicas: usize,
    seed: u64,
) -> Result<DominanceReport> {
    sampler_low.validate()?;
    sampler_high.validate()?;
    let ctx = SimContext::build(set, rates)?;
    let gaps: Result<Vec<f64>> = (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let n = ctx.len();
            let mut w_low = Vec::with_capacity(n);
            let mut w_high = Vec::with_capacity(n);
            for elem in &ctx.dag.elements {
                let u: f64 = rng.gen();
                w_low.push(sampler_low.inverse_cdf(elem, u)?);
                w_high.push(sampler_high.inverse_cdf(elem, u)?);
            }
            let tau_low = static_lpp_value(&ctx, &w_low);
            let tau_high = static_lpp_value(&ctx, &w_high);
            if tau_low > tau_high {
                return Err(Error::CouplingViolation(format!(
                    "replica {r}: tau_low = {tau_low} > tau_high = {tau_high}"
                )));
            }
            Ok(tau_high - tau_low)
        })
        .collect();
    let gaps = gaps?;
    let n = gaps.len();
    let mean_gap = gaps.iter().sum::<f64>() / n as f64;
    let ss: f64 = gaps.iter().map(|g| (g - mean_gap) * (g - mean_gap)).sum();
    let stderr_gap = (ss / ((n - 1) as f64) / n as f64).sqrt();
    Ok(DominanceReport {
        n_replicas: n,
        violations: 0,
        mean_gap,
        stderr_gap,
        sampler_low: sampler_low.label(),
        sampler_high: sampler_high.label(),
    })
}

/// Two-sample Kolmogorov-Smirnov result at the asymptotic critical value.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub alpha: f64,
    pub pass: bool,
}

/// Two-sample KS with critical value c(alpha) sqrt((n+m)/(nm)),
/// c(alpha) = sqrt(-ln(alpha/2)/2). Sample sizes below the asymptotic
/// regime are rejected.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult> {
    ks_two_sample_at(xs, ys, KS_ALPHA)
}

pub fn ks_two_sample_at(xs: &[f64], ys: &[f64], alpha: f64) -> Result<KsResult> {
    if xs.len() < KS_MIN_SAMPLES || ys.len() < KS_MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "KS requires at least {KS_MIN_SAMPLES} samples per side, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let critical = c * (((n + m) as f64) / ((n * m) as f64)).sqrt();
    Ok(KsResult {
        statistic: d,
        critical,
        alpha,
        pass: d <= critical,
    })
}
