//! Exact passage-time statistics via the memoized backward recursion over
//! sub-lower-sets.
//!
//! Writing s_A for the total rate over the maximal antichain of A, the
//! backward operator applied to A |-> E[f(tau_A)] equals E[f'(tau_A)], which
//! yields one linear step per quantity:
//!
//! - mean:     E(A)   = (1 + sum lambda_a E(A \ a)) / s_A
//! - variance: V(A)   = (Q(A) + sum lambda_a V(A \ a)) / s_A with the
//!   quadratic covariance Q(A) = sum lambda_a (E(A) - E(A \ a))^2
//! - moments:  M_n(A) = (n M_{n-1}(A) + sum lambda_a M_n(A \ a)) / s_A
//! - MGF:      E_u(A) = (sum lambda_a E_u(A \ a)) / (s_A - u)
//!
//! all memoized on the sorted maximal antichain, scoped to one
//! (poset, rates) pair. The CDF solves the Kolmogorov system over the
//! lower-set lattice of A by uniformization of the absorbing chain.

use crate::element::ElementId;
use crate::error::{Error, Result};
use crate::lowerset::{LowerSet, SetKey};
use crate::numeric::ln_gamma;
use crate::paths::SetDag;
use crate::poset::Poset;
use crate::rates::RateMap;
use crate::tolerances::UNIFORMIZATION_TOL;
use std::collections::HashMap;
use std::sync::Arc;

/// Default cap on memo entries across all quantities of one oracle.
pub const DEFAULT_MEMO_CAP: usize = 2_000_000;

/// Exact statistics of tau_A computed by the oracle, with provenance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
    /// raw_moments[k - 1] = E[tau_A^k] for k = 1..=n_max.
    pub raw_moments: Vec<f64>,
    pub mgf_samples: Vec<(f64, f64)>,
    pub cdf_samples: Vec<(f64, f64)>,
    pub visited_states: usize,
    pub method: String,
}

pub struct Oracle {
    poset: Arc<Poset>,
    rates: RateMap,
    memo_cap: usize,
    entries: usize,
    mean: HashMap<SetKey, f64>,
    variance: HashMap<SetKey, f64>,
    moments: HashMap<(u32, SetKey), f64>,
    mgf: HashMap<(u64, SetKey), f64>,
}

impl Oracle {
    pub fn new(rates: RateMap) -> Self {
        Oracle::with_memo_cap(rates, DEFAULT_MEMO_CAP)
    }

    pub fn with_memo_cap(rates: RateMap, memo_cap: usize) -> Self {
        Oracle {
            poset: rates.poset().clone(),
            rates,
            memo_cap,
            entries: 0,
            mean: HashMap::new(),
            variance: HashMap::new(),
            moments: HashMap::new(),
            mgf: HashMap::new(),
        }
    }

    pub fn rates(&self) -> &RateMap {
        &self.rates
    }

    /// Total number of memo entries stored so far, across quantities.
    pub fn visited_states(&self) -> usize {
        self.entries
    }

    fn charge(&mut self) -> Result<()> {
        if self.entries >= self.memo_cap {
            return Err(Error::Budget(format!(
                "oracle memo exceeded {} entries",
                self.memo_cap
            )));
        }
        self.entries += 1;
        Ok(())
    }

    /// lambda_a and the antichain key of A \ a, for each maximal a.
    ///
    /// The children antichains are rebuilt from the antichain alone: the
    /// lower neighbors of the removed element become maximal unless they
    /// sit below another surviving maximal element.
    fn split(&self, key: &SetKey) -> Result<Vec<(f64, ElementId, SetKey)>> {
        let mut out = Vec::with_capacity(key.0.len());
        for alpha in &key.0 {
            let lambda = self.rates.rate(alpha)?;
            let remaining: Vec<ElementId> = key
                .0
                .iter()
                .filter(|m| *m != alpha)
                .cloned()
                .collect();
            let mut child = remaining.clone();
            for low in self.poset.lower_neighbors(alpha)? {
                let dominated = remaining
                    .iter()
                    .any(|m| self.poset.leq(&low, m).unwrap_or(false));
                if !dominated {
                    child.push(low);
                }
            }
            child.sort();
            child.dedup();
            out.push((lambda, alpha.clone(), SetKey(child)));
        }
        Ok(out)
    }

    pub fn mean(&mut self, set: &LowerSet) -> Result<f64> {
        self.mean_key(&set.key())
    }

    fn mean_key(&mut self, key: &SetKey) -> Result<f64> {
        if key.0.is_empty() {
            return Ok(0.0);
        }
        if let Some(&v) = self.mean.get(key) {
            return Ok(v);
        }
        let parts = self.split(key)?;
        let s: f64 = parts.iter().map(|(l, _, _)| l).sum();
        let mut acc = 1.0;
        for (lambda, _, child) in &parts {
            acc += lambda * self.mean_key(child)?;
        }
        let v = acc / s;
        self.charge()?;
        self.mean.insert(key.clone(), v);
        Ok(v)
    }

    pub fn variance(&mut self, set: &LowerSet) -> Result<f64> {
        self.variance_key(&set.key())
    }

    fn variance_key(&mut self, key: &SetKey) -> Result<f64> {
        if key.0.is_empty() {
            return Ok(0.0);
        }
        if let Some(&v) = self.variance.get(key) {
            return Ok(v);
        }
        let parts = self.split(key)?;
        let s: f64 = parts.iter().map(|(l, _, _)| l).sum();
        let mean_here = self.mean_key(key)?;
        let mut acc = 0.0;
        for (lambda, _, child) in &parts {
            let gap = mean_here - self.mean_key(child)?;
            acc += lambda * gap * gap;
            acc += lambda * self.variance_key(child)?;
        }
        let v = acc / s;
        self.charge()?;
        self.variance.insert(key.clone(), v);
        Ok(v)
    }

    /// E[tau_A^n]; n = 0 gives 1 and n = 1 agrees with the mean recursion.
    pub fn moment(&mut self, set: &LowerSet, n: u32) -> Result<f64> {
        self.moment_key(&set.key(), n)
    }

    fn moment_key(&mut self, key: &SetKey, n: u32) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if key.0.is_empty() {
            return Ok(0.0);
        }
        let memo_key = (n, key.clone());
        if let Some(&v) = self.moments.get(&memo_key) {
            return Ok(v);
        }
        let parts = self.split(key)?;
        let s: f64 = parts.iter().map(|(l, _, _)| l).sum();
        let mut acc = n as f64 * self.moment_key(key, n - 1)?;
        for (lambda, _, child) in &parts {
            acc += lambda * self.moment_key(child, n)?;
        }
        let v = acc / s;
        self.charge()?;
        self.moments.insert(memo_key, v);
        Ok(v)
    }

    /// E[e^{u tau_A}], defined for u < lambda_-(A) (the paper's
    /// well-definedness regime; the recursion itself only needs u < s_A).
    pub fn mgf(&mut self, set: &LowerSet, u: f64) -> Result<f64> {
        if !set.is_empty() {
            let (lambda_min, _) = self.rates.min_max(set.elements())?;
            if u >= lambda_min {
                return Err(Error::Domain(format!(
                    "MGF needs u < lambda_-(A) = {lambda_min}, got u = {u}"
                )));
            }
        }
        self.mgf_key(&set.key(), u)
    }

    fn mgf_key(&mut self, key: &SetKey, u: f64) -> Result<f64> {
        if key.0.is_empty() {
            return Ok(1.0);
        }
        let memo_key = (u.to_bits(), key.clone());
        if let Some(&v) = self.mgf.get(&memo_key) {
            return Ok(v);
        }
        let parts = self.split(key)?;
        let s: f64 = parts.iter().map(|(l, _, _)| l).sum();
        let mut acc = 0.0;
        for (lambda, _, child) in &parts {
            acc += lambda * self.mgf_key(child, u)?;
        }
        let v = acc / (s - u);
        self.charge()?;
        self.mgf.insert(memo_key, v);
        Ok(v)
    }

    /// P(tau_A <= t) at the requested times, by uniformization of the
    /// absorbing growth chain on the lower-set lattice of A, truncated so
    /// the neglected Poisson mass stays below `UNIFORMIZATION_TOL`.
    pub fn cdf(&mut self, set: &LowerSet, ts: &[f64], enumeration_cap: usize) -> Result<Vec<f64>> {
        for &t in ts {
            if !(t >= 0.0) {
                return Err(Error::Domain(format!("CDF times must be >= 0, got {t}")));
            }
        }
        if set.is_empty() {
            return Ok(vec![1.0; ts.len()]);
        }
        let chain = AbsorbingChain::build(set, &self.rates, enumeration_cap)?;
        ts.iter().map(|&t| chain.absorption_probability(t)).collect()
    }

    /// Assembles the full exact report for one target set.
    pub fn report(
        &mut self,
        set: &LowerSet,
        n_max: u32,
        u_grid: &[f64],
        t_grid: &[f64],
        enumeration_cap: usize,
    ) -> Result<MomentReport> {
        let mean = self.mean(set)?;
        let variance = self.variance(set)?;
        let mut raw_moments = Vec::new();
        for n in 1..=n_max {
            raw_moments.push(self.moment(set, n)?);
        }
        let mut mgf_samples = Vec::new();
        for &u in u_grid {
            let (lambda_min, _) = self.rates.min_max(set.elements())?;
            if set.is_empty() || u < lambda_min {
                mgf_samples.push((u, self.mgf(set, u)?));
            }
        }
        let cdf_values = self.cdf(set, t_grid, enumeration_cap)?;
        let cdf_samples: Vec<(f64, f64)> =
            t_grid.iter().copied().zip(cdf_values).collect();
        Ok(MomentReport {
            mean,
            variance,
            raw_moments,
            mgf_samples,
            cdf_samples,
            visited_states: self.entries,
            method: "exact".to_string(),
        })
    }
}

/// The growth process restricted to the sub-lower-sets of a target A, with
/// A absorbing. P(tau_A <= t) is the probability the chain started at the
/// empty set sits in A at time t.
struct AbsorbingChain {
    /// transitions[i] lists (j, rate).
    transitions: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
    uniform_rate: f64,
    start: usize,
    target: usize,
}

impl AbsorbingChain {
    fn build(set: &LowerSet, rates: &RateMap, enumeration_cap: usize) -> Result<Self> {
        let states = set.enumerate_sublowersets(enumeration_cap.min(usize::MAX))?;
        let index: HashMap<SetKey, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.key(), i))
            .collect();
        let mut transitions = vec![Vec::new(); states.len()];
        let mut exit = vec![0.0; states.len()];
        for (i, state) in states.iter().enumerate() {
            for beta in state.growth_sites()? {
                if !set.contains(&beta) {
                    continue;
                }
                let j = index[&state.add_site(&beta)?.key()];
                let rate = rates.rate(&beta)?;
                transitions[i].push((j, rate));
                exit[i] += rate;
            }
        }
        let uniform_rate = exit.iter().cloned().fold(0.0, f64::max);
        let start = index[&SetKey(Vec::new())];
        let target = index[&set.key()];
        Ok(AbsorbingChain {
            transitions,
            exit,
            uniform_rate,
            start,
            target,
        })
    }

    fn absorption_probability(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(if self.start == self.target { 1.0 } else { 0.0 });
        }
        let mu = self.uniform_rate * t;
        let weights = poisson_weights(mu, UNIFORMIZATION_TOL);
        let n = self.transitions.len();
        let mut v = vec![0.0f64; n];
        let mut next = vec![0.0f64; n];
        v[self.start] = 1.0;
        let mut acc = 0.0;
        for w in weights {
            acc += w * v[self.target];
            next.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                next[i] += v[i] * (1.0 - self.exit[i] / self.uniform_rate);
                for &(j, rate) in &self.transitions[i] {
                    next[j] += v[i] * rate / self.uniform_rate;
                }
            }
            std::mem::swap(&mut v, &mut next);
        }
        Ok(acc.min(1.0))
    }
}

/// Poisson(mu) weights w_0, w_1, ... covering all but `tol` of the mass.
///
/// Grown outward from the mode (whose weight comes from log space, so large
/// mu cannot underflow the recurrence) until both edge weights are
/// negligible, then renormalized: the log-gamma evaluation carries a common
/// relative bias of order 1e-10 at large arguments, which renormalization
/// cancels. Past the stopping edge the weights decay at least geometrically,
/// so the discarded true mass is orders of magnitude below `tol`.
fn poisson_weights(mu: f64, tol: f64) -> Vec<f64> {
    if mu <= 0.0 {
        return vec![1.0];
    }
    let mode = mu.floor();
    let w_mode = (-mu + mode * mu.ln() - ln_gamma(mode + 1.0)).exp();
    let edge = tol * 1e-6;
    let mut hi_k = mode;
    let mut w_hi = w_mode;
    let mut lo_k = mode;
    let mut w_lo = w_mode;
    let mut weights_hi = vec![w_mode];
    let mut weights_lo: Vec<f64> = Vec::new();
    let mut total = w_mode;
    loop {
        let next_hi = w_hi * mu / (hi_k + 1.0);
        let next_lo = if lo_k > 0.0 { w_lo * lo_k / mu } else { 0.0 };
        if next_hi.max(next_lo) <= edge * w_mode.min(1.0) {
            break;
        }
        if next_hi >= next_lo {
            hi_k += 1.0;
            w_hi = next_hi;
            weights_hi.push(w_hi);
            total += w_hi;
        } else {
            w_lo = next_lo;
            lo_k -= 1.0;
            weights_lo.push(w_lo);
            total += w_lo;
        }
        if weights_hi.len() + weights_lo.len() > 4_000_000 {
            break;
        }
    }
    let start = lo_k as usize;
    let mut out = vec![0.0; start];
    out.extend(weights_lo.iter().rev());
    out.extend(weights_hi);
    for w in &mut out {
        *w /= total;
    }
    out
}

/// Tail bound (lambda_+ t + 1)^|A| e^{-t lambda_-}; the raw value, not
/// clipped to [0, 1].
pub fn tail_bound(set: &LowerSet, rates: &RateMap, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("tail bound needs t >= 0, got {t}")));
    }
    if set.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = rates.min_max(set.elements())?;
    Ok((hi * t + 1.0).powi(set.len() as i32) * (-t * lo).exp())
}

/// Builds the dependency DAG once; used by tests and the simulators.
pub fn set_dag(set: &LowerSet) -> Result<SetDag> {
    SetDag::build(set)
}
