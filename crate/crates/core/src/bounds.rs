//! Evaluation of every closed-form bound against exact oracle references,
//! over enumerated families of lower sets and rate assignments.
//!
//! Each check is normalized to "lhs <= rhs" with margin = rhs - lhs; a check
//! passes when the margin is no more negative than a scale-relative
//! tolerance (exact references) or 4 standard errors (Monte Carlo
//! references).

use crate::error::{Error, Result};
use crate::lowerset::{enumerate_lowersets_by_size, LowerSet};
use crate::mc::{estimate, McMethod};
use crate::oracle::{tail_bound, Oracle};
use crate::paths::{grtr_path_geometric, lssr_path_geometric, path_stats, BranchingAllocation};
use crate::rates::RateMap;
use crate::tolerances::{BOUND_REL_TOL, MC_SIGMA};
use serde::Serialize;

/// One bound evaluation, normalized to lhs <= rhs.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub bound: String,
    pub set_key: String,
    pub rates: String,
    pub params: String,
    /// Left side of the normalized inequality.
    pub lhs: f64,
    /// Right side of the normalized inequality.
    pub rhs: f64,
    /// rhs - lhs; non-negative (within tolerance) means the bound holds.
    pub margin: f64,
    pub reference_method: String,
    pub pass: bool,
}

impl BoundReport {
    fn exact(bound: &str, set: &LowerSet, rates: &RateMap, params: String, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        let tol = BOUND_REL_TOL * lhs.abs().max(rhs.abs()).max(1.0);
        BoundReport {
            bound: bound.to_string(),
            set_key: set.key().render(),
            rates: rates.label().to_string(),
            params,
            lhs,
            rhs,
            margin,
            reference_method: "exact".to_string(),
            pass: margin >= -tol,
        }
    }

    fn mc(bound: &str, set: &LowerSet, rates: &RateMap, params: String, lhs: f64, rhs: f64, stderr: f64) -> Self {
        let margin = rhs - lhs;
        BoundReport {
            bound: bound.to_string(),
            set_key: set.key().render(),
            rates: rates.label().to_string(),
            params,
            lhs,
            rhs,
            margin,
            reference_method: "mc".to_string(),
            pass: margin >= -MC_SIGMA * stderr,
        }
    }
}

/// Exact mean with Monte Carlo fallback when the memo budget is exhausted:
/// (value, stderr, method-tag).
fn mean_reference(oracle: &mut Oracle, set: &LowerSet, mc_cfg: &McReference) -> Result<(f64, f64, &'static str)> {
    match oracle.mean(set) {
        Ok(v) => Ok((v, 0.0, "exact")),
        Err(Error::Budget(_)) => {
            let est = estimate(set, oracle.rates(), McMethod::StaticLpp, mc_cfg.replicas, mc_cfg.seed)?;
            Ok((est.mean, est.stderr_mean, "mc"))
        }
        Err(e) => Err(e),
    }
}

/// Fallback Monte Carlo configuration for references.
#[derive(Debug, Clone, Copy)]
pub struct McReference {
    pub replicas: usize,
    pub seed: u64,
}

impl Default for McReference {
    fn default() -> Self {
        McReference {
            replicas: 100_000,
            seed: 0,
        }
    }
}

/// Tail probability bound (lambda_+ t + 1)^{|A|} e^{-t lambda_-} against
/// 1 - P(tau_A <= t).
pub fn tail_bound_check(
    oracle: &mut Oracle,
    set: &LowerSet,
    t: f64,
    enumeration_cap: usize,
) -> Result<BoundReport> {
    let bound = tail_bound(set, oracle.rates(), t)?;
    let cdf = oracle.cdf(set, &[t], enumeration_cap)?[0];
    let tail = 1.0 - cdf;
    let rates = oracle.rates().clone();
    Ok(BoundReport::exact(
        "tail-probability",
        set,
        &rates,
        format!("t={t}"),
        tail,
        bound,
    ))
}

/// lambda_-(A) Var[tau_A] <= E[tau_A].
pub fn var_mean_bound(oracle: &mut Oracle, set: &LowerSet) -> Result<BoundReport> {
    let (lambda_min, _) = oracle.rates().min_max(set.elements())?;
    let lhs = lambda_min * oracle.variance(set)?;
    let rhs = oracle.mean(set)?;
    let rates = oracle.rates().clone();
    Ok(BoundReport::exact("variance-mean", set, &rates, String::new(), lhs, rhs))
}

/// len(A)/lambda_+ <= E[tau_A] <= (sqrt(len) + sqrt(kappa + eta))^2 / lambda_-.
/// The mean reference comes from the exact oracle while the sub-lower-set
/// lattice fits the memo budget, and from Monte Carlo (4 sigma tolerance,
/// tagged "mc") beyond it.
pub fn mean_bounds(
    oracle: &mut Oracle,
    set: &LowerSet,
    mc: &McReference,
) -> Result<(BoundReport, BoundReport)> {
    let stats = path_stats(set, oracle.rates())?;
    let (lambda_min, lambda_max) = oracle.rates().min_max(set.elements())?;
    let (mean, stderr, method) = mean_reference(oracle, set, mc)?;
    let rates = oracle.rates().clone();
    let lower = if set.is_empty() {
        0.0
    } else {
        stats.ell as f64 / lambda_max
    };
    let upper = if set.is_empty() {
        0.0
    } else {
        let s = (stats.ell as f64).sqrt() + (stats.kappa + stats.eta).sqrt();
        s * s / lambda_min
    };
    let (low_report, up_report) = if method == "exact" {
        (
            BoundReport::exact("mean-lower", set, &rates, String::new(), lower, mean),
            BoundReport::exact("mean-upper", set, &rates, String::new(), mean, upper),
        )
    } else {
        (
            BoundReport::mc("mean-lower", set, &rates, String::new(), lower, mean, stderr),
            BoundReport::mc("mean-upper", set, &rates, String::new(), mean, upper, stderr),
        )
    };
    Ok((low_report, up_report))
}

/// Upper pairing: u (grtr(A, u) - 1) >= E[e^{lambda_- u tau}] - 1 for
/// 0 < u < 1. Lower pairing: u (lssr(A, u, psi) - 1) <= E[e^{lambda_+ u tau}] - 1
/// for 0 < u < lambda_-/lambda_+. Reports whichever pairings are in domain.
pub fn mgf_bounds(
    oracle: &mut Oracle,
    set: &LowerSet,
    u: f64,
    psi: &BranchingAllocation,
) -> Result<Vec<BoundReport>> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("mgf bounds need 0 < u < 1, got {u}")));
    }
    let mut out = Vec::new();
    let (lambda_min, lambda_max) = oracle.rates().min_max(set.elements())?;
    let rates = oracle.rates().clone();

    let grtr = grtr_path_geometric(set, u)?;
    let mgf_at_min = if set.is_empty() {
        1.0
    } else {
        oracle.mgf(set, lambda_min * u)?
    };
    out.push(BoundReport::exact(
        "mgf-upper",
        set,
        &rates,
        format!("u={u}"),
        mgf_at_min - 1.0,
        u * (grtr - 1.0),
    ));

    let ratio = if set.is_empty() { 1.0 } else { lambda_min / lambda_max };
    if u < ratio {
        let lssr = lssr_path_geometric(set, u, psi)?;
        let mgf_at_max = if set.is_empty() {
            1.0
        } else {
            oracle.mgf(set, lambda_max * u)?
        };
        out.push(BoundReport::exact(
            "mgf-lower",
            set,
            &rates,
            format!("u={u},psi={}", psi.label()),
            u * (lssr - 1.0),
            mgf_at_max - 1.0,
        ));
    }
    Ok(out)
}

/// E[tau^n] - E[tau]^n <= K n (n-1)^2 / 2 E[tau^{n-1}] at p = 1.
/// Two variants are reported: per-set K = 1/lambda_-(A) and the
/// hypothesis-faithful global K = 1/lambda_-(fragment).
pub fn higher_moment_bound(
    oracle: &mut Oracle,
    set: &LowerSet,
    n: u32,
    global_lambda_min: f64,
) -> Result<Vec<BoundReport>> {
    if n < 2 {
        return Err(Error::Domain(format!("higher moment bound needs n >= 2, got {n}")));
    }
    let rates = oracle.rates().clone();
    let mean = oracle.mean(set)?;
    let mn = oracle.moment(set, n)?;
    let m_prev = oracle.moment(set, n - 1)?;
    let lhs = mn - mean.powi(n as i32);
    let factor = n as f64 * ((n - 1) as f64).powi(2) / 2.0;
    let (lambda_min, _) = oracle.rates().min_max(set.elements())?;
    let mut out = Vec::new();
    let k_local = if set.is_empty() { 0.0 } else { 1.0 / lambda_min };
    out.push(BoundReport::exact(
        "higher-moment",
        set,
        &rates,
        format!("n={n},K=per-set"),
        lhs,
        k_local * factor * m_prev,
    ));
    out.push(BoundReport::exact(
        "higher-moment-global-K",
        set,
        &rates,
        format!("n={n},K=1/{global_lambda_min}"),
        lhs,
        factor * m_prev / global_lambda_min,
    ));
    Ok(out)
}

/// |E[(tau - mu)^n]| <= K n (n-1)^2 / 2 E[tau (tau + mu)^{n-2}] at p = 1,
/// with both sides expanded into raw moments.
pub fn central_moment_bound(oracle: &mut Oracle, set: &LowerSet, n: u32) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::Domain(format!("central moment bound needs n >= 2, got {n}")));
    }
    let rates = oracle.rates().clone();
    let mu = oracle.mean(set)?;
    let mut moments = vec![1.0];
    for k in 1..=n {
        moments.push(oracle.moment(set, k)?);
    }
    // lhs: |sum_k C(n,k) (-1)^{n-k} M_k mu^{n-k}|
    let mut lhs = 0.0;
    for k in 0..=n {
        let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
        lhs += sign * binomial(n, k) * moments[k as usize] * mu.powi((n - k) as i32);
    }
    let lhs = lhs.abs();
    // rhs: K n(n-1)^2/2 E[tau (tau + mu)^{n-2}]
    //    = K n(n-1)^2/2 sum_j C(n-2,j) M_{j+1} mu^{n-2-j}
    let mut expectation = 0.0;
    for j in 0..=(n - 2) {
        expectation += binomial(n - 2, j) * moments[(j + 1) as usize] * mu.powi((n - 2 - j) as i32);
    }
    let (lambda_min, _) = oracle.rates().min_max(set.elements())?;
    let k_const = if set.is_empty() { 0.0 } else { 1.0 / lambda_min };
    let rhs = k_const * n as f64 * ((n - 1) as f64).powi(2) / 2.0 * expectation;
    Ok(BoundReport::exact(
        "central-moment",
        set,
        &rates,
        format!("n={n}"),
        lhs,
        rhs,
    ))
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Which form of the increasing envelope f in the variance lower bound to
/// use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarLowerForm {
    /// f(n) = max over all lower sets B with |B| <= n of the total maximal
    /// rate, found by exhaustive enumeration.
    Generic,
    /// Two-dimensional lattice: |max(B)| <= sqrt(2 |B|), so
    /// f(x) = lambda_+ sqrt(2x) and the bound integrates to
    /// log(|A| + 1) / (2 lambda_+^2).
    Lattice2d,
    /// Bounded antichains |max(B)| <= b: f = lambda_+ b gives
    /// |A| / (lambda_+ b)^2.
    Columnar { b: usize },
}

/// Lower bound on Var[tau_A] from the growth-rate envelope, checked against
/// the exact variance.
pub fn var_lower_bound(
    oracle: &mut Oracle,
    set: &LowerSet,
    form: VarLowerForm,
    enumeration_cap: usize,
) -> Result<BoundReport> {
    let rates = oracle.rates().clone();
    let m = set.len();
    let bound = match form {
        VarLowerForm::Generic => {
            let levels = enumerate_lowersets_by_size(set.poset(), m, enumeration_cap)?;
            // f(n) = running max over sizes <= n of the maximal-antichain
            // total rate; the bound is the piecewise-constant integral
            // sum_{k=1..m} 1/f(k)^2.
            let mut f = vec![0.0f64; m + 1];
            let mut running = 0.0f64;
            for (size, level) in levels.iter().enumerate() {
                for b in level {
                    let s: f64 = b
                        .maximal()
                        .iter()
                        .map(|a| rates.rate(a))
                        .collect::<Result<Vec<_>>>()?
                        .iter()
                        .sum();
                    running = running.max(s);
                }
                if size <= m {
                    f[size] = running;
                }
            }
            (1..=m).map(|k| 1.0 / (f[k] * f[k])).sum()
        }
        VarLowerForm::Lattice2d => {
            if set.poset().family_name() != "lattice" {
                return Err(Error::Precondition(
                    "2d form of the variance lower bound needs the lattice family".into(),
                ));
            }
            let lambda = rates.global_sup();
            ((m + 1) as f64).ln() / (2.0 * lambda * lambda)
        }
        VarLowerForm::Columnar { b } => {
            let lambda = rates.global_sup();
            m as f64 / (lambda * b as f64).powi(2)
        }
    };
    let variance = oracle.variance(set)?;
    Ok(BoundReport::exact(
        "variance-lower",
        set,
        &rates,
        format!("form={form:?}"),
        bound,
        variance,
    ))
}

/// In the two-dimensional lattice, |max(A)| <= sqrt(2 |A|).
pub fn antichain_bound_check(set: &LowerSet, rates: &RateMap) -> BoundReport {
    let lhs = set.maximal().len() as f64;
    let rhs = (2.0 * set.len() as f64).sqrt();
    BoundReport::exact("antichain-sqrt", set, rates, String::new(), lhs, rhs)
}

/// Grids of auxiliary parameters for the full sweep.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default = "Grids::default_t")]
    pub t: Vec<f64>,
    #[serde(default = "Grids::default_u")]
    pub u: Vec<f64>,
    #[serde(default = "Grids::default_n")]
    pub n: Vec<u32>,
}

impl Grids {
    fn default_t() -> Vec<f64> {
        vec![0.5, 1.0, 2.0, 5.0]
    }
    fn default_u() -> Vec<f64> {
        vec![0.1, 0.25, 0.5]
    }
    fn default_n() -> Vec<u32> {
        vec![2, 3, 4]
    }
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            t: Grids::default_t(),
            u: Grids::default_u(),
            n: Grids::default_n(),
        }
    }
}

/// Runs the whole bound suite for every lower set contained in the fragment
/// B, at every grid point. Any failed report is a hard error for the caller
/// via the `pass` flags; this function only evaluates.
pub fn verify_all(
    rates: &RateMap,
    fragment: &LowerSet,
    grids: &Grids,
    element_cap: usize,
    enumeration_cap: usize,
    memo_cap: usize,
) -> Result<Vec<BoundReport>> {
    let mut oracle = Oracle::with_memo_cap(rates.clone(), memo_cap);
    let mut out = Vec::new();
    let (global_lambda_min, _) = rates.min_max(fragment.elements())?;
    let is_lattice2 = matches!(
        fragment.poset().as_ref(),
        crate::poset::Poset::Lattice { dim: 2 }
    );
    let psis = [
        BranchingAllocation::UniformGlobal,
        BranchingAllocation::UniformInSet,
    ];
    for set in fragment.enumerate_sublowersets(element_cap)? {
        for &t in &grids.t {
            out.push(tail_bound_check(&mut oracle, &set, t, enumeration_cap)?);
        }
        out.push(var_mean_bound(&mut oracle, &set)?);
        let (low, high) = mean_bounds(&mut oracle, &set, &McReference::default())?;
        out.push(low);
        out.push(high);
        for &u in &grids.u {
            for psi in &psis {
                out.extend(mgf_bounds(&mut oracle, &set, u, psi)?);
            }
        }
        for &n in &grids.n {
            out.extend(higher_moment_bound(&mut oracle, &set, n, global_lambda_min)?);
            out.push(central_moment_bound(&mut oracle, &set, n)?);
        }
        out.push(var_lower_bound(
            &mut oracle,
            &set,
            VarLowerForm::Generic,
            enumeration_cap,
        )?);
        if is_lattice2 {
            out.push(var_lower_bound(
                &mut oracle,
                &set,
                VarLowerForm::Lattice2d,
                enumeration_cap,
            )?);
            out.push(antichain_bound_check(&set, rates));
        }
    }
    Ok(out)
}
