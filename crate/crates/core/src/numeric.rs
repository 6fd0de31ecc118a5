//! Small numeric helpers: log-gamma, log-multinomials, log-sum-exp, and a
//! stable splitmix64 for element-keyed seeding.

/// ln(Gamma(x)) via the Lanczos approximation (g = 5, 6 coefficients).
///
/// Good to ~1e-13 relative error for x > 0, which is far below every
/// tolerance used in this crate.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let coefficients: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];

    let tmp = x + 5.5;
    let log = (x + 0.5) * tmp.ln() - tmp;

    let mut a = 1.000000000190015;
    let mut denom = x;
    for coeff in &coefficients {
        denom += 1.0;
        a += coeff / denom;
    }

    log + (2.5066282746310005 * a / x).ln()
}

/// ln(n!)
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// ln of the multinomial coefficient (sum(parts))! / prod(parts_i!).
pub fn ln_multinomial(parts: &[u64]) -> f64 {
    let total: u64 = parts.iter().sum();
    ln_factorial(total) - parts.iter().map(|&p| ln_factorial(p)).sum::<f64>()
}

/// log(sum(exp(xs))) with max-shift; empty input yields -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    // Compensated accumulation of the shifted terms.
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let term = (x - m).exp();
        let y = term - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    m + sum.ln()
}

/// splitmix64 step; used to derive element-keyed uniforms for seeded
/// random rate tables.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Uniform in [0, 1) from 53 bits of a u64.
pub fn unit_f64(bits: u64) -> f64 {
    const DEN: f64 = (1u64 << 53) as f64;
    ((bits >> 11) as f64) / DEN
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1u64..=20 {
            fact *= n as f64;
            let rel = (ln_factorial(n) - fact.ln()).abs() / fact.ln().max(1.0);
            assert!(rel < 1e-12, "n={n} rel={rel}");
        }
    }

    #[test]
    fn ln_multinomial_small_cases() {
        // C(4, 2) = 6, C(3; 2,1) = 3
        assert!((ln_multinomial(&[2, 2]) - 6.0f64.ln()).abs() < 1e-12);
        assert!((ln_multinomial(&[2, 1]) - 3.0f64.ln()).abs() < 1e-12);
        assert!(ln_multinomial(&[5, 0]).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_agrees_with_direct_sum() {
        let xs = [0.0f64, -1.0, 2.5, 0.3];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum();
        assert!((log_sum_exp(&xs) - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn unit_f64_is_in_range() {
        for seed in 0..100u64 {
            let u = unit_f64(splitmix64(seed));
            assert!((0.0..1.0).contains(&u));
        }
    }
}
