//! Centralized numeric tolerances. Every threshold used by the library and
//! its verification suites is defined here, not inline.

/// Exact-arithmetic identities computed in f64 (golden oracle values,
/// equality cases of the bounds).
pub const EXACT_TOL: f64 = 1e-9;

/// Residual of one backward-recursion step; essentially a few ulps of the
/// defining division, so much tighter than EXACT_TOL.
pub const DELTA_CONSISTENCY_TOL: f64 = 1e-10;

/// Truncation error of the uniformization series for the CDF.
pub const UNIFORMIZATION_TOL: f64 = 1e-10;

/// Relative agreement between variance and raw moments inside a report.
pub const MOMENT_CONSISTENCY_REL: f64 = 1e-9;

/// Central finite difference of the MGF at 0 against the exact mean
/// (step 1e-5, so the difference quotient carries ~1e-10 truncation).
pub const MGF_DERIV_REL: f64 = 1e-6;

/// Second central difference of the MGF against the second raw moment.
pub const MGF_SECOND_DERIV_REL: f64 = 1e-4;

/// Step used by the finite-difference MGF checks.
pub const MGF_FD_STEP: f64 = 1e-5;

/// Multiplier on the standard error for Monte Carlo agreement checks.
pub const MC_SIGMA: f64 = 4.0;

/// Significance level of the two-sample Kolmogorov-Smirnov tests.
pub const KS_ALPHA: f64 = 0.01;

/// Minimum sample size where the asymptotic KS critical value is trusted.
pub const KS_MIN_SAMPLES: usize = 10_000;

/// Relative slack when validating that bound inequalities hold with exact
/// references; scaled by the magnitude of the compared values.
pub const BOUND_REL_TOL: f64 = 1e-9;
