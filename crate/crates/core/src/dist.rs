//! Distribution helpers shared by the p-value engines.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;
use statrs::function::factorial::ln_binomial;

/// Smallest p-value handed to the scoring functions.
pub const P_FLOOR: f64 = 1e-300;

/// Two-sided normal tail probability `2 Φ(-|z|)`, floored at [`P_FLOOR`].
pub fn two_sided_normal(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(P_FLOOR, 1.0)
}

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn std_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `P(X = k)` for `X ~ Bin(n, prob)`.
pub fn binomial_pmf(n: u64, k: u64, prob: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if prob <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if prob >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let (nf, kf) = (n as f64, k as f64);
    (ln_binomial(n, k) + kf * prob.ln() + (nf - kf) * (-prob).ln_1p()).exp()
}

/// `P(X <= k - 1)` for `X ~ Bin(n, prob)`, i.e. the CDF strictly below `k`.
pub fn binomial_cdf_below(n: u64, k: u64, prob: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > n {
        return 1.0;
    }
    if prob <= 0.0 {
        return 1.0;
    }
    if prob >= 1.0 {
        return 0.0;
    }
    // P(X <= k-1) = I_{1-p}(n-k+1, k)
    beta_reg((n - k + 1) as f64, k as f64, 1.0 - prob)
}

/// `P(X >= k + 1)` for `X ~ Bin(n, prob)`, i.e. the survival strictly above `k`.
pub fn binomial_sf_above(n: u64, k: u64, prob: f64) -> f64 {
    if k >= n {
        return 0.0;
    }
    if prob <= 0.0 {
        return 0.0;
    }
    if prob >= 1.0 {
        return 1.0;
    }
    // P(X >= k+1) = I_p(k+1, n-k)
    beta_reg((k + 1) as f64, (n - k) as f64, prob)
}
