//! Detection-boundary constants for the normal and Poisson models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs for the boundary formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams {
    /// Sparsity exponent: `N^{1-β}` sequences carry the signal.
    pub beta: f64,
    /// `log T ~ N^ζ`.
    pub zeta: f64,
    /// Poisson rate ratio.
    pub r: f64,
}

fn domain(msg: String) -> Error {
    Error::Domain(msg)
}

/// Normal sparse-mixture boundary, `β ∈ (1/2, 1)`.
pub fn rho_z(beta: f64) -> Result<f64> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(domain(format!("rho_z needs 1/2 < beta < 1, got {beta}")));
    }
    Ok(if beta < 0.75 { beta - 0.5 } else { (1.0 - (1.0 - beta).sqrt()).powi(2) })
}

fn check_beta_zeta(beta: f64, zeta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&zeta) {
        return Err(domain(format!("zeta must lie in [0, 1), got {zeta}")));
    }
    let w = 1.0 - zeta;
    if !(beta > w / 2.0 && beta < w) {
        return Err(domain(format!("need (1-zeta)/2 < beta < 1-zeta, got beta={beta}, zeta={zeta}")));
    }
    Ok(w)
}

/// Normal change-point boundary with `log T ~ N^ζ`.
pub fn rho_z2(beta: f64, zeta: f64) -> Result<f64> {
    let w = check_beta_zeta(beta, zeta)?;
    Ok(if beta <= 0.75 * w { beta - w / 2.0 } else { (w.sqrt() - (w - beta).sqrt()).powi(2) })
}

/// Large-deviation constant `r log(2r/(r+1)) + log(2/(r+1))`.
pub fn poisson_info(r: f64) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(domain(format!("poisson_info needs r >= 1, got {r}")));
    }
    Ok(r * (2.0 * r / (r + 1.0)).ln() + (2.0 / (r + 1.0)).ln())
}

fn check_r_omega(r: f64, omega: f64) -> Result<()> {
    if !(r >= 1.0 && r.is_finite() && omega > 0.0 && omega.is_finite()) {
        return Err(domain(format!("need r >= 1 and omega > 0, got r={r}, omega={omega}")));
    }
    Ok(())
}

/// Power mean `((1 + r^ω)/2)^{1/ω}`.
pub fn g_omega(r: f64, omega: f64) -> Result<f64> {
    check_r_omega(r, omega)?;
    Ok(g_raw(r, omega))
}

/// `D(ω)`, the logarithmic derivative factor with `g'(ω) = D(ω) g(ω) / ω²`.
pub fn d_omega(r: f64, omega: f64) -> Result<f64> {
    check_r_omega(r, omega)?;
    Ok(d_raw(r, omega))
}

fn g_raw(r: f64, omega: f64) -> f64 {
    ((1.0 + r.powf(omega)) / 2.0).powf(1.0 / omega)
}

fn d_raw(r: f64, omega: f64) -> f64 {
    let ro = r.powf(omega);
    let denom = 1.0 + ro;
    (2.0 / denom).ln() / denom + ro / denom * (2.0 * ro / denom).ln()
}

/// Objective maximized over ω in the Poisson boundary.
pub fn xi(beta: f64, zeta: f64, r: f64, omega: f64) -> f64 {
    (beta - (1.0 - zeta) / omega) / (2.0 * g_raw(r, omega) - 1.0 - r)
}

fn check_rho_r(beta: f64, zeta: f64, r: f64) -> Result<f64> {
    let w = check_beta_zeta(beta, zeta)?;
    if !(r > 1.0 && r.is_finite()) {
        return Err(domain(format!("rho_r needs r > 1, got {r}")));
    }
    Ok(w)
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Poisson change-point boundary: value and maximizing ω of
/// `ξ(ω) = (β - (1-ζ)/ω) / (2 g(ω) - 1 - r)` over `((1-ζ)/β, 2]`.
pub fn rho_r(beta: f64, zeta: f64, r: f64) -> Result<(f64, f64)> {
    let w = check_rho_r(beta, zeta, r)?;
    let lo = w / beta;
    let f = |om: f64| xi(beta, zeta, r, om);
    // Bracket on a coarse grid, then refine inside the bracket.
    let steps = 256;
    let grid = |k: usize| lo + (2.0 - lo) * k as f64 / steps as f64;
    let best_k = (1..=steps)
        .max_by(|&a, &b| f(grid(a)).total_cmp(&f(grid(b))))
        .expect("nonempty grid");
    if best_k == steps {
        let omega = golden_section_max(f, grid(steps - 1), 2.0, 1e-12);
        return Ok(if f(omega) > f(2.0) { (f(omega), omega) } else { (f(2.0), 2.0) });
    }
    let omega = golden_section_max(f, grid(best_k - 1), grid(best_k + 1), 1e-12);
    Ok((f(omega), omega))
}

/// Threshold on `β/(1-ζ)` below which the maximum sits at `ω = 2`.
pub fn boundary_regime_threshold(r: f64) -> Result<f64> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(domain(format!("need r > 1, got {r}")));
    }
    let (g2, d2) = (g_raw(r, 2.0), d_raw(r, 2.0));
    Ok(0.5 * (1.0 + (2.0 * g2 - 1.0 - r) / (g2 * d2)))
}

/// Residual of the interior stationarity condition
/// `β/(1-ζ) = 1/ω + (2g(ω) - 1 - r) / (2 g(ω) D(ω))`.
pub fn stationarity_residual(beta: f64, zeta: f64, r: f64, omega: f64) -> f64 {
    let (g, d) = (g_raw(r, omega), d_raw(r, omega));
    1.0 / omega + (2.0 * g - 1.0 - r) / (2.0 * g * d) - beta / (1.0 - zeta)
}

/// Poisson boundary from the two-regime representation: the `ω = 2` formula
/// below the regime threshold, otherwise `(1-ζ)/(2 g(ω) D(ω))` at the root of
/// the stationarity condition (found by bisection).
pub fn rho_r_closed_form(beta: f64, zeta: f64, r: f64) -> Result<(f64, f64)> {
    let w = check_rho_r(beta, zeta, r)?;
    if beta / w <= boundary_regime_threshold(r)? {
        let g2 = g_raw(r, 2.0);
        return Ok(((beta - w / 2.0) / (2.0 * g2 - 1.0 - r), 2.0));
    }
    // residual > 0 near (1-ζ)/β and < 0 at 2
    let (mut lo, mut hi) = (w / beta, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if stationarity_residual(beta, zeta, r, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let omega = 0.5 * (lo + hi);
    Ok((w / (2.0 * g_raw(r, omega) * d_raw(r, omega)), omega))
}
