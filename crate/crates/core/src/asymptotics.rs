//! Large-n formulas for the scaled distribution `P(n, γ, α)`.
//!
//! Here `α` is the probe point for the weight `x^γ e^{−4nx}`, whose
//! eigenvalues fill `(0, 1)` as `n → ∞`. `F_n(α) = S_n(4nα)` is the
//! Painlevé V quantity in these units.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::specfun::{ln_gamma, zeta_prime_minus_one};

/// A truncated expansion together with the order of what it leaves out.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub value: f64,
    pub remainder_order: &'static str,
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
}

pub const LEMMA_REMAINDER: &str = "O(1/((1-alpha)^4 n^2))";
pub const THEOREM_REMAINDER: &str = "O(1/(n^2 (1-alpha)^3)) + delta_n(gamma), delta_n = O(1/n)";
pub const SMALL_ALPHA_REMAINDER: &str = "o_n(alpha) as alpha -> 0 at fixed n";
pub const AIRY_TAIL_REMAINDER: &str = "O(s^-3)";

fn check_alpha_unit(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    Ok(())
}

/// Coefficients of the cubic whose real root is `F̃_n(α)`, highest degree
/// first: `c3 F³ − c2 F² − 3γ² F + γ² = 0`.
pub fn cubic_coefficients(n: usize, gamma: f64, alpha: f64) -> [f64; 4] {
    let nf = n as f64;
    let g2 = gamma * gamma;
    let lin = 8.0 * nf * alpha * (1.0 + gamma);
    let c3 = 16.0 * nf * nf * alpha * (1.0 - alpha) + lin - g2;
    let c2 = 16.0 * nf * nf * alpha * (1.0 + alpha) + lin - 3.0 * g2;
    [c3, -c2, -3.0 * g2, g2]
}

/// The real root of the cubic obtained from the rescaled Painlevé V
/// equation by dropping derivative terms.
///
/// Safeguarded Newton on the bracket `[1, 4(1+α)/(1−α)]`, started at
/// `(1+α)/(1−α)`.
pub fn cubic_root_f_tilde(n: usize, gamma: f64, alpha: f64) -> Result<f64> {
    check_n(n)?;
    check_alpha_unit(alpha)?;
    let c = cubic_coefficients(n, gamma, alpha);
    if c[0] == 0.0 || !c[0].is_finite() {
        return domain("the leading coefficient of the cubic vanishes");
    }
    let f = |x: f64| ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
    let df = |x: f64| (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
    let scale = |x: f64| ((c[0].abs() * x + c[1].abs()) * x + c[2].abs()) * x + c[3].abs();

    let (mut lo, mut hi) = (1.0, 4.0 * (1.0 + alpha) / (1.0 - alpha));
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "the cubic does not change sign on [{lo}, {hi}] (n = {n}, gamma = {gamma}, alpha = {alpha})"
        )));
    }
    let rising = fhi > 0.0;
    let mut x = (1.0 + alpha) / (1.0 - alpha);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let converged = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= f64::EPSILON * x;
        x = next;
        if converged && f(x).abs() <= 1e-12 * scale(x) {
            return Ok(x);
        }
    }
    Err(Error::Numerical(format!(
        "cubic root iteration did not converge (n = {n}, gamma = {gamma}, alpha = {alpha})"
    )))
}

/// Relative residual `|cubic(F)| / Σ|terms|`.
pub fn cubic_relative_residual(n: usize, gamma: f64, alpha: f64, root: f64) -> f64 {
    let c = cubic_coefficients(n, gamma, alpha);
    let v = ((c[0] * root + c[1]) * root + c[2]) * root + c[3];
    let s = ((c[0].abs() * root + c[1].abs()) * root + c[2].abs()) * root + c[3].abs();
    v.abs() / s
}

/// The first three terms of the large-n expansion of the cubic's root.
pub fn cubic_root_expansion(n: usize, gamma: f64, alpha: f64) -> f64 {
    let (a, g, nf) = (alpha, gamma, n as f64);
    let b0 = (1.0 + a) / (1.0 - a);
    let b1 = -a * (1.0 + g) / (1.0 - a).powi(2);
    let b2 = (a * (1.0 + a).powi(2) * (1.0 + 2.0 * g) + a * (1.0 + 3.0 * a) * g * g)
        / (2.0 * (1.0 - a).powi(3) * (1.0 + a).powi(2));
    b0 + b1 / nf + b2 / (nf * nf)
}

/// The series `F_n(α) = a_0 + a_1/n + a_2/n² + …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnExpansion {
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl FnExpansion {
    pub fn value(&self) -> f64 {
        let nf = self.n as f64;
        self.a0 + self.a1 / nf + self.a2 / (nf * nf)
    }
}

pub fn fn_series(n: usize, gamma: f64, alpha: f64) -> Result<FnExpansion> {
    check_n(n)?;
    check_alpha_unit(alpha)?;
    let (a, g) = (alpha, gamma);
    let a0 = (1.0 + a) / (1.0 - a);
    let a1 = -a * (1.0 + g) / (1.0 - a).powi(2);
    let num = a + a * a - a.powi(4)
        + 2.0 * a * (1.0 - a) * (1.0 + a).powi(2) * g
        + a * (1.0 - a) * (1.0 + 3.0 * a) * g * g;
    let a2 = num / (2.0 * (1.0 - a).powi(4) * (1.0 + a).powi(2));
    Ok(FnExpansion {
        n,
        gamma,
        alpha,
        a0,
        a1,
        a2,
    })
}

/// Large-n expansion of `d/dα ln P(n, γ, α)` through the `1/n` term.
pub fn dlnp_dalpha(n: usize, gamma: f64, alpha: f64) -> Result<ExpansionReport> {
    check_n(n)?;
    check_alpha_unit(alpha)?;
    let (a, g, nf) = (alpha, gamma, n as f64);
    let one_m = 1.0 - a;
    let d = 1.0 - a * a;
    let value = one_m * one_m / a * nf * nf + g * one_m / a * nf
        + (a + 2.0 * g * g * one_m) / (4.0 * d)
        - g * (a + g * g * one_m * one_m) / (4.0 * nf * d * d);
    Ok(ExpansionReport {
        value,
        remainder_order: LEMMA_REMAINDER,
        n,
        gamma,
        alpha,
    })
}

/// `d/dα ln P` written through `F = F_n(α)` and `F′ = F_n′(α)`.
pub fn dlnp_dalpha_from_f(n: usize, gamma: f64, alpha: f64, f: f64, fp: f64) -> Result<f64> {
    if f == 0.0 || f == 1.0 {
        return domain("F = 0 and F = 1 are poles of the relation");
    }
    let (nf, a) = (n as f64, alpha);
    Ok(-gamma * gamma / (4.0 * a * f)
        + 2.0 * nf * (2.0 * nf * (1.0 - a) + gamma) / (f - 1.0)
        - 4.0 * nf * nf * a / (f - 1.0).powi(2)
        + a * fp * fp / (4.0 * f * (f - 1.0).powi(2)))
}

/// `ln A_n(γ)` for `A_n(γ) = (1/n!) ∫_{[0,1]^n} Δ² Π t_k^γ dt`, from the
/// product `(1/n!) Π_{j<n} Γ(j+1) Γ(j+2) Γ(j+γ+1) / Γ(j+n+γ+1)`.
pub fn ln_selberg_a(n: usize, gamma: f64) -> f64 {
    let nf = n as f64;
    let mut v = -ln_gamma(nf + 1.0);
    for j in 0..n {
        let jf = j as f64;
        v += ln_gamma(jf + 1.0) + ln_gamma(jf + 2.0) + ln_gamma(jf + gamma + 1.0)
            - ln_gamma(jf + nf + gamma + 1.0);
    }
    v
}

/// Small-α behaviour
/// `ln P ≈ n(n+γ) ln(4nα) + ln G(n+1) + ln G(n+γ+1) − ln G(2n+γ+1)`,
/// i.e. `n(n+γ) ln(4nα) + ln A_n(γ) − ln D̂_n(∞)`.
pub fn lnp_small_alpha(n: usize, gamma: f64, alpha: f64) -> Result<ExpansionReport> {
    check_n(n)?;
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let nf = n as f64;
    let ln_dhat: f64 = (0..n)
        .map(|j| ln_gamma(j as f64 + 1.0) + ln_gamma(j as f64 + gamma + 1.0))
        .sum();
    let value = nf * (nf + gamma) * (4.0 * nf * alpha).ln() + ln_selberg_a(n, gamma) - ln_dhat;
    Ok(ExpansionReport {
        value,
        remainder_order: SMALL_ALPHA_REMAINDER,
        n,
        gamma,
        alpha,
    })
}

/// The Barnes-asymptotic form of [`lnp_small_alpha`]: each `ln G` replaced by
/// its leading large-argument expansion.
pub fn lnp_small_alpha_expanded(n: usize, gamma: f64, alpha: f64) -> Result<ExpansionReport> {
    check_n(n)?;
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let (nf, g) = (n as f64, gamma);
    let value = (1.5 * nf * nf + nf * g - 1.0 / 12.0) * nf.ln()
        + (0.5 * (nf + g).powi(2) - 1.0 / 12.0) * (nf + g).ln()
        - (0.5 * (2.0 * nf + g).powi(2) - 1.0 / 12.0) * (2.0 * nf + g).ln()
        + nf * (nf + g) * (1.5 + (4.0 * alpha).ln())
        + zeta_prime_minus_one();
    Ok(ExpansionReport {
        value,
        remainder_order: SMALL_ALPHA_REMAINDER,
        n,
        gamma,
        alpha,
    })
}

/// The large-n expansion of `ln P(n, γ, α)` without the unknown `δ_n(γ)`.
pub fn lnp_theorem(n: usize, gamma: f64, alpha: f64) -> Result<ExpansionReport> {
    check_n(n)?;
    check_alpha_unit(alpha)?;
    let (a, g, nf) = (alpha, gamma, n as f64);
    let l4a = (4.0 * a).ln();
    let value = nf * nf * (1.5 - 2.0 * a + 0.5 * a * a + l4a)
        + nf * g * (1.5 - a + l4a)
        + (1.5 * nf * nf + nf * g - 1.0 / 12.0) * nf.ln()
        + (0.5 * (nf + g).powi(2) - 1.0 / 12.0) * (nf + g).ln()
        - (0.5 * (2.0 * nf + g).powi(2) - 1.0 / 12.0) * (2.0 * nf + g).ln()
        + 0.125 * ((4.0 * g * g - 1.0) * (1.0 + a).ln() - (1.0 - a).ln())
        + zeta_prime_minus_one()
        + g * (2.0 * (1.0 - a) * g * g - 1.0) / (8.0 * nf * (1.0 - a * a));
    Ok(ExpansionReport {
        value,
        remainder_order: THEOREM_REMAINDER,
        n,
        gamma,
        alpha,
    })
}

/// `∂/∂α` of [`lnp_theorem`], differentiated term by term.
pub fn lnp_theorem_alpha_derivative(n: usize, gamma: f64, alpha: f64) -> Result<f64> {
    check_n(n)?;
    check_alpha_unit(alpha)?;
    let (a, g, nf) = (alpha, gamma, n as f64);
    let d = 1.0 - a * a;
    Ok(nf * nf * (-2.0 + a + 1.0 / a)
        + nf * g * (-1.0 + 1.0 / a)
        + 0.125 * ((4.0 * g * g - 1.0) / (1.0 + a) + 1.0 / (1.0 - a))
        + g / (8.0 * nf) * (-2.0 * g * g * d + 2.0 * a * (2.0 * (1.0 - a) * g * g - 1.0))
            / (d * d))
}

/// Left-tail expansion of `ln det(I − K_Airy)` on `(−s, ∞)`:
/// `−s³/12 − ln(s)/8 + ln(2)/24 + ζ′(−1)`.
pub fn airy_tail(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("airy_tail needs s > 0, got {s}"));
    }
    Ok(-s.powi(3) / 12.0 - s.ln() / 8.0 + crate::specfun::tracy_widom_constant())
}

/// Soft-edge probe point `α = 1 − s/(2n)^{2/3}`.
pub fn soft_edge_alpha(n: usize, s: f64) -> Result<f64> {
    check_n(n)?;
    if !(s > 0.0) {
        return domain(format!("soft_edge_alpha needs s > 0, got {s}"));
    }
    let a = 1.0 - s / (2.0 * n as f64).powf(2.0 / 3.0);
    if !(a > 0.0) {
        return domain(format!("s = {s} lies beyond the bulk for n = {n} (alpha = {a})"));
    }
    Ok(a)
}

/// Marčenko–Pastur density `(1/2π) √((4n − x)/x)` of the unscaled spectrum;
/// zero outside `(0, 4n)`.
pub fn level_density(n: usize, x: f64) -> f64 {
    let edge = 4.0 * n as f64;
    if !(x > 0.0 && x < edge) {
        return 0.0;
    }
    ((edge - x) / x).sqrt() / (2.0 * PI)
}
