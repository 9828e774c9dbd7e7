//! Exact finite-n distribution of the largest eigenvalue.
//!
//! `P̂(n, γ, t)` is the probability that all eigenvalues of the ensemble with
//! weight `x^γ e^{−x}` lie in `[0, t]`, and `P(n, γ, α) = P̂(n, γ, 4nα)` is the
//! same for the weight `x^γ e^{−4nx}`. Both are carried as natural logs.
//!
//! The production route writes `P̂ = D̂_n(t) / D̂_n(∞)` with
//! `D̂_n(t) = Π_{j<n} h_j(t)` and gets the norms `h_j(t)` from the Lanczos
//! recurrence on `[0, t]`. This is the Gram determinant of `φ_0, …, φ_{n−1}`
//! restricted to `[0, t]`, factored through its Cholesky pivots, without ever
//! forming the matrix (whose smallest eigenvalues reach `e^{−n²}` scale).

use crate::error::{domain, Error, Result};
use crate::orthopoly::{
    build_monic_system, ln_hankel_determinant, wavefunctions, MonicOPSystem, MOMENT_ROUTE_MAX,
};
use crate::quadrature::{default_node_count, truncated_laguerre_rule};
use crate::specfun::{barnes_ln_g, ln_gamma};

/// Matrix dimension `n` and Laguerre exponent `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub n: usize,
    pub gamma: f64,
}

impl EnsembleParams {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if n == 0 {
            return domain("n must be at least 1");
        }
        if !(gamma > -1.0) || !gamma.is_finite() {
            return domain(format!("gamma must exceed -1, got {gamma}"));
        }
        Ok(Self { n, gamma })
    }

    /// `n(n + γ)`, the exponent of the small-`t` power law.
    pub fn exponent(&self) -> f64 {
        self.n as f64 * (self.n as f64 + self.gamma)
    }
}

/// A probability held as its natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProb {
    pub log_value: f64,
}

impl LogProb {
    pub fn prob(&self) -> f64 {
        self.log_value.exp()
    }
}

/// `σ_n(t) = t d/dt ln P̂(n, γ, t)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaValue {
    pub t: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
    pub sigma_double_prime: f64,
}

/// `ln D̂_n(∞) = ln G(n+1) + ln G(n+γ+1) − ln G(γ+1)`, evaluated through the
/// equivalent product `Π_{j<n} j! Γ(j+γ+1)` of the full-line norms.
pub fn dn_infinity_log(params: EnsembleParams) -> f64 {
    (0..params.n)
        .map(|j| ln_full_norm(j, params.gamma))
        .sum()
}

/// The same constant through the Barnes G-function.
pub fn dn_infinity_log_barnes(params: EnsembleParams) -> Result<f64> {
    let (n, g) = (params.n as f64, params.gamma);
    Ok(barnes_ln_g(n + 1.0)? + barnes_ln_g(n + g + 1.0)? - barnes_ln_g(g + 1.0)?)
}

/// `ln D_n(∞) = ln D̂_n(∞) − n(n+γ) ln(4n)` for the weight `x^γ e^{−4nx}`.
pub fn dn_infinity_log_scaled(params: EnsembleParams) -> f64 {
    dn_infinity_log(params) - params.exponent() * (4.0 * params.n as f64).ln()
}

/// `ln h_j(∞) = ln Γ(j+1) + ln Γ(j+γ+1)`.
fn ln_full_norm(j: usize, gamma: f64) -> f64 {
    ln_gamma(j as f64 + 1.0) + ln_gamma(j as f64 + gamma + 1.0)
}

/// Beyond this point `1 − P̂` is far below double-precision resolution and
/// `ln P̂` is returned as 0 without any factorization.
pub fn saturation_point(params: EnsembleParams) -> f64 {
    let n = params.n as f64;
    4.0 * n + 2.0 * params.gamma + 40.0 * (n.cbrt() + 1.0) + 5.0 * params.gamma.abs()
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || t.is_nan() {
        return domain(format!("t must be positive, got {t}"));
    }
    Ok(())
}

/// `ln P̂(n, γ, t)` from the norms of the polynomials orthogonal on `[0, t]`.
pub fn phat_projection(params: EnsembleParams, t: f64) -> Result<LogProb> {
    check_t(t)?;
    if t >= saturation_point(params) {
        return Ok(LogProb { log_value: 0.0 });
    }
    let sys = build_monic_system(params.n - 1, params.gamma, t)?;
    Ok(LogProb {
        log_value: log_ratio_from_norms(&sys, params),
    })
}

fn log_ratio_from_norms(sys: &MonicOPSystem, params: EnsembleParams) -> f64 {
    let v: f64 = (0..params.n)
        .map(|j| sys.ln_h[j] - ln_full_norm(j, params.gamma))
        .sum();
    v.min(0.0)
}

/// `M_ij(t) = ∫₀ᵗ φ_i φ_j dx` for `i, j < n` by Gauss–Jacobi quadrature.
pub fn gram_matrix(params: EnsembleParams, t: f64) -> Result<Vec<Vec<f64>>> {
    check_t(t)?;
    let n = params.n;
    let g = params.gamma;
    let rule = truncated_laguerre_rule(g, t, default_node_count(n, t))?;
    let mut m = vec![vec![0.0; n]; n];
    for (&x, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
        // φ_i φ_j already contains x^γ e^{−x}; divide it back out of the weight.
        let w = (lw + x - if g == 0.0 { 0.0 } else { g * x.ln() }).exp();
        let phi = wavefunctions(n - 1, g, x)?;
        for i in 0..n {
            for j in 0..=i {
                m[i][j] += w * phi[i] * phi[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            m[j][i] = m[i][j];
        }
    }
    Ok(m)
}

/// `ln det M(t)` by a dense Cholesky factorization of the Gram matrix. Only
/// usable while `M(t)` is well conditioned (roughly `t` beyond the bulk);
/// fails with a conditioning error otherwise.
pub fn phat_gram_cholesky(params: EnsembleParams, t: f64) -> Result<LogProb> {
    let mut m = gram_matrix(params, t)?;
    let n = params.n;
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = m[j][j];
        for k in 0..j {
            d -= m[j][k] * m[j][k];
        }
        if !(d > 0.0) {
            return Err(Error::Conditioning(format!(
                "Gram matrix pivot {j} is not positive ({d:e}) at t = {t}"
            )));
        }
        let ljj = d.sqrt();
        m[j][j] = ljj;
        logdet += d.ln();
        for i in j + 1..n {
            let mut v = m[i][j];
            for k in 0..j {
                v -= m[i][k] * m[j][k];
            }
            m[i][j] = v / ljj;
        }
    }
    Ok(LogProb { log_value: logdet })
}

/// `ln P̂` from the Hankel determinant of the truncated moments
/// `∫₀ᵗ x^{i+j+γ} e^{−x} dx`, evaluated in extended precision.
pub fn phat_hankel_oracle(params: EnsembleParams, t: f64) -> Result<LogProb> {
    check_t(t)?;
    if params.n > MOMENT_ROUTE_MAX {
        return Err(Error::Capability(format!(
            "the Hankel route is limited to n <= {MOMENT_ROUTE_MAX}, got {}",
            params.n
        )));
    }
    let ln_det = ln_hankel_determinant(params.n, params.gamma, t)?;
    Ok(LogProb {
        log_value: ln_det - dn_infinity_log(params),
    })
}

/// `ln P(n, γ, α) = ln P̂(n, γ, 4nα)`.
pub fn p_scaled(params: EnsembleParams, alpha: f64) -> Result<LogProb> {
    if !(alpha > 0.0) || alpha.is_nan() {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    phat_projection(params, 4.0 * params.n as f64 * alpha)
}

/// `σ_n(t)`, `σ_n′(t)`, `σ_n″(t)` without differencing.
///
/// With `u_j(x) = √(x^γ e^{−x}) P_j(x, t)/√h_j` orthonormal on `[0, t]`,
/// `d/dt ln D̂_n(t) = f(t) = Σ_{j<n} u_j(t)²`. Differentiating the
/// orthonormality relations in `t` gives
/// `f′ = 2 a·b − f²` and `f″ = 2(a·c + b·b − f a·b) − 2 f f′`, where `a`, `b`,
/// `c` are the vectors of `u_j`, `∂_x u_j`, `∂_x² u_j` at `x = t`.
pub fn sigma_exact(params: EnsembleParams, t: f64) -> Result<SigmaValue> {
    check_t(t)?;
    if t >= saturation_point(params) {
        return Ok(SigmaValue {
            t,
            sigma: 0.0,
            sigma_prime: 0.0,
            sigma_double_prime: 0.0,
        });
    }
    let sys = build_monic_system(params.n - 1, params.gamma, t)?;
    Ok(sigma_from_system(&sys, params.n))
}

/// [`sigma_exact`] for an already built system with `n_max ≥ n − 1`.
pub fn sigma_from_system(sys: &MonicOPSystem, n: usize) -> SigmaValue {
    let t = sys.t;
    let g = sys.gamma;
    let ell = 0.5 * g / t - 0.5;
    let ell_prime = -0.5 * g / (t * t);

    // u, s q′, s q″ at x = t, with s = √(t^γ e^{−t}).
    let u = &sys.boundary;
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for j in 0..n.saturating_sub(1) {
        let sb_next = sys.beta[j + 1].sqrt();
        let (sb, p1, p2) = if j == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (sys.beta[j].sqrt(), d1[j - 1], d2[j - 1])
        };
        let shift = t - sys.alpha[j];
        d1[j + 1] = (u[j] + shift * d1[j] - sb * p1) / sb_next;
        d2[j + 1] = (2.0 * d1[j] + shift * d2[j] - sb * p2) / sb_next;
    }

    let (mut f, mut ab, mut ac, mut bb) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        let a = u[j];
        let b = d1[j] + ell * a;
        let c = d2[j] + 2.0 * ell * d1[j] + (ell * ell + ell_prime) * a;
        f += a * a;
        ab += a * b;
        ac += a * c;
        bb += b * b;
    }
    let f1 = 2.0 * ab - f * f;
    let f2 = 2.0 * (ac + bb - f * ab) - 2.0 * f * f1;
    SigmaValue {
        t,
        sigma: t * f,
        sigma_prime: f + t * f1,
        sigma_double_prime: 2.0 * f1 + t * f2,
    }
}
