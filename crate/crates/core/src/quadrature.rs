//! Gauss rules for the weight `u^γ` on `[0, 1]` and their images on `[0, t]`.
//!
//! The weight `x^γ e^{−x}` has an algebraic endpoint singularity at zero, so
//! the rules absorb `u^γ` exactly (Gauss–Jacobi) and leave only the smooth
//! factor `e^{−tu}` to the polynomial exactness of the rule. Rules on
//! `[0, 1]` are cached per `(node count, γ)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{domain, Error, Result};

/// Gauss rule for `∫₀¹ f(u) u^γ du`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub gamma: f64,
    pub nodes: Vec<f64>,
    /// Natural logs of the weights (weights for γ close to −1 span many
    /// decades, and the mapped rules multiply them by `e^{−x}`).
    pub ln_weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.ln_weights[i].exp()
    }
}

/// Quadrature rule on `[0, t]` for a measure `x^a e^{−x} dx`, stored as
/// nodes and log-weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub t: f64,
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i f(x_i).
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&x, &lw)| {
                let w = lw.exp();
                if w == 0.0 {
                    0.0
                } else {
                    w * f(x)
                }
            })
            .sum()
    }

    /// `ln Σ w_i`, i.e. the log of the total mass of the discrete measure.
    pub fn ln_mass(&self) -> f64 {
        log_sum_exp(&self.ln_weights)
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Node count used for `[0, t]` integrals against polynomials of degree up
/// to `2n` times `x^γ e^{−x}`.
pub fn default_node_count(n: usize, t: f64) -> usize {
    let by_degree = 4 * n + 50;
    let by_decay = n + t.ceil() as usize + 60;
    by_degree.max(by_decay)
}

type RuleKey = (usize, u64);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Jacobi rule with `m` nodes for the weight `u^γ` on `[0, 1]`.
pub fn gauss_jacobi_unit(m: usize, gamma: f64) -> Result<Arc<GaussRule>> {
    if m == 0 {
        return domain("a Gauss rule needs at least one node");
    }
    if !(gamma > -1.0) || !gamma.is_finite() {
        return domain(format!("Jacobi weight exponent must exceed -1, got {gamma}"));
    }
    let key = (m, gamma.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    // Built outside the lock; a racing thread may build the same rule, the
    // first insertion wins and both results are identical.
    let rule = Arc::new(build_jacobi_unit(m, gamma)?);
    let mut guard = cache().lock().unwrap();
    Ok(guard.entry(key).or_insert(rule).clone())
}

/// Recurrence coefficients `(α_k, β_k)` of the monic polynomials orthogonal
/// for `u^γ` on `[0, 1]`; `β_0` is the total mass `1/(γ+1)`.
pub(crate) fn jacobi_unit_coefficients(m: usize, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let g = gamma;
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    for k in 0..m {
        let kf = k as f64;
        let a = if k == 0 {
            g / (g + 2.0)
        } else {
            g * g / ((2.0 * kf + g) * (2.0 * kf + g + 2.0))
        };
        alpha.push(0.5 * (1.0 + a));
        let b = if k == 0 {
            1.0 / (g + 1.0)
        } else {
            let s = 2.0 * kf + g;
            kf * kf * (kf + g) * (kf + g) / (s * s * (s + 1.0) * (s - 1.0))
        };
        beta.push(b);
    }
    (alpha, beta)
}

fn build_jacobi_unit(m: usize, gamma: f64) -> Result<GaussRule> {
    let (alpha, beta) = jacobi_unit_coefficients(m + 1, gamma);
    let mut d = alpha[..m].to_vec();
    let mut e: Vec<f64> = (1..m).map(|k| beta[k].sqrt()).collect();
    e.push(0.0);
    symmetric_tridiagonal_eigenvalues(&mut d, &mut e)?;
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut nodes = Vec::with_capacity(m);
    let mut ln_weights = Vec::with_capacity(m);
    for &x0 in &d {
        let mut x = x0;
        for _ in 0..3 {
            let (pm, dpm, _) = orthonormal_eval(&alpha, &beta, m, x);
            let step = pm / dpm;
            if !step.is_finite() {
                break;
            }
            x -= step;
            if step.abs() <= 1e-17 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, _, sumsq) = orthonormal_eval(&alpha, &beta, m, x);
        nodes.push(x);
        ln_weights.push(-sumsq.ln());
    }
    if nodes.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
        return Err(Error::Numerical(format!(
            "Gauss-Jacobi nodes escaped (0, 1) for m = {m}, gamma = {gamma}"
        )));
    }
    Ok(GaussRule {
        gamma,
        nodes,
        ln_weights,
    })
}

/// Evaluates the orthonormal polynomial `p_m`, its derivative, and
/// `Σ_{k<m} p_k²` at `x`.
fn orthonormal_eval(alpha: &[f64], beta: &[f64], m: usize, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut d_prev = 0.0;
    let mut p = 1.0 / beta[0].sqrt();
    let mut d = 0.0;
    let mut sumsq = 0.0;
    for k in 0..m {
        sumsq += p * p;
        let sb_next = beta[k + 1].sqrt();
        let sb = if k == 0 { 0.0 } else { beta[k].sqrt() };
        let p_next = ((x - alpha[k]) * p - sb * p_prev) / sb_next;
        let d_next = ((x - alpha[k]) * d + p - sb * d_prev) / sb_next;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d, sumsq)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL. `d` holds
/// the diagonal and is overwritten with the eigenvalues (unsorted); `e[i]`
/// couples `i` and `i+1`, with `e[n−1]` unused.
pub(crate) fn symmetric_tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical(
                    "tridiagonal QL iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Rule for `∫₀ᵗ f(x) x^a e^{−x} dx` with `m` nodes (`a > −1`).
pub fn truncated_laguerre_rule(a: f64, t: f64, m: usize) -> Result<QuadratureRule> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("quadrature interval end must be positive, got {t}"));
    }
    let unit = gauss_jacobi_unit(m, a)?;
    let ln_scale = (a + 1.0) * t.ln();
    let nodes: Vec<f64> = unit.nodes.iter().map(|u| t * u).collect();
    let ln_weights = unit
        .ln_weights
        .iter()
        .zip(&nodes)
        .map(|(lw, x)| lw + ln_scale - x)
        .collect();
    Ok(QuadratureRule { t, nodes, ln_weights })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let unit = gauss_jacobi_unit(m, 0.0)?;
    let nodes = unit.nodes.iter().map(|u| 2.0 * u - 1.0).collect();
    let weights = unit.ln_weights.iter().map(|lw| 2.0 * lw.exp()).collect();
    Ok((nodes, weights))
}
