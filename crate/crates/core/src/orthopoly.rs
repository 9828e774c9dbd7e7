//! Laguerre functions, the Christoffel–Darboux kernel, and the monic
//! polynomials orthogonal for `x^γ e^{−x}` on the truncated interval `[0, t]`.

use rug::Float;

use crate::error::{domain, Error, Result};
use crate::quadrature::{default_node_count, log_sum_exp, truncated_laguerre_rule};
use crate::specfun::ln_gamma;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > -1.0) || !gamma.is_finite() {
        return domain(format!("Laguerre exponent must exceed -1, got {gamma}"));
    }
    Ok(())
}

/// Generalized Laguerre polynomial `L_j^{(γ)}(x)` by forward recurrence.
pub fn laguerre_eval(j: usize, gamma: f64, x: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..j {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + gamma - x) * cur - (kf + gamma) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `φ_0(x), …, φ_{n}(x)`: the orthonormal functions
/// `√(j!/Γ(j+γ+1)) x^{γ/2} e^{−x/2} L_j^{(γ)}(x)`.
///
/// The recurrence runs on the normalized polynomials with a separate log
/// scale, so large `x` neither overflows the polynomial nor underflows the
/// exponential prematurely.
pub fn wavefunctions(n: usize, gamma: f64, x: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("wavefunctions need finite x >= 0, got {x}"));
    }
    let power = if gamma == 0.0 { 0.0 } else { 0.5 * gamma * x.ln() };
    let mut ln_scale = power - 0.5 * x - 0.5 * ln_gamma(gamma + 1.0);
    let emit = |psi: f64, ln_scale: f64| -> f64 {
        if psi == 0.0 {
            0.0
        } else {
            psi.signum() * (psi.abs().ln() + ln_scale).exp()
        }
    };
    let mut out = Vec::with_capacity(n + 1);
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(emit(cur, ln_scale));
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + gamma - x) * cur - (kf * (kf + gamma)).sqrt() * prev)
            / ((kf + 1.0) * (kf + 1.0 + gamma)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e200 {
            prev *= 1e-200;
            cur *= 1e-200;
            ln_scale += 200.0 * std::f64::consts::LN_10;
        }
        out.push(emit(cur, ln_scale));
    }
    Ok(out)
}

/// `φ_j(x)`.
pub fn wavefunction(j: usize, gamma: f64, x: f64) -> Result<f64> {
    Ok(wavefunctions(j, gamma, x)?[j])
}

/// `φ_j′(x)` for `j = 0..=n` from `x L_j′ = j L_j − (j+γ) L_{j−1}`. Needs
/// `x > 0`.
pub fn wavefunction_derivatives(n: usize, gamma: f64, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(x > 0.0) {
        return domain(format!("wavefunction derivatives need x > 0, got {x}"));
    }
    let phi = wavefunctions(n, gamma, x)?;
    let lead = 0.5 * gamma / x - 0.5;
    let dphi = (0..=n)
        .map(|j| {
            let jf = j as f64;
            let lower = if j == 0 { 0.0 } else { (jf * (jf + gamma)).sqrt() * phi[j - 1] };
            lead * phi[j] + (jf * phi[j] - lower) / x
        })
        .collect();
    Ok((phi, dphi))
}

/// Christoffel–Darboux kernel `K_n(x, y) = Σ_{j<n} φ_j(x) φ_j(y)` in its
/// closed two-term form; the confluent form takes over when
/// `|x − y| < 10⁻⁶ max(1, x)`.
pub fn cd_kernel(n: usize, gamma: f64, x: f64, y: f64) -> Result<f64> {
    if n == 0 {
        return domain("the kernel needs n >= 1");
    }
    let nf = n as f64;
    let c = (nf * (nf + gamma)).sqrt();
    if (x - y).abs() < 1e-6 * x.max(1.0) {
        let m = 0.5 * (x + y);
        if m == 0.0 {
            let phi = wavefunctions(n - 1, gamma, 0.0)?;
            return Ok(phi.iter().map(|p| p * p).sum());
        }
        let (phi, dphi) = wavefunction_derivatives(n, gamma, m)?;
        return Ok(c * (phi[n] * dphi[n - 1] - phi[n - 1] * dphi[n]));
    }
    let px = wavefunctions(n, gamma, x)?;
    let py = wavefunctions(n, gamma, y)?;
    Ok(c * (px[n - 1] * py[n] - py[n - 1] * px[n]) / (x - y))
}

/// Monic polynomials `P_j(x, t)` orthogonal for `x^γ e^{−x}` on `[0, t]`,
/// with everything the ladder relations and the Painlevé checks need.
///
/// Indices run over `0..=n_max`. `beta[0]` holds `h_0` by convention, so that
/// `h_j = Π_{k ≤ j} beta[k]`. Boundary values are kept in the normalized form
/// `u_j = √(t^γ e^{−t} / h_j) P_j(t, t)`, which stays finite where `P_j(t, t)`
/// itself would overflow.
#[derive(Debug, Clone)]
pub struct MonicOPSystem {
    pub t: f64,
    pub gamma: f64,
    pub n_max: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub ln_h: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl MonicOPSystem {
    pub fn h(&self, j: usize) -> f64 {
        self.ln_h[j].exp()
    }

    /// Sub-leading coefficient `p(j, t)` of `P_j = x^j + p(j,t) x^{j−1} + …`.
    pub fn p(&self, j: usize) -> f64 {
        -self.alpha[..j].iter().sum::<f64>()
    }

    /// `P_j(t, t)`; may overflow to infinity for large `j`.
    pub fn boundary_value(&self, j: usize) -> f64 {
        let ln_w = self.gamma * self.t.ln() - self.t;
        self.boundary[j] * (0.5 * (self.ln_h[j] - ln_w)).exp()
    }

    /// `R_j(t) = −t^γ e^{−t} P_j(t,t)² / h_j(t)`.
    pub fn big_r(&self, j: usize) -> f64 {
        -self.boundary[j] * self.boundary[j]
    }

    /// `r_j(t) = −t^γ e^{−t} P_j(t,t) P_{j−1}(t,t) / h_{j−1}(t)`; zero at `j = 0`.
    pub fn small_r(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            -self.beta[j].sqrt() * self.boundary[j] * self.boundary[j - 1]
        }
    }

    /// `S_j(t) = 1 − 1/R_j(t)`.
    pub fn s(&self, j: usize) -> f64 {
        1.0 - 1.0 / self.big_r(j)
    }

    /// Orthonormal polynomials `P_j(x) / √h_j` for `j = 0..=n_max` at `x`.
    pub fn orthonormal_at(&self, x: f64) -> Vec<f64> {
        let mut q = Vec::with_capacity(self.n_max + 1);
        q.push((-0.5 * self.ln_h[0]).exp());
        for j in 0..self.n_max {
            let sb = if j == 0 { 0.0 } else { self.beta[j].sqrt() };
            let prev = if j == 0 { 0.0 } else { q[j - 1] };
            q.push(((x - self.alpha[j]) * q[j] - sb * prev) / self.beta[j + 1].sqrt());
        }
        q
    }
}

/// Builds the monic system for indices `0..=n_max` by the Lanczos
/// (discretized Stieltjes) procedure with full reorthogonalization on a
/// Gauss–Jacobi rule over `[0, t]` of `default_node_count(n_max + 1, t)`
/// nodes.
pub fn build_monic_system(n_max: usize, gamma: f64, t: f64) -> Result<MonicOPSystem> {
    build_monic_system_with_nodes(n_max, gamma, t, default_node_count(n_max + 1, t))
}

pub fn build_monic_system_with_nodes(
    n_max: usize,
    gamma: f64,
    t: f64,
    nodes: usize,
) -> Result<MonicOPSystem> {
    check_gamma(gamma)?;
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("the interval end t must be positive, got {t}"));
    }
    if nodes < n_max + 2 {
        return domain("quadrature rule is smaller than the requested degree");
    }
    let rule = truncated_laguerre_rule(gamma, t, nodes)?;
    let (alpha, beta, ln_h) = lanczos(&rule.nodes, &rule.ln_weights, n_max + 1)?;

    let ln_w = gamma * t.ln() - t;
    let mut boundary = Vec::with_capacity(n_max + 1);
    boundary.push((0.5 * (ln_w - ln_h[0])).exp());
    for j in 0..n_max {
        let sb = if j == 0 { 0.0 } else { beta[j].sqrt() };
        let prev = if j == 0 { 0.0 } else { boundary[j - 1] };
        boundary.push(((t - alpha[j]) * boundary[j] - sb * prev) / beta[j + 1].sqrt());
    }

    Ok(MonicOPSystem {
        t,
        gamma,
        n_max,
        alpha: alpha[..=n_max].to_vec(),
        beta: beta[..=n_max].to_vec(),
        ln_h: ln_h[..=n_max].to_vec(),
        boundary,
    })
}

/// Lanczos on `diag(nodes)` started from the square-root weights. Returns
/// `steps` values of `α_j`, `β_j` (with `β_0 = h_0`) and `ln h_j`.
fn lanczos(
    nodes: &[f64],
    ln_weights: &[f64],
    steps: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = nodes.len();
    let ln_mass = log_sum_exp(ln_weights);
    let mut q0: Vec<f64> = ln_weights
        .iter()
        .map(|lw| (0.5 * (lw - ln_mass)).exp())
        .collect();
    let norm = q0.iter().map(|v| v * v).sum::<f64>().sqrt();
    q0.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q0];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta = vec![ln_mass.exp()];
    let mut ln_h = vec![ln_mass];
    for j in 0..steps {
        let q = &basis[j];
        let mut w: Vec<f64> = (0..m).map(|i| nodes[i] * q[i]).collect();
        let a: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
        alpha.push(a);
        if j + 1 == steps {
            break;
        }
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b2: f64 = w.iter().map(|v| v * v).sum();
        if !(b2 > 0.0) || !b2.is_finite() {
            return Err(Error::Conditioning(format!(
                "Lanczos produced a non-positive norm at degree {} ({b2:e}); \
                 the quadrature rule cannot resolve this many polynomials",
                j + 1
            )));
        }
        let b = b2.sqrt();
        w.iter_mut().for_each(|v| *v /= b);
        beta.push(b2);
        ln_h.push(ln_h[j] + b2.ln());
        basis.push(w);
    }
    Ok((alpha, beta, ln_h))
}

/// Moment-based reference for the recurrence data, for small `n_max`.
#[derive(Debug, Clone)]
pub struct MomentSystem {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub ln_h: Vec<f64>,
}

/// Largest `n_max` accepted by [`monic_system_from_moments`].
pub const MOMENT_ROUTE_MAX: usize = 12;

/// Working precision (bits) of the moment route.
pub const MOMENT_PRECISION: u32 = 320;

/// `μ_k = ∫₀ᵗ x^{k+γ} e^{−x} dx` for `k < count` in precision `prec`.
pub fn truncated_moments_mp(count: usize, gamma: f64, t: f64, prec: u32) -> Vec<Float> {
    let t_mp = Float::with_val(prec, t);
    let ln_t = Float::with_val(prec, t_mp.ln_ref());
    (0..count)
        .map(|k| {
            let a = Float::with_val(prec, gamma) + k as u32 + 1u32;
            let mut term = Float::with_val(prec, 1) / &a;
            let mut sum = term.clone();
            let mut denom = a.clone();
            loop {
                denom += 1u32;
                term *= &t_mp;
                term /= &denom;
                sum += &term;
                let small = match (term.get_exp(), sum.get_exp()) {
                    (Some(te), Some(se)) => te + (prec as i32) + 8 < se,
                    _ => true,
                };
                if small && denom.to_f64() > t {
                    break;
                }
            }
            let ln_pref = Float::with_val(prec, &a * &ln_t) - &t_mp;
            sum * ln_pref.exp()
        })
        .collect()
}

/// Recurrence data for indices `0..=n_max` from the `LDLᵀ` factorization of
/// the Hankel moment matrix in extended precision.
pub fn monic_system_from_moments(n_max: usize, gamma: f64, t: f64) -> Result<MomentSystem> {
    check_gamma(gamma)?;
    if n_max > MOMENT_ROUTE_MAX {
        return Err(Error::Capability(format!(
            "the moment route is limited to n <= {MOMENT_ROUTE_MAX}, got {n_max}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("the interval end t must be positive, got {t}"));
    }
    let prec = MOMENT_PRECISION;
    let size = n_max + 2;
    let mu = truncated_moments_mp(2 * size - 1, gamma, t, prec);
    let (l, d) = ldl_hankel(&mu, size, prec)?;

    // Rows of L⁻¹ are the monic polynomial coefficients.
    let mut sub = Vec::with_capacity(size);
    sub.push(Float::with_val(prec, 0));
    for j in 1..size {
        // Coefficient of x^{j−1} in P_j: −L_{j,j−1} (unit-lower inverse).
        sub.push(Float::with_val(prec, -&l[j][j - 1]));
    }
    let mut alpha = Vec::with_capacity(n_max + 1);
    let mut beta = Vec::with_capacity(n_max + 1);
    let mut ln_h = Vec::with_capacity(n_max + 1);
    for j in 0..=n_max {
        alpha.push(Float::with_val(prec, &sub[j] - &sub[j + 1]).to_f64());
        ln_h.push(Float::with_val(prec, d[j].ln_ref()).to_f64());
        beta.push(if j == 0 {
            d[0].to_f64()
        } else {
            Float::with_val(prec, &d[j] / &d[j - 1]).to_f64()
        });
    }
    Ok(MomentSystem { alpha, beta, ln_h })
}

/// `ln det (μ_{i+j})_{i,j<n}` in extended precision.
pub fn ln_hankel_determinant(n: usize, gamma: f64, t: f64) -> Result<f64> {
    let prec = MOMENT_PRECISION;
    let mu = truncated_moments_mp(2 * n - 1, gamma, t, prec);
    let (_, d) = ldl_hankel(&mu, n, prec)?;
    let mut acc = Float::with_val(prec, 0);
    for p in &d {
        acc += Float::with_val(prec, p.ln_ref());
    }
    Ok(acc.to_f64())
}

type Ldl = (Vec<Vec<Float>>, Vec<Float>);

fn ldl_hankel(mu: &[Float], size: usize, prec: u32) -> Result<Ldl> {
    let mut l = vec![vec![Float::with_val(prec, 0); size]; size];
    let mut d: Vec<Float> = Vec::with_capacity(size);
    for j in 0..size {
        let mut dj = mu[2 * j].clone();
        for k in 0..j {
            let v = Float::with_val(prec, &l[j][k] * &l[j][k]) * &d[k];
            dj -= v;
        }
        if !dj.is_sign_positive() || dj.is_zero() {
            return Err(Error::Precision(format!(
                "Hankel pivot {j} is not positive at {prec} bits"
            )));
        }
        l[j][j] = Float::with_val(prec, 1);
        for i in j + 1..size {
            let mut v = mu[i + j].clone();
            for k in 0..j {
                let p = Float::with_val(prec, &l[i][k] * &l[j][k]) * &d[k];
                v -= p;
            }
            l[i][j] = v / &dj;
        }
        d.push(dj);
    }
    Ok((l, d))
}

/// Values of the ladder coefficients at a real point `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderCoefficients {
    pub z: f64,
    pub a: f64,
    pub b: f64,
}

/// `v′(z) = 1 − γ/z` for the potential `v(z) = z − γ ln z`.
pub fn potential_derivative(gamma: f64, z: f64) -> f64 {
    1.0 - gamma / z
}

fn check_ladder_point(sys: &MonicOPSystem, n: usize, z: f64) -> Result<()> {
    if n > sys.n_max {
        return domain(format!("degree {n} exceeds the system's n_max = {}", sys.n_max));
    }
    if z == 0.0 || z == sys.t || !z.is_finite() {
        return domain(format!("ladder coefficients have poles at 0 and t; got z = {z}"));
    }
    Ok(())
}

/// `A_n(z) = R_n/(z−t) + (1−R_n)/z`, `B_n(z) = r_n/(z−t) − (n+r_n)/z`.
pub fn ladder_coefficients(sys: &MonicOPSystem, n: usize, z: f64) -> Result<LadderCoefficients> {
    check_ladder_point(sys, n, z)?;
    let (big_r, small_r) = (sys.big_r(n), sys.small_r(n));
    Ok(LadderCoefficients {
        z,
        a: big_r / (z - sys.t) + (1.0 - big_r) / z,
        b: small_r / (z - sys.t) - (n as f64 + small_r) / z,
    })
}

/// The ladder coefficients from their defining integrals. Since
/// `(v′(z) − v′(y))/(z − y) = γ/(zy)`, the integrals reduce to
/// `(γ/z) ∫₀ᵗ q_n q_k y^{γ−1} e^{−y} dy` with orthonormal `q`, which needs
/// `γ > 0` to converge.
pub fn ladder_coefficients_integral(
    sys: &MonicOPSystem,
    n: usize,
    z: f64,
) -> Result<LadderCoefficients> {
    check_ladder_point(sys, n, z)?;
    if !(sys.gamma > 0.0) {
        return domain("the integral form of the ladder coefficients needs gamma > 0");
    }
    let rule = truncated_laguerre_rule(
        sys.gamma - 1.0,
        sys.t,
        default_node_count(sys.n_max + 1, sys.t),
    )?;
    let (mut ia, mut ib) = (0.0, 0.0);
    for (&y, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
        let w = lw.exp();
        if w == 0.0 {
            continue;
        }
        let q = sys.orthonormal_at(y);
        ia += w * q[n] * q[n];
        if n > 0 {
            ib += w * q[n] * q[n - 1];
        }
    }
    let g = sys.gamma / z;
    let sb = if n == 0 { 0.0 } else { sys.beta[n].sqrt() };
    Ok(LadderCoefficients {
        z,
        a: sys.big_r(n) / (z - sys.t) + g * ia,
        b: sys.small_r(n) / (z - sys.t) + g * sb * ib,
    })
}
