//! Painlevé V structure of the finite-n problem.
//!
//! `S_n(t) = 1 − 1/R_n(t)` satisfies a Painlevé V equation, and
//! `σ_n(t) = t d/dt ln P̂(n, γ, t)` satisfies the Jimbo–Miwa–Okamoto σ-form.
//! This module evaluates both residuals, the rescaled equation for
//! `F_n(α) = S_n(4nα)`, the algebraic bridge from `S_n` to `σ_n`, and
//! integrates the σ-form as an initial-value problem.

use crate::error::{domain, Error, Result};
use crate::exactprob::SigmaValue;
use crate::orthopoly::build_monic_system_with_nodes;
use crate::quadrature::default_node_count;

/// `S_n(t)` with its first two `t`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PainleveState {
    pub t: f64,
    pub s: f64,
    pub s_prime: f64,
    pub s_double_prime: f64,
}

/// `σ_n(t)` with its first two `t`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaState {
    pub t: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
    pub sigma_double_prime: f64,
}

impl From<SigmaValue> for SigmaState {
    fn from(v: SigmaValue) -> Self {
        Self {
            t: v.t,
            sigma: v.sigma,
            sigma_prime: v.sigma_prime,
            sigma_double_prime: v.sigma_double_prime,
        }
    }
}

fn check_pole(s: f64) -> Result<()> {
    if !s.is_finite() || s == 0.0 || s == 1.0 {
        return domain(format!("S = {s} is a pole of the equation"));
    }
    Ok(())
}

/// `S″` minus the right side of the Painlevé V equation
/// `S″ = (3S−1)S′²/(2S(S−1)) − S′/t − (γ²/2)(S−1)²/(t²S) + (2n+1+γ)S/t − S(S+1)/(2(S−1))`.
pub fn pv_residual(state: &PainleveState, n: usize, gamma: f64) -> Result<f64> {
    check_pole(state.s)?;
    if !(state.t > 0.0) {
        return domain(format!("t must be positive, got {}", state.t));
    }
    Ok(pv_terms(state, n, gamma).iter().sum())
}

fn pv_terms(state: &PainleveState, n: usize, gamma: f64) -> [f64; 6] {
    let &PainleveState {
        t,
        s,
        s_prime: d1,
        s_double_prime: d2,
    } = state;
    let nf = n as f64;
    [
        d2,
        -(3.0 * s - 1.0) * d1 * d1 / (2.0 * s * (s - 1.0)),
        d1 / t,
        0.5 * gamma * gamma * (s - 1.0).powi(2) / (t * t * s),
        -(2.0 * nf + 1.0 + gamma) * s / t,
        s * (s + 1.0) / (2.0 * (s - 1.0)),
    ]
}

/// Residual of the rescaled equation for `F_n(α) = S_n(4nα)`. Equals
/// `16n²` times [`pv_residual`] at `t = 4nα` for the same function.
pub fn fn_equation_residual(
    alpha: f64,
    f: f64,
    f_prime: f64,
    f_double_prime: f64,
    n: usize,
    gamma: f64,
) -> Result<f64> {
    check_pole(f)?;
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let nf = n as f64;
    Ok(f_double_prime - (3.0 * f - 1.0) * f_prime * f_prime / (2.0 * f * (f - 1.0))
        + f_prime / alpha
        - 4.0 * nf * (2.0 * nf + 1.0 + gamma) * f / alpha
        + gamma * gamma * (f - 1.0).powi(2) / (2.0 * alpha * alpha * f)
        + 8.0 * nf * nf * f * (f + 1.0) / (f - 1.0))
}

/// `(tσ″)² − 4σ′²(σ − n(n+γ) − tσ′) − ((2n+γ−t)σ′ + σ)²`.
pub fn sigma_form_residual(state: &SigmaState, n: usize, gamma: f64) -> f64 {
    let t = state.t;
    (t * state.sigma_double_prime).powi(2) - discriminant(state, n, gamma)
}

/// The right side of the σ-form, which must equal `(tσ″)²`.
fn discriminant(state: &SigmaState, n: usize, gamma: f64) -> f64 {
    let nf = n as f64;
    let t = state.t;
    let (s, d1) = (state.sigma, state.sigma_prime);
    let k = nf * (nf + gamma);
    4.0 * d1 * d1 * (s - k - t * d1) + ((2.0 * nf + gamma - t) * d1 + s).powi(2)
}

/// `σ_n` from `S_n` and `S_n′`:
/// `−γ²/(4S) + t(4n+2γ−t)/(4(S−1)) − t²/(4(S−1)²) + t²S′²/(4S(S−1)²)`.
pub fn sigma_from_s(t: f64, s: f64, s_prime: f64, n: usize, gamma: f64) -> Result<f64> {
    check_pole(s)?;
    let nf = n as f64;
    let sm1 = s - 1.0;
    Ok(-gamma * gamma / (4.0 * s) + t * (4.0 * nf + 2.0 * gamma - t) / (4.0 * sm1)
        - t * t / (4.0 * sm1 * sm1)
        + t * t * s_prime * s_prime / (4.0 * s * sm1 * sm1))
}

/// `S_n(t)` from the monic system on `[0, t]` with derivatives by five-point
/// central differences at steps `h = 10⁻³t` and `2h`, combined by one
/// Richardson step. All evaluations share one node count.
pub fn s_state_by_differences(n: usize, gamma: f64, t: f64) -> Result<PainleveState> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("t must be positive, got {t}"));
    }
    let h = 1e-3 * t;
    let nodes = default_node_count(n + 1, t + 4.0 * h);
    let s_at = |x: f64| -> Result<f64> {
        let sys = build_monic_system_with_nodes(n, gamma, x, nodes)?;
        let s = sys.s(n);
        if !s.is_finite() {
            return Err(Error::Numerical(format!("S_{n}({x}) is not finite")));
        }
        Ok(s)
    };
    let offsets = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0];
    let mut f = [0.0; 7];
    for (v, k) in f.iter_mut().zip(offsets) {
        *v = s_at(t + k * h)?;
    }
    let [m4, m2, m1, c, p1, p2, p4] = f;
    let d1 = |m2: f64, m1: f64, p1: f64, p2: f64, h: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = |m2: f64, m1: f64, p1: f64, p2: f64, h: f64| {
        (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)
    };
    let fine1 = d1(m2, m1, p1, p2, h);
    let coarse1 = d1(m4, m2, p2, p4, 2.0 * h);
    let fine2 = d2(m2, m1, p1, p2, h);
    let coarse2 = d2(m4, m2, p2, p4, 2.0 * h);
    Ok(PainleveState {
        t,
        s: c,
        s_prime: (16.0 * fine1 - coarse1) / 15.0,
        s_double_prime: (16.0 * fine2 - coarse2) / 15.0,
    })
}

/// A sign change of `σ″` along an integrated path. The σ-form only fixes
/// `(tσ″)²`, so these are the points where the square-root branch switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEvent {
    pub t: f64,
    pub discriminant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPath {
    pub states: Vec<SigmaState>,
    pub branch_events: Vec<BranchEvent>,
    pub steps: usize,
    pub rejected: usize,
}

/// Tolerances for [`integrate_sigma_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub project: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-13,
            atol: 1e-15,
            max_steps: 200_000,
            project: true,
        }
    }
}

/// Integrates the σ-form from `initial` to each point of `grid` (which must
/// be monotone in the direction of integration, starting past `initial.t`).
///
/// The σ-form is quadratic in `σ″`. Differentiating it once and dividing by
/// `2σ″` gives the regular third-order equation
/// `t²σ‴ = −tσ″ + 4σ′(σ − n(n+γ) − tσ′) − 2tσ′² + (2n+γ−t)((2n+γ−t)σ′ + σ)`,
/// which is what gets stepped (Dormand–Prince 5(4)). The sign of
/// `initial.sigma_double_prime` selects the branch; its magnitude is replaced
/// by `√Φ/t` where `Φ` is the right side of the σ-form. After every accepted
/// step `σ″` is projected back onto `|tσ″| = √Φ` while `Φ` is well away from
/// zero, and sign changes of `σ″` are recorded as branch events.
pub fn integrate_sigma_form(
    n: usize,
    gamma: f64,
    initial: SigmaState,
    grid: &[f64],
    opts: IntegratorOptions,
) -> Result<SigmaPath> {
    if !(initial.t > 0.0) || grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return domain("integration points must be positive");
    }
    let Some(&last) = grid.last() else {
        return domain("empty output grid");
    };
    let dir = if last >= initial.t { 1.0 } else { -1.0 };
    let mut prev = initial.t;
    for &g in grid {
        if (g - prev) * dir < 0.0 {
            return domain("output grid must be monotone in the direction of integration");
        }
        prev = g;
    }

    let sys = SigmaOde { n, gamma };
    let phi0 = discriminant(&initial, n, gamma);
    let scale0 = sys.scale(&initial);
    if phi0 < -1e-8 * scale0 {
        return Err(Error::Integration {
            t: initial.t,
            message: format!("initial data violate the sigma-form (discriminant {phi0})"),
        });
    }
    let sign = if initial.sigma_double_prime < 0.0 { -1.0 } else { 1.0 };
    let mut y = [
        initial.sigma,
        initial.sigma_prime,
        sign * phi0.max(0.0).sqrt() / initial.t,
    ];
    let mut t = initial.t;
    let mut h = dir * 1e-3 * initial.t.max(1.0);
    let mut k1 = sys.rhs(t, &y);
    let mut path = SigmaPath {
        states: Vec::with_capacity(grid.len()),
        branch_events: Vec::new(),
        steps: 0,
        rejected: 0,
    };

    for &target in grid {
        while (target - t) * dir > 0.0 {
            if path.steps + path.rejected >= opts.max_steps {
                return Err(Error::Integration {
                    t,
                    message: "step budget exhausted".into(),
                });
            }
            let remaining = target - t;
            let hit = h.abs() >= remaining.abs();
            let step = if hit { remaining } else { h };
            let (y_new, k_last, err) = sys.dp5_step(t, &y, &k1, step);
            let mut e = 0.0f64;
            for i in 0..3 {
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                e = e.max((err[i] / sc).abs());
            }
            if !e.is_finite() {
                h = 0.25 * step;
                path.rejected += 1;
                if h.abs() < 1e-14 * t.abs() {
                    return Err(Error::Integration {
                        t,
                        message: "non-finite derivative".into(),
                    });
                }
                continue;
            }
            if e > 1.0 {
                path.rejected += 1;
                h = step * (0.9 * e.powf(-0.2)).max(0.2);
                if h.abs() < 1e-14 * t.abs() {
                    return Err(Error::Integration {
                        t,
                        message: "step size underflow".into(),
                    });
                }
                continue;
            }
            path.steps += 1;
            let t_new = if hit { target } else { t + step };
            let mut y_acc = y_new;
            let k_new = if opts.project && sys.project(t_new, &mut y_acc)? {
                sys.rhs(t_new, &y_acc)
            } else {
                k_last
            };
            if y_acc[2] * y[2] < 0.0 {
                let frac = y[2] / (y[2] - y_acc[2]);
                let tb = t + frac * (t_new - t);
                path.branch_events.push(BranchEvent {
                    t: tb,
                    discriminant: discriminant(&sys.state(t_new, &y_acc), n, gamma),
                });
            }
            y = y_acc;
            t = t_new;
            k1 = k_new;
            let grow = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).min(5.0) };
            if !hit {
                h = step * grow;
            } else {
                h = h.abs().max(step.abs() * grow) * dir;
            }
        }
        path.states.push(sys.state(t, &y));
    }
    Ok(path)
}

struct SigmaOde {
    n: usize,
    gamma: f64,
}

impl SigmaOde {
    fn state(&self, t: f64, y: &[f64; 3]) -> SigmaState {
        SigmaState {
            t,
            sigma: y[0],
            sigma_prime: y[1],
            sigma_double_prime: y[2],
        }
    }

    fn scale(&self, s: &SigmaState) -> f64 {
        let nf = self.n as f64;
        let k = nf * (nf + self.gamma);
        let t = s.t;
        let d1 = s.sigma_prime;
        4.0 * d1 * d1 * (s.sigma.abs() + k + (t * d1).abs())
            + ((2.0 * nf + self.gamma - t).abs() * d1.abs() + s.sigma.abs()).powi(2)
            + (t * s.sigma_double_prime).powi(2)
    }

    fn rhs(&self, t: f64, y: &[f64; 3]) -> [f64; 3] {
        let nf = self.n as f64;
        let k = nf * (nf + self.gamma);
        let (s, d1, d2) = (y[0], y[1], y[2]);
        let c = 2.0 * nf + self.gamma - t;
        let d3 = (-t * d2 + 4.0 * d1 * (s - k - t * d1) - 2.0 * t * d1 * d1 + c * (c * d1 + s))
            / (t * t);
        [d1, d2, d3]
    }

    /// Moves `σ″` onto the σ-form constraint when the discriminant is
    /// comfortably positive. Returns whether `y` changed.
    fn project(&self, t: f64, y: &mut [f64; 3]) -> Result<bool> {
        let st = self.state(t, y);
        let phi = discriminant(&st, self.n, self.gamma);
        let scale = self.scale(&st);
        if phi < -1e-6 * scale {
            return Err(Error::Integration {
                t,
                message: format!("discriminant {phi} became negative (scale {scale})"),
            });
        }
        if phi > 1e-6 * scale {
            let target = y[2].signum() * phi.sqrt() / t;
            if target != y[2] {
                y[2] = target;
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// One Dormand–Prince step. Returns the fifth-order solution, the slope
    /// there (first-same-as-last) and the embedded error estimate.
    fn dp5_step(&self, t: f64, y: &[f64; 3], k1: &[f64; 3], h: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
        const A: [[f64; 6]; 6] = [
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
                0.0,
                0.0,
            ],
            [
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
                0.0,
            ],
            [
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
        ];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let mut k = [[0.0; 3]; 7];
        k[0] = *k1;
        for s in 0..6 {
            let mut ys = *y;
            for (i, v) in ys.iter_mut().enumerate() {
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    *v += h * A[s][j] * kj[i];
                }
            }
            k[s + 1] = self.rhs(t + C[s] * h, &ys);
        }
        // Row 6 of A is the fifth-order solution, so k[6] is its slope.
        let mut y_new = *y;
        for (i, v) in y_new.iter_mut().enumerate() {
            for j in 0..6 {
                *v += h * A[5][j] * k[j][i];
            }
        }
        let mut err = [0.0; 3];
        for (i, v) in err.iter_mut().enumerate() {
            for j in 0..7 {
                *v += h * E[j] * k[j][i];
            }
        }
        (y_new, k[6], err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::{sigma_exact, EnsembleParams};

    fn sigma_at(n: usize, g: f64, t: f64) -> SigmaState {
        sigma_exact(EnsembleParams::new(n, g).unwrap(), t).unwrap().into()
    }

    #[test]
    fn manufactured_pv_input() {
        for n in [1usize, 4, 17] {
            let st = PainleveState {
                t: 1.0,
                s: 2.0,
                s_prime: 0.0,
                s_double_prime: 0.0,
            };
            let r = pv_residual(&st, n, 0.0).unwrap();
            assert!((r - (1.0 - 4.0 * n as f64)).abs() < 1e-13);
        }
        let pole = PainleveState {
            t: 1.0,
            s: 1.0,
            s_prime: 0.0,
            s_double_prime: 0.0,
        };
        assert!(matches!(pv_residual(&pole, 3, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn pv_residual_is_order_independent() {
        let st = PainleveState {
            t: 3.7,
            s: 2.3,
            s_prime: -0.41,
            s_double_prime: 0.19,
        };
        let fwd = pv_residual(&st, 6, 1.5).unwrap();
        let rev: f64 = pv_terms(&st, 6, 1.5).iter().rev().sum();
        assert!((fwd - rev).abs() <= 1e-13 * (1.0 + fwd.abs()));
        assert_eq!(fwd, pv_residual(&st, 6, 1.5).unwrap());
    }

    #[test]
    fn pv_holds_for_finite_n_system() {
        for &t in &[5.0, 10.0, 15.0] {
            let st = s_state_by_differences(6, 1.0, t).unwrap();
            let r = pv_residual(&st, 6, 1.0).unwrap();
            assert!(r.abs() <= 1e-4 * (1.0 + st.s_double_prime.abs()), "t={t}: {r} {st:?}");
        }
    }

    #[test]
    fn rescaled_equation_matches_pv_by_chain_rule() {
        let (n, g, a) = (5usize, 0.5, 0.5);
        let nf = n as f64;
        let st = s_state_by_differences(n, g, 4.0 * nf * a).unwrap();
        let pv = pv_residual(&st, n, g).unwrap();
        let fr = fn_equation_residual(
            a,
            st.s,
            4.0 * nf * st.s_prime,
            16.0 * nf * nf * st.s_double_prime,
            n,
            g,
        )
        .unwrap();
        assert!((fr - 16.0 * nf * nf * pv).abs() < 1e-10 * (1.0 + fr.abs()), "{fr} vs {pv}");

        // Same identity for arbitrary (non-solution) input.
        let arb = PainleveState {
            t: 4.0 * nf * 0.3,
            s: 3.1,
            s_prime: 0.7,
            s_double_prime: -0.2,
        };
        let pv = pv_residual(&arb, n, g).unwrap();
        let fr = fn_equation_residual(0.3, 3.1, 4.0 * nf * 0.7, -16.0 * nf * nf * 0.2, n, g).unwrap();
        assert!((fr - 16.0 * nf * nf * pv).abs() < 1e-11 * fr.abs().max(1.0));
    }

    #[test]
    fn leading_order_cancels_in_rescaled_equation() {
        let a: f64 = 0.4;
        let f = (1.0 + a) / (1.0 - a);
        let f1 = 2.0 / (1.0 - a).powi(2);
        let f2 = 4.0 / (1.0 - a).powi(3);
        let r1 = fn_equation_residual(a, f, f1, f2, 1000, 0.0).unwrap();
        let r2 = fn_equation_residual(a, f, f1, f2, 10000, 0.0).unwrap();
        let slope = (r2.abs() / r1.abs()).log10();
        assert!((slope - 1.0).abs() < 1e-3, "slope {slope}");
    }

    #[test]
    fn series_residual_shrinks_like_one_over_n() {
        // F ≈ a0 + a1/n + a2/n² with α-derivatives by differences of the
        // closed-form coefficients.
        let g = 1.0;
        let a = 0.4;
        let coeffs = |a: f64, n: f64| {
            let a0 = (1.0 + a) / (1.0 - a);
            let a1 = -a * (1.0 + g) / (1.0 - a).powi(2);
            let a2 = (a + a * a - a.powi(4)
                + 2.0 * a * (1.0 - a) * (1.0 + a).powi(2) * g
                + a * (1.0 - a) * (1.0 + 3.0 * a) * g * g)
                / (2.0 * (1.0 - a).powi(4) * (1.0 + a).powi(2));
            a0 + a1 / n + a2 / (n * n)
        };
        let res = |n: usize| {
            let nf = n as f64;
            let h = 1e-3;
            let f = coeffs(a, nf);
            let fp = (coeffs(a + h, nf) - coeffs(a - h, nf)) / (2.0 * h);
            let fpp = (coeffs(a + h, nf) - 2.0 * f + coeffs(a - h, nf)) / (h * h);
            fn_equation_residual(a, f, fp, fpp, n, g).unwrap().abs()
        };
        let ratio = res(40) / res(80);
        assert!((1.6..2.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sigma_form_holds_for_exact_sigma() {
        for &(n, g) in &[(8usize, 0.0), (4, 1.0)] {
            for &t in &[2.0, 5.0, 10.0, 12.0] {
                let st = sigma_at(n, g, t);
                let r = sigma_form_residual(&st, n, g);
                let scale = (t * st.sigma_double_prime).powi(2) + 1.0;
                assert!(r.abs() <= 1e-5 * scale, "n={n} t={t}: {r}");
            }
        }
    }

    #[test]
    fn sigma_form_limit_values() {
        for &(n, g) in &[(3usize, 0.0), (5, 1.5)] {
            let k = n as f64 * (n as f64 + g);
            let st = SigmaState {
                t: 1e-3,
                sigma: k,
                sigma_prime: 0.0,
                sigma_double_prime: 0.0,
            };
            assert!((sigma_form_residual(&st, n, g) + k * k).abs() < 1e-9 * k * k);
        }
        let st = SigmaState {
            t: 0.0,
            sigma: 2.5,
            sigma_prime: 0.75,
            sigma_double_prime: 11.0,
        };
        assert_eq!(sigma_form_residual(&st, 3, 0.5), sigma_form_residual(&st, 3, 0.5));
        let expect = -(4.0 * 0.75f64.powi(2) * (2.5 - 10.5) + (6.5 * 0.75 + 2.5f64).powi(2));
        assert!((sigma_form_residual(&st, 3, 0.5) - expect).abs() < 1e-13);
    }

    #[test]
    fn bridge_special_value() {
        let (t, n) = (1.7, 4usize);
        let v = sigma_from_s(t, 2.0, 0.0, n, 0.0).unwrap();
        assert!((v - t * (2.0 * n as f64 - t) / 2.0).abs() < 1e-13);
        assert!(matches!(sigma_from_s(t, 0.0, 0.0, n, 0.0), Err(Error::Domain(_))));
        let w = sigma_from_s(t, 2.0 + 1e-12, 0.0, n, 0.0).unwrap();
        assert!((w - v).abs() < 1e-10);
    }

    #[test]
    fn bridge_matches_exact_sigma() {
        for &t in &[5.0, 10.0] {
            let st = s_state_by_differences(6, 1.0, t).unwrap();
            let bridged = sigma_from_s(t, st.s, st.s_prime, 6, 1.0).unwrap();
            let exact = sigma_at(6, 1.0, t).sigma;
            assert!((bridged - exact).abs() <= 1e-4 * exact.abs(), "t={t}: {bridged} vs {exact}");
        }
    }

    #[test]
    fn integrated_path_tracks_exact_sigma() {
        let (n, g) = (5usize, 0.5);
        // Started at the large-t end: integrating up from t = 2 amplifies the
        // 1e-14 error of the initial data by about 10¹⁰ before t = 20.
        let grid: Vec<f64> = (2..=19).rev().map(|k| k as f64).collect();
        let path = integrate_sigma_form(n, g, sigma_at(n, g, 20.0), &grid, Default::default()).unwrap();
        let mut worst = 0.0f64;
        for st in &path.states {
            let ex = sigma_at(n, g, st.t);
            worst = worst.max((st.sigma - ex.sigma).abs() / ex.sigma.abs());
        }
        assert!(worst <= 1e-6, "max relative deviation {worst}");

        let grid: Vec<f64> = (11..=20).map(|k| k as f64).collect();
        let path = integrate_sigma_form(n, g, sigma_at(n, g, 10.0), &grid, Default::default()).unwrap();
        for st in &path.states {
            let ex = sigma_at(n, g, st.t);
            assert!((st.sigma - ex.sigma).abs() <= 1e-6 * ex.sigma.abs(), "t={}", st.t);
        }
    }

    #[test]
    fn integrated_path_reaches_saturation() {
        let n = 5;
        let t1 = 4.0 * n as f64 + 20.0;
        let path = integrate_sigma_form(n, 0.0, sigma_at(n, 0.0, 10.0), &[t1], Default::default()).unwrap();
        let end = path.states[0].sigma;
        let exact = sigma_at(n, 0.0, t1).sigma;
        assert!(end.abs() < 1e-4 && (end - exact).abs() < 1e-9, "{end} vs {exact}");
    }

    #[test]
    fn integration_is_reversible() {
        let (n, g) = (5usize, 0.5);
        let start = sigma_at(n, g, 2.0);
        let fwd = integrate_sigma_form(n, g, start, &[10.0], Default::default()).unwrap();
        let back = integrate_sigma_form(n, g, fwd.states[0], &[2.0], Default::default()).unwrap();
        let d = (back.states[0].sigma - start.sigma).abs();
        assert!(d <= 1e-8 * start.sigma.abs().max(1.0), "{d}");
    }

    fn assert_sign_consistent(start: &SigmaState, path: &SigmaPath) {
        let mut sign = start.sigma_double_prime.signum();
        let mut events = path.branch_events.iter().peekable();
        for st in &path.states {
            while events.next_if(|ev| ev.t <= st.t).is_some() {
                sign = -sign;
            }
            if st.sigma_double_prime.abs() > 1e-8 {
                assert_eq!(st.sigma_double_prime.signum(), sign, "t={}", st.t);
            }
        }
    }

    #[test]
    fn branch_sign_is_kept_between_events() {
        let (n, g) = (4usize, 1.0);
        let grid: Vec<f64> = (1..=40).map(|k| 10.0 + 0.5 * k as f64).collect();
        let start = sigma_at(n, g, 10.0);
        // The physical σ is convex, so its path never switches branch.
        let path = integrate_sigma_form(n, g, start, &grid, Default::default()).unwrap();
        assert!(path.branch_events.is_empty());
        assert!(path.states.iter().all(|st| st.sigma_double_prime > 0.0));
        assert_sign_consistent(&start, &path);

        // The other branch through the same (σ, σ′) is a different solution.
        let flipped = SigmaState {
            sigma_double_prime: -start.sigma_double_prime,
            ..start
        };
        match integrate_sigma_form(n, g, flipped, &grid, Default::default()) {
            Ok(other) => {
                assert_sign_consistent(&flipped, &other);
                assert!((other.states[0].sigma - path.states[0].sigma).abs() > 1e-6);
            }
            Err(e) => assert!(matches!(e, Error::Integration { .. })),
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let st = sigma_at(3, 0.0, 2.0);
        assert!(integrate_sigma_form(3, 0.0, st, &[], Default::default()).is_err());
        assert!(integrate_sigma_form(3, 0.0, st, &[5.0, 4.0], Default::default()).is_err());
        // Initial data far off the σ-form constraint (negative discriminant).
        let bad = SigmaState {
            sigma: 0.0,
            sigma_prime: 3.0,
            ..st
        };
        assert!(discriminant(&bad, 3, 0.0) < 0.0);
        assert!(matches!(
            integrate_sigma_form(3, 0.0, bad, &[3.0], Default::default()),
            Err(Error::Integration { .. })
        ));
    }
}
