//! `ln det(I − K_Airy)` on `L²(−s, ∞)` by Nyström discretization.
//!
//! In the left tail the determinant is `e^{−s³/12}` small and the largest
//! eigenvalue of the operator is exponentially close to 1, so double precision
//! cannot resolve `1 − λ`. The discretized matrix is therefore assembled and
//! factored in MPFR arithmetic with a working precision that grows with `s`.

use std::f64::consts::{LN_2, SQRT_2};

use rayon::prelude::*;
use rug::ops::NegAssign;
use rug::Float;

use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_legendre, symmetric_tridiagonal_eigenvalues};
use crate::specfun::{airy, airy_series_mp, tracy_widom_constant};

/// Largest `s` accepted by [`airy_fredholm_logdet`].
pub const MAX_S: f64 = 12.0;
/// Smallest node count accepted by [`airy_fredholm_logdet`].
pub const MIN_NODES: usize = 40;
/// Node count that resolves every `s ≤ MAX_S` (the check runs at twice this).
pub const DEFAULT_NODES: usize = 80;
/// Tolerance of the node-doubling check.
pub const DOUBLING_TOLERANCE: f64 = 1e-9;

/// `K_Airy(u, v) = (Ai(u)Ai′(v) − Ai(v)Ai′(u)) / (u − v)`, with the confluent
/// value `Ai′(u)² − u Ai(u)²` when `|u − v| < 10⁻⁶`.
pub fn airy_kernel(u: f64, v: f64) -> Result<f64> {
    let a = airy(u)?;
    if (u - v).abs() < 1e-6 {
        let m = 0.5 * (u + v);
        let c = airy(m)?;
        return Ok(c.ai_prime * c.ai_prime - m * c.ai * c.ai);
    }
    let b = airy(v)?;
    Ok((a.ai * b.ai_prime - b.ai * a.ai_prime) / (u - v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AiryDetResult {
    pub s: f64,
    /// Value at `2 × node_count` nodes.
    pub log_det: f64,
    /// Value at `node_count` nodes.
    pub coarse_log_det: f64,
    pub node_count: usize,
    pub truncation_point: f64,
    pub precision_bits: u32,
    pub converged: bool,
}

/// Smallest `T` on a 1/8 grid with `Ai(T)² ≤ 10⁻³⁰`.
pub fn truncation_point() -> f64 {
    let mut t = 0.0;
    loop {
        let a = airy(t).map(|p| p.ai).unwrap_or(0.0);
        if a * a <= 1e-30 {
            return t;
        }
        t += 0.125;
    }
}

/// Working precision for a given `s`: enough bits for `1 − λ_max`, which
/// shrinks like `e^{−(4√2/3) s^{3/2}}`, and for the `e^{−s³/12}` size of the
/// determinant, plus a fixed margin.
pub fn working_precision(s: f64) -> u32 {
    let s = s.max(0.0);
    let nats = s.powi(3) / 12.0 + 4.0 * SQRT_2 / 3.0 * s.powf(1.5);
    96 + (nats / LN_2).ceil() as u32
}

/// Nyström nodes and weights on `(−s, T)` in precision `prec`: Gauss–Legendre
/// on `(−s, 0)` and on `(0, T)`. The oscillatory left piece gets the fraction
/// `s/(s+6)` of the nodes, clamped to `[1/4, 2/3]`.
fn nodes_and_weights(s: f64, t_end: f64, m: usize, prec: u32) -> Result<(Vec<Float>, Vec<Float>)> {
    let frac = (s / (s + 6.0)).clamp(0.25, 2.0 / 3.0);
    let left = ((m as f64 * frac).ceil() as usize).clamp(2, m - 2);
    let right = m - left;
    let mut x = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for (count, a, b) in [(left, -s, 0.0), (right, 0.0, t_end)] {
        let (gx, gw) = legendre_mp(count, prec)?;
        let half = Float::with_val(prec, b - a) / 2u32;
        let mid = Float::with_val(prec, a + b) / 2u32;
        for (xi, wi) in gx.into_iter().zip(gw) {
            x.push(Float::with_val(prec, &half * &xi) + &mid);
            w.push(Float::with_val(prec, &half * &wi));
        }
    }
    Ok((x, w))
}

/// Gauss–Legendre rule on `[−1, 1]` in precision `prec`, by Newton
/// iteration on `P_m` started from the double-precision nodes.
fn legendre_mp(m: usize, prec: u32) -> Result<(Vec<Float>, Vec<Float>)> {
    let (x0, _) = gauss_legendre(m)?;
    let eps_exp = -(prec as i32) + 4;
    let out: Vec<(Float, Float)> = x0
        .par_iter()
        .map(|&guess| {
            let mut x = Float::with_val(prec, guess);
            let mut dp = Float::new(prec);
            for _ in 0..64 {
                let (p, d) = legendre_value(m, &x, prec);
                let dx = Float::with_val(prec, &p / &d);
                x -= &dx;
                dp = d;
                if dx.is_zero() || dx.get_exp().is_some_and(|e| e < eps_exp) {
                    let (_, d) = legendre_value(m, &x, prec);
                    dp = d;
                    break;
                }
            }
            let one_minus = Float::with_val(prec, 1) - Float::with_val(prec, &x * &x);
            let w = Float::with_val(prec, 2) / (one_minus * Float::with_val(prec, &dp * &dp));
            (x, w)
        })
        .collect();
    Ok(out.into_iter().unzip())
}

/// `(P_m(x), P_m′(x))` by the three-term recurrence.
fn legendre_value(m: usize, x: &Float, prec: u32) -> (Float, Float) {
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = x.clone();
    for k in 1..m {
        let kf = k as u32;
        let mut p2 = Float::with_val(prec, x * &p1) * (2 * kf + 1);
        p2 -= Float::with_val(prec, &p0 * kf);
        p2 /= kf + 1;
        p0 = p1;
        p1 = p2;
    }
    // P_m′ = m (x P_m − P_{m−1}) / (x² − 1)
    let num = (Float::with_val(prec, x * &p1) - &p0) * m as u32;
    let den = Float::with_val(prec, x * x) - 1u32;
    (p1, num / den)
}

/// Lower triangle (row-major) of `W^{1/2} K W^{1/2}` on the given nodes.
fn kernel_matrix(x: &[Float], w: &[Float], prec: u32) -> Vec<Vec<Float>> {
    let airy_vals: Vec<(Float, Float)> = x.par_iter().map(|xi| airy_series_mp(xi, prec)).collect();
    let sw: Vec<Float> = w.iter().map(|wi| Float::with_val(prec, wi.sqrt_ref())).collect();
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let (ai, aip) = &airy_vals[i];
            (0..=i)
                .map(|j| {
                    let k = if i == j {
                        let a2 = Float::with_val(prec, ai * ai) * &x[i];
                        Float::with_val(prec, aip * aip) - a2
                    } else {
                        let (aj, ajp) = &airy_vals[j];
                        let num = Float::with_val(prec, ai * ajp) - Float::with_val(prec, aj * aip);
                        num / Float::with_val(prec, &x[i] - &x[j])
                    };
                    k * &sw[i] * &sw[j]
                })
                .collect()
        })
        .collect()
}

/// `ln det` of the symmetric positive-definite matrix `I − A` given the lower
/// triangle of `A`, by Cholesky.
fn ln_det_identity_minus(a: Vec<Vec<Float>>, prec: u32) -> Result<f64> {
    let m = a.len();
    let mut l: Vec<Vec<Float>> = a
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            for v in row.iter_mut() {
                v.neg_assign();
            }
            row[i] += 1u32;
            row
        })
        .collect();
    let mut ln_det = 0.0;
    for j in 0..m {
        let (done, rest) = l.split_at_mut(j + 1);
        let row_j = &mut done[j];
        let d = {
            let dot = Float::with_val(prec, Float::dot(row_j[..j].iter().zip(row_j[..j].iter())));
            Float::with_val(prec, &row_j[j] - &dot)
        };
        if !d.is_sign_positive() || d.is_zero() {
            return Err(Error::Conditioning(format!(
                "Cholesky pivot {j} of the discretized I − K is not positive at {prec} bits \
                 (too few nodes for this s)"
            )));
        }
        ln_det += d.clone().ln().to_f64();
        let piv = d.sqrt();
        row_j[j] = piv.clone();
        let row_j = &done[j];
        rest.par_iter_mut().for_each(|row_i| {
            let dot = Float::with_val(prec, Float::dot(row_i[..j].iter().zip(row_j[..j].iter())));
            let v = Float::with_val(prec, &row_i[j] - &dot);
            row_i[j] = v / &piv;
        });
    }
    Ok(ln_det)
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=MAX_S).contains(&s) {
        return domain(format!("s must lie in [0, {MAX_S}], got {s}"));
    }
    Ok(())
}

/// `ln det(I − K)` at a single node count, without the doubling check.
pub fn airy_logdet_at(s: f64, node_count: usize) -> Result<f64> {
    check_s(s)?;
    if node_count < 4 {
        return domain("need at least 4 nodes");
    }
    let prec = working_precision(s);
    let (x, w) = nodes_and_weights(s, truncation_point(), node_count, prec)?;
    ln_det_identity_minus(kernel_matrix(&x, &w, prec), prec)
}

/// `ln det(I − K_Airy)` on `L²(−s, ∞)`, computed at `node_count` and
/// `2·node_count` nodes. The finer value is reported; an accuracy error is
/// returned when the two differ by more than [`DOUBLING_TOLERANCE`].
pub fn airy_fredholm_logdet(s: f64, node_count: usize) -> Result<AiryDetResult> {
    check_s(s)?;
    if node_count < MIN_NODES {
        return domain(format!("node_count must be at least {MIN_NODES}"));
    }
    let coarse = airy_logdet_at(s, node_count)?;
    let fine = airy_logdet_at(s, 2 * node_count)?;
    if (coarse - fine).abs() > DOUBLING_TOLERANCE || fine > 0.0 {
        return Err(Error::Accuracy {
            message: format!("Airy determinant at s = {s} not converged under node doubling"),
            coarse,
            fine,
        });
    }
    Ok(AiryDetResult {
        s,
        log_det: fine,
        coarse_log_det: coarse,
        node_count,
        truncation_point: truncation_point(),
        precision_bits: working_precision(s),
        converged: true,
    })
}

/// Eigenvalues (ascending) of the symmetrized Nyström matrix
/// `W^{1/2} K W^{1/2}` in double precision.
pub fn airy_operator_eigenvalues(s: f64, node_count: usize) -> Result<Vec<f64>> {
    check_s(s)?;
    let prec = working_precision(s);
    let (x, w) = nodes_and_weights(s, truncation_point(), node_count, prec)?;
    let lower = kernel_matrix(&x, &w, prec);
    let m = lower.len();
    let mut a = vec![vec![0.0; m]; m];
    for (i, row) in lower.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[i][j] = v.to_f64();
            a[j][i] = a[i][j];
        }
    }
    let (mut d, mut e) = householder_tridiagonal(a);
    symmetric_tridiagonal_eigenvalues(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Householder reduction of a dense symmetric matrix to tridiagonal form.
/// Returns the diagonal and the subdiagonal (with `e[0] = 0`).
fn householder_tridiagonal(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = a[i][..=l].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in j + 1..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[i][i];
    }
    // Shift so that e[i] couples rows i and i+1, as the QL solver expects.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    (d, e)
}

/// `c(s) = ln det + s³/12 + (1/8) ln s`, which tends to the Tracy–Widom
/// constant as `s → ∞`.
pub fn tail_constant(s: f64, log_det: f64) -> f64 {
    log_det + s.powi(3) / 12.0 + s.ln() / 8.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwConstantFit {
    pub c0: f64,
    pub slope: f64,
    pub s_values: Vec<f64>,
    pub log_dets: Vec<f64>,
    pub tail_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `c₀` minus `ln 2 / 24 + ζ′(−1)`.
    pub error: f64,
}

/// Fits `c(s) = c₀ + b s⁻³` by least squares over `s_values` and returns the
/// intercept with the fit details. With a single `s` the fit degenerates to
/// `c₀ = c(s)`.
pub fn extract_tw_constant(s_values: &[f64], node_count: usize) -> Result<TwConstantFit> {
    if s_values.is_empty() {
        return domain("need at least one s value");
    }
    let dets = s_values
        .iter()
        .map(|&s| airy_fredholm_logdet(s, node_count))
        .collect::<Result<Vec<_>>>()?;
    let c: Vec<f64> = dets.iter().map(|d| tail_constant(d.s, d.log_det)).collect();
    let (c0, slope) = if s_values.len() == 1 {
        (c[0], 0.0)
    } else {
        let x: Vec<f64> = s_values.iter().map(|s| s.powi(-3)).collect();
        let k = x.len() as f64;
        let mx = x.iter().sum::<f64>() / k;
        let my = c.iter().sum::<f64>() / k;
        let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
        if sxx == 0.0 {
            return domain("s values must be distinct");
        }
        let sxy: f64 = x.iter().zip(&c).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
        let b = sxy / sxx;
        (my - b * mx, b)
    };
    let residuals = s_values
        .iter()
        .zip(&c)
        .map(|(s, ci)| ci - c0 - slope * s.powi(-3))
        .collect();
    Ok(TwConstantFit {
        c0,
        slope,
        s_values: s_values.to_vec(),
        log_dets: dets.iter().map(|d| d.log_det).collect(),
        tail_values: c,
        residuals,
        error: c0 - tracy_widom_constant(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::airy_tail;

    /// Double-precision Nyström with Gaussian elimination; adequate for small s.
    fn logdet_f64(s: f64, m: usize) -> f64 {
        let t_end = truncation_point();
        let (gx, gw) = gauss_legendre(m).unwrap();
        let mut x = Vec::new();
        let mut w = Vec::new();
        for (a, b) in [(-s, 0.0), (0.0, t_end)] {
            for (xi, wi) in gx.iter().zip(&gw) {
                x.push(0.5 * (b - a) * xi + 0.5 * (a + b));
                w.push(0.5 * (b - a) * wi);
            }
        }
        let n = x.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let k = airy_kernel(x[i], x[j]).unwrap();
                a[i][j] = f64::from(u8::from(i == j)) - (w[i] * w[j]).sqrt() * k;
            }
        }
        let mut ld = 0.0;
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            ld += a[c][c].abs().ln();
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        ld
    }

    #[test]
    fn kernel_values() {
        let d = airy_kernel(0.0, 0.0).unwrap();
        let aip0: f64 = 0.2588194037928068;
        assert!((d - aip0 * aip0).abs() < 1e-14);
        assert!((d - 0.0669875).abs() < 1e-7);
        assert_eq!(airy_kernel(1.0, 2.0).unwrap(), airy_kernel(2.0, 1.0).unwrap());
        let k66 = airy_kernel(6.0, 6.0).unwrap();
        assert!(k66 > 0.0 && k66 <= 1e-6);
        // Off-diagonal values approach the confluent limit continuously.
        let near = airy_kernel(0.7, 0.7 + 2e-6).unwrap();
        assert!((near - airy_kernel(0.7, 0.7).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn truncation_and_precision() {
        let t = truncation_point();
        let a = airy(t).unwrap().ai;
        let b = airy(t - 0.125).unwrap().ai;
        assert!(a * a <= 1e-30 && b * b > 1e-30);
        assert!(working_precision(12.0) > working_precision(6.0));
    }

    #[test]
    fn small_s_matches_double_precision_nystrom() {
        for &s in &[0.5, 2.0] {
            let mp = airy_fredholm_logdet(s, 40).unwrap();
            let f = logdet_f64(s, 50);
            assert!((mp.log_det - f).abs() < 1e-11, "s={s}: {} vs {f}", mp.log_det);
        }
    }

    #[test]
    fn small_s_range_and_convergence() {
        let r = airy_fredholm_logdet(0.5, 40).unwrap();
        assert!(r.log_det > -0.6 && r.log_det < -0.05, "{}", r.log_det);
        assert!((r.log_det - r.coarse_log_det).abs() <= 1e-9);
        assert!(r.converged);
    }

    #[test]
    fn reference_values() {
        // Frozen from an independent 60-digit Nyström computation (mpmath).
        for &(s, v) in &[(6.0, -18.3602870437), (10.0, -83.757649355127), (12.0, -144.44712613231406)] {
            let r = airy_fredholm_logdet(s, DEFAULT_NODES).unwrap();
            assert!((r.log_det - v).abs() < 1e-9, "s={s}: {}", r.log_det);
        }
    }

    #[test]
    fn left_tail_and_monotonicity() {
        let r8 = airy_fredholm_logdet(8.0, DEFAULT_NODES).unwrap();
        let d = (r8.log_det - airy_tail(8.0).unwrap()).abs();
        assert!(d <= 5.0 / 512.0, "{d}");
        let v: Vec<f64> = [2.0, 4.0, 6.0]
            .iter()
            .map(|&s| airy_fredholm_logdet(s, DEFAULT_NODES).unwrap().log_det)
            .collect();
        assert!(v[0] > v[1] && v[1] > v[2]);
    }

    #[test]
    fn operator_spectrum_in_unit_interval() {
        for &s in &[2.0, 6.0, 10.0] {
            let ev = airy_operator_eigenvalues(s, 60).unwrap();
            assert!(ev[0] >= -1e-12, "s={s}: min {}", ev[0]);
            assert!(*ev.last().unwrap() <= 1.0 + 1e-12, "s={s}");
            // Strictly below one: the MP Cholesky of I − K succeeds.
            assert!(airy_logdet_at(s, 60).is_ok());
        }
        // Trace equals the quadrature of the diagonal kernel.
        let ev = airy_operator_eigenvalues(2.0, 60).unwrap();
        let trace: f64 = ev.iter().sum();
        let (gx, gw) = gauss_legendre(200).unwrap();
        let t_end = truncation_point();
        let mut q = 0.0;
        for (a, b) in [(-2.0, 0.0), (0.0, t_end)] {
            for (xi, wi) in gx.iter().zip(&gw) {
                let u = 0.5 * (b - a) * xi + 0.5 * (a + b);
                q += 0.5 * (b - a) * wi * airy_kernel(u, u).unwrap();
            }
        }
        assert!((trace - q).abs() < 1e-10, "{trace} vs {q}");
    }

    #[test]
    fn under_resolution_is_reported() {
        assert!(matches!(airy_logdet_at(12.0, 40), Err(Error::Conditioning(_))));
        assert!(matches!(airy_fredholm_logdet(12.5, 80), Err(Error::Domain(_))));
        assert!(matches!(airy_fredholm_logdet(2.0, 20), Err(Error::Domain(_))));
        match airy_fredholm_logdet(10.0, 40) {
            Err(Error::Accuracy { .. }) | Err(Error::Conditioning(_)) => {}
            other => panic!("expected a convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn tracy_widom_constant_recovery() {
        let expected = tracy_widom_constant();
        let fit = extract_tw_constant(&[6.0, 8.0, 10.0], DEFAULT_NODES).unwrap();
        assert!(fit.error.abs() <= 1e-2, "{fit:?}");
        assert!((fit.c0 - expected).abs() <= 1e-2);
        let single = extract_tw_constant(&[10.0], DEFAULT_NODES).unwrap();
        assert!((single.c0 - expected).abs() <= 5e-3);
        let richer = extract_tw_constant(&[6.0, 8.0, 10.0, 12.0], DEFAULT_NODES).unwrap();
        assert!(richer.error.abs() < fit.error.abs(), "{} vs {}", richer.error, fit.error);
        assert!(extract_tw_constant(&[], 80).is_err());
    }
}
