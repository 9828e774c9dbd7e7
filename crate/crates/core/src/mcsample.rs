//! Monte Carlo sampling of the largest eigenvalue.
//!
//! Draws come from the bidiagonal model of the β = 2 Laguerre ensemble: with
//! `B` lower bidiagonal, `d_i² ~ Gamma(n + γ − i + 1)` on the diagonal
//! (`i = 1..n`) and `e_i² ~ Gamma(n − i)` below it, the eigenvalues of `BBᵀ`
//! have joint density proportional to `Π(x_i − x_j)² Π x_k^γ e^{−x_k}`.
//! This covers every real `γ > −1`. The largest eigenvalue of the
//! tridiagonal `BBᵀ` is found by Sturm-count bisection.
//!
//! Draw `k` uses its own ChaCha stream `k` under the run's seed, so results do
//! not depend on the number of worker threads.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::exactprob::EnsembleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// Weight `x^γ e^{−x}`.
    Unscaled,
    /// Weight `x^γ e^{−4nx}`; each eigenvalue is the unscaled one over `4n`.
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub params: EnsembleParams,
    pub sample_count: usize,
    pub seed: u64,
    pub scaling: Scaling,
}

/// Sorted sample of largest eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCDF {
    samples: Vec<f64>,
}

impl EmpiricalCDF {
    /// Sorts `samples`; NaNs are rejected.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return domain("empirical CDF needs at least one sample");
        }
        if samples.iter().any(|x| x.is_nan()) {
            return domain("samples contain NaN");
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Fraction of samples `< x`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s < x) as f64 / self.len() as f64
    }

    /// Smallest sample with at least a fraction `p` of the sample at or below it.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = (p.clamp(0.0, 1.0) * self.len() as f64).ceil() as usize;
        self.samples[k.clamp(1, self.len()) - 1]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }
}

fn validate(config: &SamplerConfig) -> Result<()> {
    if config.sample_count == 0 {
        return domain("sample_count must be at least 1");
    }
    EnsembleParams::new(config.params.n, config.params.gamma)?;
    Ok(())
}

/// Draws `config.sample_count` largest eigenvalues.
pub fn sample_largest(config: &SamplerConfig) -> Result<EmpiricalCDF> {
    validate(config)?;
    let n = config.params.n;
    let gamma = config.params.gamma;
    let diag = (1..=n)
        .map(|i| Gamma::new(n as f64 + gamma - i as f64 + 1.0, 1.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Domain(format!("invalid gamma shape: {e}")))?;
    let sub = (1..n)
        .map(|i| Gamma::new((n - i) as f64, 1.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Domain(format!("invalid gamma shape: {e}")))?;
    let divisor = match config.scaling {
        Scaling::Unscaled => 1.0,
        Scaling::Scaled => 4.0 * n as f64,
    };

    let samples: Vec<f64> = (0..config.sample_count as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(d, o), k| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(k);
                let mut prev_e2 = 0.0;
                for i in 0..n {
                    let d2 = diag[i].sample(&mut rng);
                    let e2 = if i + 1 < n { sub[i].sample(&mut rng) } else { 0.0 };
                    d[i] = d2 + prev_e2;
                    o[i] = d2 * e2;
                    prev_e2 = e2;
                }
                largest_eigenvalue(d, o) / divisor
            },
        )
        .collect();
    EmpiricalCDF::new(samples)
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `d`
/// and squared off-diagonal `o2` (`o2[i]` couples `i` and `i+1`; the last entry
/// is ignored), by bisection on the Sturm count.
pub fn largest_eigenvalue(d: &[f64], o2: &[f64]) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { o2[i - 1].sqrt() } else { 0.0 };
        let right = if i + 1 < n { o2[i].sqrt() } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    if n == 1 {
        return d[0];
    }
    // Invariant: count_below(lo) < n ≤ count_below(hi).
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if count_below(d, o2, mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Number of eigenvalues `< x`.
fn count_below(d: &[f64], o2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let coupling = if i > 0 { o2[i - 1] } else { 0.0 };
        q = d[i] - x - if i > 0 { coupling / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `sup |F_emp − F|` evaluated at the points of `grid`, comparing both the
/// right value `F_emp(g)` and the left limit `F_emp(g−)`. The reference's
/// left limit is taken at the preceding float so that step-function
/// references are handled too. With the sample itself as grid this is the
/// exact Kolmogorov–Smirnov statistic for a continuous `F`.
pub fn ks_distance(
    ecdf: &EmpiricalCDF,
    exact_cdf: impl Fn(f64) -> f64 + Sync,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return domain("empty grid");
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return domain("grid must be sorted");
    }
    Ok(grid
        .par_iter()
        .map(|&g| {
            let right = (ecdf.cdf(g) - exact_cdf(g)).abs();
            let left = (ecdf.cdf_left(g) - exact_cdf(g.next_down())).abs();
            right.max(left)
        })
        .reduce(|| 0.0, f64::max))
}

/// [`ks_distance`] with the sample points as grid.
pub fn ks_statistic(ecdf: &EmpiricalCDF, exact_cdf: impl Fn(f64) -> f64 + Sync) -> f64 {
    let mut grid = ecdf.samples().to_vec();
    grid.dedup();
    ks_distance(ecdf, exact_cdf, &grid).unwrap_or(0.0)
}

/// Critical value of the KS statistic at the 99% level, `1.63/√N`.
pub fn ks_band_99(sample_count: usize) -> f64 {
    1.63 / (sample_count as f64).sqrt()
}

/// Writes the sample as CSV: `#` comment lines with the configuration, a
/// column header, then one eigenvalue per line in sorted order.
pub fn write_samples_csv(mut out: impl Write, config: &SamplerConfig, ecdf: &EmpiricalCDF) -> std::io::Result<()> {
    writeln!(out, "# n={}", config.params.n)?;
    writeln!(out, "# gamma={}", config.params.gamma)?;
    writeln!(out, "# seed={}", config.seed)?;
    writeln!(out, "# samples={}", ecdf.len())?;
    let scaling = match config.scaling {
        Scaling::Unscaled => "unscaled",
        Scaling::Scaled => "scaled",
    };
    writeln!(out, "# scaling={scaling}")?;
    writeln!(out, "largest_eigenvalue")?;
    for x in ecdf.samples() {
        writeln!(out, "{x:e}")?;
    }
    Ok(())
}
