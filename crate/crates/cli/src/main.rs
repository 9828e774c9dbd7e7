mod output;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use lue_edge::airyfred::{airy_fredholm_logdet, extract_tw_constant, DEFAULT_NODES};
use lue_edge::asymptotics::{
    airy_tail, dlnp_dalpha, lnp_small_alpha, lnp_theorem, soft_edge_alpha, ExpansionReport,
    AIRY_TAIL_REMAINDER,
};
use lue_edge::exactprob::{
    p_scaled, phat_hankel_oracle, phat_projection, sigma_exact, EnsembleParams,
};
use lue_edge::mcsample::{
    ks_band_99, ks_statistic, sample_largest, write_samples_csv, SamplerConfig, Scaling,
};
use lue_edge::painleve::{
    pv_residual, s_state_by_differences, sigma_form_residual, sigma_from_s, SigmaState,
};
use lue_edge::specfun::tracy_widom_constant;

use output::{run_timestamp, write_table, Cell, Format, RunManifest, Table};

#[derive(Parser)]
#[command(
    name = "lue-edge",
    version,
    about = "Largest-eigenvalue distribution of the Laguerre unitary ensemble"
)]
struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Timestamp recorded in the manifest (default: SOURCE_DATE_EPOCH, then now).
    #[arg(long, global = true)]
    timestamp: Option<String>,
    /// Worker threads.
    #[arg(long, global = true, env = "LUE_EDGE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact finite-n log-probability that the largest eigenvalue is below t = 4nα.
    Exact(ExactArgs),
    /// Large-n and tail asymptotic formulas.
    Asympt(AsymptArgs),
    /// Exact versus asymptotic differences with empirical convergence orders.
    Compare(CompareArgs),
    /// Painlevé V and σ-form residuals of the finite-n quantities.
    Painleve(PainleveArgs),
    /// Monte Carlo sample of the largest eigenvalue with a KS test against the exact CDF.
    Mc(McArgs),
    /// Airy determinant tail and the Tracy–Widom constant fit.
    Tw(TwArgs),
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Scaled thresholds α (comma separated).
    #[arg(long, value_delimiter = ',', required_unless_present = "t", conflicts_with = "t")]
    alpha: Vec<f64>,
    /// Unscaled thresholds t (comma separated).
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::Projection)]
    method: Method,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Projection,
    Hankel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Formula {
    Lemma,
    Theorem,
    SmallAlpha,
    AiryTail,
}

#[derive(Args)]
struct AsymptArgs {
    #[arg(long, value_enum)]
    formula: Formula,
    #[arg(long, required_unless_present = "s")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CompareKind {
    Lemma,
    Theorem,
    SmallAlpha,
    SoftEdge,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_enum)]
    formula: CompareKind,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Soft-edge coordinate for `soft-edge`.
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    /// Airy determinant node count for `soft-edge`.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
}

#[derive(Args)]
struct PainleveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the weight x^γ e^{−4nx} (eigenvalues divided by 4n).
    #[arg(long)]
    scaled: bool,
    /// Also write the sorted sample to this CSV file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct TwArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    s: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
}

enum CliError {
    Lib(lue_edge::Error),
    Io(io::Error),
    Usage(String),
}

impl From<lue_edge::Error> for CliError {
    fn from(e: lue_edge::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use lue_edge::Error as E;
        match self {
            CliError::Usage(_) | CliError::Lib(E::Domain(_)) => 2,
            CliError::Lib(E::Accuracy { .. } | E::Integration { .. }) => 4,
            CliError::Lib(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Io(e) => format!("i/o error: {e}"),
            CliError::Usage(m) => m.clone(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads.filter(|&k| k > 0) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lue-edge: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let (name, params, seed, table) = match &cli.command {
        Command::Exact(a) => ("exact", exact_params(a), None, cmd_exact(a)?),
        Command::Asympt(a) => ("asympt", asympt_params(a), None, cmd_asympt(a)?),
        Command::Compare(a) => ("compare", compare_params(a), None, cmd_compare(a)?),
        Command::Painleve(a) => ("painleve", painleve_params(a), None, cmd_painleve(a)?),
        Command::Mc(a) => ("mc", mc_params(a), Some(a.seed), cmd_mc(a)?),
        Command::Tw(a) => ("tw", tw_params(a), None, cmd_tw(a)?),
    };
    let manifest = RunManifest {
        subcommand: name,
        parameters: params,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        timestamp: run_timestamp(cli.timestamp.as_deref()),
    };
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_table(&mut w, cli.format, &manifest, &table)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_table(&mut w, cli.format, &manifest, &table)?;
        }
    }
    Ok(())
}

fn params(n: usize, gamma: f64) -> CliResult<EnsembleParams> {
    Ok(EnsembleParams::new(n, gamma)?)
}

fn exact_params(a: &ExactArgs) -> BTreeMap<&'static str, Value> {
    BTreeMap::from([
        ("n", json!(a.n)),
        ("gamma", json!(a.gamma)),
        ("alpha", json!(a.alpha)),
        ("t", json!(a.t)),
        ("method", json!(match a.method {
            Method::Projection => "projection",
            Method::Hankel => "hankel",
        })),
    ])
}

fn cmd_exact(a: &ExactArgs) -> CliResult<Table> {
    let p = params(a.n, a.gamma)?;
    let scale = 4.0 * a.n as f64;
    let points: Vec<(f64, f64)> = if a.alpha.is_empty() {
        a.t.iter().map(|&t| (t / scale, t)).collect()
    } else {
        a.alpha.iter().map(|&al| (al, al * scale)).collect()
    };
    let rows = points
        .par_iter()
        .map(|&(alpha, t)| {
            let lp = match a.method {
                Method::Projection => phat_projection(p, t)?,
                Method::Hankel => phat_hankel_oracle(p, t)?,
            };
            Ok(vec![alpha.into(), t.into(), lp.log_value.into(), lp.prob().into()])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["alpha", "t", "ln_p", "p"],
        rows,
    })
}

fn formula_name(f: Formula) -> &'static str {
    match f {
        Formula::Lemma => "lemma",
        Formula::Theorem => "theorem",
        Formula::SmallAlpha => "small-alpha",
        Formula::AiryTail => "airy-tail",
    }
}

fn asympt_params(a: &AsymptArgs) -> BTreeMap<&'static str, Value> {
    BTreeMap::from([
        ("formula", json!(formula_name(a.formula))),
        ("n", json!(a.n)),
        ("gamma", json!(a.gamma)),
        ("alpha", json!(a.alpha)),
        ("s", json!(a.s)),
    ])
}

fn cmd_asympt(a: &AsymptArgs) -> CliResult<Table> {
    if a.formula == Formula::AiryTail {
        if a.s.is_empty() {
            return Err(CliError::Usage("airy-tail needs --s".into()));
        }
        let rows = a
            .s
            .iter()
            .map(|&s| Ok(vec![s.into(), airy_tail(s)?.into(), AIRY_TAIL_REMAINDER.into()]))
            .collect::<CliResult<Vec<_>>>()?;
        return Ok(Table {
            columns: vec!["s", "value", "remainder"],
            rows,
        });
    }
    let n = a
        .n
        .ok_or_else(|| CliError::Usage(format!("{} needs --n", formula_name(a.formula))))?;
    if a.alpha.is_empty() {
        return Err(CliError::Usage(format!("{} needs --alpha", formula_name(a.formula))));
    }
    let rows = a
        .alpha
        .par_iter()
        .map(|&alpha| {
            let r: ExpansionReport = match a.formula {
                Formula::Lemma => dlnp_dalpha(n, a.gamma, alpha)?,
                Formula::Theorem => lnp_theorem(n, a.gamma, alpha)?,
                Formula::SmallAlpha => lnp_small_alpha(n, a.gamma, alpha)?,
                Formula::AiryTail => unreachable!(),
            };
            Ok(vec![
                n.into(),
                a.gamma.into(),
                alpha.into(),
                r.value.into(),
                r.remainder_order.into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["n", "gamma", "alpha", "value", "remainder"],
        rows,
    })
}

fn compare_name(k: CompareKind) -> &'static str {
    match k {
        CompareKind::Lemma => "lemma",
        CompareKind::Theorem => "theorem",
        CompareKind::SmallAlpha => "small-alpha",
        CompareKind::SoftEdge => "soft-edge",
    }
}

fn compare_params(a: &CompareArgs) -> BTreeMap<&'static str, Value> {
    let mut m = BTreeMap::from([
        ("formula", json!(compare_name(a.formula))),
        ("n", json!(a.n)),
        ("gamma", json!(a.gamma)),
    ]);
    if a.formula == CompareKind::SoftEdge {
        m.insert("s", json!(a.s));
        m.insert("nodes", json!(a.nodes));
    } else {
        m.insert("alpha", json!(a.alpha));
    }
    m
}

/// Rows are ordered by `α` then `n`. The order column is
/// `ln(d_prev/d) / ln(x/x_prev)` against the previous row, where `x` is `n`
/// when several `n` are given and `1/α` otherwise. For `soft-edge`, `α`
/// moves with `n` and all rows form one chain.
fn cmd_compare(a: &CompareArgs) -> CliResult<Table> {
    let soft = a.formula == CompareKind::SoftEdge;
    if !soft && a.alpha.is_empty() {
        return Err(CliError::Usage("compare needs --alpha".into()));
    }
    let target = if soft {
        Some(airy_fredholm_logdet(a.s, a.nodes)?.log_det)
    } else {
        None
    };
    let alphas: Vec<Option<f64>> = if soft {
        vec![None]
    } else {
        a.alpha.iter().map(|&x| Some(x)).collect()
    };
    let mut points = Vec::new();
    for al in &alphas {
        for &n in &a.n {
            points.push((n, *al));
        }
    }
    let values = points
        .par_iter()
        .map(|&(n, al)| -> CliResult<(usize, f64, f64, f64)> {
            let g = a.gamma;
            let p = params(n, g)?;
            Ok(match a.formula {
                CompareKind::Lemma => {
                    let alpha = al.unwrap_or_default();
                    let exact = sigma_exact(p, 4.0 * n as f64 * alpha)?.sigma / alpha;
                    (n, alpha, exact, dlnp_dalpha(n, g, alpha)?.value)
                }
                CompareKind::Theorem => {
                    let alpha = al.unwrap_or_default();
                    (n, alpha, p_scaled(p, alpha)?.log_value, lnp_theorem(n, g, alpha)?.value)
                }
                CompareKind::SmallAlpha => {
                    let alpha = al.unwrap_or_default();
                    (n, alpha, p_scaled(p, alpha)?.log_value, lnp_small_alpha(n, g, alpha)?.value)
                }
                CompareKind::SoftEdge => {
                    let alpha = soft_edge_alpha(n, a.s)?;
                    (n, alpha, p_scaled(p, alpha)?.log_value, target.unwrap_or_default())
                }
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let vary_n = a.n.len() > 1;
    let mut rows = Vec::with_capacity(values.len());
    let mut prev: Option<(f64, f64, usize, f64)> = None;
    for &(n, alpha, exact, approx) in &values {
        let d = (exact - approx).abs();
        let x = if vary_n { n as f64 } else { 1.0 / alpha };
        let same_group = prev.is_some_and(|(_, pa, pn, _)| {
            if vary_n {
                (soft || pa == alpha) && pn < n
            } else {
                pn == n
            }
        });
        let order = match prev {
            Some((px, _, _, pd)) if same_group => Some((pd / d).ln() / (x / px).ln()),
            _ => None,
        };
        rows.push(vec![
            n.into(),
            a.gamma.into(),
            alpha.into(),
            exact.into(),
            approx.into(),
            d.into(),
            order.into(),
        ]);
        prev = Some((x, alpha, n, d));
    }
    Ok(Table {
        columns: vec!["n", "gamma", "alpha", "exact", "asymptotic", "difference", "order"],
        rows,
    })
}

fn painleve_params(a: &PainleveArgs) -> BTreeMap<&'static str, Value> {
    BTreeMap::from([("n", json!(a.n)), ("gamma", json!(a.gamma)), ("t", json!(a.t))])
}

fn cmd_painleve(a: &PainleveArgs) -> CliResult<Table> {
    let p = params(a.n, a.gamma)?;
    let (n, g) = (a.n, a.gamma);
    let rows = a
        .t
        .par_iter()
        .map(|&t| {
            let st: SigmaState = sigma_exact(p, t)?.into();
            let r = sigma_form_residual(&st, n, g);
            let rel = r.abs() / ((t * st.sigma_double_prime).powi(2) + 1.0);
            let s = s_state_by_differences(n, g, t)?;
            let pv = pv_residual(&s, n, g)?;
            let bridged = sigma_from_s(t, s.s, s.s_prime, n, g)?;
            Ok(vec![
                t.into(),
                st.sigma.into(),
                st.sigma_prime.into(),
                st.sigma_double_prime.into(),
                r.into(),
                rel.into(),
                s.s.into(),
                pv.into(),
                (pv.abs() / (1.0 + s.s_double_prime.abs())).into(),
                bridged.into(),
                ((bridged - st.sigma).abs() / st.sigma.abs()).into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table {
        columns: vec![
            "t",
            "sigma",
            "sigma_prime",
            "sigma_double_prime",
            "sigma_form_residual",
            "sigma_form_relative",
            "s",
            "pv_residual",
            "pv_relative",
            "sigma_bridge",
            "bridge_relative",
        ],
        rows,
    })
}

fn mc_params(a: &McArgs) -> BTreeMap<&'static str, Value> {
    BTreeMap::from([
        ("n", json!(a.n)),
        ("gamma", json!(a.gamma)),
        ("samples", json!(a.samples)),
        ("seed", json!(a.seed)),
        ("scaled", json!(a.scaled)),
        ("dump", json!(a.dump.as_ref().map(|p| p.display().to_string()))),
    ])
}

fn cmd_mc(a: &McArgs) -> CliResult<Table> {
    let p = params(a.n, a.gamma)?;
    let config = SamplerConfig {
        params: p,
        sample_count: a.samples,
        seed: a.seed,
        scaling: if a.scaled { Scaling::Scaled } else { Scaling::Unscaled },
    };
    let ecdf = sample_largest(&config)?;
    if let Some(path) = &a.dump {
        let mut w = BufWriter::new(File::create(path)?);
        write_samples_csv(&mut w, &config, &ecdf)?;
        w.flush()?;
    }
    let ks = if a.scaled {
        ks_statistic(&ecdf, |x| p_scaled(p, x).map_or(f64::NAN, |v| v.prob()))
    } else {
        ks_statistic(&ecdf, |x| phat_projection(p, x).map_or(f64::NAN, |v| v.prob()))
    };
    if ks.is_nan() {
        return Err(CliError::Lib(lue_edge::Error::Numerical(
            "exact CDF could not be evaluated at every sample".into(),
        )));
    }
    let band = ks_band_99(a.samples);
    Ok(Table {
        columns: vec!["n", "gamma", "samples", "seed", "scaling", "ks", "band_99", "within_band"],
        rows: vec![vec![
            a.n.into(),
            a.gamma.into(),
            a.samples.into(),
            Cell::Text(a.seed.to_string()),
            (if a.scaled { "scaled" } else { "unscaled" }).into(),
            ks.into(),
            band.into(),
            (ks <= band).into(),
        ]],
    })
}

fn tw_params(a: &TwArgs) -> BTreeMap<&'static str, Value> {
    BTreeMap::from([("s", json!(a.s)), ("nodes", json!(a.nodes))])
}

fn cmd_tw(a: &TwArgs) -> CliResult<Table> {
    let fit = extract_tw_constant(&a.s, a.nodes)?;
    let reference = tracy_widom_constant();
    let rows = (0..fit.s_values.len())
        .map(|i| {
            vec![
                fit.s_values[i].into(),
                fit.log_dets[i].into(),
                fit.tail_values[i].into(),
                fit.residuals[i].into(),
                fit.c0.into(),
                fit.slope.into(),
                reference.into(),
                fit.error.into(),
            ]
        })
        .collect();
    Ok(Table {
        columns: vec!["s", "log_det", "tail_constant", "fit_residual", "c0", "slope", "reference", "c0_error"],
        rows,
    })
}
