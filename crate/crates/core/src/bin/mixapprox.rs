//! Batch front-end: reads a JSON experiment configuration, runs the
//! approximation / certification / sandwich / NPMLE pipelines, and
//! writes deterministic CSV and JSON artifacts.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mixapprox::approx::{
    gauss_quadrature, local_moment_match_with, plan_for, truncate_and_match, upper_bound_envelope,
    ApproxConfig, EnvelopeFamily, Strategy,
};
use mixapprox::certify::{
    closed_form_delta, default_delta_grid, lambda_min, trig_moment_matrix, tv_certificate,
    ClosedFormSpec, EigenRoute, Method,
};
use mixapprox::laws::AtomicLaw;
use mixapprox::mixture::{chi2_moment_bound, divergence, DivergenceKind};
use mixapprox::npmle::{rate_scan, Constraint};
use mixapprox::{Error, MixingLaw, PrecisionMode};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "mixapprox", version, about = "Finite mixture approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Arithmetic mode for eigen/quadrature kernels.
    #[arg(long, global = true, value_enum)]
    precision: Option<PrecisionArg>,
    /// Worker threads (output is independent of this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Construct m-atomic approximants and measure divergences.
    Approximate,
    /// Compute spectral lower-bound certificates per m.
    Certify,
    /// Bracket the best error: certificate vs measured divergence.
    Sandwich,
    /// NPMLE rate scan.
    Npmle,
    /// Run built-in identity checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for PrecisionMode {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => PrecisionMode::Double,
            PrecisionArg::Extended => PrecisionMode::Extended,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DeltaGridSpec {
    min: f64,
    max: f64,
    points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NpmleSection {
    constraint: Constraint,
    n_list: Vec<usize>,
    replicates: u32,
}

fn default_m_min() -> u32 {
    1
}

fn default_divergences() -> Vec<DivergenceKind> {
    vec![DivergenceKind::Tv, DivergenceKind::Chi2]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ExperimentConfig {
    family: MixingLaw,
    #[serde(default = "default_m_min")]
    m_min: u32,
    m_max: u32,
    #[serde(default)]
    delta_grid: Option<DeltaGridSpec>,
    #[serde(default = "default_divergences")]
    divergences: Vec<DivergenceKind>,
    #[serde(default)]
    precision: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    npmle: Option<NpmleSection>,
}

struct Context {
    config: ExperimentConfig,
    config_hash: String,
    out: PathBuf,
    precision: PrecisionMode,
    seed: u64,
}

fn load_context(cli: &Cli) -> mixapprox::Result<Context> {
    let path = cli.config.as_ref().ok_or_else(|| {
        Error::Validation("--config PATH is required for this subcommand".into())
    })?;
    let bytes = std::fs::read(path)?;
    let config: ExperimentConfig = serde_json::from_slice(&bytes)?;
    if config.m_min < 1 {
        return Err(Error::Validation("m_min must be >= 1".into()));
    }
    if config.m_min > config.m_max {
        return Err(Error::Validation(format!(
            "empty m range: m_min {} > m_max {}",
            config.m_min, config.m_max
        )));
    }
    config.family.validate()?;
    if let Some(g) = &config.delta_grid {
        if !(g.min > 0.0 && g.max > g.min && g.points >= 1) {
            return Err(Error::Validation(
                "delta_grid needs 0 < min < max and points >= 1".into(),
            ));
        }
    }
    let precision = match (&cli.precision, config.precision.as_deref()) {
        (Some(p), _) => (*p).into(),
        (None, Some("double")) | (None, None) => PrecisionMode::Double,
        (None, Some("extended")) => PrecisionMode::Extended,
        (None, Some(other)) => {
            return Err(Error::Validation(format!(
                "precision must be \"double\" or \"extended\", got {other:?}"
            )))
        }
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let config_hash = hex(&hasher.finalize());
    std::fs::create_dir_all(&cli.out)?;
    Ok(Context {
        config,
        config_hash,
        out: cli.out.clone(),
        precision,
        seed,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt(x: f64) -> String {
    // 17 significant digits, '.' decimal, no locale.
    format!("{x:.16e}")
}

fn write_csv(
    path: &Path,
    ctx: &Context,
    header: &[&str],
    rows: &[Vec<String>],
) -> mixapprox::Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# mixapprox {VERSION}\n"));
    out.push_str(&format!("# config sha256={}\n", ctx.config_hash));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

/// Construct the approximant the theory prescribes for the family:
/// local moment matching on the support for compactly supported laws,
/// truncation plus local matching for tail families, quadrature for
/// atomic laws.
fn construct(law: &MixingLaw, m: u32, precision: PrecisionMode) -> mixapprox::Result<(AtomicLaw, f64)> {
    let cfg = ApproxConfig::default();
    match law {
        MixingLaw::Atomic(_) => {
            let rule = gauss_quadrature(law, m, precision)?;
            let t = law.support().1.abs().max(law.support().0.abs());
            Ok((rule.to_atomic()?, t))
        }
        MixingLaw::Uniform { .. } | MixingLaw::Conditioned { .. } | MixingLaw::Scaled { .. } => {
            let (a, b) = law.support();
            let half = a.abs().max(b.abs());
            Ok((local_moment_match_with(law, half, m, &cfg)?, half))
        }
        MixingLaw::TruncPareto { .. } => {
            let (a, b) = law.support();
            let half = a.abs().max(b.abs());
            Ok((local_moment_match_with(law, half, m, &cfg)?, half))
        }
        _ => match truncate_and_match(law, m, &cfg) {
            Ok(out) => Ok(out),
            // Below the truncation-regime gate the regime-specific recipe
            // does not apply, but a plain quadrature rule is still a valid
            // m-atomic approximant and keeps the upper bound usable.
            Err(Error::OutOfRegime(_)) => {
                let rule = gauss_quadrature(law, m, precision)?;
                let half = rule
                    .nodes
                    .iter()
                    .fold(0.0_f64, |acc, &x| acc.max(x.abs()));
                Ok((rule.to_atomic()?, half))
            }
            Err(e) => Err(e),
        },
    }
}

/// Combined cellwise chi-square bound for the plan used at (M, m), when
/// the per-cell moment-comparison gate J > 4 M_cell^2 holds.
fn cellwise_bound(law: &MixingLaw, half: f64, m: u32) -> Option<f64> {
    let plan = plan_for(half, m, ApproxConfig::default().kappa);
    match plan.strategy {
        Strategy::Global => chi2_moment_bound(half, 2 * m).ok(),
        Strategy::Local { cells, budget } => {
            let cell_half = half / cells as f64;
            let per_cell = chi2_moment_bound(cell_half, 2 * budget).ok()?;
            let mut total = 0.0;
            let width = 2.0 * half / cells as f64;
            for j in 0..cells {
                let lo = -half + j as f64 * width;
                let mass = law.mass(lo, lo + width).ok()?;
                total += mass * per_cell;
            }
            Some(total)
        }
    }
}

fn delta_grid_for(ctx: &Context, law: &MixingLaw, m: u32) -> Vec<f64> {
    if let Some(spec) = &ctx.config.delta_grid {
        let (lo, hi) = (spec.min.ln(), spec.max.ln());
        return (0..spec.points)
            .map(|i| {
                if spec.points == 1 {
                    spec.min
                } else {
                    (lo + (hi - lo) * i as f64 / (spec.points - 1) as f64).exp()
                }
            })
            .collect();
    }
    let hint = match law {
        MixingLaw::Uniform { halfwidth } => Some(std::f64::consts::PI / halfwidth),
        MixingLaw::Gaussian { stddev } => {
            closed_form_delta(ClosedFormSpec::GaussianWrapped { sigma: *stddev, m }).ok()
        }
        MixingLaw::Laplace { scale } => {
            closed_form_delta(ClosedFormSpec::LaplaceWrapped { lambda: *scale, m }).ok()
        }
        MixingLaw::SubWeibull { shape, scale } => closed_form_delta(
            ClosedFormSpec::SubWeibullWrapped {
                alpha: *shape,
                beta: *scale,
                m,
            },
        )
        .ok(),
        _ => None,
    };
    default_delta_grid(hint)
}

fn method_name(m: &Method) -> String {
    match m {
        Method::EigenDirect => "eigen-direct".into(),
        Method::EigenWrapped => "eigen-wrapped".into(),
        Method::EigenOrtho => "eigen-ortho".into(),
        Method::ClosedForm(n) => format!("closed-form-{n}"),
    }
}

fn envelope_for(law: &MixingLaw, m: u32) -> Option<(f64, f64)> {
    let cfg = ApproxConfig::default();
    let family = match law {
        MixingLaw::Uniform { halfwidth } => EnvelopeFamily::Bounded {
            m_halfwidth: *halfwidth,
        },
        MixingLaw::Gaussian { stddev } => EnvelopeFamily::SubWeibull {
            alpha: 2.0,
            beta: stddev * std::f64::consts::SQRT_2,
        },
        MixingLaw::Laplace { scale } => EnvelopeFamily::SubWeibull {
            alpha: 1.0,
            beta: *scale,
        },
        MixingLaw::SubWeibull { shape, scale } => EnvelopeFamily::SubWeibull {
            alpha: *shape,
            beta: *scale,
        },
        _ => return None,
    };
    upper_bound_envelope(family, m, &cfg)
        .ok()
        .map(|e| (e.value, e.log_value))
}

fn cmd_approximate(ctx: &Context) -> mixapprox::Result<()> {
    let law = &ctx.config.family;
    let mut atom_rows = Vec::new();
    let mut div_rows = Vec::new();
    let mut dump = serde_json::Map::new();
    for m in ctx.config.m_min..=ctx.config.m_max {
        let (approx, half) = construct(law, m, ctx.precision)?;
        for (i, (&a, &w)) in approx.atoms.iter().zip(&approx.weights).enumerate() {
            atom_rows.push(vec![m.to_string(), i.to_string(), fmt(a), fmt(w)]);
        }
        let q = MixingLaw::Atomic(approx.clone());
        let bound = cellwise_bound(law, half, m);
        for &kind in &ctx.config.divergences {
            let d = divergence(kind, &q, law)?;
            let bound_col = match (kind, bound) {
                (DivergenceKind::Chi2, Some(b)) => fmt(b),
                _ => String::new(),
            };
            div_rows.push(vec![
                m.to_string(),
                kind.name().into(),
                fmt(d.value),
                fmt(d.abs_err),
                bound_col,
            ]);
        }
        dump.insert(
            m.to_string(),
            serde_json::json!({
                "atoms": approx.atoms,
                "weights": approx.weights,
                "half_width": half,
            }),
        );
    }
    write_csv(
        &ctx.out.join("approximants.csv"),
        ctx,
        &["m", "index", "atom", "weight"],
        &atom_rows,
    )?;
    write_csv(
        &ctx.out.join("divergences.csv"),
        ctx,
        &["m", "divergence", "value", "abs_err", "chi2_cell_bound"],
        &div_rows,
    )?;
    let f = std::fs::File::create(ctx.out.join("approximants.json"))?;
    serde_json::to_writer_pretty(f, &serde_json::Value::Object(dump))?;
    Ok(())
}

fn cmd_certify(ctx: &Context) -> mixapprox::Result<()> {
    let law = &ctx.config.family;
    let mut rows = Vec::new();
    for m in ctx.config.m_min..=ctx.config.m_max {
        let grid = delta_grid_for(ctx, law, m);
        let cert = tv_certificate(law, m, &grid, EigenRoute::Direct)?;
        rows.push(vec![
            m.to_string(),
            fmt(cert.delta),
            fmt(cert.lambda_min.unwrap_or(f64::NAN)),
            fmt(cert.value),
            fmt(cert.log_value),
            method_name(&cert.method),
        ]);
    }
    write_csv(
        &ctx.out.join("certificates.csv"),
        ctx,
        &["m", "delta", "lambda_min", "certificate", "log_certificate", "method"],
        &rows,
    )?;
    Ok(())
}

fn cmd_sandwich(ctx: &Context) -> mixapprox::Result<()> {
    let law = &ctx.config.family;
    let mut rows = Vec::new();
    for m in ctx.config.m_min..=ctx.config.m_max {
        let grid = delta_grid_for(ctx, law, m);
        let cert = tv_certificate(law, m, &grid, EigenRoute::Direct)?;
        let (approx, _half) = construct(law, m, ctx.precision)?;
        let q = MixingLaw::Atomic(approx);
        let tv = divergence(DivergenceKind::Tv, &q, law)?;
        let chi2 = divergence(DivergenceKind::Chi2, &q, law)?;
        if cert.value > tv.value + 1e-9 {
            let diag = serde_json::json!({
                "m": m,
                "certificate": cert,
                "measured_tv": tv.value,
                "measured_tv_abs_err": tv.abs_err,
                "family": law,
            });
            let f = std::fs::File::create(ctx.out.join("sandwich_violation.json"))?;
            serde_json::to_writer_pretty(f, &diag)?;
            return Err(Error::SandwichViolation(format!(
                "m={m}: certificate {} exceeds measured TV {}; diagnostics written",
                cert.value, tv.value
            )));
        }
        let (env, log_env) = envelope_for(law, m)
            .map(|(v, l)| (fmt(v), fmt(l)))
            .unwrap_or_default();
        rows.push(vec![
            m.to_string(),
            fmt(cert.value),
            fmt(cert.log_value),
            fmt(tv.value),
            fmt(chi2.value),
            env,
            log_env,
        ]);
    }
    write_csv(
        &ctx.out.join("sandwich.csv"),
        ctx,
        &[
            "m",
            "lower_cert",
            "log_lower_cert",
            "measured_tv",
            "measured_chi2",
            "envelope_ub",
            "log_envelope_ub",
        ],
        &rows,
    )?;
    Ok(())
}

fn cmd_npmle(ctx: &Context) -> mixapprox::Result<()> {
    let section = ctx.config.npmle.as_ref().ok_or_else(|| {
        Error::Validation("config requires an \"npmle\" section for this subcommand".into())
    })?;
    let scan = rate_scan(
        &ctx.config.family,
        section.constraint,
        &section.n_list,
        section.replicates,
        ctx.seed,
    )?;
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.replicate.to_string(),
                fmt(r.hellinger),
                fmt(r.log_likelihood),
                r.iterations.to_string(),
            ]
        })
        .collect();
    write_csv(
        &ctx.out.join("npmle_rows.csv"),
        ctx,
        &["n", "replicate", "hellinger", "loglik", "iters"],
        &rows,
    )?;
    let summary: Vec<Vec<String>> = scan
        .summary
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                fmt(s.mean_hellinger),
                fmt(s.std_error),
                fmt(s.epsilon_n),
            ]
        })
        .collect();
    write_csv(
        &ctx.out.join("npmle_summary.csv"),
        ctx,
        &["n", "mean_hellinger", "std_error", "epsilon_n"],
        &summary,
    )?;
    Ok(())
}

fn cmd_selftest() -> mixapprox::Result<()> {
    let mut failures = 0u32;
    let mut check = |name: &str, ok: bool| {
        println!("{}: {}", name, if ok { "pass" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };
    // Identity Toeplitz for the full-circle uniform law.
    let unif = MixingLaw::uniform(std::f64::consts::PI)?;
    let t = trig_moment_matrix(&unif, 8, 1.0)?;
    let lam = lambda_min(&t);
    check("identity-toeplitz", (lam - 1.0).abs() < 1e-10);
    // Quadrature exactness spot check.
    let gauss = MixingLaw::gaussian(1.0)?;
    let rule = gauss_quadrature(&gauss, 6, PrecisionMode::Double)?;
    let mut ok = true;
    for k in 0..=11u32 {
        let want = gauss.moment(k, PrecisionMode::Double)?;
        let scale: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * x.abs().powi(k as i32))
            .sum::<f64>()
            .max(1.0);
        ok &= (rule.power_expectation(k) - want).abs() <= 1e-10 * scale;
    }
    check("quadrature-exactness", ok);
    // Certificate soundness on one full pipeline case.
    let cert = tv_certificate(&gauss, 3, &default_delta_grid(None), EigenRoute::Direct)?;
    let q = MixingLaw::Atomic(gauss_quadrature(&gauss, 3, PrecisionMode::Double)?.to_atomic()?);
    let tv = divergence(DivergenceKind::Tv, &q, &gauss)?;
    check("certificate-soundness", cert.value <= tv.value + 1e-9);
    if failures > 0 {
        return Err(Error::Numerical(format!("{failures} selftest check(s) failed")));
    }
    Ok(())
}

fn run(cli: &Cli) -> mixapprox::Result<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(Error::Validation("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::Validation(format!("worker pool: {e}")))?;
    }
    match cli.command {
        Command::Selftest => cmd_selftest(),
        Command::Approximate => cmd_approximate(&load_context(cli)?),
        Command::Certify => cmd_certify(&load_context(cli)?),
        Command::Sandwich => cmd_sandwich(&load_context(cli)?),
        Command::Npmle => cmd_npmle(&load_context(cli)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Validation(_) | Error::OutOfRegime(_) | Error::Unsupported(_) => 2,
                Error::SandwichViolation(_) => 4,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}
