//! `gauss-ldp`: numerical laboratory for large deviations of
//! continued-fraction denominators.
//!
//! Every subcommand writes one CSV report (stdout or `--out`) whose `#`
//! header records the full configuration. Exit codes: 0 success, 1 an
//! exact in-window tail measure violated the theoretical bound, 2
//! operational failure (bad input, I/O, nothing computable).

use clap::{Parser, Subcommand};
use gauss_ldp_cli::{parse, report, verify};
use gauss_ldp::cf;
use gauss_ldp::mc::{estimate_tail, McConfig};
use gauss_ldp::tail::{exact_tail, EnumLimits, TailQuery, TailSide};
use gauss_ldp::thermo::{PressureSolver, RatePoint};
use num_traits::ToPrimitive;
use gauss_ldp_cli::report::Report;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_BOUND_VIOLATION: u8 = 1;
const EXIT_OPERATIONAL: u8 = 2;

/// Hard ceiling for automatic precision growth in `expand`.
const MAX_AUTO_BITS: u64 = 1 << 22;

#[derive(Parser)]
#[command(
    name = "gauss-ldp",
    version,
    about = "Large deviations of continued-fraction denominators: exact tails, \
             Monte Carlo, pressure, and the rate function"
)]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for enumeration and sampling.
    #[arg(long, global = true, default_value_t = 4)]
    workers: usize,

    /// Seed for Monte Carlo subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Node budget for exact cylinder enumeration ("1e9" accepted).
    #[arg(long, global = true, default_value = "1e9", value_parser = count_arg)]
    budget: u64,

    /// Working precision in bits; chosen automatically when omitted.
    #[arg(long, global = true)]
    precision_bits: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continued-fraction digits and convergents of a number in (0,1).
    Expand {
        /// Number to expand: "p/q", a decimal string, "golden", or "sqrt2m1".
        #[arg(long)]
        x: String,
        /// Expansion depth.
        #[arg(long)]
        n: usize,
    },
    /// Exact Lebesgue measure of {x : (2/n)·log q_n(x) ≷ α}.
    Tail {
        /// Depths: "12" or "12,14" or "12..18".
        #[arg(long)]
        n: String,
        /// α values: a number, "lo:hi:step", or a comma list.
        #[arg(long)]
        alpha: String,
        /// Which tail: "lower" ((2/n)·log q_n ≤ α) or "upper" (≥ α).
        #[arg(long)]
        side: String,
    },
    /// Monte Carlo estimate of the same tail probabilities.
    Mc {
        /// Depths: "40" or "40,80" or "40..60".
        #[arg(long)]
        n: String,
        /// α values: a number, "lo:hi:step", or a comma list.
        #[arg(long)]
        alpha: String,
        /// Which tail (defaults to upper).
        #[arg(long, default_value = "upper")]
        side: String,
        /// Sample count per cell ("1e6" accepted).
        #[arg(long, default_value = "1e5", value_parser = count_arg)]
        samples: u64,
    },
    /// Topological pressure P(t) of the Gauss-map transfer operator.
    Pressure {
        /// t values (t > 1/2): a number, "lo:hi:step", or a comma list.
        #[arg(long)]
        t: String,
    },
    /// Rate function I(α) via the Legendre transform of the pressure.
    Rate {
        /// α grid; omitted = the reference grid used by `figure1`.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Rate-function curve on the reference grid, with shape checks and
    /// the three annotated limits (minimum at 2γ, vertical tangent at
    /// 2·ln φ, right slope 1/2) in the header.
    Figure1,
    /// Check tail measures against the envelope C_α·e^{−n·I(α)}.
    VerifyBound {
        /// Depths: "12" or "12,14" or "12..18".
        #[arg(long)]
        n: String,
        /// α values: a number, "lo:hi:step", or a comma list.
        #[arg(long)]
        alpha: String,
        /// "exact", "mc", or "auto" (pick per cell by predicted cost).
        #[arg(long, default_value = "auto")]
        mode: String,
        /// Monte Carlo sample count per cell.
        #[arg(long, default_value = "1e5", value_parser = count_arg)]
        samples: u64,
    },
}

fn count_arg(s: &str) -> Result<u64, String> {
    parse::parse_count(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(EXIT_OPERATIONAL);
    }
    let result = match &cli.command {
        Command::Expand { x, n } => cmd_expand(&cli, x, *n),
        Command::Tail { n, alpha, side } => cmd_tail(&cli, n, alpha, side),
        Command::Mc {
            n,
            alpha,
            side,
            samples,
        } => cmd_mc(&cli, n, alpha, side, *samples),
        Command::Pressure { t } => cmd_pressure(&cli, t),
        Command::Rate { alpha } => cmd_rate(&cli, alpha.as_deref()),
        Command::Figure1 => cmd_figure1(&cli),
        Command::VerifyBound {
            n,
            alpha,
            mode,
            samples,
        } => cmd_verify_bound(&cli, n, alpha, mode, *samples),
    };
    match result {
        Ok((rep, code)) => {
            if let Err(e) = write_report(&rep, cli.out.as_deref()) {
                eprintln!("error: writing report: {e}");
                return ExitCode::from(EXIT_OPERATIONAL);
            }
            ExitCode::from(code)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_OPERATIONAL)
        }
    }
}

fn write_report(rep: &Report, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => {
            let mut f = io::BufWriter::new(std::fs::File::create(path)?);
            rep.write_to(&mut f)?;
            f.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            rep.write_to(&mut lock)?;
            lock.flush()
        }
    }
}

/// `precision_bits` header value when the flag is not set.
fn bits_header(cli: &Cli) -> String {
    cli.precision_bits
        .map(|b| b.to_string())
        .unwrap_or_else(|| "auto".to_string())
}

fn push_globals(rep: &mut Report, cli: &Cli, precision: Option<String>) {
    rep.kv("precision_bits", precision.unwrap_or_else(|| bits_header(cli)));
    rep.kv("budget", cli.budget);
    rep.kv("seed", cli.seed);
    rep.kv("workers", cli.workers);
}

// ---------------------------------------------------------------------------
// expand
// ---------------------------------------------------------------------------

fn cmd_expand(cli: &Cli, x: &str, n: usize) -> Result<(Report, u8), String> {
    let spec = parse::parse_number(x).map_err(|e| e.to_string())?;
    let input = spec.to_real_input();
    let auto = cli.precision_bits.is_none();
    let mut bits = cli
        .precision_bits
        .unwrap_or_else(|| (4 * n as u64 + 128).max(256));
    let expansion = loop {
        match cf::expand(&input, n, bits) {
            Ok(e) => break e,
            Err(cf::CfError::PrecisionExhausted { .. }) if auto && bits < MAX_AUTO_BITS => {
                bits *= 2;
            }
            Err(e) => return Err(e.to_string()),
        }
    };
    let convs = cf::convergents(&expansion.digits);

    let mut rep = Report::new("expand", &["k", "a_k", "p_k", "q_k", "scaled_log_q"]);
    rep.kv("x", x.trim());
    rep.kv("n", n);
    push_globals(&mut rep, cli, Some(bits.to_string()));
    rep.kv("terminated", expansion.terminated);
    for (digit, c) in expansion.digits.values().iter().zip(&convs) {
        // The scaled growth observable at depth k: (2/k)·log q_k.
        let scaled = 2.0 * gauss_ldp::real::ln_biguint(&c.q) / c.index as f64;
        rep.row(vec![
            c.index.to_string(),
            digit.to_string(),
            c.p.to_string(),
            c.q.to_string(),
            report::fmt_f64(scaled),
        ]);
    }
    Ok((rep, EXIT_OK))
}

// ---------------------------------------------------------------------------
// tail
// ---------------------------------------------------------------------------

const TAIL_COLUMNS: &[&str] = &[
    "n",
    "alpha",
    "side",
    "measure_decimal",
    "measure_num",
    "measure_den",
    "cylinder_count",
    "q_threshold",
    "seconds",
];

fn cmd_tail(cli: &Cli, n_raw: &str, alpha_raw: &str, side_raw: &str) -> Result<(Report, u8), String> {
    let depths = parse::parse_depths(n_raw).map_err(|e| e.to_string())?;
    let alphas = parse::parse_grid(alpha_raw).map_err(|e| e.to_string())?;
    let side: TailSide = side_raw.parse()?;

    let mut rep = Report::new("tail", TAIL_COLUMNS);
    rep.kv("n", n_raw.trim());
    rep.kv("alpha", alpha_raw.trim());
    rep.kv("side", side);
    push_globals(&mut rep, cli, None);

    let limits = EnumLimits {
        node_budget: cli.budget,
        workers: cli.workers,
    };
    let mut attempted = 0usize;
    for &n in &depths {
        for alpha in &alphas {
            attempted += 1;
            let query = TailQuery {
                n,
                alpha: alpha.clone(),
                side,
            };
            match exact_tail(&query, &limits) {
                Ok(r) => {
                    let (num, den) = report::fraction_parts(&r.measure);
                    rep.row(vec![
                        n.to_string(),
                        report::fmt_rational(alpha),
                        side.to_string(),
                        report::decimal_30(&r.measure),
                        num,
                        den,
                        r.cylinder_count.to_string(),
                        r.q_threshold.to_string(),
                        format!("{:.6}", r.elapsed.as_secs_f64()),
                    ]);
                }
                Err(e) => eprintln!(
                    "warning: skipping n={n} alpha={}: {e}",
                    report::fmt_rational(alpha)
                ),
            }
        }
    }
    if rep.is_empty() && attempted > 0 {
        return Err("no tail cell could be evaluated".to_string());
    }
    Ok((rep, EXIT_OK))
}

// ---------------------------------------------------------------------------
// mc
// ---------------------------------------------------------------------------

const MC_COLUMNS: &[&str] = &[
    "n",
    "alpha",
    "side",
    "p_hat",
    "stderr",
    "ci_lo",
    "ci_hi",
    "hits",
    "samples",
    "seed",
    "empirical_rate",
];

fn cmd_mc(
    cli: &Cli,
    n_raw: &str,
    alpha_raw: &str,
    side_raw: &str,
    samples: u64,
) -> Result<(Report, u8), String> {
    let depths = parse::parse_depths(n_raw).map_err(|e| e.to_string())?;
    let alphas = parse::parse_grid(alpha_raw).map_err(|e| e.to_string())?;
    let side: TailSide = side_raw.parse()?;

    let mut rep = Report::new("mc", MC_COLUMNS);
    rep.kv("n", n_raw.trim());
    rep.kv("alpha", alpha_raw.trim());
    rep.kv("side", side);
    rep.kv("samples", samples);
    push_globals(&mut rep, cli, None);
    rep.kv("generator", gauss_ldp::mc::GENERATOR);

    let mut attempted = 0usize;
    for &n in &depths {
        let mut cfg = McConfig::new(n, samples, cli.seed);
        cfg.workers = cli.workers;
        if let Some(bits) = cli.precision_bits {
            cfg.precision_bits = bits;
        }
        if let Err(e) = cfg.validate() {
            attempted += alphas.len();
            eprintln!("warning: skipping n={n}: {e}");
            continue;
        }
        for alpha in &alphas {
            attempted += 1;
            let alpha_f = alpha.to_f64().unwrap_or(f64::NAN);
            if !alpha_f.is_finite() {
                eprintln!(
                    "warning: skipping n={n} alpha={}: not representable as f64",
                    report::fmt_rational(alpha)
                );
                continue;
            }
            match estimate_tail(&cfg, alpha_f, side) {
                Ok(est) => rep.row(vec![
                    n.to_string(),
                    report::fmt_rational(alpha),
                    side.to_string(),
                    report::fmt_f64(est.p_hat),
                    report::fmt_f64(est.stderr),
                    report::fmt_f64(est.ci95.0),
                    report::fmt_f64(est.ci95.1),
                    est.hits.to_string(),
                    est.samples.to_string(),
                    cli.seed.to_string(),
                    est.empirical_rate
                        .map(report::fmt_f64)
                        .unwrap_or_default(),
                ]),
                Err(e) => eprintln!(
                    "warning: skipping n={n} alpha={}: {e}",
                    report::fmt_rational(alpha)
                ),
            }
        }
    }
    if rep.is_empty() && attempted > 0 {
        return Err("no monte carlo cell could be evaluated".to_string());
    }
    Ok((rep, EXIT_OK))
}

// ---------------------------------------------------------------------------
// pressure
// ---------------------------------------------------------------------------

const PRESSURE_COLUMNS: &[&str] = &["t", "pressure", "derivative", "lambda", "iters"];

fn cmd_pressure(cli: &Cli, t_raw: &str) -> Result<(Report, u8), String> {
    let ts = parse::parse_grid(t_raw).map_err(|e| e.to_string())?;
    let solver = PressureSolver::new(Default::default());

    let mut rep = Report::new("pressure", PRESSURE_COLUMNS);
    rep.kv("t", t_raw.trim());
    push_globals(&mut rep, cli, None);

    let mut attempted = 0usize;
    for t in &ts {
        attempted += 1;
        let t_f = t.to_f64().unwrap_or(f64::NAN);
        let outcome = solver
            .pressure(t_f)
            .and_then(|pv| solver.pressure_derivative(t_f).map(|d| (pv, d)));
        match outcome {
            Ok((pv, d)) => rep.row(vec![
                report::fmt_rational(t),
                report::fmt_f64(pv.value),
                report::fmt_f64(d),
                report::fmt_f64(pv.lambda),
                pv.iters.to_string(),
            ]),
            Err(e) => eprintln!("warning: skipping t={}: {e}", report::fmt_rational(t)),
        }
    }
    if rep.is_empty() && attempted > 0 {
        return Err("no pressure point could be evaluated".to_string());
    }
    Ok((rep, EXIT_OK))
}

// ---------------------------------------------------------------------------
// rate and figure1
// ---------------------------------------------------------------------------

const RATE_COLUMNS: &[&str] = &[
    "alpha",
    "t_alpha",
    "b_alpha",
    "I_alpha",
    "I_prime",
    "pressure_at_t",
    "solver_iters",
    "refinement_delta",
];

/// The α grid behind `figure1` and the default `rate` table: dense where
/// the curve bends, log-spaced approaches to the vertical tangent at
/// 2·ln φ, the exact minimum point 2γ, and a far right edge where the
/// slope has settled near 1/2.
fn reference_grid() -> Vec<f64> {
    let am = gauss_ldp::min_growth_rate();
    let mut grid = vec![am + 1e-6, am + 1e-5, am + 1e-4];
    for tenths in 10..=60 {
        grid.push(tenths as f64 / 10.0);
    }
    grid.push(gauss_ldp::khinchin_levy());
    grid.extend([7.0, 8.0, 10.0, 12.0, 16.0, 20.0, 30.0, 40.0, 50.0]);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

/// Solve the rate point for each α, warm-starting each solve from the
/// previous parameter. Failures are reported and skipped.
fn rate_rows(solver: &PressureSolver, alphas: &[f64], rep: &mut Report) -> Vec<(f64, RatePoint)> {
    let mut points = Vec::new();
    let mut warm = None;
    for &alpha in alphas {
        match solver.rate_point(alpha, warm) {
            Ok(p) => {
                warm = Some(p.t_alpha);
                rep.row(vec![
                    report::fmt_f64(p.alpha),
                    report::fmt_f64(p.t_alpha),
                    report::fmt_f64(p.b_alpha),
                    report::fmt_f64(p.rate),
                    report::fmt_f64(p.rate_prime),
                    report::fmt_f64(p.pressure_at_t),
                    p.solver_iters.to_string(),
                    report::fmt_f64(p.refinement_delta),
                ]);
                points.push((alpha, p));
            }
            Err(e) => eprintln!("warning: skipping alpha={alpha}: {e}"),
        }
    }
    points
}

fn cmd_rate(cli: &Cli, alpha_raw: Option<&str>) -> Result<(Report, u8), String> {
    let alphas: Vec<f64> = match alpha_raw {
        Some(s) => {
            let grid = parse::parse_grid(s).map_err(|e| e.to_string())?;
            grid.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect()
        }
        None => reference_grid(),
    };
    let solver = PressureSolver::new(Default::default());

    let mut rep = Report::new("rate", RATE_COLUMNS);
    rep.kv("alpha", alpha_raw.map(str::trim).unwrap_or("default"));
    push_globals(&mut rep, cli, None);

    let points = rate_rows(&solver, &alphas, &mut rep);
    if points.is_empty() && !alphas.is_empty() {
        return Err("no rate point could be evaluated".to_string());
    }
    Ok((rep, EXIT_OK))
}

fn cmd_figure1(cli: &Cli) -> Result<(Report, u8), String> {
    let grid = reference_grid();
    let solver = PressureSolver::new(Default::default());

    let mut rep = Report::new("figure1", RATE_COLUMNS);
    push_globals(&mut rep, cli, None);
    // The three annotated limits of the curve.
    rep.kv("two_gamma", report::fmt_f64(gauss_ldp::khinchin_levy()));
    rep.kv("alpha_min", report::fmt_f64(gauss_ldp::min_growth_rate()));
    rep.kv(
        "rate_at_alpha_min",
        report::fmt_f64(gauss_ldp::min_growth_rate()),
    );
    rep.kv("right_slope_limit", report::fmt_f64(0.5));

    let points = rate_rows(&solver, &grid, &mut rep);
    if points.is_empty() {
        return Err("no rate point could be evaluated".to_string());
    }

    let mut all_pass = true;
    for (name, pass) in figure1_checks(&points) {
        rep.kv(name, if pass { "pass" } else { "fail" });
        all_pass &= pass;
    }
    Ok((
        rep,
        if all_pass { EXIT_OK } else { EXIT_BOUND_VIOLATION },
    ))
}

/// Shape checks on the computed curve: decreasing-then-increasing with the
/// zero minimum exactly at 2γ, a slope below −10 already at the grid point
/// nearest 2·ln φ + 1e-3, and slope within 0.05 of 1/2 at the right edge.
fn figure1_checks(points: &[(f64, RatePoint)]) -> Vec<(&'static str, bool)> {
    let two_gamma = gauss_ldp::khinchin_levy();
    let target = gauss_ldp::min_growth_rate() + 1e-3;
    let last = points.len() - 1;

    let argmin = (0..points.len())
        .min_by(|&a, &b| points[a].1.rate.partial_cmp(&points[b].1.rate).unwrap())
        .unwrap();
    let unimodal = (0..argmin).all(|j| points[j + 1].1.rate <= points[j].1.rate + 1e-12)
        && (argmin..last).all(|j| points[j + 1].1.rate >= points[j].1.rate - 1e-12);
    let min_at_two_gamma =
        (points[argmin].0 - two_gamma).abs() < 1e-9 && points[argmin].1.rate.abs() <= 1e-8;
    let nearest = points
        .iter()
        .min_by(|a, b| {
            (a.0 - target)
                .abs()
                .partial_cmp(&(b.0 - target).abs())
                .unwrap()
        })
        .unwrap();
    let steep = nearest.1.rate_prime < -10.0;
    let right = (points[last].1.rate_prime - 0.5).abs() <= 0.05;

    vec![
        ("check_unimodal", unimodal),
        ("check_min_at_two_gamma", min_at_two_gamma),
        ("check_steep_near_alpha_min", steep),
        ("check_right_slope", right),
    ]
}

// ---------------------------------------------------------------------------
// verify-bound
// ---------------------------------------------------------------------------

fn cmd_verify_bound(
    cli: &Cli,
    n_raw: &str,
    alpha_raw: &str,
    mode_raw: &str,
    samples: u64,
) -> Result<(Report, u8), String> {
    let depths = parse::parse_depths(n_raw).map_err(|e| e.to_string())?;
    let alphas = parse::parse_grid(alpha_raw).map_err(|e| e.to_string())?;
    let mode: verify::VerifyMode = mode_raw.parse()?;
    let args = verify::VerifyArgs {
        depths,
        alphas,
        mode,
        samples,
        seed: cli.seed,
        budget: cli.budget,
        workers: cli.workers,
    };
    let (mut rep, exit) = verify::run(&args)?;
    rep.kv("n", n_raw.trim());
    rep.kv("alpha", alpha_raw.trim());
    Ok((rep, exit as u8))
}
