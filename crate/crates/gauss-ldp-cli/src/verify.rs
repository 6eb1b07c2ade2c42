//! The `verify-bound` subcommand: check measured tail probabilities against
//! the theoretical envelope C_α·e^{−n·I(α)}.
//!
//! The inequality is only guaranteed on the windows
//!   upper:  α > 2γ + 16/n,
//!   lower:  2·ln φ < α < 2γ − 16/n,
//! so each row records whether the cell is inside its window. A violation
//! by an *exact* in-window measure is a hard failure (exit code 1); Monte
//! Carlo rows compare the upper confidence limit and are advisory only.

use crate::report::{self, Report};
use gauss_ldp::mc::{estimate_tail, McConfig};
use gauss_ldp::tail::{exact_tail, EnumLimits, TailQuery, TailSide};
use gauss_ldp::thermo::PressureSolver;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Empirical enumeration-cost exponents measured on this implementation:
/// lower-tail node counts grow like e^{0.972·α·n}, upper-tail ones like
/// e^{α·n}. Used only to pick exact vs Monte Carlo in auto mode.
const LOWER_COST_RATE: f64 = 0.972;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Auto,
    Exact,
    Mc,
}

impl std::str::FromStr for VerifyMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(VerifyMode::Auto),
            "exact" => Ok(VerifyMode::Exact),
            "mc" => Ok(VerifyMode::Mc),
            other => Err(format!("mode must be auto, exact, or mc, got '{other}'")),
        }
    }
}

pub struct VerifyArgs {
    pub depths: Vec<usize>,
    pub alphas: Vec<BigRational>,
    pub mode: VerifyMode,
    pub samples: u64,
    pub seed: u64,
    pub budget: u64,
    pub workers: usize,
}

pub const COLUMNS: &[&str] = &[
    "n", "alpha", "side", "mode", "measure", "I_alpha", "I_prime", "C_alpha",
    "bound", "in_window", "pass",
];

/// Run the cross product of depths × alphas. Returns the report and the
/// process exit code (0 clean, 1 if an exact in-window cell violates the
/// bound). Rows that cannot be evaluated are skipped with a warning; if
/// every cell is skipped the caller should treat the run as operational
/// failure.
pub fn run(args: &VerifyArgs) -> Result<(Report, i32), String> {
    let solver = PressureSolver::new(Default::default());
    let two_gamma = gauss_ldp::khinchin_levy();
    let alpha_min = gauss_ldp::min_growth_rate();

    let mut report = Report::new("verify-bound", COLUMNS);
    report.kv("mode", format!("{:?}", args.mode).to_lowercase());
    report.kv("samples", args.samples);
    report.kv("seed", args.seed);
    report.kv("budget", args.budget);
    report.kv("workers", args.workers);
    report.kv("generator", gauss_ldp::mc::GENERATOR);

    let mut exit = 0;
    let mut attempted = 0usize;
    let mut warm: Option<f64> = None;

    for alpha in &args.alphas {
        let alpha_f = alpha.to_f64().unwrap_or(f64::NAN);
        attempted += args.depths.len();
        if !(alpha_f.is_finite() && alpha_f > alpha_min) {
            eprintln!(
                "warning: skipping alpha={}: rate function undefined at or below 2·ln φ ≈ {alpha_min:.6}",
                report::fmt_rational(alpha)
            );
            continue;
        }
        let point = match solver.rate_point(alpha_f, warm) {
            Ok(p) => p,
            Err(e) => {
                eprintln!(
                    "warning: skipping alpha={}: rate solve failed: {e}",
                    report::fmt_rational(alpha)
                );
                continue;
            }
        };
        warm = Some(point.t_alpha);
        let c_alpha = (gauss_ldp::DISTORTION_LOG_BOUND * (point.rate_prime.abs() + 1.0)).exp();
        let side = if alpha_f > two_gamma {
            TailSide::Upper
        } else {
            TailSide::Lower
        };

        for &n in &args.depths {
            let bound = c_alpha * (-(n as f64) * point.rate).exp();
            let in_window = match side {
                TailSide::Upper => {
                    alpha_f > two_gamma + gauss_ldp::DISTORTION_LOG_BOUND / n as f64
                }
                TailSide::Lower => {
                    alpha_f < two_gamma - gauss_ldp::DISTORTION_LOG_BOUND / n as f64
                }
            };

            let cost_rate = match side {
                TailSide::Lower => LOWER_COST_RATE * alpha_f,
                TailSide::Upper => alpha_f,
            };
            let predicted_nodes = (cost_rate * n as f64).exp();
            let use_exact = match args.mode {
                VerifyMode::Exact => true,
                VerifyMode::Mc => false,
                VerifyMode::Auto => predicted_nodes <= args.budget as f64,
            };

            let cell = if use_exact {
                exact_cell(n, alpha, side, args).or_else(|msg| {
                    if args.mode == VerifyMode::Auto {
                        eprintln!("warning: n={n} alpha={}: {msg}; falling back to monte carlo",
                            report::fmt_rational(alpha));
                        mc_cell(n, alpha_f, side, args)
                    } else {
                        Err(msg)
                    }
                })
            } else {
                mc_cell(n, alpha_f, side, args)
            };

            let (mode_str, measure) = match cell {
                Ok(pair) => pair,
                Err(msg) => {
                    eprintln!(
                        "warning: skipping n={n} alpha={}: {msg}",
                        report::fmt_rational(alpha)
                    );
                    continue;
                }
            };

            let pass = measure <= bound;
            if !pass && in_window && mode_str == "exact" {
                exit = 1;
            }
            report.row(vec![
                n.to_string(),
                report::fmt_rational(alpha),
                side.to_string(),
                mode_str.to_string(),
                report::fmt_f64(measure),
                report::fmt_f64(point.rate),
                report::fmt_f64(point.rate_prime),
                report::fmt_f64(c_alpha),
                report::fmt_f64(bound),
                in_window.to_string(),
                if pass { "yes" } else { "no" }.to_string(),
            ]);
        }
    }

    if report.is_empty() && attempted > 0 {
        return Err("no cell could be evaluated".to_string());
    }
    Ok((report, exit))
}

fn exact_cell(
    n: usize,
    alpha: &BigRational,
    side: TailSide,
    args: &VerifyArgs,
) -> Result<(&'static str, f64), String> {
    let query = TailQuery {
        n,
        alpha: alpha.clone(),
        side,
    };
    let limits = EnumLimits {
        node_budget: args.budget,
        workers: args.workers,
    };
    let result = exact_tail(&query, &limits).map_err(|e| e.to_string())?;
    Ok(("exact", result.measure.to_f64()))
}

fn mc_cell(
    n: usize,
    alpha_f: f64,
    side: TailSide,
    args: &VerifyArgs,
) -> Result<(&'static str, f64), String> {
    let mut cfg = McConfig::new(n, args.samples, args.seed);
    cfg.workers = args.workers;
    let est = estimate_tail(&cfg, alpha_f, side).map_err(|e| e.to_string())?;
    // Conservative comparison point: the upper 95% confidence limit.
    Ok(("mc", est.ci95.1))
}
