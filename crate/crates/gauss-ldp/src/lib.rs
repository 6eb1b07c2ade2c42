//! gauss-ldp: a numerical laboratory for the growth of continued-fraction
//! denominators q_n under the Gauss map.
//!
//! The library provides four pillars:
//!
//! * [`cf`] — exact continued-fraction arithmetic (digit expansion,
//!   convergents, cylinder intervals, orbits).
//! * [`tail`] — exact tail probabilities of (2/n)·log q_n under Lebesgue
//!   measure, by certified integer thresholds and pruned cylinder
//!   enumeration.
//! * [`thermo`] — the pressure function of the Gauss-map transfer operator
//!   and the large-deviation rate function obtained from it by Legendre
//!   transform.
//! * [`mc`] — reproducible Monte-Carlo estimates of the same tails, with
//!   exact dyadic sampling.
//!
//! The [`parse`], [`verify`], and [`report`] modules hold the CLI-facing
//! input grammars, the bound-verification harness that ties the exact and
//! asymptotic pillars together, and the CSV writers.

pub mod cf;
pub mod cheb;
pub mod mc;
pub mod real;
pub mod tail;
pub mod thermo;

/// π²/(6·log 2) ≈ 2.3731: the almost-sure limit of (2/n)·log q_n
/// (twice the Lévy constant). Computed from the closed form, never from a
/// stored decimal.
pub fn khinchin_levy() -> f64 {
    std::f64::consts::PI * std::f64::consts::PI / (6.0 * std::f64::consts::LN_2)
}

/// 2·log((1+√5)/2) ≈ 0.9624: the minimal growth rate of (2/n)·log q_n,
/// attained along the golden-ratio orbit (all digits 1). Left edge of the
/// rate-function domain.
pub fn min_growth_rate() -> f64 {
    2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

/// log-scale distortion allowance used by the deviation windows and the
/// prefactor C_α = exp(16·(|I′(α)|+1)): cylinder-to-interval comparisons
/// are exact up to a factor e^±16.
pub const DISTORTION_LOG_BOUND: f64 = 16.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_closed_forms() {
        assert!((khinchin_levy() - 2.373_138_220_8).abs() < 1e-9);
        assert!((min_growth_rate() - 0.962_423_650_1).abs() < 1e-9);
        // 2γ is strictly above the window centre of the lower regime.
        assert!(khinchin_levy() > min_growth_rate());
    }
}
