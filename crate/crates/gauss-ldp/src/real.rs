//! Certified real-number scalars.
//!
//! Everything downstream that must make an exact decision — digit extraction
//! for irrational inputs, integer thresholds of the form `ceil(exp(r))` —
//! goes through the rational enclosures in this module. A decision is only
//! committed once both interval endpoints agree on it, so results are
//! independent of floating-point rounding. Floating point is used only where
//! a relative error of a few ulps is harmless (logarithms of big integers,
//! compensated accumulation of many f64 terms).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fraction bits used by the first attempt of [`floor_exp`]/[`ceil_exp`].
const EXP_BASE_BITS: u64 = 128;

/// Hard cap on precision escalation inside [`floor_exp`]/[`ceil_exp`].
const EXP_MAX_BITS: u64 = 8192;

/// An integer-threshold decision could not be certified even at the maximum
/// working precision. For rational exponents this can only happen when the
/// exponential is astronomically close to an integer, which the
/// Lindemann–Weierstrass theorem rules out for nonzero rational arguments;
/// the error exists so that the impossibility is checked, not assumed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("could not certify an integer threshold at {bits} fraction bits")]
pub struct PrecisionError {
    pub bits: u64,
}

/// 2^bits as a `BigUint`.
pub fn pow2(bits: u64) -> BigUint {
    BigUint::one() << bits
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A real input to the expansion routines: an exact rational, or one of the
/// built-in quadratic irrationals with enclosures at any requested precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealInput {
    Rational(BigRational),
    /// (√5 − 1)/2 ≈ 0.618…, the reciprocal golden ratio; all digits 1.
    Golden,
    /// √2 − 1 ≈ 0.4142…; all digits 2.
    Sqrt2MinusOne,
}

impl RealInput {
    /// Rational interval `[lo, hi]` containing the value, of width ≤ 2^−bits.
    /// For `Rational` the interval is the point itself.
    pub fn enclosure(&self, bits: u64) -> (BigRational, BigRational) {
        match self {
            RealInput::Rational(r) => (r.clone(), r.clone()),
            RealInput::Golden => {
                // s = isqrt(5·4^bits) puts √5·2^bits in [s, s+1], hence
                // (√5 − 1)/2 in [(s − 2^bits)/2^(bits+1), (s + 1 − 2^bits)/2^(bits+1)].
                let s = (BigUint::from(5u8) << (2 * bits)).sqrt();
                let unit = pow2(bits);
                let den = pow2(bits + 1);
                (
                    ratio(&s - &unit, den.clone()),
                    ratio(&s + BigUint::one() - unit, den),
                )
            }
            RealInput::Sqrt2MinusOne => {
                // s = isqrt(2·4^bits) puts √2·2^bits in [s, s+1].
                let s = (BigUint::from(2u8) << (2 * bits)).sqrt();
                let unit = pow2(bits);
                let den = pow2(bits);
                (
                    ratio(&s - &unit, den.clone()),
                    ratio(&s + BigUint::one() - unit, den),
                )
            }
        }
    }

    /// The exact rational value, if this input is rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            RealInput::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Best-effort f64 value (midpoint of a 128-bit enclosure for the
    /// irrational constants). For reporting only; never used for decisions.
    pub fn to_f64(&self) -> f64 {
        match self {
            RealInput::Rational(r) => rational_to_f64(r),
            _ => {
                let (lo, hi) = self.enclosure(128);
                rational_to_f64(&((lo + hi) / BigRational::from_integer(2.into())))
            }
        }
    }

    /// Canonical spelling for report headers ("golden", "sqrt2m1", or "p/q").
    pub fn describe(&self) -> String {
        match self {
            RealInput::Rational(r) => format!("{}/{}", r.numer(), r.denom()),
            RealInput::Golden => "golden".to_owned(),
            RealInput::Sqrt2MinusOne => "sqrt2m1".to_owned(),
        }
    }
}

/// Certified enclosure of `exp(r)` for rational `r ≥ 0`: returns `(lo, hi)`
/// with `lo ≤ exp(r) ≤ hi`, both dyadic with denominator 2^frac_bits.
///
/// Argument halving brings the exponent to `y = r/2^k ≤ 1/2`; the Taylor
/// series of `exp(y)` is summed in fixed point with directed rounding (every
/// operation on the lower chain rounds down, every operation on the upper
/// chain rounds up, and the series remainder `Σ_{j>J} y^j/j! ≤ 2·y^{J+1}/(J+1)!`
/// is added to the upper chain); finally the enclosure is squared `k` times,
/// again with directed rounding. Monotonicity of each step makes the interval
/// rigorous without any global error analysis.
pub fn exp_enclosure(r: &BigRational, frac_bits: u64) -> (BigRational, BigRational) {
    assert!(!r.is_negative(), "exp_enclosure requires r >= 0");
    if r.is_zero() {
        return (BigRational::one(), BigRational::one());
    }

    // Smallest k with r ≤ 2^(k−1), so that y = r/2^k ≤ 1/2.
    let mut k = 0u64;
    let mut cap = BigRational::new(BigInt::one(), BigInt::from(2));
    while *r > cap {
        cap = cap * BigRational::from_integer(2.into());
        k += 1;
    }

    let scale = pow2(frac_bits);
    // Scaled bounds for y: y·2^frac_bits ∈ [y_lo, y_hi].
    let num = r.numer().to_biguint().expect("positive rational") * &scale;
    let den = r.denom().to_biguint().expect("positive denominator") << k;
    let y_lo = &num / &den;
    let y_hi = (&num + &den - BigUint::one()) / &den;

    // Term count: stop once the remainder bound drops below 2^-(frac_bits+8).
    // t_{J+1} ≤ (1/2)^{J+1} / (J+1)!.
    let mut terms = 1usize;
    let mut log2_fact = 0.0f64;
    loop {
        log2_fact += ((terms + 1) as f64).log2();
        if (terms as f64 + 1.0) + log2_fact > frac_bits as f64 + 8.0 {
            break;
        }
        terms += 1;
    }

    // Directed Taylor summation, all quantities scaled by 2^frac_bits.
    let mut sum_lo = BigUint::zero();
    let mut term_lo = scale.clone();
    let mut sum_hi = BigUint::zero();
    let mut term_hi = scale.clone();
    for j in 0..=terms {
        sum_lo += &term_lo;
        sum_hi += &term_hi;
        let div = &scale * BigUint::from(j as u64 + 1);
        term_lo = (&term_lo * &y_lo) / &div;
        term_hi = ((&term_hi * &y_hi) + &div - BigUint::one()) / &div;
    }
    // Geometric remainder bound (y ≤ 1/2), plus two ulps of slack.
    sum_hi += (&term_hi << 1) + BigUint::from(2u8);

    // k certified squarings.
    let mut lo = sum_lo;
    let mut hi = sum_hi;
    for _ in 0..k {
        lo = (&lo * &lo) / &scale;
        hi = ((&hi * &hi) + &scale - BigUint::one()) / &scale;
    }
    (ratio(lo, scale.clone()), ratio(hi, scale))
}

/// Certified `floor(exp(r))` for rational `r ≥ 0`, escalating precision until
/// both enclosure endpoints agree on the floor.
pub fn floor_exp(r: &BigRational) -> Result<BigUint, PrecisionError> {
    certified_exp_int(r, false)
}

/// Certified `ceil(exp(r))` for rational `r ≥ 0`.
pub fn ceil_exp(r: &BigRational) -> Result<BigUint, PrecisionError> {
    certified_exp_int(r, true)
}

fn certified_exp_int(r: &BigRational, ceil: bool) -> Result<BigUint, PrecisionError> {
    let mut bits = EXP_BASE_BITS;
    loop {
        let (lo, hi) = exp_enclosure(r, bits);
        let (a, b) = if ceil {
            (lo.ceil(), hi.ceil())
        } else {
            (lo.floor(), hi.floor())
        };
        if a == b {
            return Ok(a
                .to_integer()
                .to_biguint()
                .expect("exp of a nonnegative argument is >= 1"));
        }
        if bits >= EXP_MAX_BITS {
            return Err(PrecisionError { bits });
        }
        bits *= 2;
    }
}

/// Natural log of a positive big integer, accurate to f64 roundoff.
/// Uses the top 63 bits as a mantissa plus `bits·ln 2`, so it never overflows.
pub fn ln_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "ln of zero");
    let bits = n.bits();
    if bits <= 63 {
        (n.to_u64().expect("fits in u64") as f64).ln()
    } else {
        let shift = bits - 63;
        let top = (n >> shift).to_u64().expect("63-bit mantissa") as f64;
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive rational, accurate to f64 roundoff.
pub fn ln_rational(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "ln of a non-positive rational");
    let num = r.numer().to_biguint().expect("positive");
    let den = r.denom().to_biguint().expect("positive");
    ln_biguint(&num) - ln_biguint(&den)
}

/// f64 value of a rational, correct to a few ulps even when numerator and
/// denominator individually overflow f64. Magnitudes beyond the f64 range
/// round to 0 or ±∞ as appropriate.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().to_biguint().or_else(|| (-r.numer()).to_biguint());
    let num = num.expect("nonzero numerator");
    let den = r.denom().to_biguint().expect("positive denominator");

    // Reduce both operands to ≤ 96 bits, tracking the shifted-out exponent.
    let nb = num.bits();
    let db = den.bits();
    let nshift = nb.saturating_sub(96);
    let dshift = db.saturating_sub(96);
    let ntop = (&num >> nshift).to_f64().expect("96-bit value");
    let dtop = (&den >> dshift).to_f64().expect("96-bit value");
    let exp = nshift as i64 - dshift as i64;
    sign * ldexp(ntop / dtop, exp)
}

/// x·2^e with saturation to 0 / ±∞ outside the f64 range.
fn ldexp(x: f64, e: i64) -> f64 {
    if e == 0 || x == 0.0 || !x.is_finite() {
        return x;
    }
    // Apply in chunks to avoid powi overflow on the intermediate factor.
    let mut v = x;
    let mut rem = e;
    while rem != 0 {
        let step = rem.clamp(-900, 900);
        v *= 2f64.powi(step as i32);
        rem -= step;
        if v == 0.0 || !v.is_finite() {
            return v;
        }
    }
    v
}

/// Neumaier-compensated f64 accumulator: the running error of each addition
/// is kept in a correction term, so sums of n terms lose O(1) ulps instead
/// of O(n).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    correction: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.correction
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exp_enclosure_brackets_f64_exp() {
        for (n, d) in [(1i64, 2i64), (1, 1), (3, 1), (7, 3), (12, 1), (54, 1), (1, 1000)] {
            let r = rat(n, d);
            let (lo, hi) = exp_enclosure(&r, 128);
            let x = (n as f64 / d as f64).exp();
            let lo_f = rational_to_f64(&lo);
            let hi_f = rational_to_f64(&hi);
            assert!(lo_f <= x * (1.0 + 1e-12), "lo {} > exp {}", lo_f, x);
            assert!(hi_f >= x * (1.0 - 1e-12), "hi {} < exp {}", hi_f, x);
            let width = rational_to_f64(&(&hi - &lo));
            assert!(
                width <= x * 1e-30 + 1e-30,
                "enclosure too wide: {} at exp({})",
                width,
                n as f64 / d as f64
            );
        }
    }

    #[test]
    fn floor_exp_certifies_known_integers() {
        // floor(e^1) = 2, floor(e^12) = 162754, ceil(e^12) = 162755.
        assert_eq!(floor_exp(&rat(1, 1)).unwrap(), BigUint::from(2u32));
        assert_eq!(floor_exp(&rat(12, 1)).unwrap(), BigUint::from(162_754u32));
        assert_eq!(ceil_exp(&rat(12, 1)).unwrap(), BigUint::from(162_755u32));
        assert_eq!(floor_exp(&rat(0, 1)).unwrap(), BigUint::one());
        assert_eq!(ceil_exp(&rat(0, 1)).unwrap(), BigUint::one());
    }

    #[test]
    fn floor_exp_resolves_near_integer_arguments() {
        // r = 6931471805599453/10^16 is a hair below ln 2; e^r must floor to 1.
        let r = BigRational::new(
            BigInt::from(6_931_471_805_599_453i64),
            BigInt::from(10_000_000_000_000_000i64),
        );
        assert_eq!(floor_exp(&r).unwrap(), BigUint::one());
        assert_eq!(ceil_exp(&r).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn golden_enclosure_is_tight_and_ordered() {
        let x = RealInput::Golden;
        let (lo, hi) = x.enclosure(200);
        assert!(lo < hi);
        let width = &hi - &lo;
        assert!(width <= BigRational::new(BigInt::one(), BigInt::from(pow2(200))));
        let mid = rational_to_f64(&lo);
        let expected = (5f64.sqrt() - 1.0) / 2.0;
        assert!((mid - expected).abs() < 1e-15, "golden ≈ {}", mid);
    }

    #[test]
    fn sqrt2m1_enclosure_matches_f64() {
        let x = RealInput::Sqrt2MinusOne;
        let (lo, hi) = x.enclosure(128);
        let expected = 2f64.sqrt() - 1.0;
        assert!(rational_to_f64(&lo) <= expected + 1e-15);
        assert!(rational_to_f64(&hi) >= expected - 1e-15);
    }

    #[test]
    fn ln_biguint_handles_huge_values() {
        // ln(2^1000) = 1000·ln 2.
        let n = BigUint::one() << 1000;
        let expected = 1000.0 * std::f64::consts::LN_2;
        assert!((ln_biguint(&n) - expected).abs() < 1e-9);
        // Small values agree with f64 ln exactly.
        assert_eq!(ln_biguint(&BigUint::from(7u32)), 7f64.ln());
    }

    #[test]
    fn rational_to_f64_handles_huge_ratios() {
        let big = BigInt::from(10u32).pow(400);
        let r = BigRational::new(big.clone() * 3, big);
        assert!((rational_to_f64(&r) - 3.0).abs() < 1e-12);
        let tiny = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(400));
        assert_eq!(rational_to_f64(&tiny), 0.0);
        let neg = BigRational::from_f64(-0.375).unwrap();
        assert_eq!(rational_to_f64(&neg), -0.375);
    }

    #[test]
    fn compensated_sum_beats_naive_accumulation() {
        // Σ 0.1 over 10^6 terms: naive drift is ~1e-8 relative; compensated
        // should be exact to the final rounding.
        let mut acc = CompensatedSum::new();
        for _ in 0..1_000_000 {
            acc.add(0.1);
        }
        assert!((acc.total() - 100_000.0).abs() < 1e-9);
    }
}
