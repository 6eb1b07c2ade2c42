//! Parsing for every textual input the binary accepts: numbers (fractions,
//! decimal strings, named constants), α-grids, and depth lists.
//!
//! All limits exist to keep hostile inputs from allocating absurd amounts
//! of memory or spinning on astronomically long grids; they are far above
//! anything a legitimate query needs.

use gauss_ldp::real::RealInput;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Longest accepted digit run in any integer literal.
pub const MAX_DIGITS: usize = 4096;
/// Largest accepted decimal exponent magnitude ("1e16384" is already a
/// 54 KB integer when expanded).
pub const MAX_EXPONENT: i64 = 16384;
/// Longest accepted grid or depth list.
pub const MAX_GRID_LEN: usize = 100_000;
/// Cap on (points × operand bits) for range grids, so that short range
/// literals cannot demand seconds of big-integer arithmetic. The largest
/// legitimate grids (10^5 machine-word points) sit two orders of
/// magnitude below it.
pub const MAX_GRID_WORK: u64 = 1 << 24;
/// Largest accepted depth in a depth list.
pub const MAX_DEPTH: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("invalid number {0:?}: {1}")]
    BadNumber(String, String),
    #[error("invalid grid {0:?}: {1}")]
    BadGrid(String, String),
    #[error("invalid depth list {0:?}: {1}")]
    BadDepths(String, String),
}

/// A parsed `--x` argument: an exact rational or a supported irrational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumberSpec {
    Rational(BigRational),
    Golden,
    Sqrt2MinusOne,
}

impl NumberSpec {
    pub fn to_real_input(&self) -> RealInput {
        match self {
            NumberSpec::Rational(r) => RealInput::Rational(r.clone()),
            NumberSpec::Golden => RealInput::Golden,
            NumberSpec::Sqrt2MinusOne => RealInput::Sqrt2MinusOne,
        }
    }
}

/// Parse a number spec: named constant, "p/q", or decimal string.
pub fn parse_number(input: &str) -> Result<NumberSpec, ParseError> {
    let s = input.trim();
    match s {
        "" => return Err(ParseError::Empty),
        "golden" => return Ok(NumberSpec::Golden),
        "sqrt2m1" => return Ok(NumberSpec::Sqrt2MinusOne),
        _ => {}
    }
    parse_rational(s).map(NumberSpec::Rational)
}

/// Parse an exact rational: "p/q" with integer p, q or a decimal string
/// with optional sign, point, and exponent ("-12", "3.25", "2.5e-3").
pub fn parse_rational(input: &str) -> Result<BigRational, ParseError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseError::Empty);
    }
    let bad = |msg: &str| ParseError::BadNumber(input.to_string(), msg.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_integer(num).map_err(|m| bad(&format!("numerator: {m}")))?;
        let d = parse_integer(den).map_err(|m| bad(&format!("denominator: {m}")))?;
        if d.is_zero() {
            return Err(bad("denominator is zero"));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(s).map_err(|m| bad(&m))
}

fn parse_integer(input: &str) -> Result<BigInt, String> {
    let s = input.trim();
    let unsigned = s.strip_prefix(['+', '-']).unwrap_or(s);
    if unsigned.is_empty() {
        return Err("missing digits".into());
    }
    if unsigned.len() > MAX_DIGITS {
        return Err(format!("more than {MAX_DIGITS} digits"));
    }
    if !unsigned.bytes().all(|b| b.is_ascii_digit()) {
        return Err("not an integer".into());
    }
    s.parse::<BigInt>().map_err(|e| e.to_string())
}

fn parse_decimal(s: &str) -> Result<BigRational, String> {
    // Split off an exponent part first: "mantissa[e exponent]".
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| "bad exponent".to_string())?;
            if e.abs() > MAX_EXPONENT {
                return Err(format!("exponent magnitude exceeds {MAX_EXPONENT}"));
            }
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err("missing digits".into());
    }
    if int_part.len() + frac_part.len() > MAX_DIGITS {
        return Err(format!("more than {MAX_DIGITS} digits"));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err("not a decimal number".into());
    }
    let joined = format!("{int_part}{frac_part}");
    let mantissa_int = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse::<BigInt>().map_err(|e| e.to_string())?
    };
    // value = sign · mantissa_int · 10^(exp − frac_len)
    let shift = exp - frac_part.len() as i64;
    let scale = BigUint::from(10u32).pow(shift.unsigned_abs() as u32);
    let value = if shift >= 0 {
        BigRational::from_integer(mantissa_int * BigInt::from(scale))
    } else {
        BigRational::new(mantissa_int, BigInt::from(scale))
    };
    Ok(if sign < 0 { -value } else { value })
}

/// Parse an α-grid: "lo:hi:step" (inclusive, exact rational steps) or a
/// comma-separated list of numbers.
pub fn parse_grid(input: &str) -> Result<Vec<BigRational>, ParseError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseError::Empty);
    }
    let bad = |msg: String| ParseError::BadGrid(input.to_string(), msg);
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => {
            let items: Vec<&str> = s.split(',').collect();
            if items.len() > MAX_GRID_LEN {
                return Err(bad(format!("more than {MAX_GRID_LEN} entries")));
            }
            items
                .iter()
                .map(|item| parse_rational(item).map_err(|e| bad(e.to_string())))
                .collect()
        }
        3 => {
            let lo = parse_rational(parts[0]).map_err(|e| bad(format!("lo: {e}")))?;
            let hi = parse_rational(parts[1]).map_err(|e| bad(format!("hi: {e}")))?;
            let step = parse_rational(parts[2]).map_err(|e| bad(format!("step: {e}")))?;
            if !step.is_positive() {
                return Err(bad("step must be positive".into()));
            }
            if hi < lo {
                return Err(bad("hi is below lo".into()));
            }
            // count = floor((hi − lo)/step) + 1, bounded before materializing.
            let count = ((&hi - &lo) / &step).floor().to_integer();
            if count >= BigInt::from(MAX_GRID_LEN) {
                return Err(bad(format!("more than {MAX_GRID_LEN} points")));
            }
            // A short literal like "0:1e16384:3e16379" would otherwise
            // expand into tens of thousands of multi-kilobyte rationals;
            // bound the total materialization work, not just the count.
            let bits = [&lo, &hi, &step]
                .iter()
                .map(|r| r.numer().magnitude().bits() + r.denom().magnitude().bits())
                .max()
                .unwrap_or(0);
            let count_u64 = num_traits::ToPrimitive::to_u64(&count).unwrap_or(u64::MAX);
            if (count_u64 + 1).saturating_mul(bits) > MAX_GRID_WORK {
                return Err(bad("grid is too expensive to materialize".into()));
            }
            let mut out = Vec::new();
            let mut x = lo;
            while x <= hi {
                out.push(x.clone());
                x += &step;
            }
            Ok(out)
        }
        _ => Err(bad("expected lo:hi:step or a comma-separated list".into())),
    }
}

/// Parse a depth list: comma-separated entries, each "n" or "lo..hi"
/// (inclusive).
pub fn parse_depths(input: &str) -> Result<Vec<usize>, ParseError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseError::Empty);
    }
    let bad = |msg: String| ParseError::BadDepths(input.to_string(), msg);
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| bad(format!("bad range start {lo:?}")))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad(format!("bad range end {hi:?}")))?;
            if lo == 0 || hi < lo {
                return Err(bad(format!("bad range {item:?}")));
            }
            if hi > MAX_DEPTH {
                return Err(bad(format!("depth exceeds {MAX_DEPTH}")));
            }
            if out.len() + (hi - lo + 1) > MAX_GRID_LEN {
                return Err(bad(format!("more than {MAX_GRID_LEN} entries")));
            }
            out.extend(lo..=hi);
        } else {
            let n: usize = item.parse().map_err(|_| bad(format!("bad depth {item:?}")))?;
            if n == 0 || n > MAX_DEPTH {
                return Err(bad(format!("depth {n} outside 1..={MAX_DEPTH}")));
            }
            if out.len() + 1 > MAX_GRID_LEN {
                return Err(bad(format!("more than {MAX_GRID_LEN} entries")));
            }
            out.push(n);
        }
    }
    Ok(out)
}

/// Parse a sample count: plain integer or integral scientific notation
/// ("1e6"). Bounded to keep runtimes finite.
pub fn parse_count(input: &str) -> Result<u64, ParseError> {
    let bad = |msg: &str| ParseError::BadNumber(input.to_string(), msg.to_string());
    let r = parse_rational(input)?;
    if !r.is_integer() || !r.is_positive() {
        return Err(bad("expected a positive integer"));
    }
    let max = BigInt::from(1_000_000_000_000u64);
    if r.numer() > &max {
        return Err(bad("count exceeds 1e12"));
    }
    let digits = r.to_integer().to_string();
    digits.parse::<u64>().map_err(|_| bad("count does not fit in 64 bits"))
}
