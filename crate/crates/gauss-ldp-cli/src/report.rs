//! CSV report writer.
//!
//! Every subcommand emits the same shape: a block of `# key=value` header
//! lines carrying the full input configuration, a column-name line, then
//! data rows. Two runs with identical headers produce byte-identical
//! bodies, except for wall-clock columns (`seconds`), which are
//! measurements, not results.

use gauss_ldp::tail::Fraction;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use std::cmp::Ordering;
use std::io::{self, Write};

/// Significant decimal digits for exact-measure columns.
pub const MEASURE_DIGITS: u32 = 30;
/// Operands above this bit size are truncated to their top bits before the
/// decimal expansion; the discarded part is relatively ~2^-255, eleven
/// orders of magnitude below the last printed digit. Values lying within
/// that sliver of a rounding boundary are detected and redone exactly, so
/// the printed digits are always the true round-half-up expansion.
const TRUNC_BITS: u64 = 256;
/// Final fractions are reduced to lowest terms when the gcd is affordable.
const REDUCE_BITS: u64 = 1 << 20;

pub struct Report {
    header: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        let mut r = Report {
            header: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        };
        r.kv("version", env!("CARGO_PKG_VERSION"));
        r.kv("command", command);
        r
    }

    pub fn kv(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row arity mismatch");
        self.rows.push(cells);
    }

    pub fn write_to(&self, out: &mut impl Write) -> io::Result<()> {
        for (k, v) in &self.header {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Shortest f64 formatting that round-trips (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Exact rational in lowest terms, as "p" or "p/q".
pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Numerator/denominator strings of an exact measure, reduced when cheap.
pub fn fraction_parts(f: &Fraction) -> (String, String) {
    let reduced = f.clone().reduce_if_below(REDUCE_BITS);
    (reduced.num.to_string(), reduced.den.to_string())
}

/// Scientific-notation decimal expansion of an exact fraction, correct to
/// `MEASURE_DIGITS` significant digits (round half up on the last digit).
pub fn decimal_30(f: &Fraction) -> String {
    decimal_sig(f, MEASURE_DIGITS)
}

fn decimal_sig(f: &Fraction, digits: u32) -> String {
    assert!(digits >= 1);
    if f.num.is_zero() {
        return "0".to_string();
    }
    match decimal_core(&f.num, &f.den, digits, TRUNC_BITS) {
        Some(s) => s,
        // The value sits so close to a rounding boundary that the
        // truncated operands cannot decide it; redo without truncation.
        None => decimal_core(&f.num, &f.den, digits, u64::MAX)
            .expect("exact pass is never ambiguous"),
    }
}

fn decimal_core(num: &BigUint, den: &BigUint, digits: u32, trunc_bits: u64) -> Option<String> {
    // Keep only the top `trunc_bits` bits of each operand; track the shifts
    // as a binary exponent. Exact when the operands are small.
    let nb = num.bits();
    let db = den.bits();
    let sn = nb.saturating_sub(trunc_bits);
    let sd = db.saturating_sub(trunc_bits);
    let n = num >> sn;
    let d = den >> sd;
    let truncated = sn > 0 || sd > 0;
    let e2 = sn as i64 - sd as i64; // value ≈ (n/d)·2^e2

    // Decimal exponent e10 = floor(log10 value): float estimate, then an
    // exact fix-up (the estimate is off by at most a few units).
    let log10_est =
        (nb as f64 - db as f64 + e2 as f64) * std::f64::consts::LOG10_2;
    let mut e10 = log10_est.floor() as i64 - 2;
    while value_cmp_pow10(&n, &d, e2, e10 + 1) != Ordering::Less {
        e10 += 1;
    }
    while value_cmp_pow10(&n, &d, e2, e10) == Ordering::Less {
        e10 -= 1;
    }

    // integer = round(value / 10^(e10 − digits + 1)) ∈ [10^(digits−1), 10^digits]
    let k = e10 - digits as i64 + 1;
    let (top, bottom) = cross_scaled(&n, &d, e2, k);
    let mut q = &top / &bottom;
    let r = &top - &q * &bottom;
    let double_r = r * 2u32;
    if truncated {
        // The scaled value X = top/bottom carries a relative truncation
        // error below 2^(3−trunc_bits), so the half-up choice is only
        // trustworthy when X is farther than X·2^(3−trunc_bits) from the
        // tie point q + 1/2 — equivalently, when
        // |2r − bottom|·2^(trunc_bits−4) > 2·top. Anything closer could
        // flip under the discarded bits.
        let margin = if double_r >= bottom {
            &double_r - &bottom
        } else {
            &bottom - &double_r
        };
        if (margin << (trunc_bits - 4)) <= (&top << 1) {
            return None;
        }
    }
    if double_r >= bottom {
        q += 1u32;
    }
    let mut s = q.to_string();
    if s.len() as u32 > digits {
        // Rounding carried 999…9 over to 1000…0: drop the extra zero.
        s.truncate(digits as usize);
        e10 += 1;
    }
    debug_assert_eq!(s.len() as u32, digits);
    Some(if digits == 1 {
        format!("{s}e{e10}")
    } else {
        format!("{}.{}e{}", &s[..1], &s[1..], e10)
    })
}

/// Compare n·2^e2 with d·10^e10 using exact integer arithmetic.
fn value_cmp_pow10(n: &BigUint, d: &BigUint, e2: i64, e10: i64) -> Ordering {
    let mut lhs = n.clone();
    let mut rhs = d.clone();
    if e2 >= 0 {
        lhs <<= e2 as u64;
    } else {
        rhs <<= (-e2) as u64;
    }
    let p10 = BigUint::from(10u32).pow(e10.unsigned_abs() as u32);
    if e10 >= 0 {
        rhs *= p10;
    } else {
        lhs *= p10;
    }
    lhs.cmp(&rhs)
}

/// (n·2^e2) / (d·10^k) written as top/bottom with nonnegative exponents
/// folded into whichever side they belong.
fn cross_scaled(n: &BigUint, d: &BigUint, e2: i64, k: i64) -> (BigUint, BigUint) {
    let mut top = n.clone();
    let mut bottom = d.clone();
    if e2 >= 0 {
        top <<= e2 as u64;
    } else {
        bottom <<= (-e2) as u64;
    }
    let p10 = BigUint::from(10u32).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        bottom *= p10;
    } else {
        top *= p10;
    }
    (top, bottom)
}
