//! 30-digit decimal rendering of exact fractions: the output must always
//! have exactly 30 significant digits, reparse cleanly, and sit within
//! half an ulp of the exact value — for operands up to thousands of bits.

#![no_main]

use gauss_ldp::tail::Fraction;
use gauss_ldp_cli::{parse, report};
use libfuzzer_sys::fuzz_target;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn pow10(k: i64) -> BigRational {
    let p = BigInt::from(10u32).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::from(1), p)
    }
}

fuzz_target!(|data: &[u8]| {
    let n = data.len().min(1024);
    let (a, b) = data[..n].split_at(n / 2);
    let num = BigUint::from_bytes_be(a);
    let den = BigUint::from_bytes_be(b);
    if den.is_zero() {
        return;
    }
    let text = report::decimal_30(&Fraction::new(num.clone(), den.clone()));
    if num.is_zero() {
        assert_eq!(text, "0");
        return;
    }
    let (mantissa, exp) = text.split_once('e').expect("exponent present");
    let e10: i64 = exp.parse().expect("integer exponent");
    let lead = mantissa.as_bytes()[0];
    assert!(lead.is_ascii_digit() && lead != b'0', "normalized mantissa");
    let sig = mantissa.bytes().filter(u8::is_ascii_digit).count();
    assert_eq!(sig, 30, "thirty significant digits in {text:?}");

    // Round-half-up to 30 digits: at most half an ulp from the exact value.
    let printed = parse::parse_rational(&text).expect("output reparses");
    let exact = BigRational::new(num.into(), den.into());
    let err = (printed - exact).abs();
    assert!(
        err * BigInt::from(2) <= pow10(e10 - 29),
        "{text} is more than half an ulp off"
    );
});
