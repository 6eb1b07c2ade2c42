//! Number-spec parser: must never panic, and values that format back into
//! an accepted literal must round-trip exactly.

#![no_main]

use gauss_ldp_cli::parse::{self, NumberSpec, MAX_DIGITS};
use gauss_ldp_cli::report;
use libfuzzer_sys::fuzz_target;
use num_traits::Signed;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse::parse_number(text) else {
        return;
    };
    let NumberSpec::Rational(r) = spec else {
        return;
    };
    // Reduced form, sign carried by the numerator.
    assert!(r.denom().is_positive());
    let printed = report::fmt_rational(&r);
    // The formatter may exceed the parser's digit cap for extreme
    // exponents; inside the cap the round trip must be exact.
    let digits = r.numer().abs().to_string().len() + r.denom().to_string().len();
    if digits <= MAX_DIGITS {
        match parse::parse_number(&printed) {
            Ok(NumberSpec::Rational(back)) => assert_eq!(back, r, "{printed}"),
            other => panic!("reparse of {printed:?} gave {other:?}"),
        }
    }
});
