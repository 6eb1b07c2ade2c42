//! Sample-count parser: must never panic; accepted counts are positive and
//! bounded by 1e12, and plain decimal integers round-trip exactly.

#![no_main]

use gauss_ldp_cli::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(count) = parse::parse_count(text) else {
        return;
    };
    assert!((1..=1_000_000_000_000).contains(&count));
    assert_eq!(parse::parse_count(&count.to_string()), Ok(count));
});
