//! Depth-list parser: must never panic and every accepted depth must be
//! inside 1..=MAX_DEPTH with the total list length capped.

#![no_main]

use gauss_ldp_cli::parse::{self, MAX_DEPTH, MAX_GRID_LEN};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(depths) = parse::parse_depths(text) else {
        return;
    };
    assert!(!depths.is_empty());
    assert!(depths.len() <= MAX_GRID_LEN);
    for n in depths {
        assert!((1..=MAX_DEPTH).contains(&n));
    }
});
