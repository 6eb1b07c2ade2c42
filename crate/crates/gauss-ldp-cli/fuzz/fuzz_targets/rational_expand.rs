//! Continued-fraction expansion on arbitrary machine-word rationals: the
//! decoder must reject anything outside (0,1), terminate cleanly inside,
//! produce canonical digits, and reconstruct the input exactly.

#![no_main]

use gauss_ldp::cf;
use libfuzzer_sys::fuzz_target;
use num_rational::BigRational;

fuzz_target!(|input: (u64, u64, u8)| {
    let (num, den, d) = input;
    let depth = (d as usize % 64) + 1;
    if den == 0 {
        return;
    }
    let x = BigRational::new(num.into(), den.into());
    let result = cf::expand_rational(&x, depth);
    if num == 0 || num >= den {
        assert!(result.is_err(), "points outside (0,1) must be rejected");
        return;
    }
    let expansion = result.expect("interior rationals expand");
    let digits = expansion.digits;
    let values = digits.values();
    assert!((1..=depth).contains(&digits.depth()));
    assert!(values.iter().all(|&a| a >= 1), "digits are positive");
    if expansion.terminated {
        // Full canonical expansion: reconstructs x, never ends in 1.
        assert!(digits.depth() < depth);
        assert!(*values.last().unwrap() >= 2);
        assert_eq!(cf::value(&digits), x);
    } else {
        assert_eq!(digits.depth(), depth);
        let cyl = cf::cylinder(&digits);
        let (lo, hi) = if cyl.left < cyl.right {
            (cyl.left, cyl.right)
        } else {
            (cyl.right, cyl.left)
        };
        assert!(x >= lo && x <= hi, "point lies in its own cylinder");
    }
});
