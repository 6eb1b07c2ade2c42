//! Replays the checked-in fuzz corpus through the same entry points and
//! invariants the fuzz targets enforce, so every seed stays green under a
//! plain stable-toolchain `cargo test` run.

use gauss_ldp::cf;
use gauss_ldp::tail::Fraction;
use gauss_ldp_cli::{parse, report};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz/corpus")
        .join(target);
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("missing corpus {dir:?}: {e}"))
        .map(|entry| {
            let path = entry.expect("readable dir entry").path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read(&path).expect("readable seed"))
        })
        .collect();
    entries.sort();
    assert!(!entries.is_empty(), "no seeds for {target}");
    entries
}

fn text_seeds(target: &str) -> Vec<(String, String)> {
    corpus(target)
        .into_iter()
        .map(|(name, bytes)| {
            let text = String::from_utf8(bytes)
                .unwrap_or_else(|_| panic!("seed {name} is not utf-8"));
            (name, text)
        })
        .collect()
}

#[test]
fn number_spec_seeds() {
    for (name, text) in text_seeds("number_spec") {
        let Ok(parse::NumberSpec::Rational(r)) = parse::parse_number(&text) else {
            continue;
        };
        assert!(r.denom().is_positive(), "{name}");
        let printed = report::fmt_rational(&r);
        let digits = r.numer().abs().to_string().len() + r.denom().to_string().len();
        if digits <= parse::MAX_DIGITS {
            match parse::parse_number(&printed) {
                Ok(parse::NumberSpec::Rational(back)) => assert_eq!(back, r, "{name}"),
                other => panic!("{name}: reparse of {printed:?} gave {other:?}"),
            }
        }
    }
}

#[test]
fn grid_spec_seeds() {
    for (name, text) in text_seeds("grid_spec") {
        let Ok(grid) = parse::parse_grid(&text) else {
            continue;
        };
        assert!(!grid.is_empty() && grid.len() <= parse::MAX_GRID_LEN, "{name}");
        if text.contains(':') {
            for pair in grid.windows(2).take(64) {
                assert!(pair[0] < pair[1], "{name}: grid must increase");
            }
        }
    }
}

#[test]
fn depth_list_seeds() {
    for (name, text) in text_seeds("depth_list") {
        let Ok(depths) = parse::parse_depths(&text) else {
            continue;
        };
        assert!(!depths.is_empty() && depths.len() <= parse::MAX_GRID_LEN, "{name}");
        for n in depths {
            assert!((1..=parse::MAX_DEPTH).contains(&n), "{name}");
        }
    }
}

#[test]
fn sample_count_seeds() {
    for (name, text) in text_seeds("sample_count") {
        let Ok(count) = parse::parse_count(&text) else {
            continue;
        };
        assert!((1..=1_000_000_000_000).contains(&count), "{name}");
        assert_eq!(parse::parse_count(&count.to_string()), Ok(count), "{name}");
    }
}

#[test]
fn rational_expand_seeds() {
    let word = |bytes: &[u8]| {
        let mut buf = [0u8; 8];
        let take = bytes.len().min(8);
        buf[..take].copy_from_slice(&bytes[..take]);
        u64::from_le_bytes(buf)
    };
    for (name, bytes) in corpus("rational_expand") {
        let num = word(&bytes);
        let den = word(bytes.get(8..).unwrap_or(&[]));
        let depth = (*bytes.get(16).unwrap_or(&0) as usize % 64) + 1;
        if den == 0 {
            continue;
        }
        let x = BigRational::new(num.into(), den.into());
        let result = cf::expand_rational(&x, depth);
        if num == 0 || num >= den {
            assert!(result.is_err(), "{name}");
            continue;
        }
        let expansion = result.unwrap_or_else(|e| panic!("{name}: {e}"));
        if expansion.terminated {
            assert_eq!(cf::value(&expansion.digits), x, "{name}");
        } else {
            assert_eq!(expansion.digits.depth(), depth, "{name}");
        }
    }
}

#[test]
fn decimal_digits_seeds() {
    let pow10 = |k: i64| -> BigRational {
        let p = BigInt::from(10u32).pow(k.unsigned_abs() as u32);
        if k >= 0 {
            BigRational::from_integer(p)
        } else {
            BigRational::new(BigInt::from(1), p)
        }
    };
    for (name, bytes) in corpus("decimal_digits") {
        let n = bytes.len().min(1024);
        let (a, b) = bytes[..n].split_at(n / 2);
        let num = BigUint::from_bytes_be(a);
        let den = BigUint::from_bytes_be(b);
        if den.is_zero() {
            continue;
        }
        let text = report::decimal_30(&Fraction::new(num.clone(), den.clone()));
        if num.is_zero() {
            assert_eq!(text, "0", "{name}");
            continue;
        }
        let (_, exp) = text.split_once('e').unwrap_or_else(|| panic!("{name}: {text}"));
        let e10: i64 = exp.parse().expect("integer exponent");
        // The printed digits must be the true round-half-up expansion:
        // within half an ulp of the exact value.
        let printed = parse::parse_rational(&text).expect("output reparses");
        let exact = BigRational::new(num.into(), den.into());
        let err = (printed - exact).abs();
        assert!(
            err * BigInt::from(2) <= pow10(e10 - 29),
            "{name}: {text} is more than half an ulp off"
        );
    }
}
