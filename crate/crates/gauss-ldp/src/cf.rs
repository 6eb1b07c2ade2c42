//! Exact continued-fraction arithmetic for the Gauss map T(x) = 1/x − ⌊1/x⌋.
//!
//! A point x ∈ (0,1) has digits a_k = ⌊1/T^(k−1)x⌋ ≥ 1 and convergents
//! p_k/q_k given by the recurrences
//!
//! ```text
//! p_k = a_k·p_(k−1) + p_(k−2),   p_0 = 0, p_(−1) = 1,
//! q_k = a_k·q_(k−1) + q_(k−2),   q_0 = 1, q_(−1) = 0.
//! ```
//!
//! The rank-n cylinder of a digit string (a_1, …, a_n) is the interval with
//! endpoints p_n/q_n and (p_n + p_(n−1))/(q_n + q_(n−1)); its Lebesgue
//! measure is exactly 1/(q_n·(q_n + q_(n−1))).
//!
//! Everything here is exact: rational inputs go through integer Euclid, and
//! the built-in irrational constants go through interval Euclid on certified
//! enclosures — a digit is emitted only when both endpoints of the enclosure
//! agree on it.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::real::{ln_biguint, ln_rational, CompensatedSum, RealInput};

/// Hard guard on expansion depth; deeper requests are almost certainly typos
/// and would otherwise allocate unboundedly.
pub const MAX_DEPTH: usize = 1_000_000;

/// Depth above which `log_qn` switches from the f64 ratio recurrence to the
/// exact big-integer recurrence (the two agree to ~1e−15 relative error; the
/// exact path bounds the drift for very deep expansions).
const LOG_QN_EXACT_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfError {
    #[error("input must lie strictly inside (0,1), got {0}")]
    OutsideUnitInterval(String),
    #[error("digit list must be nonempty")]
    EmptyDigits,
    #[error("digit at index {index} must be >= 1")]
    ZeroDigit { index: usize },
    #[error("digit at index {index} does not fit in u64")]
    DigitOverflow { index: usize },
    #[error("requested depth {0} exceeds the maximum {MAX_DEPTH}")]
    DepthExceeded(usize),
    #[error("expansion terminated after {depth} digits but {requested} were requested")]
    Terminated { depth: usize, requested: usize },
    #[error(
        "cannot certify digit {index} at {bits} precision bits; raise --precision-bits"
    )]
    PrecisionExhausted { index: usize, bits: u64 },
    #[error("the Gauss map is undefined at 0")]
    GaussAtZero,
}

/// A validated string of continued-fraction digits (all ≥ 1, nonempty).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digits {
    values: Vec<u64>,
}

impl Digits {
    pub fn new(values: Vec<u64>) -> Result<Self, CfError> {
        if values.is_empty() {
            return Err(CfError::EmptyDigits);
        }
        if values.len() > MAX_DEPTH {
            return Err(CfError::DepthExceeded(values.len()));
        }
        if let Some(index) = values.iter().position(|&a| a == 0) {
            return Err(CfError::ZeroDigit { index });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn depth(&self) -> usize {
        self.values.len()
    }
}

/// One convergent p_k/q_k (always in lowest terms: p_k·q_(k−1) − p_(k−1)·q_k = ±1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub index: usize,
    pub p: BigUint,
    pub q: BigUint,
}

impl Convergent {
    pub fn value(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()))
    }
}

/// A rank-n cylinder: the closure of the set of points whose first n digits
/// equal `digits`. `measure = right − left = 1/(q_n·(q_n + q_(n−1)))` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    pub digits: Digits,
    pub left: BigRational,
    pub right: BigRational,
    pub measure: BigRational,
}

/// Result of a digit expansion. `terminated` is set when the input is
/// rational with a full expansion shorter than the requested depth; in that
/// case `digits` holds the complete (canonical) expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub digits: Digits,
    pub terminated: bool,
}

/// A finite Gauss-map orbit x, Tx, …, T^(n−1)x of a rational point, together
/// with log|DT^n(x)| = Σ_i −2·log(T^i x) (compensated f64).
#[derive(Debug, Clone)]
pub struct Orbit {
    pub points: Vec<BigRational>,
    pub log_deriv: f64,
}

fn check_open_unit_rational(x: &BigRational) -> Result<(), CfError> {
    if x <= &BigRational::zero() || x >= &BigRational::one() {
        return Err(CfError::OutsideUnitInterval(format!(
            "{}/{}",
            x.numer(),
            x.denom()
        )));
    }
    Ok(())
}

/// First `n` continued-fraction digits of a rational x ∈ (0,1) via integer
/// Euclid. If the full expansion has fewer than `n` digits the result is
/// flagged `terminated` and carries the complete expansion, which is
/// canonical (its last digit is ≥ 2).
pub fn expand_rational(x: &BigRational, n: usize) -> Result<Expansion, CfError> {
    check_open_unit_rational(x)?;
    if n == 0 || n > MAX_DEPTH {
        return Err(CfError::DepthExceeded(n));
    }
    let mut num = x.numer().to_biguint().expect("positive numerator");
    let mut den = x.denom().to_biguint().expect("positive denominator");
    let mut values = Vec::with_capacity(n.min(4096));
    let mut terminated = false;
    for index in 0..n {
        if num.is_zero() {
            terminated = true;
            break;
        }
        let (a, rem) = num_integer::Integer::div_rem(&den, &num);
        let a = a.to_u64().ok_or(CfError::DigitOverflow { index })?;
        values.push(a);
        den = std::mem::replace(&mut num, rem);
    }
    Ok(Expansion {
        digits: Digits::new(values)?,
        terminated,
    })
}

/// First `n` digits of a real given by a rational enclosure `[lo, hi]`,
/// via interval Euclid: a digit is emitted only when both endpoints agree on
/// it, otherwise the expansion fails with `PrecisionExhausted` (the `bits`
/// field reports the precision that proved insufficient).
fn expand_enclosure(
    lo: &BigRational,
    hi: &BigRational,
    n: usize,
    bits: u64,
) -> Result<Expansion, CfError> {
    if n == 0 || n > MAX_DEPTH {
        return Err(CfError::DepthExceeded(n));
    }
    if lo <= &BigRational::zero() || hi >= &BigRational::one() || lo > hi {
        return Err(CfError::OutsideUnitInterval(format!(
            "[{}, {}]",
            lo, hi
        )));
    }
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut values = Vec::with_capacity(n);
    for index in 0..n {
        // 1/x is decreasing: 1/x ∈ [1/hi, 1/lo].
        let inv_lo = hi.recip();
        let inv_hi = lo.recip();
        let fl = inv_lo.floor();
        let fh = inv_hi.floor();
        if fl != fh {
            return Err(CfError::PrecisionExhausted { index, bits });
        }
        let a_int = fl.to_integer();
        let a = a_int.to_u64().ok_or(CfError::DigitOverflow { index })?;
        values.push(a);
        let a_rat = BigRational::from_integer(a_int);
        let new_lo = inv_lo - &a_rat;
        let new_hi = inv_hi - &a_rat;
        // If the interval touches 0 the next digit cannot be certified.
        if index + 1 < n && new_lo <= BigRational::zero() {
            return Err(CfError::PrecisionExhausted { index: index + 1, bits });
        }
        lo = new_lo;
        hi = new_hi;
    }
    Ok(Expansion {
        digits: Digits::new(values)?,
        terminated: false,
    })
}

/// First `n` digits of any supported real input. `precision_bits` controls
/// the enclosure width used for the irrational constants (rational inputs
/// ignore it; they are exact at any precision).
pub fn expand(x: &RealInput, n: usize, precision_bits: u64) -> Result<Expansion, CfError> {
    match x {
        RealInput::Rational(r) => expand_rational(r, n),
        _ => {
            let (lo, hi) = x.enclosure(precision_bits);
            expand_enclosure(&lo, &hi, n, precision_bits)
        }
    }
}

/// Convergents p_k/q_k for k = 1..=depth.
pub fn convergents(digits: &Digits) -> Vec<Convergent> {
    let mut out = Vec::with_capacity(digits.depth());
    let mut p_prev = BigUint::one(); // p_(−1)
    let mut p = BigUint::zero(); // p_0
    let mut q_prev = BigUint::zero(); // q_(−1)
    let mut q = BigUint::one(); // q_0
    for (k, &a) in digits.values().iter().enumerate() {
        let p_next = &p * a + &p_prev;
        let q_next = &q * a + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(Convergent {
            index: k + 1,
            p: p.clone(),
            q: q.clone(),
        });
    }
    out
}

/// Final two denominators (q_(n−1), q_n) of a digit string, without storing
/// the intermediate convergents.
pub fn final_denominators(digits: &Digits) -> (BigUint, BigUint) {
    let mut q_prev = BigUint::zero();
    let mut q = BigUint::one();
    for &a in digits.values() {
        let q_next = &q * a + &q_prev;
        q_prev = std::mem::replace(&mut q, q_next);
    }
    (q_prev, q)
}

/// The rank-n cylinder of a digit string, with exact endpoints and measure.
pub fn cylinder(digits: &Digits) -> Cylinder {
    let convs = convergents(digits);
    let n = convs.len();
    let (p_n, q_n) = (&convs[n - 1].p, &convs[n - 1].q);
    // For rank 1 the previous convergent is p_0/q_0 = 0/1.
    let (p_prev, q_prev) = if n >= 2 {
        (convs[n - 2].p.clone(), convs[n - 2].q.clone())
    } else {
        (BigUint::zero(), BigUint::one())
    };
    let a = BigRational::new(BigInt::from(p_n.clone()), BigInt::from(q_n.clone()));
    let b = BigRational::new(
        BigInt::from(p_n + &p_prev),
        BigInt::from(q_n + &q_prev),
    );
    let (left, right) = if a <= b { (a, b) } else { (b, a) };
    let measure = BigRational::new(
        BigInt::one(),
        BigInt::from(q_n * (q_n + &q_prev)),
    );
    debug_assert_eq!(&right - &left, measure);
    Cylinder {
        digits: digits.clone(),
        left,
        right,
        measure,
    }
}

/// One step of the Gauss map on a rational: T(x) = 1/x − ⌊1/x⌋.
/// Defined for x ∈ (0,1]; T(1) = 0, and the result always lies in [0,1).
pub fn gauss_step(x: &BigRational) -> Result<BigRational, CfError> {
    if x.is_zero() {
        return Err(CfError::GaussAtZero);
    }
    if x < &BigRational::zero() || x > &BigRational::one() {
        return Err(CfError::OutsideUnitInterval(format!(
            "{}/{}",
            x.numer(),
            x.denom()
        )));
    }
    let inv = x.recip();
    Ok(&inv - inv.floor())
}

/// The orbit x, Tx, …, T^(n−1)x of a rational x ∈ (0,1), with
/// log|DT^n(x)| = −2·Σ log(T^i x). Errors if the orbit hits 0 before n
/// points have been collected (i.e. the expansion of x has fewer than n
/// digits).
pub fn orbit(x0: &BigRational, n: usize) -> Result<Orbit, CfError> {
    check_open_unit_rational(x0)?;
    if n == 0 || n > MAX_DEPTH {
        return Err(CfError::DepthExceeded(n));
    }
    let mut points = Vec::with_capacity(n);
    let mut acc = CompensatedSum::new();
    let mut x = x0.clone();
    for depth in 0..n {
        if x.is_zero() {
            return Err(CfError::Terminated {
                depth,
                requested: n,
            });
        }
        acc.add(-2.0 * ln_rational(&x));
        points.push(x.clone());
        x = gauss_step(&points[depth])?;
    }
    Ok(Orbit {
        points,
        log_deriv: acc.total(),
    })
}

/// log q_n from a digit string via the ratio recurrence
/// r_k = q_(k−1)/q_k = 1/(a_k + r_(k−1)), log q_n = −Σ log r_k,
/// with compensated accumulation. Falls back to the exact big-integer
/// recurrence for very deep expansions.
pub fn log_qn_digits(digits: &Digits) -> f64 {
    if digits.depth() > LOG_QN_EXACT_THRESHOLD {
        return log_qn_digits_exact(digits);
    }
    let mut r = 0.0f64;
    let mut acc = CompensatedSum::new();
    for &a in digits.values() {
        r = 1.0 / (a as f64 + r);
        acc.add(-r.ln());
    }
    acc.total()
}

/// log q_n via the exact big-integer recurrence (reference path; also used
/// for depths beyond the f64 ratio threshold).
pub fn log_qn_digits_exact(digits: &Digits) -> f64 {
    let (_, q) = final_denominators(digits);
    ln_biguint(&q)
}

/// log q_n(x) for any supported real input.
pub fn log_qn(x: &RealInput, n: usize, precision_bits: u64) -> Result<f64, CfError> {
    let exp = expand(x, n, precision_bits)?;
    if exp.terminated && exp.digits.depth() < n {
        return Err(CfError::Terminated {
            depth: exp.digits.depth(),
            requested: n,
        });
    }
    Ok(log_qn_digits(&exp.digits))
}

/// The distortion ratio |DT^n(x)| / q_n(x)² for a rational x with at least
/// n digits. Identically (1 + T^n(x)·q_(n−1)/q_n)², so it always lies in
/// (1, 4); the classical two-sided bound is e^(±16)-conservative.
pub fn deriv_ratio(x0: &BigRational, n: usize) -> Result<f64, CfError> {
    let orb = orbit(x0, n)?;
    let exp = expand_rational(x0, n)?;
    if exp.digits.depth() < n {
        return Err(CfError::Terminated {
            depth: exp.digits.depth(),
            requested: n,
        });
    }
    let log_qn = log_qn_digits(&exp.digits);
    Ok((orb.log_deriv - 2.0 * log_qn).exp())
}

/// Minimal possible q_n over all rank-n digit strings: the Fibonacci number
/// F_(n+1) (attained by the all-ones string), with F_1 = F_2 = 1.
pub fn min_denominator(n: usize) -> BigUint {
    let mut a = BigUint::one(); // F_1
    let mut b = BigUint::one(); // F_2
    for _ in 0..n.saturating_sub(1) {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    b
}

/// Exact value of a finite continued fraction [0; a_1, …, a_n] = p_n/q_n.
pub fn value(digits: &Digits) -> BigRational {
    let convs = convergents(digits);
    convs.last().expect("digits nonempty").value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn digits(v: &[u64]) -> Digits {
        Digits::new(v.to_vec()).unwrap()
    }

    #[test]
    fn expand_rational_canonical_euclid() {
        // 3/7 = [0; 2, 3]: Euclid quotients of 7/3.
        let e = expand_rational(&rat(3, 7), 2).unwrap();
        assert_eq!(e.digits.values(), &[2, 3]);
        assert!(!e.terminated);
        // Requesting more digits than exist flags termination and returns the
        // canonical full expansion (last digit ≥ 2).
        let e = expand_rational(&rat(3, 7), 10).unwrap();
        assert_eq!(e.digits.values(), &[2, 3]);
        assert!(e.terminated);
        // 1/2 = [0; 2].
        let e = expand_rational(&rat(1, 2), 5).unwrap();
        assert_eq!(e.digits.values(), &[2]);
        assert!(e.terminated);
    }

    #[test]
    fn expand_rejects_bad_inputs() {
        assert!(matches!(
            expand_rational(&rat(3, 2), 4),
            Err(CfError::OutsideUnitInterval(_))
        ));
        assert!(matches!(
            expand_rational(&rat(0, 1), 4),
            Err(CfError::OutsideUnitInterval(_))
        ));
        assert!(matches!(
            expand_rational(&rat(-1, 3), 4),
            Err(CfError::OutsideUnitInterval(_))
        ));
    }

    #[test]
    fn expand_golden_is_all_ones() {
        let e = expand(&RealInput::Golden, 40, 256).unwrap();
        assert_eq!(e.digits.values(), vec![1u64; 40].as_slice());
        assert!(!e.terminated);
    }

    #[test]
    fn expand_sqrt2m1_is_all_twos() {
        let e = expand(&RealInput::Sqrt2MinusOne, 6, 128).unwrap();
        assert_eq!(e.digits.values(), &[2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn expand_enclosure_reports_precision_exhaustion() {
        // 8 bits of precision cannot certify 40 golden digits.
        let err = expand(&RealInput::Golden, 40, 8).unwrap_err();
        assert!(matches!(err, CfError::PrecisionExhausted { .. }), "{err:?}");
    }

    #[test]
    fn convergents_of_all_ones_are_fibonacci() {
        // q-sequence 1, 2, 3, 5, 8 for [1,1,1,1,1].
        let convs = convergents(&digits(&[1, 1, 1, 1, 1]));
        let qs: Vec<u64> = convs.iter().map(|c| c.q.to_u64().unwrap()).collect();
        assert_eq!(qs, &[1, 2, 3, 5, 8]);
        let ps: Vec<u64> = convs.iter().map(|c| c.p.to_u64().unwrap()).collect();
        assert_eq!(ps, &[1, 1, 2, 3, 5]);
    }

    #[test]
    fn convergents_of_all_twos_are_pell() {
        // q-sequence 2, 5, 12, 29 for [2,2,2,2].
        let convs = convergents(&digits(&[2, 2, 2, 2]));
        let qs: Vec<u64> = convs.iter().map(|c| c.q.to_u64().unwrap()).collect();
        assert_eq!(qs, &[2, 5, 12, 29]);
    }

    #[test]
    fn convergents_are_coprime_with_unimodular_determinant() {
        let d = digits(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let convs = convergents(&d);
        let mut p_prev = BigInt::zero();
        let mut q_prev = BigInt::one();
        for c in &convs {
            let p = BigInt::from(c.p.clone());
            let q = BigInt::from(c.q.clone());
            let det = &p * &q_prev - &p_prev * &q;
            assert!(det.magnitude() == &BigUint::one(), "determinant ±1");
            p_prev = p;
            q_prev = q;
        }
    }

    #[test]
    fn cylinder_rank_one() {
        // Cylinder of [1] is (1/2, 1) with measure 1/2 (binding the
        // measure·q² lower bound 1/2 exactly).
        let c = cylinder(&digits(&[1]));
        assert_eq!(c.left, rat(1, 2));
        assert_eq!(c.right, rat(1, 1));
        assert_eq!(c.measure, rat(1, 2));
    }

    #[test]
    fn cylinder_rank_two() {
        // Cylinder of [1,1] has endpoints {1/2, 2/3} and measure 1/6.
        let c = cylinder(&digits(&[1, 1]));
        assert_eq!(c.left, rat(1, 2));
        assert_eq!(c.right, rat(2, 3));
        assert_eq!(c.measure, rat(1, 6));
    }

    #[test]
    fn cylinder_measure_formula_matches_width() {
        for d in [
            digits(&[2, 3]),
            digits(&[1, 2, 1]),
            digits(&[5, 1, 1, 2]),
            digits(&[1, 1, 1, 1, 1, 1]),
        ] {
            let c = cylinder(&d);
            assert_eq!(&c.right - &c.left, c.measure, "width == 1/(q(q+q'))");
            // Normalized measure q²·λ ∈ [1/2, 1).
            let (q_prev, q) = final_denominators(&d);
            let norm = &c.measure
                * BigRational::from_integer(BigInt::from(&q * &q));
            assert!(norm >= rat(1, 2) && norm < rat(1, 1), "q²λ ∈ [1/2,1)");
            let _ = q_prev;
        }
    }

    #[test]
    fn gauss_step_examples() {
        // T(3/7) = 7/3 − 2 = 1/3.
        assert_eq!(gauss_step(&rat(3, 7)).unwrap(), rat(1, 3));
        // T(1) = 0.
        assert_eq!(gauss_step(&rat(1, 1)).unwrap(), rat(0, 1));
        assert!(matches!(gauss_step(&rat(0, 1)), Err(CfError::GaussAtZero)));
    }

    #[test]
    fn orbit_points_follow_euclid_remainders() {
        let orb = orbit(&rat(3, 7), 2).unwrap();
        assert_eq!(orb.points, vec![rat(3, 7), rat(1, 3)]);
        // log|DT²| = −2(log 3/7 + log 1/3) = 2·log(7) − 2·log(3) + 2·log 3 − wait,
        // just compare numerically.
        let expected = -2.0 * ((3.0f64 / 7.0).ln() + (1.0f64 / 3.0).ln());
        assert!((orb.log_deriv - expected).abs() < 1e-12);
    }

    #[test]
    fn log_qn_matches_exact_recurrence() {
        for v in [
            vec![1u64; 30],
            vec![2u64; 25],
            vec![3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3],
            vec![100, 1, 100, 1, 100],
        ] {
            let d = digits(&v);
            let ratio_path = log_qn_digits(&d);
            let exact_path = log_qn_digits_exact(&d);
            assert!(
                (ratio_path - exact_path).abs() <= 1e-12 * exact_path.abs().max(1.0),
                "ratio {} vs exact {}",
                ratio_path,
                exact_path
            );
        }
    }

    #[test]
    fn deriv_ratio_matches_algebraic_identity() {
        // |DT^n(x)|/q_n² = (1 + T^n(x)·q_(n−1)/q_n)² exactly.
        for (x, n) in [
            (rat(355, 1130), 3usize),
            (rat(47, 129), 4),
            (rat(360, 1001), 5),
        ] {
            let got = deriv_ratio(&x, n).unwrap();
            let e = expand_rational(&x, n + 1).unwrap();
            assert!(e.digits.depth() > n, "test point needs > n digits");
            let prefix = Digits::new(e.digits.values()[..n].to_vec()).unwrap();
            let (q_prev, q) = final_denominators(&prefix);
            // T^n(x) by exact iteration.
            let mut t = x.clone();
            for _ in 0..n {
                t = gauss_step(&t).unwrap();
            }
            let base = BigRational::one()
                + t * BigRational::new(BigInt::from(q_prev), BigInt::from(q));
            let expected = crate::real::rational_to_f64(&(&base * &base));
            assert!(
                (got - expected).abs() < 1e-9 * expected,
                "got {} expected {}",
                got,
                expected
            );
            assert!(got > 1.0 && got < 4.0, "ratio ∈ (1,4), got {}", got);
        }
    }

    #[test]
    fn min_denominator_is_fibonacci() {
        let fibs: Vec<u64> = (1..=10)
            .map(|n| min_denominator(n).to_u64().unwrap())
            .collect();
        assert_eq!(fibs, &[1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn value_round_trips_expansion() {
        for x in [rat(3, 7), rat(355, 113000), rat(617, 1000), rat(99, 100)] {
            let e = expand_rational(&x, 64).unwrap();
            assert_eq!(value(&e.digits), x, "value(expand(x)) == x");
        }
    }

    #[test]
    fn digits_validation() {
        assert!(matches!(Digits::new(vec![]), Err(CfError::EmptyDigits)));
        assert!(matches!(
            Digits::new(vec![1, 0, 2]),
            Err(CfError::ZeroDigit { index: 1 })
        ));
        assert!(Digits::new(vec![1, 2, 3]).is_ok());
    }

    #[test]
    fn huge_first_digit_overflows_cleanly() {
        // x = 1/2^80: the first digit 2^80 does not fit in u64.
        let x = BigRational::new(BigInt::one(), BigInt::from(2).pow(80));
        assert!(matches!(
            expand_rational(&x, 1),
            Err(CfError::DigitOverflow { index: 0 })
        ));
        let _ = BigRational::from_f64(0.5);
    }
}
