//! Exact tail probabilities of (2/n)·log q_n under Lebesgue measure.
//!
//! The event {(2/n)·log q_n ≤ α} is exactly {q_n ≤ ⌊exp(αn/2)⌋} (and the
//! upper tail uses the ceiling); the integer thresholds are certified by the
//! directed-rounding exponentials in [`crate::real`], so no floating-point
//! comparison ever decides membership. Tails are then *exact rational
//! numbers* computed by depth-first search over the cylinder tree, which
//! carries only the denominator pair (q_(k−1), q_k):
//!
//! * lower side — at depth n−1 the children a = 1..m that stay below the
//!   threshold form a family whose measures telescope,
//!   Σ_(a=1..m) 1/(q_n(q_n+q)) = m / ((q+q′)·((m+1)q+q′)),
//!   so each family costs one fraction, not m;
//! * upper side — at every node the children a ≥ a* that cross the
//!   threshold contribute the closed form 1/(q·(a*q+q′)) for the measure of
//!   the whole infinite sibling family, and only the finitely many children
//!   below the threshold are expanded.
//!
//! Both searches visit only prefixes whose denominators are below the
//! threshold, so the recursion depth is bounded by the Fibonacci index of
//! the threshold (~2.1·log q) regardless of the rank n. A node budget makes
//! every query either complete exactly or fail loudly; nothing is ever
//! approximated silently — the budget also caps the size of the exact
//! answer, since every visited node contributes at most one fraction.
//! Multi-worker runs stripe the first digit across workers and merge exact
//! partial sums, so the result is independent of the worker count.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cf::min_denominator;
use crate::real::{ceil_exp, floor_exp, PrecisionError};

/// Default DFS node budget: a query that would visit more prefixes than this
/// fails with [`TailError::BudgetExceeded`] instead of running away.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

/// Results whose (unreduced) denominator stays at or below this many bits
/// are reduced to lowest terms before being returned. Beyond it, a single
/// gcd would cost more than the whole enumeration (gcd is quadratic in the
/// operand size, the unreduced merges are not), so larger results are
/// returned exact but unreduced.
pub const REDUCE_BIT_LIMIT: u64 = 1 << 20;

/// Thresholds above 2^126 cannot be enumerated (the search would visit at
/// least ~q nodes, far beyond any feasible budget), so they are rejected
/// upfront rather than after hours of doomed work.
const MAX_THRESHOLD_BITS: u64 = 126;

/// Flush the thread-local node counter into the shared budget gate every
/// this many nodes.
const GATE_BATCH: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TailError {
    #[error("threshold certification failed: {0}")]
    Precision(#[from] PrecisionError),
    #[error(
        "node budget exhausted after {visited} of {budget} allowed nodes; \
         raise --budget or shrink the query"
    )]
    BudgetExceeded { visited: u64, budget: u64 },
    #[error(
        "threshold needs {bits} bits (> {MAX_THRESHOLD_BITS}); enumeration at \
         this scale exceeds any feasible budget"
    )]
    ThresholdTooLarge { bits: u64 },
    #[error("invalid tail query: {0}")]
    BadQuery(String),
    #[error("cylinder count overflowed u128")]
    CountOverflow,
}

/// Which tail of (2/n)·log q_n is being measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailSide {
    /// {(2/n)·log q_n ≤ α}
    Lower,
    /// {(2/n)·log q_n ≥ α}
    Upper,
}

impl std::fmt::Display for TailSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TailSide::Lower => "lower",
            TailSide::Upper => "upper",
        })
    }
}

impl std::str::FromStr for TailSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lower" => Ok(TailSide::Lower),
            "upper" => Ok(TailSide::Upper),
            other => Err(format!("tail side must be 'lower' or 'upper', got '{other}'")),
        }
    }
}

// ---------------------------------------------------------------------------
// Exact fractions, lazily reduced
// ---------------------------------------------------------------------------

/// An exact nonnegative fraction, not necessarily in lowest terms.
///
/// Sums of many cylinder measures have denominators whose bit size grows
/// linearly with the number of terms; keeping them unreduced makes the
/// whole pipeline multiplication-only. Equality is mathematical (by
/// cross-multiplication), not structural.
#[derive(Debug, Clone)]
pub struct Fraction {
    pub num: BigUint,
    pub den: BigUint,
}

impl Fraction {
    pub fn new(num: BigUint, den: BigUint) -> Self {
        assert!(!den.is_zero(), "fraction with zero denominator");
        Self { num, den }
    }

    pub fn zero() -> Self {
        Self::new(BigUint::zero(), BigUint::one())
    }

    pub fn one() -> Self {
        Self::new(BigUint::one(), BigUint::one())
    }

    pub fn from_u128(num: u128, den: u128) -> Self {
        Self::new(BigUint::from(num), BigUint::from(den))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Unreduced sum (multiplications only).
    pub fn add(&self, other: &Fraction) -> Fraction {
        Fraction {
            num: &self.num * &other.den + &other.num * &self.den,
            den: &self.den * &other.den,
        }
    }

    /// Reduce to lowest terms if the denominator is at most `bit_limit` bits.
    pub fn reduce_if_below(self, bit_limit: u64) -> Self {
        if self.den.bits() > bit_limit || self.num.is_zero() {
            return self;
        }
        let g = self.num.gcd(&self.den);
        if g.is_one() {
            self
        } else {
            Fraction {
                num: &self.num / &g,
                den: &self.den / &g,
            }
        }
    }

    /// Fully reduced rational (use only when the operands are known small;
    /// the gcd is quadratic in the bit size).
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()))
    }

    /// f64 value, correct to a few ulps regardless of operand size.
    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        let nb = self.num.bits();
        let db = self.den.bits();
        let nshift = nb.saturating_sub(96);
        let dshift = db.saturating_sub(96);
        let ntop = (&self.num >> nshift).to_f64().expect("96-bit value");
        let dtop = (&self.den >> dshift).to_f64().expect("96-bit value");
        let mut v = ntop / dtop;
        let mut e = nshift as i64 - dshift as i64;
        while e != 0 && v != 0.0 && v.is_finite() {
            let step = e.clamp(-900, 900);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        v
    }

    /// Natural log of the value; finite and accurate even when the fraction
    /// itself underflows f64.
    pub fn ln(&self) -> f64 {
        assert!(!self.num.is_zero(), "ln of zero measure");
        crate::real::ln_biguint(&self.num) - crate::real::ln_biguint(&self.den)
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for Fraction {}

impl From<BigRational> for Fraction {
    fn from(r: BigRational) -> Self {
        assert!(!r.is_negative(), "fractions are nonnegative");
        Fraction::new(
            r.numer().to_biguint().expect("nonnegative numerator"),
            r.denom().to_biguint().expect("positive denominator"),
        )
    }
}

/// A tail query: rank n, rational level α > 0, and the side.
#[derive(Debug, Clone)]
pub struct TailQuery {
    pub n: usize,
    pub alpha: BigRational,
    pub side: TailSide,
}

/// Resource limits for the enumeration.
#[derive(Debug, Clone)]
pub struct EnumLimits {
    pub node_budget: u64,
    pub workers: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
            workers: 1,
        }
    }
}

/// An exact tail measure.
#[derive(Debug, Clone)]
pub struct TailResult {
    /// Exact probability of the event (reduced to lowest terms whenever the
    /// denominator is below [`REDUCE_BIT_LIMIT`] bits).
    pub measure: Fraction,
    /// Lower side: the exact number of rank-n cylinders in the event.
    /// Upper side: the number of disjoint sibling families covering the
    /// event (each family is an infinite union of rank-n cylinders).
    pub cylinder_count: u128,
    /// The integer threshold defining the event: largest q in the event for
    /// the lower side, smallest q in the event for the upper side.
    pub q_threshold: BigUint,
    /// DFS nodes visited (prefix strings expanded).
    pub nodes_visited: u64,
    pub elapsed: Duration,
}

/// Smallest integer q with (2/n)·log q ≥ α, i.e. ⌈exp(αn/2)⌉.
/// (For rational α ≠ 0 the exponential is never an integer, so ceiling and
/// "first integer at or above" coincide; the certification loop would catch
/// an exact hit anyway.)
pub fn q_threshold(n: usize, alpha: &BigRational) -> Result<BigUint, TailError> {
    validate(n, alpha)?;
    ceil_exp(&half_n_alpha(n, alpha)).map_err(TailError::from)
}

/// Largest integer q with (2/n)·log q ≤ α, i.e. ⌊exp(αn/2)⌋.
pub fn q_floor_threshold(n: usize, alpha: &BigRational) -> Result<BigUint, TailError> {
    validate(n, alpha)?;
    floor_exp(&half_n_alpha(n, alpha)).map_err(TailError::from)
}

fn half_n_alpha(n: usize, alpha: &BigRational) -> BigRational {
    alpha * BigRational::new(BigInt::from(n), BigInt::from(2))
}

fn validate(n: usize, alpha: &BigRational) -> Result<(), TailError> {
    if n == 0 {
        return Err(TailError::BadQuery("rank n must be >= 1".into()));
    }
    if n > 10_000 {
        return Err(TailError::BadQuery(format!(
            "rank n = {n} is beyond any enumerable regime (max 10000)"
        )));
    }
    if !alpha.is_positive() {
        return Err(TailError::BadQuery("alpha must be > 0".into()));
    }
    Ok(())
}

/// Exact measure of the requested tail. Fails loudly (budget, threshold
/// size, precision) rather than approximating.
pub fn exact_tail(query: &TailQuery, limits: &EnumLimits) -> Result<TailResult, TailError> {
    let start = Instant::now();
    validate(query.n, &query.alpha)?;
    let exponent = half_n_alpha(query.n, &query.alpha);
    let fib = min_denominator(query.n);
    match query.side {
        TailSide::Lower => {
            let q_floor = floor_exp(&exponent)?;
            if fib > q_floor {
                // Even the all-ones string exceeds the threshold: empty event.
                return Ok(TailResult {
                    measure: Fraction::zero(),
                    cylinder_count: 0,
                    q_threshold: q_floor,
                    nodes_visited: 0,
                    elapsed: start.elapsed(),
                });
            }
            let q = q_floor
                .to_u128()
                .filter(|_| q_floor.bits() <= MAX_THRESHOLD_BITS)
                .ok_or(TailError::ThresholdTooLarge {
                    bits: q_floor.bits(),
                })?;
            let (measure, count, nodes) = lower_tail(query.n, q, limits)?;
            Ok(TailResult {
                measure: measure.reduce_if_below(REDUCE_BIT_LIMIT),
                cylinder_count: count,
                q_threshold: q_floor,
                nodes_visited: nodes,
                elapsed: start.elapsed(),
            })
        }
        TailSide::Upper => {
            let q_ceil = ceil_exp(&exponent)?;
            if fib >= q_ceil {
                // Every rank-n string already meets the threshold.
                return Ok(TailResult {
                    measure: Fraction::one(),
                    cylinder_count: 1,
                    q_threshold: q_ceil,
                    nodes_visited: 0,
                    elapsed: start.elapsed(),
                });
            }
            let q = q_ceil
                .to_u128()
                .filter(|_| q_ceil.bits() <= MAX_THRESHOLD_BITS)
                .ok_or(TailError::ThresholdTooLarge {
                    bits: q_ceil.bits(),
                })?;
            let (measure, count, nodes) = upper_tail(query.n, q, limits)?;
            Ok(TailResult {
                measure: measure.reduce_if_below(REDUCE_BIT_LIMIT),
                cylinder_count: count,
                q_threshold: q_ceil,
                nodes_visited: nodes,
                elapsed: start.elapsed(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Budget gate
// ---------------------------------------------------------------------------

struct Gate {
    used: AtomicU64,
    budget: u64,
    tripped: AtomicBool,
}

impl Gate {
    fn new(budget: u64) -> Self {
        Self {
            used: AtomicU64::new(0),
            budget,
            tripped: AtomicBool::new(false),
        }
    }

    /// Add a batch of visited nodes; error once the shared budget is blown
    /// (or another worker blew it).
    fn flush(&self, local: &mut u64) -> Result<(), TailError> {
        let total = self.used.fetch_add(*local, Ordering::Relaxed) + *local;
        *local = 0;
        if total > self.budget {
            self.tripped.store(true, Ordering::Relaxed);
            return Err(TailError::BudgetExceeded {
                visited: total,
                budget: self.budget,
            });
        }
        if self.tripped.load(Ordering::Relaxed) {
            return Err(TailError::BudgetExceeded {
                visited: total,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Exact accumulation
// ---------------------------------------------------------------------------

/// Exact sum of many positive fractions. Terms are merged through a binary
/// counter of partial sums (numbers of similar size combine pairwise, giving
/// quasi-linear total bit cost). The bottom tier keeps reduced u128
/// fractions; the upper tiers are unreduced big fractions, so the merge tree
/// is multiplication-only — no gcd ever runs on a large operand.
#[derive(Default)]
pub(crate) struct Accumulator {
    small: Option<(u128, u128)>,
    slots: Vec<Option<Fraction>>,
}

impl Accumulator {
    pub(crate) fn add_fraction(&mut self, num: u128, den: u128) {
        debug_assert!(num >= 1 && den >= 1);
        match self.small.take() {
            None => self.small = Some((num, den)),
            Some((n0, d0)) => match merge_fractions(n0, d0, num, den) {
                Some(merged) => self.small = Some(merged),
                None => {
                    self.push_big(Fraction::from_u128(n0, d0));
                    self.small = Some((num, den));
                }
            },
        }
    }

    pub(crate) fn add_big(&mut self, f: Fraction) {
        self.push_big(f);
    }

    fn push_big(&mut self, mut f: Fraction) {
        for slot in self.slots.iter_mut() {
            match slot.take() {
                None => {
                    *slot = Some(f);
                    return;
                }
                Some(s) => f = f.add(&s),
            }
        }
        self.slots.push(Some(f));
    }

    pub(crate) fn merge(&mut self, other: Accumulator) {
        if let Some((n, d)) = other.small {
            self.push_big(Fraction::from_u128(n, d));
        }
        for slot in other.slots.into_iter().flatten() {
            self.push_big(slot);
        }
    }

    pub(crate) fn total(mut self) -> Fraction {
        let mut sum = match self.small.take() {
            Some((n, d)) => Fraction::from_u128(n, d),
            None => Fraction::zero(),
        };
        for slot in self.slots.into_iter().flatten() {
            sum = sum.add(&slot);
        }
        sum
    }
}

/// n0/d0 + n1/d1 in u128 lowest terms, or None on overflow.
fn merge_fractions(n0: u128, d0: u128, n1: u128, d1: u128) -> Option<(u128, u128)> {
    let g = d0.gcd(&d1);
    let d0g = d0 / g;
    let den = d0g.checked_mul(d1)?;
    let t0 = n0.checked_mul(d1 / g)?;
    let t1 = n1.checked_mul(d0g)?;
    let num = t0.checked_add(t1)?;
    let g2 = num.gcd(&den);
    Some((num / g2, den / g2))
}

// ---------------------------------------------------------------------------
// Lower tail: telescoped families
// ---------------------------------------------------------------------------

struct LowerDfs<'g> {
    n: usize,
    q_floor: u128,
    gate: &'g Gate,
    local: u64,
    acc: Accumulator,
    count: u128,
}

impl LowerDfs<'_> {
    fn charge(&mut self) -> Result<(), TailError> {
        self.local += 1;
        if self.local >= GATE_BATCH {
            self.gate.flush(&mut self.local)?;
        }
        Ok(())
    }

    /// Visit the prefix node with final denominators (q_prev, q), q ≤ q_floor.
    fn node(&mut self, depth: usize, q_prev: u128, q: u128) -> Result<(), TailError> {
        self.charge()?;
        if depth == self.n - 1 {
            // Children a = 1..m stay at or below the threshold; their rank-n
            // cylinder measures telescope into a single fraction.
            let m = (self.q_floor - q_prev) / q;
            if m >= 1 {
                let d1 = q + q_prev;
                let d2 = (m + 1)
                    .checked_mul(q)
                    .and_then(|v| v.checked_add(q_prev));
                match d2.and_then(|d2| d1.checked_mul(d2)) {
                    Some(den) => self.acc.add_fraction(m, den),
                    None => {
                        let d2 = BigUint::from(m + 1) * BigUint::from(q) + BigUint::from(q_prev);
                        self.acc.add_big(Fraction::new(
                            BigUint::from(m),
                            BigUint::from(d1) * d2,
                        ));
                    }
                }
                self.count = self
                    .count
                    .checked_add(m)
                    .ok_or(TailError::CountOverflow)?;
            }
            return Ok(());
        }
        let mut a = 1u128;
        loop {
            let q_next = a * q + q_prev;
            if q_next > self.q_floor {
                break;
            }
            self.node(depth + 1, q, q_next)?;
            a += 1;
        }
        Ok(())
    }
}

/// Exact measure and cylinder count of {q_n ≤ q_floor}, q_floor ≥ F_(n+1).
fn lower_tail(
    n: usize,
    q_floor: u128,
    limits: &EnumLimits,
) -> Result<(Fraction, u128, u64), TailError> {
    let gate = Gate::new(limits.node_budget);
    if n == 1 {
        // Single family at the root: a_1 = 1..q_floor.
        let mut dfs = LowerDfs {
            n,
            q_floor,
            gate: &gate,
            local: 0,
            acc: Accumulator::default(),
            count: 0,
        };
        dfs.node(0, 0, 1)?;
        gate.flush(&mut dfs.local)?;
        return Ok((dfs.acc.total(), dfs.count, gate.used.load(Ordering::Relaxed)));
    }
    let workers = limits.workers.max(1);
    let results = run_workers(workers, |w| {
        let mut dfs = LowerDfs {
            n,
            q_floor,
            gate: &gate,
            // Worker 0 also charges the root node.
            local: if w == 0 { 1 } else { 0 },
            acc: Accumulator::default(),
            count: 0,
        };
        let mut a1 = (w + 1) as u128;
        while a1 <= q_floor {
            dfs.node(1, 1, a1)?;
            a1 += workers as u128;
        }
        gate.flush(&mut dfs.local)?;
        Ok((dfs.acc, dfs.count))
    });
    let mut acc = Accumulator::default();
    let mut count: u128 = 0;
    for r in results {
        let (wacc, wcount) = r?;
        acc.merge(wacc);
        count = count.checked_add(wcount).ok_or(TailError::CountOverflow)?;
    }
    Ok((acc.total(), count, gate.used.load(Ordering::Relaxed)))
}

// ---------------------------------------------------------------------------
// Upper tail: gap sums
// ---------------------------------------------------------------------------

struct UpperDfs<'g> {
    n: usize,
    q_ceil: u128,
    gate: &'g Gate,
    local: u64,
    acc: Accumulator,
    families: u128,
}

impl UpperDfs<'_> {
    fn charge(&mut self) -> Result<(), TailError> {
        self.local += 1;
        if self.local >= GATE_BATCH {
            self.gate.flush(&mut self.local)?;
        }
        Ok(())
    }

    /// Visit the prefix node with final denominators (q_prev, q), q < q_ceil,
    /// depth ≤ n−1.
    fn node(&mut self, depth: usize, q_prev: u128, q: u128) -> Result<(), TailError> {
        self.charge()?;
        // First child index whose denominator reaches the threshold.
        // (q_ceil − q_prev) + q − 1 ≤ 2^127, so the ceiling division is safe.
        let a_star = (self.q_ceil - q_prev + q - 1) / q;
        // All rank-n extensions through children a ≥ a_star are in the event;
        // the sibling-family measure telescopes to 1/(q·(a*·q + q′)).
        let inner = a_star
            .checked_mul(q)
            .and_then(|v| v.checked_add(q_prev));
        match inner.and_then(|i| q.checked_mul(i)) {
            Some(den) => self.acc.add_fraction(1, den),
            None => {
                let inner = BigUint::from(a_star) * BigUint::from(q) + BigUint::from(q_prev);
                self.acc
                    .add_big(Fraction::new(BigUint::one(), BigUint::from(q) * inner));
            }
        }
        self.families = self
            .families
            .checked_add(1)
            .ok_or(TailError::CountOverflow)?;
        if depth + 1 < self.n {
            for a in 1..a_star {
                self.node(depth + 1, q, a * q + q_prev)?;
            }
        }
        // depth+1 == n: children below a_star are rank-n leaves outside the
        // event; they contribute nothing.
        Ok(())
    }
}

/// Exact measure of {q_n ≥ q_ceil} and the number of covering sibling
/// families, for q_ceil > F_(n+1).
fn upper_tail(
    n: usize,
    q_ceil: u128,
    limits: &EnumLimits,
) -> Result<(Fraction, u128, u64), TailError> {
    let gate = Gate::new(limits.node_budget);
    if n == 1 {
        let mut acc = Accumulator::default();
        acc.add_fraction(1, q_ceil);
        return Ok((acc.total(), 1, 1));
    }
    let workers = limits.workers.max(1);
    let a_root = q_ceil; // a* at the root node (q_prev = 0, q = 1)
    let results = run_workers(workers, |w| {
        let mut dfs = UpperDfs {
            n,
            q_ceil,
            gate: &gate,
            local: 0,
            acc: Accumulator::default(),
            families: 0,
        };
        if w == 0 {
            // Root node: charge it and take its gap term (a_1 ≥ q_ceil).
            dfs.local = 1;
            dfs.acc.add_fraction(1, a_root);
            dfs.families = 1;
        }
        let mut a1 = (w + 1) as u128;
        while a1 < a_root {
            dfs.node(1, 1, a1)?;
            a1 += workers as u128;
        }
        gate.flush(&mut dfs.local)?;
        Ok((dfs.acc, dfs.families))
    });
    let mut acc = Accumulator::default();
    let mut families: u128 = 0;
    for r in results {
        let (wacc, wfam) = r?;
        acc.merge(wacc);
        families = families
            .checked_add(wfam)
            .ok_or(TailError::CountOverflow)?;
    }
    Ok((acc.total(), families, gate.used.load(Ordering::Relaxed)))
}

fn run_workers<R: Send>(
    workers: usize,
    job: impl Fn(usize) -> Result<R, TailError> + Sync,
) -> Vec<Result<R, TailError>> {
    if workers <= 1 {
        return vec![job(0)];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let job = &job;
                scope.spawn(move || job(w))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tail worker panicked"))
            .collect()
    })
}

// ---------------------------------------------------------------------------
// Leaf enumeration and the full distribution
// ---------------------------------------------------------------------------

/// Visit every rank-n digit string with q_n < q_sup, in lexicographic order,
/// as `(digits, q_(n−1), q_n)`. Single-threaded by contract (the visitor is
/// `FnMut`); returns the number of DFS nodes visited (prefixes and leaves).
pub fn enumerate_below<F>(
    n: usize,
    q_sup: &BigUint,
    limits: &EnumLimits,
    mut visitor: F,
) -> Result<u64, TailError>
where
    F: FnMut(&[u64], u128, u128),
{
    if n == 0 {
        return Err(TailError::BadQuery("rank n must be >= 1".into()));
    }
    if q_sup.bits() > MAX_THRESHOLD_BITS {
        return Err(TailError::ThresholdTooLarge { bits: q_sup.bits() });
    }
    let q_sup = q_sup.to_u128().expect("bit-checked above");
    let gate = Gate::new(limits.node_budget);
    let mut local = 0u64;
    let mut digits: Vec<u64> = Vec::with_capacity(n);

    fn walk<F: FnMut(&[u64], u128, u128)>(
        n: usize,
        q_sup: u128,
        depth: usize,
        q_prev: u128,
        q: u128,
        digits: &mut Vec<u64>,
        gate: &Gate,
        local: &mut u64,
        visitor: &mut F,
    ) -> Result<(), TailError> {
        *local += 1;
        if *local >= GATE_BATCH {
            gate.flush(local)?;
        }
        if depth == n {
            visitor(digits, q_prev, q);
            return Ok(());
        }
        let mut a = 1u128;
        loop {
            let q_next = a * q + q_prev;
            if q_next >= q_sup {
                break;
            }
            digits.push(a as u64);
            walk(n, q_sup, depth + 1, q, q_next, digits, gate, local, visitor)?;
            digits.pop();
            a += 1;
        }
        Ok(())
    }

    walk(
        n, q_sup, 0, 0, 1, &mut digits, &gate, &mut local, &mut visitor,
    )?;
    gate.flush(&mut local)?;
    Ok(gate.used.load(Ordering::Relaxed))
}

/// One atom of the rank-n denominator distribution.
#[derive(Debug, Clone)]
pub struct DistributionAtom {
    pub q: BigUint,
    /// Exact total measure of all rank-n cylinders with this q_n.
    pub mass: BigRational,
    /// Number of rank-n cylinders sharing this q_n.
    pub cylinders: u64,
}

/// The exact distribution of q_n up to a cap, plus the exact mass above it.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub n: usize,
    pub atoms: Vec<DistributionAtom>,
    /// Exact measure of {q_n > q_max}.
    pub tail_mass: BigRational,
    pub nodes_visited: u64,
}

impl Distribution {
    /// Σ atom masses + tail mass; exactly 1 by construction (tested, not
    /// assumed).
    pub fn total_mass(&self) -> BigRational {
        let mut sum = self.tail_mass.clone();
        for a in &self.atoms {
            sum += &a.mass;
        }
        sum
    }
}

/// Exact distribution of q_n over {q_n ≤ q_max}, with the remaining mass
/// reported as `tail_mass`. Atom masses are fully reduced (they are sums
/// over the few cylinders sharing one denominator, so reduction is cheap).
pub fn distribution(
    n: usize,
    q_max: u64,
    limits: &EnumLimits,
) -> Result<Distribution, TailError> {
    if q_max == 0 {
        return Err(TailError::BadQuery("q_max must be >= 1".into()));
    }
    let mut atoms: std::collections::BTreeMap<u128, (Accumulator, u64)> =
        std::collections::BTreeMap::new();
    let q_sup = BigUint::from(q_max) + BigUint::one();
    let leaves = enumerate_below(n, &q_sup, limits, |_digits, q_prev, q| {
        let entry = atoms.entry(q).or_default();
        entry.0.add_fraction(1, q * (q + q_prev));
        entry.1 += 1;
    })?;
    // Mass above the cap: the upper tail at threshold q_max + 1.
    let fib = min_denominator(n);
    let tail_mass = if fib >= q_sup {
        BigRational::one()
    } else {
        let (m, _, _) = upper_tail(n, q_max as u128 + 1, limits)?;
        m.to_rational()
    };
    Ok(Distribution {
        n,
        atoms: atoms
            .into_iter()
            .map(|(q, (acc, cylinders))| DistributionAtom {
                q: BigUint::from(q),
                mass: acc.total().to_rational(),
                cylinders,
            })
            .collect(),
        tail_mass,
        nodes_visited: leaves,
    })
}

// ---------------------------------------------------------------------------
// Normalized-measure sweep (all ranks)
// ---------------------------------------------------------------------------

/// Verify `measure(C)·q_n² ∈ [1/2, 1)` for *every* cylinder of every rank
/// with q_n ≤ q_cap, via exact integer comparisons on the denominator pair
/// (the bound is equivalent to 1 ≤ q_(n−1) ≤ q_n). Every `sample_stride`-th
/// cylinder is additionally reconstructed through [`crate::cf::cylinder`]
/// and re-checked with full rational arithmetic. Returns the number of
/// cylinders checked.
pub fn check_normalized_measure(
    q_cap: u64,
    sample_stride: u64,
    node_budget: u64,
) -> Result<u64, TailError> {
    let gate = Gate::new(node_budget);
    let mut local = 0u64;
    let mut checked = 0u64;
    let mut digits: Vec<u64> = Vec::new();

    struct Sweep<'g> {
        q_cap: u64,
        stride: u64,
        gate: &'g Gate,
    }

    fn walk(
        s: &Sweep<'_>,
        q_prev: u64,
        q: u64,
        digits: &mut Vec<u64>,
        local: &mut u64,
        checked: &mut u64,
    ) -> Result<(), TailError> {
        *local += 1;
        if *local >= GATE_BATCH {
            s.gate.flush(local)?;
        }
        // The node itself is a cylinder (rank = digits.len() ≥ 1): check it.
        if !(1 <= q_prev && q_prev <= q) {
            // Impossible by the recurrence; keep the check explicit so the
            // sweep is a verification, not a tautology.
            return Err(TailError::BadQuery(format!(
                "normalized-measure violation at q'={q_prev}, q={q}"
            )));
        }
        *checked += 1;
        if *checked % s.stride == 0 {
            let d = crate::cf::Digits::new(digits.clone()).expect("valid digits");
            let cyl = crate::cf::cylinder(&d);
            let q_big = BigInt::from(q);
            let norm = &cyl.measure * BigRational::from_integer(&q_big * &q_big);
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            if !(norm >= half && norm < BigRational::one()) {
                return Err(TailError::BadQuery(format!(
                    "rational normalized measure out of [1/2,1) at q={q}"
                )));
            }
            if &cyl.right - &cyl.left != cyl.measure {
                return Err(TailError::BadQuery(format!(
                    "measure != interval width at q={q}"
                )));
            }
        }
        let mut a = 1u64;
        loop {
            let q_next = match a.checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
                Some(v) => v,
                None => break,
            };
            if q_next > s.q_cap {
                break;
            }
            digits.push(a);
            walk(s, q, q_next, digits, local, checked)?;
            digits.pop();
            a += 1;
        }
        Ok(())
    }

    let sweep = Sweep {
        q_cap,
        stride: sample_stride.max(1),
        gate: &gate,
    };
    // Children of the empty prefix: rank-1 cylinders [a], a = 1..q_cap.
    let mut a = 1u64;
    while a <= q_cap {
        digits.push(a);
        walk(&sweep, 1, a, &mut digits, &mut local, &mut checked)?;
        digits.pop();
        a += 1;
    }
    gate.flush(&mut local)?;
    Ok(checked)
}
