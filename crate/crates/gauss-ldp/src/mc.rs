//! Monte-Carlo estimation of the tail measures λ{(2/n)·log qₙ ≷ α}.
//!
//! Sampling is exact where it matters: x is drawn as a dyadic rational
//! u/2^B and its partial quotients come from integer Euclid on (u, 2^B),
//! so the digit string carries no floating-point drift. Only the final
//! log-accumulation runs in f64 (compensated), and the dyadic grid bias
//! is 2^(−B)-scale — far below statistical error at the mandated
//! B ≥ 64 + 4n.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::real::CompensatedSum;
use crate::tail::TailSide;

/// Recorded in output headers for reproducibility across implementations.
pub const GENERATOR: &str = "chacha8";
/// Φ⁻¹(0.975), the two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959963984540054;
/// A dyadic rational has a finite expansion, so a draw can (in principle)
/// run out of digits before depth n; the probability is ~2^(−B/2)-scale,
/// so this cap is unreachable in practice.
const RETRY_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum McError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("precision {got} bits is below the required {required} (64 + 4n)")]
    PrecisionTooLow { got: u64, required: u64 },
}

/// Sampling plan. `workers` is part of the reproducibility contract: the
/// per-worker streams are derived from (seed, worker index), so results
/// are deterministic for a fixed (seed, workers) pair and may differ
/// across worker counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McConfig {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub precision_bits: u64,
    pub workers: usize,
}

impl McConfig {
    /// Minimum working precision for depth n.
    pub fn min_precision_bits(n: usize) -> u64 {
        64 + 4 * n as u64
    }

    /// Plan with the default precision floor and a single worker.
    pub fn new(n: usize, samples: u64, seed: u64) -> Self {
        McConfig {
            n,
            samples,
            seed,
            precision_bits: Self::min_precision_bits(n),
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.n == 0 {
            return Err(McError::ZeroDepth);
        }
        if self.samples == 0 {
            return Err(McError::ZeroSamples);
        }
        let required = Self::min_precision_bits(self.n);
        if self.precision_bits < required {
            return Err(McError::PrecisionTooLow {
                got: self.precision_bits,
                required,
            });
        }
        Ok(())
    }
}

/// Binomial tail estimate with a Wilson 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub hits: u64,
    pub samples: u64,
    /// −(1/n)·log p̂; undefined when no sample hit the event (the CI then
    /// degenerates to (0, Clopper–Pearson upper bound)).
    pub empirical_rate: Option<f64>,
}

/// First `max_digits` partial quotients of u/2^B by Euclid on (2^B, u).
///
/// Returns fewer than `max_digits` entries iff the expansion terminates
/// early (u/2^B is rational, so it always terminates eventually; the last
/// digit of the canonical expansion is the one at which the remainder
/// vanishes).
pub fn dyadic_digits(u: &BigUint, precision_bits: u64, max_digits: usize) -> Vec<BigUint> {
    let mut digits = Vec::with_capacity(max_digits);
    if u.is_zero() {
        return digits;
    }
    let mut r0 = BigUint::one() << precision_bits;
    let mut r1 = u.clone();
    while digits.len() < max_digits {
        let (a, rem) = r0.div_rem(&r1);
        digits.push(a);
        if rem.is_zero() {
            break;
        }
        r0 = r1;
        r1 = rem;
    }
    digits
}

/// (2/n)·log qₙ(x) for x drawn uniformly from the dyadic B-bit grid.
///
/// The digits are exact; qₙ is accumulated in log space through the ratio
/// recurrence r_k = q_{k−1}/q_k = 1/(a_k + r_{k−1}), which keeps every
/// operand O(digit)-sized, with a compensated sum of the log terms.
pub fn sample_log_qn<R: RngCore>(rng: &mut R, n: usize, precision_bits: u64) -> f64 {
    assert!(n >= 1, "depth must be at least 1");
    for _ in 0..RETRY_CAP {
        let u = draw_bits(rng, precision_bits);
        if u.is_zero() {
            continue;
        }
        let digits = dyadic_digits(&u, precision_bits, n);
        if digits.len() < n {
            continue;
        }
        let mut r = 0.0_f64;
        let mut sum = CompensatedSum::new();
        for a in &digits {
            let af = a.to_f64().unwrap_or(f64::INFINITY);
            sum.add((af + r).ln());
            r = 1.0 / (af + r);
        }
        return 2.0 * sum.total() / n as f64;
    }
    // P(< n digits) ≤ P(some digit exceeds 2^(B/n−…)) ~ 2^(−64): one
    // failure is already implausible, RETRY_CAP of them is not a thing.
    unreachable!("dyadic draws terminated early {RETRY_CAP} times in a row")
}

/// Uniform integer in [0, 2^bits) from whole little-endian bytes, with the
/// excess high bits masked off.
fn draw_bits<R: RngCore>(rng: &mut R, bits: u64) -> BigUint {
    let nbytes = (bits as usize).div_ceil(8);
    let mut buf = vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let excess = (8 * nbytes) as u64 - bits;
    if excess > 0 {
        buf[nbytes - 1] &= 0xff >> excess;
    }
    BigUint::from_bytes_le(&buf)
}

/// Monte-Carlo estimate of λ{(2/n)·log qₙ ≥ α} (upper) or ≤ α (lower).
pub fn estimate_tail(cfg: &McConfig, alpha: f64, side: TailSide) -> Result<McEstimate, McError> {
    cfg.validate()?;
    let workers = cfg.workers.max(1).min(cfg.samples.max(1) as usize);
    let base = cfg.samples / workers as u64;
    let extra = cfg.samples % workers as u64;
    let counts: Vec<u64> = (0..workers as u64)
        .map(|w| base + u64::from(w < extra))
        .collect();
    let hit = |s: f64| match side {
        TailSide::Upper => s >= alpha,
        TailSide::Lower => s <= alpha,
    };
    let run = |worker: u64, count: u64| -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(worker);
        let mut hits = 0u64;
        for _ in 0..count {
            if hit(sample_log_qn(&mut rng, cfg.n, cfg.precision_bits)) {
                hits += 1;
            }
        }
        hits
    };
    let hits: u64 = if workers <= 1 {
        run(0, cfg.samples)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = counts
                .iter()
                .enumerate()
                .map(|(w, &count)| scope.spawn(move || run(w as u64, count)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampler worker panicked"))
                .sum()
        })
    };
    Ok(finish_estimate(hits, cfg.samples, cfg.n))
}

fn finish_estimate(hits: u64, samples: u64, n: usize) -> McEstimate {
    let m = samples as f64;
    let p_hat = hits as f64 / m;
    let stderr = (p_hat * (1.0 - p_hat) / m).sqrt();
    let (ci95, empirical_rate) = if hits == 0 {
        ((0.0, clopper_pearson_upper_at_zero(samples)), None)
    } else {
        (wilson_ci(hits, samples), Some(-p_hat.ln() / n as f64))
    };
    McEstimate {
        p_hat,
        stderr,
        ci95,
        hits,
        samples,
        empirical_rate,
    }
}

/// Wilson 95% score interval for `hits` successes in `samples` trials.
pub fn wilson_ci(hits: u64, samples: u64) -> (f64, f64) {
    let m = samples as f64;
    let p = hits as f64 / m;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / m;
    let center = (p + z2 / (2.0 * m)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Upper endpoint of the 95% Clopper–Pearson interval when no trial hit:
/// the largest p with (1−p)^m ≥ 0.025.
pub fn clopper_pearson_upper_at_zero(samples: u64) -> f64 {
    1.0 - 0.025_f64.powf(1.0 / samples as f64)
}
