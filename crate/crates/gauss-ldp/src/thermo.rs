//! Thermodynamic pressure of the Gauss map and the large-deviation rate
//! function obtained from it by Legendre transform.
//!
//! The weighted transfer operator
//!
//! (L_t f)(x) = Σ_{k≥1} (k + x)^(−2t) · f(1/(k + x))
//!
//! acts on analytic functions on [0, 1]; its leading eigenvalue λ(t) is
//! positive and simple, and P(t) = log λ(t) is the pressure. The operator
//! is discretized by Chebyshev–Gauss–Lobatto collocation: branches
//! k ≤ K are applied exactly at the nodes, and the analytic tail over
//! k > K is resummed through Hurwitz zeta functions applied to the Taylor
//! data of the iterate at x = 0, so the cutoff error is far below f64
//! resolution for every t in the working range.
//!
//! Known identities pin the construction: λ(1) = 1 with eigenfunction
//! 1/(1+x) (Gauss density up to scale), −P′(1) = π²/(6 log 2), and
//! −P′(t) → 2 log((1+√5)/2) as t → ∞. The rate function is
//! I(α) = (1 − t_α)·α − P(t_α) where −P′(t_α) = α.

use crate::cheb;

/// Default polynomial degree of the collocation grid.
pub const DEFAULT_N_BASIS: usize = 40;
/// Default number of explicitly applied branches.
pub const DEFAULT_BRANCH_CUTOFF: usize = 1024;
/// Relative tolerance on the leading eigenvalue in power iteration.
pub const POWER_TOL: f64 = 3e-15;
pub const MAX_POWER_ITERS: usize = 500;
/// Base step for the Richardson derivative of the pressure. The actual
/// step shrinks proportionally to 2t − 1 near the t = 1/2 pole, where
/// P⁽⁵⁾ ~ (2t − 1)⁻⁵ would otherwise dominate the truncation error; away
/// from the pole a full millistep keeps the eigenvalue-rounding noise
/// (amplified by 1/h) far below the solver's residual target.
pub const DERIVATIVE_H: f64 = 1e-3;
/// Step for the central second difference (Newton curvature).
pub const CURVATURE_H: f64 = 1e-3;
/// Residual target for the Legendre solve: |−P′(t_α) − α| ≤ this.
pub const RATE_RESIDUAL_TARGET: f64 = 5e-9;
/// Search bracket for t_α. Below 1/2 the operator diverges; by t = 24 the
/// derivative is within ~1e-8 of its asymptote 2 ln φ, which is already
/// deeper than the solver's residual target — no reachable α needs more.
pub const T_BRACKET: (f64, f64) = (0.51, 24.0);
/// Order of the endpoint Taylor expansion used for the k > K tail.
const TAYLOR_ORDER: usize = 6;
const MAX_NEWTON_ITERS: usize = 80;
/// Below this t the physical eigenvalue dominates the whole collocation
/// spectrum and plain power iteration is safe. Above it, eigenvalues are
/// tracked by continuation (see `Grid::tracked_eigenvalue`).
const POWER_SAFE_T: f64 = 3.0;
/// Step of the continuation ladder in t.
const LADDER_STEP: f64 = 0.25;
const MAX_INVERSE_ITERS: usize = 200;
/// Convergence tolerance for shift-and-invert Rayleigh quotients. Once the
/// vector has converged, the nonsymmetric Rayleigh quotient still jitters
/// by a few ulp (≲ 1e-14 relative), so demanding [`POWER_TOL`] would spin.
const INVERSE_TOL: f64 = 5e-14;
/// The Rayleigh rounding floor worsens as the eigenvalue softens at large
/// t. When successive quotients only jitter inside this band (relative),
/// the iteration has converged to its floor and the band mean is taken.
/// Near the top of [`T_BRACKET`] this costs ~1e-11 relative accuracy in
/// λ — far below anything physically meaningful there, where −P′ sits
/// within ~1e-7 of its asymptote.
const INVERSE_BAND: f64 = 1e-10;
/// Number of trailing quotients averaged by the band acceptance; the first
/// window is inspected only after 3× this many iterations, by when any
/// contraction transient (factor ≤ 0.35 per step) is far below the band.
const INVERSE_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThermoError {
    #[error("pressure is only defined for t > 1/2 (got t = {t})")]
    OutOfDomain { t: f64 },
    #[error("power iteration did not converge at t = {t}")]
    NoConvergence { t: f64 },
    #[error("leading eigenvector lost positivity at t = {t} (discretization too coarse)")]
    LostPositivity { t: f64 },
    #[error(
        "alpha = {alpha} is outside the attainable slope range \
         (2·log((1+√5)/2), −P′(0.51))"
    )]
    AlphaOutOfRange { alpha: f64 },
    #[error("Legendre solve stalled for alpha = {alpha} (residual {residual:.3e})")]
    SolveStalled { alpha: f64, residual: f64 },
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy)]
pub struct ThermoParams {
    pub n_basis: usize,
    pub branch_cutoff: usize,
}

impl Default for ThermoParams {
    fn default() -> Self {
        Self {
            n_basis: DEFAULT_N_BASIS,
            branch_cutoff: DEFAULT_BRANCH_CUTOFF,
        }
    }
}

/// Hurwitz zeta ζ(s, a) = Σ_{j≥0} (a + j)^(−s) for s > 1, a > 0.
///
/// Euler–Maclaurin through the B₆ term after shifting a upward; the shift
/// point grows with s so the asymptotic series stays deep in its regime.
/// Relative error ≲ 1e-15 for moderate s; for very large s the absolute
/// values underflow long before accuracy matters to the caller.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0, "hurwitz_zeta needs s > 1, got {s}");
    assert!(a > 0.0, "hurwitz_zeta needs a > 0, got {a}");
    let start = 48f64.max(1.5 * s);
    let mut head = 0.0;
    let mut aa = a;
    while aa < start {
        head += aa.powf(-s);
        aa += 1.0;
    }
    let am_s = aa.powf(-s);
    let inv = 1.0 / aa;
    let tail = aa * am_s / (s - 1.0)
        + 0.5 * am_s
        + s * am_s * inv / 12.0
        - s * (s + 1.0) * (s + 2.0) * am_s * inv.powi(3) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * am_s * inv.powi(5) / 30240.0;
    head + tail
}

/// One rung of the eigenvalue-continuation ladder.
struct Rung {
    t: f64,
    log_lambda: f64,
    v: Vec<f64>,
}

/// One collocation level: geometry and every t-independent precomputation.
struct Grid {
    n: usize,
    k_cutoff: usize,
    nodes: Vec<f64>,
    /// ln(k + x_i), laid out [i·K + (k−1)].
    ln_kx: Vec<f64>,
    /// Cardinal rows ℓ_j(1/(k + x_i)), laid out [(i·K + (k−1))·(n+1) + j].
    branch_rows: Vec<f64>,
    /// Endpoint Taylor functionals D_m[j] divided by m!.
    taylor_rows: Vec<Vec<f64>>,
    /// Continuation rungs at t = 2.75, 3.0, 3.25, … (computed on demand,
    /// shared across calls and threads; every rung value is a function of
    /// the previous rungs only, so the cache is deterministic).
    ladder: std::sync::Mutex<Vec<Rung>>,
}

impl Grid {
    fn new(n: usize, k_cutoff: usize) -> Self {
        let nodes = cheb::lobatto_nodes(n);
        let weights = cheb::barycentric_weights(n);
        let dim = n + 1;
        let mut ln_kx = vec![0.0; dim * k_cutoff];
        let mut branch_rows = vec![0.0; dim * k_cutoff * dim];
        for (i, &x) in nodes.iter().enumerate() {
            for k in 1..=k_cutoff {
                let idx = i * k_cutoff + (k - 1);
                ln_kx[idx] = (k as f64 + x).ln();
                let y = 1.0 / (k as f64 + x);
                cheb::cardinal_row(
                    &nodes,
                    &weights,
                    y,
                    &mut branch_rows[idx * dim..(idx + 1) * dim],
                );
            }
        }
        let mut taylor_rows = cheb::endpoint_derivative_functionals(n, TAYLOR_ORDER);
        let mut fact = 1.0;
        for (m, row) in taylor_rows.iter_mut().enumerate() {
            if m > 0 {
                fact *= m as f64;
            }
            for v in row.iter_mut() {
                *v /= fact;
            }
        }
        Self {
            n,
            k_cutoff,
            nodes,
            ln_kx,
            branch_rows,
            taylor_rows,
            ladder: std::sync::Mutex::new(Vec::new()),
        }
    }

    /// Dense collocation matrix of L_t, row-major (n+1)².
    fn assemble(&self, t: f64) -> Vec<f64> {
        let dim = self.n + 1;
        let mut a = vec![0.0; dim * dim];
        for (i, &x) in self.nodes.iter().enumerate() {
            let row = &mut a[i * dim..(i + 1) * dim];
            for k in 0..self.k_cutoff {
                let idx = i * self.k_cutoff + k;
                let coeff = (-2.0 * t * self.ln_kx[idx]).exp();
                if coeff == 0.0 {
                    // Later branches are even smaller.
                    break;
                }
                let cols = &self.branch_rows[idx * dim..(idx + 1) * dim];
                for (r, &c) in row.iter_mut().zip(cols) {
                    *r += coeff * c;
                }
            }
            // Tail Σ_{k>K} (k+x)^(−2t) f(1/(k+x)) via the Taylor data of f
            // at 0: Σ_m f^(m)(0)/m! · ζ(2t + m, K + 1 + x).
            for (m, d_row) in self.taylor_rows.iter().enumerate() {
                let z = hurwitz_zeta(2.0 * t + m as f64, self.k_cutoff as f64 + 1.0 + x);
                if z == 0.0 {
                    break;
                }
                for (r, &d) in row.iter_mut().zip(d_row) {
                    *r += z * d;
                }
            }
        }
        a
    }

    /// Collocation matrix of the conjugated operator M⁻¹·L_t·M with
    /// M(x) = (φ + x)^(−2t), φ the golden ratio.
    ///
    /// Because φ + 1/(1+x) = φ(φ+x)/(1+x), the k = 1 branch weight of the
    /// conjugated operator is exactly φ^(−2t) for every x, and every other
    /// branch is smaller still — so the matrix norm scales like the leading
    /// eigenvalue itself. Two birds with one identity: λ(t) is computed at
    /// full *relative* precision however tiny it is, and the spurious
    /// grid-scale modes of raw collocation (sustained by the t-independent
    /// unit entry at the x = 0 → y = 1 node hit) are deflated below the
    /// physical eigenvalue instead of crossing it near t ≈ 5.
    /// Conjugation leaves eigenvalues unchanged and preserves positivity of
    /// the eigenvector (M > 0).
    fn assemble_conjugated(&self, t: f64) -> Vec<f64> {
        const PHI: f64 = 1.618_033_988_749_894_8;
        let dim = self.n + 1;
        let mut a = self.assemble(t);
        let s: Vec<f64> = self.nodes.iter().map(|&x| -2.0 * t * (PHI + x).ln()).collect();
        for i in 0..dim {
            for j in 0..dim {
                a[i * dim + j] *= (s[j] - s[i]).exp();
            }
        }
        a
    }

    /// Leading *physical* eigenvalue of the conjugated matrix.
    ///
    /// Up to [`POWER_SAFE_T`] the physical eigenvalue dominates the whole
    /// collocation spectrum and power iteration finds it. Beyond that,
    /// spurious grid-scale modes (whose eigenvalues decay slower in t than
    /// the physical one) would win the power race, so the physical branch
    /// is tracked instead: a ladder of rungs t = 2.75, 3.0, 3.25, …
    /// advances by secant prediction of log λ, and shift-and-invert
    /// iteration converges to the eigenvalue *nearest the prediction* —
    /// the prediction is within ~1% while every other eigenvalue is a
    /// factor ≳ 3 away, so the selection is unambiguous.
    fn leading_eigenvalue(&self, t: f64) -> Result<(f64, Vec<f64>, usize), ThermoError> {
        if t <= POWER_SAFE_T + 1e-12 {
            return self.power_eigenvalue(t);
        }
        self.tracked_eigenvalue(t)
    }

    fn power_eigenvalue(&self, t: f64) -> Result<(f64, Vec<f64>, usize), ThermoError> {
        let dim = self.n + 1;
        let a = self.assemble_conjugated(t);
        let mut v = vec![1.0; dim];
        let mut w = vec![0.0; dim];
        let mut lambda_prev = f64::NAN;
        let mut iters = 0;
        let mut converged = false;
        for iter in 1..=MAX_POWER_ITERS {
            iters = iter;
            mat_vec(&a, &v, &mut w);
            let num: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
            let den: f64 = v.iter().map(|x| x * x).sum();
            let lambda = num / den;
            if !lambda.is_finite() {
                return Err(ThermoError::NoConvergence { t });
            }
            let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if scale == 0.0 {
                return Err(ThermoError::NoConvergence { t });
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / scale;
            }
            if iter >= 4 && (lambda - lambda_prev).abs() <= POWER_TOL * lambda.abs() {
                lambda_prev = lambda;
                converged = true;
                break;
            }
            lambda_prev = lambda;
        }
        if !converged {
            return Err(ThermoError::NoConvergence { t });
        }
        let lambda = lambda_prev;
        check_positive(t, lambda, &mut v)?;
        Ok((lambda, v, iters))
    }

    fn tracked_eigenvalue(&self, t: f64) -> Result<(f64, Vec<f64>, usize), ThermoError> {
        // Rung k sits at t = 2.75 + 0.25·k; find the last rung at or below t.
        let idx = ((t - POWER_SAFE_T) / LADDER_STEP).floor() as usize + 1;
        let (anchor_t, anchor_log, slope, v0) = {
            let mut ladder = self.ladder.lock().expect("ladder lock");
            if ladder.is_empty() {
                for tk in [POWER_SAFE_T - LADDER_STEP, POWER_SAFE_T] {
                    let (lambda, v, _) = self.power_eigenvalue(tk)?;
                    ladder.push(Rung {
                        t: tk,
                        log_lambda: lambda.ln(),
                        v,
                    });
                }
            }
            while ladder.len() <= idx {
                let k = ladder.len();
                let tk = POWER_SAFE_T + LADDER_STEP * (k as f64 - 1.0);
                let prev = &ladder[k - 1];
                let older = &ladder[k - 2];
                let slope = (prev.log_lambda - older.log_lambda) / (prev.t - older.t);
                let mu = (prev.log_lambda + slope * (tk - prev.t)).exp();
                let a = self.assemble_conjugated(tk);
                let (lambda, mut v, _) = inverse_iteration(&a, self.n + 1, mu, &prev.v, tk)?;
                // The pressure is strictly decreasing; a non-decreasing step
                // means the continuation grabbed a spurious branch.
                if !(lambda > 0.0) || lambda.ln() >= prev.log_lambda {
                    return Err(ThermoError::NoConvergence { t: tk });
                }
                check_positive(tk, lambda, &mut v)?;
                ladder.push(Rung {
                    t: tk,
                    log_lambda: lambda.ln(),
                    v,
                });
            }
            let anchor = &ladder[idx];
            let older = &ladder[idx - 1];
            let slope = (anchor.log_lambda - older.log_lambda) / (anchor.t - older.t);
            (anchor.t, anchor.log_lambda, slope, anchor.v.clone())
        };
        let mu = (anchor_log + slope * (t - anchor_t)).exp();
        let a = self.assemble_conjugated(t);
        let (lambda, mut v, iters) = inverse_iteration(&a, self.n + 1, mu, &v0, t)?;
        check_positive(t, lambda, &mut v)?;
        Ok((lambda, v, iters))
    }
}

fn mat_vec(a: &[f64], v: &[f64], out: &mut [f64]) {
    let dim = v.len();
    for (i, oi) in out.iter_mut().enumerate() {
        *oi = a[i * dim..(i + 1) * dim]
            .iter()
            .zip(v)
            .map(|(aij, vj)| aij * vj)
            .sum();
    }
}

/// Sign-normalize by the largest component and require the rest of the
/// vector to be positive up to rounding dust.
fn check_positive(t: f64, lambda: f64, v: &mut [f64]) -> Result<(), ThermoError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ThermoError::LostPositivity { t });
    }
    let (imax, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty eigenvector");
    if v[imax] < 0.0 {
        for vi in v.iter_mut() {
            *vi = -*vi;
        }
    }
    let max = v[imax].abs();
    if v.iter().any(|&vi| vi < -1e-9 * max) {
        return Err(ThermoError::LostPositivity { t });
    }
    Ok(())
}

/// Shift-and-invert iteration: converge to the eigenvalue of `a` nearest
/// the shift `mu`, starting from `start`. Returns (λ, eigenvector, iters).
fn inverse_iteration(
    a: &[f64],
    dim: usize,
    mu: f64,
    start: &[f64],
    t: f64,
) -> Result<(f64, Vec<f64>, usize), ThermoError> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(ThermoError::NoConvergence { t });
    }
    let mut shifted = a.to_vec();
    for i in 0..dim {
        shifted[i * dim + i] -= mu;
    }
    let mut perm = vec![0usize; dim];
    lu_factor(&mut shifted, dim, &mut perm);
    let mut x = start.to_vec();
    let mut ax = vec![0.0; dim];
    let mut lambda_prev = f64::NAN;
    let mut lambda;
    let mut streak = 0;
    let mut window = [0.0f64; INVERSE_WINDOW];
    for iter in 1..=MAX_INVERSE_ITERS {
        lu_solve(&shifted, dim, &perm, &mut x);
        // Normalize by the component of largest modulus, keeping its sign,
        // so the orientation is stable across iterations.
        let (imax, _) = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty");
        let pivot = x[imax];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(ThermoError::NoConvergence { t });
        }
        for xi in x.iter_mut() {
            *xi /= pivot;
        }
        mat_vec(a, &x, &mut ax);
        let num: f64 = ax.iter().zip(&x).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|v| v * v).sum();
        lambda = num / den;
        if !lambda.is_finite() {
            return Err(ThermoError::NoConvergence { t });
        }
        if (lambda - lambda_prev).abs() <= INVERSE_TOL * lambda.abs() {
            streak += 1;
            if streak >= 2 {
                return Ok((lambda, x, iter));
            }
        } else {
            streak = 0;
        }
        window[iter % INVERSE_WINDOW] = lambda;
        if iter >= 3 * INVERSE_WINDOW && iter % INVERSE_WINDOW == 0 {
            let lo = window.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            let hi = window.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            if hi - lo <= INVERSE_BAND * hi.abs() {
                let mean = window.iter().sum::<f64>() / INVERSE_WINDOW as f64;
                return Ok((mean, x, iter));
            }
        }
        lambda_prev = lambda;
    }
    Err(ThermoError::NoConvergence { t })
}

/// In-place LU with partial pivoting (row-major, tiny fixed dimension).
fn lu_factor(a: &mut [f64], dim: usize, perm: &mut [usize]) {
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    for col in 0..dim {
        let mut pivot_row = col;
        let mut pivot_val = a[perm[col] * dim + col].abs();
        for (r, &pr) in perm.iter().enumerate().skip(col + 1) {
            let v = a[pr * dim + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        perm.swap(col, pivot_row);
        let prow = perm[col];
        let mut pivot = a[prow * dim + col];
        if pivot == 0.0 {
            // Exactly singular shift: nudge the pivot; inverse iteration
            // only needs the solve direction.
            pivot = f64::MIN_POSITIVE;
            a[prow * dim + col] = pivot;
        }
        for &r in perm.iter().skip(col + 1) {
            let factor = a[r * dim + col] / pivot;
            a[r * dim + col] = factor;
            for c in col + 1..dim {
                a[r * dim + c] -= factor * a[prow * dim + c];
            }
        }
    }
}

fn lu_solve(lu: &[f64], dim: usize, perm: &[usize], b: &mut [f64]) {
    let mut y = vec![0.0; dim];
    for i in 0..dim {
        let mut s = b[perm[i]];
        for (j, &yj) in y.iter().enumerate().take(i) {
            s -= lu[perm[i] * dim + j] * yj;
        }
        y[i] = s;
    }
    for i in (0..dim).rev() {
        let mut s = y[i];
        for j in i + 1..dim {
            s -= lu[perm[i] * dim + j] * b[j];
        }
        b[i] = s / lu[perm[i] * dim + i];
    }
}

/// Pressure at one t.
#[derive(Debug, Clone)]
pub struct PressureValue {
    /// P(t) = log λ(t).
    pub value: f64,
    pub lambda: f64,
    /// Power-iteration steps used.
    pub iters: usize,
}

/// One point of the rate-function spectrum.
#[derive(Debug, Clone)]
pub struct RatePoint {
    pub alpha: f64,
    /// The Legendre parameter: −P′(t_alpha) = alpha.
    pub t_alpha: f64,
    /// b(α) = (P(t_α) + t_α·α)/α; the rate is I(α) = α·(1 − b(α)).
    pub b_alpha: f64,
    pub rate: f64,
    /// I′(α) = 1 − t_α.
    pub rate_prime: f64,
    pub pressure_at_t: f64,
    /// Newton/bisection steps in the Legendre solve.
    pub solver_iters: usize,
    /// |P(t_α) on the base grid − on the refined grid| (degree +8, double
    /// the branch cutoff): a computable witness that the discretization is
    /// converged at this point.
    pub refinement_delta: f64,
}

/// Pressure solver with a base and a refined discretization.
pub struct PressureSolver {
    base: Grid,
    fine: Grid,
}

impl PressureSolver {
    pub fn new(params: ThermoParams) -> Self {
        assert!(params.n_basis >= 8, "n_basis too small for the Taylor tail");
        assert!(params.branch_cutoff >= 16, "branch cutoff too small");
        Self {
            base: Grid::new(params.n_basis, params.branch_cutoff),
            fine: Grid::new(params.n_basis + 8, params.branch_cutoff * 2),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.base.nodes
    }

    fn check_domain(t: f64) -> Result<(), ThermoError> {
        if !(t > 0.5005) || !t.is_finite() {
            return Err(ThermoError::OutOfDomain { t });
        }
        Ok(())
    }

    /// Apply the discretized operator to nodal values on the base grid.
    pub fn apply_operator(&self, t: f64, values: &[f64]) -> Result<Vec<f64>, ThermoError> {
        Self::check_domain(t)?;
        let dim = self.base.n + 1;
        assert_eq!(values.len(), dim, "values must live on the solver's nodes");
        let a = self.base.assemble(t);
        Ok((0..dim)
            .map(|i| {
                a[i * dim..(i + 1) * dim]
                    .iter()
                    .zip(values)
                    .map(|(aij, vj)| aij * vj)
                    .sum()
            })
            .collect())
    }

    pub fn pressure(&self, t: f64) -> Result<PressureValue, ThermoError> {
        Self::check_domain(t)?;
        let (lambda, _, iters) = self.base.leading_eigenvalue(t)?;
        Ok(PressureValue {
            value: lambda.ln(),
            lambda,
            iters,
        })
    }

    /// Pressure on the refined grid (degree +8, branch cutoff ×2).
    pub fn pressure_refined(&self, t: f64) -> Result<PressureValue, ThermoError> {
        Self::check_domain(t)?;
        let (lambda, _, iters) = self.fine.leading_eigenvalue(t)?;
        Ok(PressureValue {
            value: lambda.ln(),
            lambda,
            iters,
        })
    }

    /// |P_base(t) − P_fine(t)|.
    pub fn refinement_delta(&self, t: f64) -> Result<f64, ThermoError> {
        Ok((self.pressure(t)?.value - self.pressure_refined(t)?.value).abs())
    }

    /// P′(t) by Richardson-extrapolated central differences.
    pub fn pressure_derivative(&self, t: f64) -> Result<f64, ThermoError> {
        let h = DERIVATIVE_H * (2.0 * t - 1.0).min(1.0);
        let d = |h: f64| -> Result<f64, ThermoError> {
            Ok((self.pressure(t + h)?.value - self.pressure(t - h)?.value) / (2.0 * h))
        };
        let d1 = d(h)?;
        let d2 = d(h / 2.0)?;
        Ok((4.0 * d2 - d1) / 3.0)
    }

    /// P″(t) by a central second difference (Newton curvature; also the
    /// asymptotic variance of 2·log q_n / n at t = 1).
    pub fn pressure_second_derivative(&self, t: f64) -> Result<f64, ThermoError> {
        let h = CURVATURE_H;
        let p0 = self.pressure(t)?.value;
        let pp = self.pressure(t + h)?.value;
        let pm = self.pressure(t - h)?.value;
        Ok((pp - 2.0 * p0 + pm) / (h * h))
    }

    /// Solve −P′(t_α) = α and assemble the Legendre data at α.
    ///
    /// Safeguarded Newton: every iterate stays inside a sign-confirmed
    /// bracket, with bisection whenever the Newton step leaves it. `warm`
    /// seeds the first iterate (used when walking an α grid).
    pub fn rate_point(&self, alpha: f64, warm: Option<f64>) -> Result<RatePoint, ThermoError> {
        // −P′ decreases strictly from −P′(lo) to its infimum 2 ln φ, which
        // it never attains, so any α at or below the infimum has no
        // preimage and anything at or above −P′(lo) would need t closer to
        // the t = 1/2 pole than the bracket allows.
        if !alpha.is_finite() || alpha <= crate::min_growth_rate() {
            return Err(ThermoError::AlphaOutOfRange { alpha });
        }
        let (mut lo, mut hi) = T_BRACKET;
        let g = |t: f64| -> Result<f64, ThermoError> {
            Ok(-self.pressure_derivative(t)? - alpha)
        };
        if g(lo)? <= 0.0 {
            return Err(ThermoError::AlphaOutOfRange { alpha });
        }
        let mut t = match warm {
            Some(w) if w > lo && w < hi => w,
            _ => 1.0,
        };
        let mut iters = 0;
        let mut residual = f64::INFINITY;
        let mut solved = false;
        for iter in 1..=MAX_NEWTON_ITERS {
            iters = iter;
            let gt = g(t)?;
            residual = gt.abs();
            if residual <= RATE_RESIDUAL_TARGET {
                solved = true;
                break;
            }
            if gt > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let curv = -self.pressure_second_derivative(t)?; // g′(t) < 0
            let newton = t - gt / curv;
            let next = if curv < 0.0 && newton > lo && newton < hi && newton.is_finite() {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 1e-14 * t.abs() {
                // The bracket has collapsed to rounding width; accept only
                // if the residual is already within the documented bound.
                if residual < 1e-8 {
                    solved = true;
                    t = next;
                    break;
                }
                return Err(ThermoError::SolveStalled { alpha, residual });
            }
            t = next;
        }
        if !solved {
            return Err(ThermoError::SolveStalled { alpha, residual });
        }
        let p = self.pressure(t)?.value;
        let refinement_delta = (p - self.pressure_refined(t)?.value).abs();
        Ok(RatePoint {
            alpha,
            t_alpha: t,
            b_alpha: (p + t * alpha) / alpha,
            rate: (1.0 - t) * alpha - p,
            rate_prime: 1.0 - t,
            pressure_at_t: p,
            solver_iters: iters,
            refinement_delta,
        })
    }

    /// Rate-function data over an α grid. The grid is split into contiguous
    /// chunks, one per worker; within a chunk each solve warm-starts from
    /// the previous point. Output order matches the input, and results for
    /// a fixed worker count are deterministic.
    pub fn spectrum(
        &self,
        alphas: &[f64],
        workers: usize,
    ) -> Vec<Result<RatePoint, ThermoError>> {
        let workers = workers.max(1).min(alphas.len().max(1));
        if workers <= 1 || alphas.len() <= 1 {
            return self.chunk_spectrum(alphas);
        }
        let chunk = alphas.len().div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = alphas
                .chunks(chunk)
                .map(|part| scope.spawn(move || self.chunk_spectrum(part)))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("spectrum worker panicked"))
                .collect()
        })
    }

    fn chunk_spectrum(&self, alphas: &[f64]) -> Vec<Result<RatePoint, ThermoError>> {
        let mut warm = None;
        alphas
            .iter()
            .map(|&alpha| {
                let r = self.rate_point(alpha, warm);
                if let Ok(ref p) = r {
                    warm = Some(p.t_alpha);
                }
                r
            })
            .collect()
    }
}
