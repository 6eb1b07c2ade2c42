//! Chebyshev–Gauss–Lobatto collocation on [0, 1].
//!
//! The transfer-operator eigenproblem is discretized on the Lobatto grid
//! x_j = (1 + cos(jπ/N))/2, j = 0..N (descending, x_0 = 1, x_N = 0).
//! Functions live as vectors of nodal values; off-grid evaluation uses the
//! numerically stable barycentric formula, and Chebyshev coefficients give
//! endpoint Taylor data (the operator's far-branch tail needs derivatives
//! of the iterate at x = 0).

/// Lobatto nodes on [0, 1], descending: x_j = (1 + cos(jπ/N))/2.
/// `n` is the polynomial degree; the grid has n + 1 points.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 2, "need at least degree 2");
    (0..=n)
        .map(|j| {
            // cos is exact at the endpoints in spirit but not in floats;
            // pin them so interval-edge logic sees exact 0 and 1.
            if j == 0 {
                1.0
            } else if j == n {
                0.0
            } else {
                0.5 * (1.0 + (j as f64 * std::f64::consts::PI / n as f64).cos())
            }
        })
        .collect()
}

/// Barycentric weights for the Lobatto grid: (−1)^j, halved at both ends.
/// (A common scale factor cancels in the barycentric ratio, so these are
/// valid on [0, 1] unchanged.)
pub fn barycentric_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// Evaluate the polynomial interpolant of `values` on `nodes` at `x`
/// (second barycentric formula, with an exact-node short circuit).
pub fn barycentric_eval(nodes: &[f64], weights: &[f64], values: &[f64], x: f64) -> f64 {
    debug_assert_eq!(nodes.len(), values.len());
    debug_assert_eq!(nodes.len(), weights.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&xj, &wj), &fj) in nodes.iter().zip(weights).zip(values) {
        let d = x - xj;
        if d == 0.0 {
            return fj;
        }
        let r = wj / d;
        num += r * fj;
        den += r;
    }
    num / den
}

/// The cardinal-function row at `x`: out[j] = ℓ_j(x), so that
/// p(x) = Σ_j out[j]·values[j] for any nodal data.
pub fn cardinal_row(nodes: &[f64], weights: &[f64], x: f64, out: &mut [f64]) {
    debug_assert_eq!(nodes.len(), weights.len());
    debug_assert_eq!(nodes.len(), out.len());
    let mut den = 0.0;
    let mut hit = None;
    for (j, (&xj, &wj)) in nodes.iter().zip(weights).enumerate() {
        let d = x - xj;
        if d == 0.0 {
            hit = Some(j);
            break;
        }
        let r = wj / d;
        out[j] = r;
        den += r;
    }
    if let Some(j) = hit {
        out.fill(0.0);
        out[j] = 1.0;
        return;
    }
    for v in out.iter_mut() {
        *v /= den;
    }
}

/// Chebyshev coefficients of the Lobatto interpolant: returns `a` with
/// p(x) = Σ_{r=0..N} a_r · T_r(2x − 1) exactly at the nodes.
/// Direct O(N²) cosine sums; the grids used here are tiny.
pub fn chebyshev_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    assert!(n >= 2);
    let mut coeffs = vec![0.0; n + 1];
    for (r, c) in coeffs.iter_mut().enumerate() {
        let mut s = 0.5 * values[0]; // j = 0: cos(0) = 1, halved
        for (j, &fj) in values.iter().enumerate().take(n).skip(1) {
            s += fj * (r as f64 * j as f64 * std::f64::consts::PI / n as f64).cos();
        }
        // j = N: cos(rπ) = (−1)^r, halved
        s += 0.5 * values[n] * if r % 2 == 0 { 1.0 } else { -1.0 };
        let scale = if r == 0 || r == n { 1.0 } else { 2.0 };
        *c = scale * s / n as f64;
    }
    coeffs
}

/// Nodal values from Chebyshev coefficients (inverse of
/// [`chebyshev_coefficients`] on the same Lobatto grid).
pub fn values_from_coefficients(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    assert!(n >= 2);
    (0..=n)
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .map(|(r, &c)| {
                    c * (r as f64 * j as f64 * std::f64::consts::PI / n as f64).cos()
                })
                .sum()
        })
        .collect()
}

/// Zero every Chebyshev mode above `keep` and return to nodal values.
/// For data whose true coefficients decay fast this is the identity to
/// machine precision; for grid-scale oscillation it is annihilation.
pub fn low_pass(values: &[f64], keep: usize) -> Vec<f64> {
    let mut coeffs = chebyshev_coefficients(values);
    for c in coeffs.iter_mut().skip(keep + 1) {
        *c = 0.0;
    }
    values_from_coefficients(&coeffs)
}

/// d^m/du^m T_r(u) at u = −1: (−1)^(r+m) · Π_{j=0..m−1} (r² − j²)/(2j + 1).
fn cheb_deriv_at_left(r: usize, m: usize) -> f64 {
    let r2 = (r * r) as f64;
    let mut prod = 1.0;
    for j in 0..m {
        let j2 = (j * j) as f64;
        prod *= (r2 - j2) / (2.0 * j as f64 + 1.0);
    }
    if (r + m) % 2 == 0 {
        prod
    } else {
        -prod
    }
}

/// Linear functionals extracting Taylor data at x = 0 from nodal values:
/// returns rows D_0..D_max_order with p^(m)(0) = Σ_j D_m[j]·values[j].
/// Built from the coefficient map and the endpoint derivative values of
/// T_r, with a 2^m chain factor for the [0,1] → [−1,1] map u = 2x − 1.
///
/// High orders are badly conditioned (the functional norm grows like
/// N^(2m)); callers must only use them where a strongly decaying factor
/// multiplies the result.
pub fn endpoint_derivative_functionals(n: usize, max_order: usize) -> Vec<Vec<f64>> {
    assert!(n >= 2);
    // coeff_map[r][j]: a_r = Σ_j coeff_map[r][j]·f_j (same sums as
    // `chebyshev_coefficients`, expressed as a matrix).
    let mut rows = vec![vec![0.0; n + 1]; max_order + 1];
    for r in 0..=n {
        let scale = if r == 0 || r == n { 1.0 } else { 2.0 };
        let mut row = vec![0.0; n + 1];
        row[0] = 0.5 * scale / n as f64;
        for (j, v) in row.iter_mut().enumerate().take(n).skip(1) {
            *v = scale / n as f64
                * (r as f64 * j as f64 * std::f64::consts::PI / n as f64).cos();
        }
        row[n] = 0.5 * scale / n as f64 * if r % 2 == 0 { 1.0 } else { -1.0 };
        for (m, out) in rows.iter_mut().enumerate() {
            let factor = 2f64.powi(m as i32) * cheb_deriv_at_left(r, m);
            if factor != 0.0 {
                for (o, &c) in out.iter_mut().zip(&row) {
                    *o += factor * c;
                }
            }
        }
    }
    rows
}
