//! Finite-difference stencils on uniform grids.
//!
//! Two stencil families are used deliberately side by side:
//!
//! - compact second-order stencils ([`derivative_second_order`],
//!   [`second_derivative_second_order`]) drive the time stepping, where a
//!   three-point coupling keeps the implicit Jacobian tridiagonal and the
//!   truncation error is absorbed by the O(h^2) scheme anyway;
//! - nine-point eighth-order stencils ([`derivative_high_order`],
//!   [`second_derivative_high_order`]) drive the pointwise curvature
//!   diagnostics, whose acceptance tolerances sit many orders of magnitude
//!   below what a three-point stencil can deliver near `r_min`.
//!
//! All weights come from Fornberg's recursion ([`fd_weights`]), so one tested
//! routine covers interior, shifted, and one-sided windows alike.

/// Width of the high-order window.
pub const HIGH_ORDER_WIDTH: usize = 9;

/// Weights `w_j` such that `sum_j w_j u(x_j)` approximates the `order`-th
/// derivative of `u` at `x0`, for arbitrary distinct nodes `xs`.
///
/// This is Fornberg's classical recursion; it is exact (up to rounding) for
/// polynomials of degree `xs.len() - 1`, which fixes the approximation order
/// to `xs.len() - order` on general windows.
pub fn fd_weights(order: usize, x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(order < n, "need more nodes than the derivative order");
    // c[k][j]: weight of node j for the k-th derivative, built incrementally
    // over the leading nodes. The new-node column must be formed from the
    // previous column *before* that column is updated for the new node, which
    // is why it sits inside the node loop at j = i - 1.
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = order.min(i);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.pop().expect("order + 1 rows were allocated")
}

/// Weight rows for a sliding window of `HIGH_ORDER_WIDTH` unit-spaced nodes:
/// row `k` differentiates at the `k`-th node of the window.
fn high_order_rows(order: usize) -> Vec<Vec<f64>> {
    let xs: Vec<f64> = (0..HIGH_ORDER_WIDTH).map(|j| j as f64).collect();
    (0..HIGH_ORDER_WIDTH)
        .map(|k| fd_weights(order, k as f64, &xs))
        .collect()
}

fn apply_high_order(values: &[f64], spacing: f64, order: usize) -> Vec<f64> {
    let n = values.len();
    assert!(
        n >= HIGH_ORDER_WIDTH,
        "high-order stencils need at least {HIGH_ORDER_WIDTH} nodes"
    );
    let rows = high_order_rows(order);
    let scale = spacing.powi(order as i32).recip();
    (0..n)
        .map(|i| {
            // Center the window on node i where possible; clamp it inside
            // the array near the ends (shifted, still full width).
            let start = i.saturating_sub(HIGH_ORDER_WIDTH / 2).min(n - HIGH_ORDER_WIDTH);
            let k = i - start;
            let window = &values[start..start + HIGH_ORDER_WIDTH];
            let row = &rows[k];
            let mut acc = 0.0;
            for (w, v) in row.iter().zip(window) {
                acc += w * v;
            }
            acc * scale
        })
        .collect()
}

/// First derivative, nine-point windows: eighth order in the interior,
/// shifted full-width windows near the ends.
pub fn derivative_high_order(values: &[f64], spacing: f64) -> Vec<f64> {
    apply_high_order(values, spacing, 1)
}

/// Second derivative, nine-point windows (companion to
/// [`derivative_high_order`]).
pub fn second_derivative_high_order(values: &[f64], spacing: f64) -> Vec<f64> {
    apply_high_order(values, spacing, 2)
}

/// First derivative, second order: three-point central in the interior,
/// three-point one-sided at the two ends.
pub fn derivative_second_order(values: &[f64], spacing: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "second-order stencils need at least 4 nodes");
    let mut out = vec![0.0; n];
    let inv2h = 1.0 / (2.0 * spacing);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv2h;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv2h;
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv2h;
    out
}

/// Second derivative, second order: three-point central in the interior,
/// four-point one-sided at the two ends.
pub fn second_derivative_second_order(values: &[f64], spacing: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "second-order stencils need at least 4 nodes");
    let mut out = vec![0.0; n];
    let invh2 = 1.0 / (spacing * spacing);
    out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) * invh2;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) * invh2;
    }
    out[n - 1] =
        (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) * invh2;
    out
}
