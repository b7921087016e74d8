//! Uniform radial grids.

use crate::error::{Error, Result};

/// Minimum number of grid nodes accepted by [`build_grid`]. The high-order
/// curvature stencils span nine nodes, so anything smaller could not even
/// hold one interior window.
pub const MIN_POINTS: usize = 16;

/// A uniform one-dimensional grid on `[r_min, r_max]`.
///
/// Nodes are `r_i = r_min + i * spacing` for `i = 0 .. n_points`, with the
/// last node pinned to `r_max` exactly (no accumulated rounding).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n_points: usize,
    spacing: f64,
}

impl RadialGrid {
    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Distance between adjacent nodes, `(r_max - r_min) / (n_points - 1)`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// The `i`-th node. Endpoints are returned exactly.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        if i == 0 {
            self.r_min
        } else if i == self.n_points - 1 {
            self.r_max
        } else {
            self.r_min + i as f64 * self.spacing
        }
    }

    /// All nodes in order.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Whether `r` lies in the closed interval `[r_min, r_max]`.
    pub fn contains(&self, r: f64) -> bool {
        r.is_finite() && r >= self.r_min && r <= self.r_max
    }

    /// Cell index `i` and fraction `theta in [0, 1]` such that
    /// `r = (1 - theta) * node(i) + theta * node(i + 1)`.
    pub(crate) fn locate(&self, r: f64) -> Result<(usize, f64)> {
        if !self.contains(r) {
            return Err(Error::Domain(format!(
                "radius {r} outside grid [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        let i = (((r - self.r_min) / self.spacing) as usize).min(self.n_points - 2);
        let theta = ((r - self.node(i)) / self.spacing).clamp(0.0, 1.0);
        Ok((i, theta))
    }
}

/// Builds a uniform grid on `[r_min, r_max]` with `n_points` nodes.
///
/// Requires `0 < r_min < r_max`, both finite, and `n_points >= 16`.
pub fn build_grid(r_min: f64, r_max: f64, n_points: usize) -> Result<RadialGrid> {
    if !r_min.is_finite() || !r_max.is_finite() || r_min <= 0.0 {
        return Err(Error::Domain(format!(
            "grid bounds must be finite with r_min > 0, got [{r_min}, {r_max}]"
        )));
    }
    if r_max <= r_min {
        return Err(Error::Domain(format!(
            "grid needs r_max > r_min, got [{r_min}, {r_max}]"
        )));
    }
    if n_points < MIN_POINTS {
        return Err(Error::Domain(format!(
            "grid needs at least {MIN_POINTS} nodes, got {n_points}"
        )));
    }
    let spacing = (r_max - r_min) / (n_points - 1) as f64;
    Ok(RadialGrid {
        r_min,
        r_max,
        n_points,
        spacing,
    })
}
