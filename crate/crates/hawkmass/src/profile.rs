//! Metric profiles `f(r)` and the built-in initial-data families.
//!
//! A profile stores the nodal values of `f` in
//! `g = f(r)^2 dr^2 + r^2 g_round` together with the nodal mass aspect
//! `m_i = (r_i / 2)(1 - f_i^-2)`. Off-node evaluation interpolates the mass
//! aspect linearly and reconstructs `f = (1 - 2m/r)^{-1/2}` from it, rather
//! than interpolating `f` directly: the mass aspect is the slowly varying
//! chart (it is constant for Schwarzschild and linear wherever `f` is
//! constant), so mass readouts along moving spheres inherit no interpolation
//! wiggle inside grid cells.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Nodal metric profile for `g = f(r)^2 dr^2 + r^2 g_round` on an
/// `(n+1)`-dimensional warped product (sphere dimension `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricProfile {
    grid: RadialGrid,
    f: Vec<f64>,
    /// Cached nodal mass aspect `m_i = (r_i/2)(1 - f_i^-2)`.
    mass: Vec<f64>,
    dimension: u32,
}

impl MetricProfile {
    /// Wraps nodal values of `f`. Every value must be finite and strictly
    /// positive; positivity of `f` is exactly the no-horizon condition
    /// `2 m(r) < r` at the nodes.
    pub fn new(grid: RadialGrid, f: Vec<f64>, dimension: u32) -> Result<Self> {
        if f.len() != grid.n_points() {
            return Err(Error::Domain(format!(
                "profile has {} values for a grid of {} nodes",
                f.len(),
                grid.n_points()
            )));
        }
        if dimension == 0 {
            return Err(Error::Domain("sphere dimension must be at least 1".into()));
        }
        for (i, &fi) in f.iter().enumerate() {
            if !fi.is_finite() || fi <= 0.0 {
                return Err(Error::Domain(format!(
                    "profile value f = {fi} at node {i} (r = {}) is not finite and positive",
                    grid.node(i)
                )));
            }
        }
        let mass = f
            .iter()
            .enumerate()
            .map(|(i, &fi)| {
                let r = grid.node(i);
                0.5 * r * (1.0 - 1.0 / (fi * fi))
            })
            .collect();
        Ok(MetricProfile {
            grid,
            f,
            mass,
            dimension,
        })
    }

    /// The flat profile `f == 1` (mass aspect identically zero).
    pub fn flat(grid: RadialGrid) -> Self {
        let f = vec![1.0; grid.n_points()];
        MetricProfile::new(grid, f, 2).expect("flat profile is always valid")
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Sphere dimension `n` (2 for the 3-metrics this crate flows).
    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points()
    }

    /// Nodal mass aspect `m_i = (r_i/2)(1 - f_i^-2)`.
    pub fn mass_aspect(&self) -> &[f64] {
        &self.mass
    }

    /// Hawking mass at any radius in the domain (linear in the mass-aspect
    /// chart between nodes).
    pub fn mass_at(&self, r: f64) -> Result<f64> {
        let (i, theta) = self.grid.locate(r)?;
        Ok((1.0 - theta) * self.mass[i] + theta * self.mass[i + 1])
    }

    /// Profile value at any radius in the domain, reconstructed from the
    /// interpolated mass aspect as `f = (1 - 2m/r)^{-1/2}`.
    ///
    /// The square-root argument stays positive automatically: `r - 2m(r)` is
    /// linear across a cell and positive at both nodes.
    pub fn f_at(&self, r: f64) -> Result<f64> {
        let m = self.mass_at(r)?;
        Ok((1.0 - 2.0 * m / r).sqrt().recip())
    }

    /// Linear interpolation of an arbitrary nodal field (used for nodal
    /// derivative fields such as `f_t` or the scalar curvature).
    pub fn interp_nodal(&self, values: &[f64], r: f64) -> Result<f64> {
        if values.len() != self.n_points() {
            return Err(Error::Domain(format!(
                "nodal field has {} values for a grid of {} nodes",
                values.len(),
                self.n_points()
            )));
        }
        let (i, theta) = self.grid.locate(r)?;
        Ok((1.0 - theta) * values[i] + theta * values[i + 1])
    }
}

/// Schwarzschild initial data `f(r) = (1 - 2M/r)^{-1/2}` of mass `M`.
///
/// The domain must sit strictly outside the horizon: `r_min > 2M`.
pub fn schwarzschild_profile(mass: f64, grid: &RadialGrid) -> Result<MetricProfile> {
    if !mass.is_finite() {
        return Err(Error::Domain(format!("schwarzschild mass {mass} is not finite")));
    }
    if grid.r_min() <= 2.0 * mass {
        return Err(Error::Horizon(format!(
            "schwarzschild data of mass {mass} has its horizon at r = {}, but the grid starts at r = {}",
            2.0 * mass,
            grid.r_min()
        )));
    }
    let f = grid
        .nodes()
        .iter()
        .map(|&r| (1.0 - 2.0 * mass / r).sqrt().recip())
        .collect();
    MetricProfile::new(grid.clone(), f, 2)
}

/// Builds a profile from an arbitrary mass-aspect function via
/// `f = (1 - 2m/r)^{-1/2}`.
///
/// Requirements at every node: `0 <= 2 m(r) < r` (no horizon, non-negative
/// quasi-local mass) and `m` strictly increasing, which is positivity of the
/// scalar curvature `R = 4 m'(r) / r^2` for these metrics. The identically
/// zero mass aspect (flat data) is the one permitted degenerate case.
pub fn profile_from_mass_aspect(
    mass_aspect: impl Fn(f64) -> f64,
    grid: &RadialGrid,
) -> Result<MetricProfile> {
    let nodes = grid.nodes();
    let m: Vec<f64> = nodes.iter().map(|&r| mass_aspect(r)).collect();
    for (i, (&mi, &r)) in m.iter().zip(&nodes).enumerate() {
        if !mi.is_finite() || mi < 0.0 {
            return Err(Error::Domain(format!(
                "mass aspect m = {mi} at node {i} (r = {r}) must be finite and non-negative"
            )));
        }
        if 2.0 * mi >= r {
            return Err(Error::Domain(format!(
                "mass aspect puts a horizon in the domain: 2 m = {} >= r = {r} at node {i}",
                2.0 * mi
            )));
        }
    }
    let exactly_flat = m.iter().all(|&mi| mi == 0.0);
    if !exactly_flat {
        for (w, r) in m.windows(2).zip(nodes.windows(2)) {
            if w[1] <= w[0] {
                return Err(Error::NonPositiveCurvature(format!(
                    "mass aspect is not strictly increasing between r = {} and r = {} (m: {} -> {})",
                    r[0], r[1], w[0], w[1]
                )));
            }
        }
    }
    let f = m
        .iter()
        .zip(&nodes)
        .map(|(&mi, &r)| (1.0 - 2.0 * mi / r).sqrt().recip())
        .collect();
    MetricProfile::new(grid.clone(), f, 2)
}

/// The built-in perturbed asymptotically flat family with mass aspect
/// `m(r) = M r^3 / (r^3 + a^3)`: total mass `M`, transition scale `a`,
/// scalar curvature `R(r) = 12 M a^3 / (r^3 + a^3)^2 > 0` for `M > 0`.
///
/// `M = 0` gives exactly flat data; `M` must otherwise be positive (the
/// family's mass aspect is strictly increasing precisely then) and small
/// enough that `2 m(r) < r` across the grid.
pub fn perturbed_ale_profile(mass: f64, scale: f64, grid: &RadialGrid) -> Result<MetricProfile> {
    if !mass.is_finite() || mass < 0.0 {
        return Err(Error::Domain(format!(
            "family mass must be finite and non-negative, got {mass}"
        )));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Domain(format!(
            "family scale must be finite and positive, got {scale}"
        )));
    }
    let a3 = scale * scale * scale;
    profile_from_mass_aspect(|r| mass * r * r * r / (r * r * r + a3), grid)
}
