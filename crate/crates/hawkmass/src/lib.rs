//! Numerical study of Hawking-mass monotonicity along a gauged Ricci flow.
//!
//! The library works with rotationally symmetric asymptotically flat
//! 3-metrics written in the area radius `r` as
//!
//! ```text
//!     g = f(r)^2 dr^2 + r^2 g_round,        f -> 1 as r -> infinity,
//! ```
//!
//! where `g_round` is the unit round metric on the 2-sphere. The metric is
//! evolved by the DeTurck-gauged Ricci flow, which for this ansatz reduces to
//! a single quasilinear parabolic PDE for the profile `f(r, t)` with the flat
//! profile `f == 1` as a fixed point. Alongside the metric flow, a family of
//! tracked coordinate spheres moves in the radial direction with normal speed
//! `+H/R` (expanding) or `-H/R` (contracting), `H` the mean curvature and `R`
//! the scalar curvature of the evolving 3-metric. The quantity of interest is
//! the Hawking mass
//!
//! ```text
//!     m(r) = (r/2) (1 - f(r)^-2)
//! ```
//!
//! of each tracked sphere as a function of time, and in particular the
//! smallest tracked radius past which every sphere's mass is monotone.
//!
//! Modules:
//! - [`grid`], [`stencil`]: uniform radial grids and finite-difference stencils;
//! - [`profile`]: metric profiles and the built-in initial-data families;
//! - [`curvature`]: pointwise curvature of the ansatz and Hawking mass;
//! - [`flow`]: the DeTurck step (explicit and Crank-Nicolson), the DeTurck
//!   gauge field, a warped-product reference stepper, and the scalar
//!   curvature evolution residual;
//! - [`surface`]: sphere motion, mass-rate formulas, and the coupled run;
//! - [`diagnostics`]: monotonicity reports, decay and positivity monitors,
//!   discretization calibration, convergence-order estimates;
//! - [`config`], [`output`], [`sim`]: the config format, CSV/SVG emission,
//!   and the three CLI commands (`simulate`, `verify`, `sweep`).

pub mod config;
pub mod curvature;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod grid;
pub mod output;
pub mod profile;
pub mod sim;
pub mod stencil;
pub mod surface;

pub use error::{Error, Result};
