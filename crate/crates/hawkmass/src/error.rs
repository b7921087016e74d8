//! Error type shared by the whole crate, with the CLI exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of an operation (radius off
    /// the grid, non-consecutive flow states, empty trace list, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Initial data places a horizon (a root of `1 - 2m(r)/r`) inside the
    /// computational domain; the profile `f` is not defined there.
    #[error("horizon inside computational domain: {0}")]
    Horizon(String),

    /// Initial data fails strict positivity of the scalar curvature, which
    /// the mass-aspect construction requires (`R = 4 m'(r) / r^2`).
    #[error("initial data violates positive scalar curvature: {0}")]
    NonPositiveCurvature(String),

    /// A time step produced a non-finite or non-positive profile.
    #[error("time integration became unstable: {0}")]
    Stability(String),

    /// The implicit (Crank-Nicolson) solve ran out of Newton iterations.
    #[error("Newton iteration failed to converge after {iters} iterations (update norm {residual:.3e})")]
    Convergence { iters: usize, residual: f64 },

    /// The surface speed `H/R` was requested where `|R|` sits below the
    /// singularity guard.
    #[error("singular surface speed: |R| = {scalar:.3e} below guard {guard:.3e}")]
    SingularSpeed { scalar: f64, guard: f64 },

    /// A config file or sweep specification could not be parsed or validated.
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// Filesystem I/O failed while writing run artifacts.
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the CLI.
    ///
    /// Bad input (config, domain, horizon, curvature-sign violations) exits 2,
    /// numerical failures (instability, non-convergence, singular speed that
    /// escapes the per-sphere guard handling) exit 3, and I/O failures exit 1.
    /// Exit 4 (every tracked sphere on the singularity guard at t = 0) is
    /// decided by the simulate command, not by an error variant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Domain(_)
            | Error::Horizon(_)
            | Error::NonPositiveCurvature(_) => 2,
            Error::Stability(_) | Error::Convergence { .. } | Error::SingularSpeed { .. } => 3,
            Error::Io { .. } => 1,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
