//! Tracked-sphere motion and the Hawking-mass rate along the coupled flow.
//!
//! Each tracked coordinate sphere `r_j(t)` moves with outward normal speed
//! `p(H) = H/R` (forward) or `-H/R` (backward), i.e. the radius obeys
//! `dr/dt = p / f` after converting proper-normal speed to the coordinate.
//! Along the motion the Hawking mass changes by
//!
//! ```text
//!     dm/dt = (1/4) r^2 R f^{-1} p(H) + r f^{-3} f_t      (composite)
//!           = +- r / (2 f^2)          + r f^{-3} f_t      (simplified)
//! ```
//!
//! where the simplification `(1/4) r^2 R f^{-1} (H/R) = r/(2 f^2)` uses
//! `f H = 2/r` and is exact wherever the composite form is defined at all.
//! The composite form keeps the `1/R` singularity of the speed; the speed
//! guard `|R| >= epsilon_r` decides where spheres may move.

use crate::curvature::{curvature, CurvatureField};
use crate::error::{Error, Result};
use crate::flow::{deturck_rhs, stable_dt, step_deturck, FlowState, SchemeConfig};
use crate::profile::MetricProfile;

/// Direction of the sphere flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedKind {
    /// Expanding: `p = H/R`, Hawking mass monotone non-decreasing.
    Forward,
    /// Contracting: `p = -H/R`, Hawking mass monotone non-increasing.
    Backward,
}

impl SpeedKind {
    /// Sign of the `p`-term in the rate formulas.
    pub fn sign(self) -> f64 {
        match self {
            SpeedKind::Forward => 1.0,
            SpeedKind::Backward => -1.0,
        }
    }
}

/// Normal speed `p(H) = +-H/R`, guarded against the `R -> 0` singularity.
pub fn speed(kind: SpeedKind, mean_curv: f64, scalar: f64, epsilon_r: f64) -> Result<f64> {
    if scalar.abs() < epsilon_r {
        return Err(Error::SingularSpeed {
            scalar,
            guard: epsilon_r,
        });
    }
    Ok(kind.sign() * mean_curv / scalar)
}

/// Interpolated coordinate velocity `dr/dt = p/f` and the interpolated
/// scalar curvature at `r`, sharing one profile lookup.
fn velocity_and_scalar(
    profile: &MetricProfile,
    scalar_field: &[f64],
    r: f64,
    kind: SpeedKind,
    epsilon_r: f64,
) -> Result<(f64, f64)> {
    let f = profile.f_at(r)?;
    let h = profile.dimension() as f64 / (r * f);
    let scalar = profile.interp_nodal(scalar_field, r)?;
    let p = speed(kind, h, scalar, epsilon_r)?;
    Ok((p / f, scalar))
}

/// One explicit Euler step of the sphere radius: `r + dt * f(r)^{-1} p(H(r))`.
///
/// Convenience form that computes the curvature field itself; the coupled
/// runner uses its cached field instead. `dt = 0` is allowed and returns `r`
/// unchanged (the guard still applies).
pub fn step_surface(
    r: f64,
    profile: &MetricProfile,
    kind: SpeedKind,
    dt: f64,
    epsilon_r: f64,
) -> Result<f64> {
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::Domain(format!("surface step needs dt >= 0, got {dt}")));
    }
    let field = curvature(profile);
    let (v, _) = velocity_and_scalar(profile, &field.scalar, r, kind, epsilon_r)?;
    let r_new = r + dt * v;
    let grid = profile.grid();
    if !(r_new > grid.r_min() && r_new < grid.r_max()) {
        return Err(Error::Domain(format!(
            "surface stepped from r = {r} to r = {r_new}, leaving ({}, {})",
            grid.r_min(),
            grid.r_max()
        )));
    }
    Ok(r_new)
}

/// Metric contribution to the mass rate at a fixed radius:
/// `partial_t m = r f^{-3} f_t`, with `f_t` the nodal DeTurck right-hand side.
pub fn partial_t_mass(profile: &MetricProfile, f_t: &[f64], r: f64) -> Result<f64> {
    let f = profile.f_at(r)?;
    let ft = profile.interp_nodal(f_t, r)?;
    Ok(r * ft / (f * f * f))
}

/// Hawking-mass rate along the moving sphere, simplified form:
/// `+- r/(2 f^2) + r f^{-3} f_t`.
///
/// The `R`-cancellation makes this form regular even where the speed itself
/// is guarded, which is why recorded traces use it; [`mass_rate_composite`]
/// keeps the literal composite expression for cross-checking.
pub fn mass_rate(profile: &MetricProfile, f_t: &[f64], r: f64, kind: SpeedKind) -> Result<f64> {
    let f = profile.f_at(r)?;
    let ft = profile.interp_nodal(f_t, r)?;
    Ok(kind.sign() * r / (2.0 * f * f) + r * ft / (f * f * f))
}

/// Hawking-mass rate in the composite form
/// `(1/4) r^2 R f^{-1} p(H) + r f^{-3} f_t`; errors below the speed guard.
pub fn mass_rate_composite(
    profile: &MetricProfile,
    f_t: &[f64],
    r: f64,
    kind: SpeedKind,
    epsilon_r: f64,
) -> Result<f64> {
    let field = curvature(profile);
    let f = profile.f_at(r)?;
    let h = profile.dimension() as f64 / (r * f);
    let scalar = profile.interp_nodal(&field.scalar, r)?;
    let p = speed(kind, h, scalar, epsilon_r)?;
    let ft = profile.interp_nodal(f_t, r)?;
    Ok(0.25 * r * r * scalar * p / f + r * ft / (f * f * f))
}

/// One record along a sphere's trace.
#[derive(Debug, Clone)]
pub struct TraceSample {
    pub t: f64,
    pub r: f64,
    pub f_at_r: f64,
    pub mean_curv: f64,
    pub scalar: f64,
    pub mass: f64,
    /// `dm/dt` from the simplified rate formula (defined everywhere).
    pub rate_formula: f64,
    /// Finite-difference rate against the previous sample; NaN on the first.
    pub rate_observed: f64,
}

/// Why a trace stopped recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStatus {
    /// The run reached `t_end` with the sphere still moving.
    Completed,
    /// A step would have left the open interval `(r_min, r_max)`.
    HitBoundary,
    /// The speed guard tripped: `|R| < epsilon_r` at the sphere, or a step
    /// would have jumped across the singular `R = 0` level set.
    SingularSpeed,
}

impl TraceStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceStatus::Completed => "completed",
            TraceStatus::HitBoundary => "hit-boundary",
            TraceStatus::SingularSpeed => "singular-speed",
        }
    }
}

/// Time series of one tracked sphere.
#[derive(Debug, Clone)]
pub struct MassTrace {
    pub sphere_index: usize,
    pub initial_radius: f64,
    pub status: TraceStatus,
    pub samples: Vec<TraceSample>,
}

struct Tracker {
    index: usize,
    initial_radius: f64,
    r: f64,
    status: Option<TraceStatus>,
    samples: Vec<TraceSample>,
    /// Last post-motion state not yet committed to the cadence; committing
    /// it on freeze guarantees every trace ends at a position the sphere
    /// actually reached, never at a held position with drifting mass.
    pending: Option<TraceSample>,
}

impl Tracker {
    fn alive(&self) -> bool {
        self.status.is_none()
    }

    fn commit_pending(&mut self) {
        if let Some(sample) = self.pending.take() {
            let newer = self
                .samples
                .last()
                .map(|last| sample.t > last.t)
                .unwrap_or(true);
            if newer {
                self.samples.push(sample);
            }
        }
    }

    fn freeze(&mut self, status: TraceStatus) {
        self.commit_pending();
        self.status = Some(status);
    }
}

fn sample_at(
    t: f64,
    r: f64,
    profile: &MetricProfile,
    field: &CurvatureField,
    f_t: &[f64],
    kind: SpeedKind,
) -> Result<TraceSample> {
    let f = profile.f_at(r)?;
    Ok(TraceSample {
        t,
        r,
        f_at_r: f,
        mean_curv: profile.dimension() as f64 / (r * f),
        scalar: profile.interp_nodal(&field.scalar, r)?,
        mass: profile.mass_at(r)?,
        rate_formula: mass_rate(profile, f_t, r, kind)?,
        rate_observed: f64::NAN,
    })
}

/// Runs the coupled metric/surface flow from `initial` to `t_end`.
///
/// Per step: the metric advances first (step size the minimum of the metric
/// scheme's stable step, one grid cell per fastest sphere, and the remaining
/// horizon), then every live sphere moves through the post-step geometry;
/// the `f_t` entering recorded rate samples is the right-hand side on the
/// pre-step profile, consistent with first-order splitting. Traces are
/// sampled every `sample_every` steps plus at every freeze and at `t_end`.
///
/// A sphere that hits the domain boundary or the speed guard freezes its
/// own trace with a status flag; only metric-stepper failures abort the run.
/// If every sphere is frozen already at the initial time (the `R(g_0) > 0`
/// hypothesis fails at all tracked radii), the run returns the single-sample
/// traces immediately.
pub fn run_coupled(
    initial: FlowState,
    kind: SpeedKind,
    scheme: &SchemeConfig,
    t_end: f64,
    sample_every: usize,
    epsilon_r: f64,
) -> Result<Vec<MassTrace>> {
    run_coupled_with_observer(initial, kind, scheme, t_end, sample_every, epsilon_r, |_, _| {})
}

/// [`run_coupled`] with a hook called at every sampling step (including the
/// initial state and the final one) with the current state and its curvature
/// field; the simulate command uses it for positivity and decay timelines.
pub fn run_coupled_with_observer(
    initial: FlowState,
    kind: SpeedKind,
    scheme: &SchemeConfig,
    t_end: f64,
    sample_every: usize,
    epsilon_r: f64,
    mut observer: impl FnMut(&FlowState, &CurvatureField),
) -> Result<Vec<MassTrace>> {
    scheme.validate()?;
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::Domain(format!("t_end must be non-negative, got {t_end}")));
    }
    if sample_every == 0 {
        return Err(Error::Domain("sample_every must be at least 1".into()));
    }
    if !epsilon_r.is_finite() || epsilon_r <= 0.0 {
        return Err(Error::Domain(format!(
            "epsilon_r must be positive, got {epsilon_r}"
        )));
    }

    let mut state = initial;
    let t_start = state.t;
    let mut field = curvature(&state.profile);
    let mut rhs_now = deturck_rhs(&state.profile);
    let grid = state.profile.grid().clone();
    let spacing = grid.spacing();

    let mut trackers: Vec<Tracker> = state
        .tracked_radii
        .iter()
        .enumerate()
        .map(|(index, &r)| Tracker {
            index,
            initial_radius: r,
            r,
            status: None,
            samples: Vec::new(),
            pending: None,
        })
        .collect();
    for tracker in &mut trackers {
        let sample = sample_at(state.t, tracker.r, &state.profile, &field, &rhs_now, kind)?;
        tracker.samples.push(sample);
    }
    observer(&state, &field);

    if t_end > t_start {
        loop {
            // Speeds on the current state: the fastest sphere limits the step
            // to one grid cell, and spheres already parked on the guard
            // freeze here (at t_start this is the R(g_0) hypothesis check).
            let mut max_rdot = 0.0f64;
            for tracker in trackers.iter_mut().filter(|tr| tr.alive()) {
                match velocity_and_scalar(&state.profile, &field.scalar, tracker.r, kind, epsilon_r)
                {
                    Ok((v, _)) => max_rdot = max_rdot.max(v.abs()),
                    Err(Error::SingularSpeed { .. }) => tracker.freeze(TraceStatus::SingularSpeed),
                    Err(other) => return Err(other),
                }
            }
            if state.t == t_start
                && !trackers.is_empty()
                && trackers.iter().all(|tr| !tr.alive())
            {
                break;
            }

            let mut dt = stable_dt(&state.profile, scheme).min(t_end - state.t);
            if max_rdot > 0.0 {
                dt = dt.min(spacing / max_rdot);
            }
            if dt.is_nan() || dt <= 0.0 {
                break;
            }

            let new_state = step_deturck(&state, dt, scheme)?;
            if new_state.t <= state.t {
                return Err(Error::Stability(format!(
                    "time step {dt} underflowed at t = {}",
                    state.t
                )));
            }
            let new_field = curvature(&new_state.profile);

            for tracker in trackers.iter_mut().filter(|tr| tr.alive()) {
                let (v, scalar_here) = match velocity_and_scalar(
                    &new_state.profile,
                    &new_field.scalar,
                    tracker.r,
                    kind,
                    epsilon_r,
                ) {
                    Ok(pair) => pair,
                    Err(Error::SingularSpeed { .. }) => {
                        tracker.freeze(TraceStatus::SingularSpeed);
                        continue;
                    }
                    Err(other) => return Err(other),
                };
                let r_new = tracker.r + dt * v;
                if !(r_new > grid.r_min() && r_new < grid.r_max()) {
                    tracker.freeze(TraceStatus::HitBoundary);
                    continue;
                }
                let scalar_new = new_state.profile.interp_nodal(&new_field.scalar, r_new)?;
                // The surface ODE is singular on the R = 0 level set (the
                // speed diverges there), so a discrete step that lands inside
                // the guard band or on the other side of the zero set means
                // the continuous sphere hit the guard mid-step. Freeze at the
                // last radius it genuinely reached.
                if scalar_new.abs() < epsilon_r || scalar_new.signum() != scalar_here.signum() {
                    tracker.freeze(TraceStatus::SingularSpeed);
                    continue;
                }
                tracker.r = r_new;
                tracker.pending = Some(sample_at(
                    new_state.t,
                    r_new,
                    &new_state.profile,
                    &new_field,
                    &rhs_now,
                    kind,
                )?);
            }

            let is_final = new_state.t >= t_end;
            if new_state.step_count % sample_every as u64 == 0 || is_final {
                for tracker in trackers.iter_mut().filter(|tr| tr.alive()) {
                    tracker.commit_pending();
                }
                observer(&new_state, &new_field);
            }

            rhs_now = deturck_rhs(&new_state.profile);
            state = new_state;
            field = new_field;
            if is_final {
                break;
            }
        }
    }

    Ok(trackers
        .into_iter()
        .map(|mut tracker| {
            if tracker.alive() {
                tracker.commit_pending();
                tracker.status = Some(TraceStatus::Completed);
            }
            let mut samples = tracker.samples;
            for k in 1..samples.len() {
                let dm = samples[k].mass - samples[k - 1].mass;
                let dt = samples[k].t - samples[k - 1].t;
                samples[k].rate_observed = dm / dt;
            }
            MassTrace {
                sphere_index: tracker.index,
                initial_radius: tracker.initial_radius,
                status: tracker.status.expect("all trackers finalized"),
                samples,
            }
        })
        .collect())
}
