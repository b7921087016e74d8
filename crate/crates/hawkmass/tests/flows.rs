//! Numerical-behavior tests of the metric flow and the recorded traces:
//! second-order convergence for both steppers, preservation of the
//! asymptotically flat far zone, boundedness of f_t, and the per-trace
//! invariants (observed vs formula rate, sign antisymmetry, monotone radius
//! motion, and the r/2 leading term).

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hawkmass::config::parse_config;
use hawkmass::flow::{deturck_rhs, stable_dt, step_deturck, FlowState, Scheme, SchemeConfig};
use hawkmass::grid::build_grid;
use hawkmass::profile::perturbed_ale_profile;
use hawkmass::sim::{cmd_simulate, SimulateOutcome};
use hawkmass::surface::{mass_rate, partial_t_mass, SpeedKind};

fn forward_run() -> &'static SimulateOutcome {
    static RUN: OnceLock<SimulateOutcome> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("output.directory = {}\n", dir.path().display());
        let config = parse_config(&text).unwrap();
        cmd_simulate(&config).unwrap()
    })
}

/// Nodal Hawking mass at a node shared by three nested grids after evolving
/// the mass-aspect family to t = 0.02 with the given scheme.
fn richardson_order(scheme: SchemeConfig) -> f64 {
    let base = 512usize;
    let t_obs = 0.02;
    let k = ((base - 1) as f64 * 0.05).round() as usize;
    let observe = |level: usize| -> f64 {
        let n = level * (base - 1) + 1;
        let g = build_grid(3.0, 200.0, n).unwrap();
        let prof = perturbed_ale_profile(1.0, 1.0, &g).unwrap();
        let r_obs = g.node(level * k);
        let mut state = FlowState::new(prof, vec![]).unwrap();
        while state.t < t_obs {
            let dt = stable_dt(&state.profile, &scheme).min(t_obs - state.t);
            state = step_deturck(&state, dt, &scheme).unwrap();
        }
        let f = state.profile.f()[level * k];
        0.5 * r_obs * (1.0 - 1.0 / (f * f))
    };
    let (coarse, medium, fine) = (observe(1), observe(2), observe(4));
    ((coarse - medium) / (medium - fine)).abs().log2()
}

#[test]
fn explicit_stepper_converges_at_second_order() {
    let order = richardson_order(SchemeConfig::default());
    assert!(
        (1.7..=2.3).contains(&order),
        "explicit Euler order {order:.3} outside [1.7, 2.3]"
    );
}

#[test]
fn crank_nicolson_stepper_converges_at_second_order() {
    let scheme = SchemeConfig {
        scheme: Scheme::CrankNicolson,
        ..SchemeConfig::default()
    };
    let order = richardson_order(scheme);
    assert!(
        (1.7..=2.3).contains(&order),
        "Crank-Nicolson order {order:.3} outside [1.7, 2.3]"
    );
}

/// The far zone (r > r_max / 2) must stay asymptotically flat: none of
/// sup|f - 1|, sup|r f_r|, sup|r^2 f_rr| may grow by more than the factor
/// (1 + 10 * t_end * spacing) over the default run.
#[test]
fn far_zone_decay_is_preserved() {
    let outcome = forward_run();
    let g = build_grid(3.0, 200.0, 2048).unwrap();
    let factor = 1.0 + 10.0 * outcome.final_t * g.spacing();
    let pairs = [
        (
            "sup|f - 1|",
            outcome.decay_start.sup_f_minus_1,
            outcome.decay_end.sup_f_minus_1,
        ),
        (
            "sup|r f_r|",
            outcome.decay_start.sup_r_fr,
            outcome.decay_end.sup_r_fr,
        ),
        (
            "sup|r^2 f_rr|",
            outcome.decay_start.sup_r2_frr,
            outcome.decay_end.sup_r2_frr,
        ),
    ];
    for (name, start, end) in pairs {
        assert!(
            end <= factor * start,
            "{name} grew {start:.6e} -> {end:.6e}, allowed factor {factor:.4}"
        );
    }
}

/// The PDE right-hand side stays bounded along the run: its sup at any
/// sampled time is at most twice the initial sup on the default family.
#[test]
fn deturck_rhs_stays_bounded() {
    let g = build_grid(3.0, 200.0, 2048).unwrap();
    let prof = perturbed_ale_profile(1.0, 1.0, &g).unwrap();
    let scheme = SchemeConfig::default();
    let mut state = FlowState::new(prof, vec![]).unwrap();
    let sup = |p: &hawkmass::profile::MetricProfile| {
        deturck_rhs(p).iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    };
    let initial = sup(&state.profile);
    let mut worst = initial;
    while state.t < 0.2 {
        let dt = stable_dt(&state.profile, &scheme).min(0.2 - state.t);
        state = step_deturck(&state, dt, &scheme).unwrap();
        if state.step_count.is_multiple_of(10) {
            worst = worst.max(sup(&state.profile));
        }
    }
    assert!(
        worst <= 2.0 * initial,
        "max|f_t| grew from {initial:.6e} to {worst:.6e}"
    );
}

/// The finite-difference mass rate recorded in the traces agrees with the
/// midpoint of the adjacent formula rates to C * (dt + spacing^2).
#[test]
fn observed_rates_track_the_formula() {
    let outcome = forward_run();
    let g = build_grid(3.0, 200.0, 2048).unwrap();
    let h2 = g.spacing() * g.spacing();
    for trace in &outcome.traces {
        for pair in trace.samples.windows(2) {
            let dt = pair[1].t - pair[0].t;
            let expected = 0.5 * (pair[0].rate_formula + pair[1].rate_formula);
            let tol = 100.0 * (dt + h2);
            assert!(
                (pair[1].rate_observed - expected).abs() <= tol,
                "observed {:.9e} vs formula midpoint {expected:.9e} at t = {:.6e}, r(0) = {} \
                 (tolerance {tol:.3e})",
                pair[1].rate_observed,
                pair[1].t,
                trace.initial_radius
            );
        }
    }
}

/// Forward and backward rates at the same state differ only in the sign of
/// the speed term: their sum is exactly twice the partial_t term.
#[test]
fn rates_are_antisymmetric_in_the_speed_sign() {
    let g = build_grid(3.0, 200.0, 2048).unwrap();
    let prof = perturbed_ale_profile(1.0, 1.0, &g).unwrap();
    let f_t = deturck_rhs(&prof);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let r = rng.gen_range(3.05..195.0);
        let fw = mass_rate(&prof, &f_t, r, SpeedKind::Forward).unwrap();
        let bw = mass_rate(&prof, &f_t, r, SpeedKind::Backward).unwrap();
        let partial = partial_t_mass(&prof, &f_t, r).unwrap();
        assert!(
            (fw + bw - 2.0 * partial).abs() <= 1e-13 * (fw.abs() + bw.abs()).max(1.0),
            "antisymmetry broken at r = {r}: fw {fw:.17e}, bw {bw:.17e}, partial {partial:.17e}"
        );
    }
}

/// Forward speed with R > 0 moves every tracked sphere strictly outward.
#[test]
fn forward_radii_move_strictly_outward() {
    let outcome = forward_run();
    for trace in &outcome.traces {
        for pair in trace.samples.windows(2) {
            assert!(
                pair[1].r > pair[0].r,
                "sphere r(0) = {} moved inward: {} -> {}",
                trace.initial_radius,
                pair[0].r,
                pair[1].r
            );
        }
    }
}

/// dm/dt = r/2 + (bounded remainder) on the default family: the recorded
/// formula rate never strays from r/2 by more than a constant independent
/// of the radius.
#[test]
fn rate_leading_term_is_r_over_two() {
    let outcome = forward_run();
    for trace in &outcome.traces {
        for s in &trace.samples {
            let remainder = (s.rate_formula - s.r / 2.0).abs();
            assert!(
                remainder <= 1.5,
                "remainder {remainder:.6e} at r = {} (rate {:.9e})",
                s.r,
                s.rate_formula
            );
        }
    }
}
