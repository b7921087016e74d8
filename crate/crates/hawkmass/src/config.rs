//! Run configuration: a flat `key = value` format with dotted sections,
//! strict unknown-key rejection, a canonical echo, and sweep specifications.
//!
//! The format is deliberately primitive — one assignment per line, `#`
//! comments — so configs diff cleanly and any language can parse the echo
//! a run leaves in its summary. Parsing is strict: unknown keys, duplicate
//! keys, and invalid combinations are errors, not warnings.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::flow::{Scheme, SchemeConfig};
use crate::grid::build_grid;
use crate::surface::SpeedKind;

/// Radial grid parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
}

/// Initial-data family selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// Exact spatial Schwarzschild slice of the given mass.
    Schwarzschild { mass: f64 },
    /// Perturbed asymptotically flat family with mass aspect
    /// `m(r) = mass * r^3 / (r^3 + scale^3)`.
    MassAspect { mass: f64, scale: f64 },
}

/// Fully resolved run configuration (defaults filled, validated).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub initial_data: InitialData,
    pub scheme: SchemeConfig,
    pub t_end: f64,
    pub sample_every: usize,
    pub radii: Vec<f64>,
    pub speed: SpeedKind,
    pub epsilon_r: f64,
    pub output_dir: String,
    pub emit_svg: bool,
    /// Reserved for future stochastic perturbations; deterministic runs
    /// ignore it (but echo it, so configs round-trip).
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig {
                r_min: 3.0,
                r_max: 200.0,
                n_points: 2048,
            },
            initial_data: InitialData::MassAspect {
                mass: 1.0,
                scale: 1.0,
            },
            scheme: SchemeConfig::default(),
            t_end: 1.0,
            sample_every: 10,
            radii: vec![10.0, 20.0, 50.0, 100.0],
            speed: SpeedKind::Forward,
            epsilon_r: 1e-12,
            output_dir: "out".into(),
            emit_svg: false,
            seed: 0,
        }
    }
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Checks every invariant the run commands rely on, reporting the first
    /// violation with its key path.
    pub fn validate(&self) -> Result<()> {
        build_grid(self.grid.r_min, self.grid.r_max, self.grid.n_points)
            .map_err(|e| config_err("grid", e.to_string()))?;

        match self.initial_data {
            InitialData::Schwarzschild { mass } => {
                if !mass.is_finite() || mass < 0.0 {
                    return Err(config_err(
                        "initial_data.mass",
                        format!("mass must be non-negative, got {mass}"),
                    ));
                }
                if self.grid.r_min <= 2.0 * mass {
                    return Err(config_err(
                        "initial_data.mass",
                        format!(
                            "horizon precondition r_min > 2M fails: r_min = {}, M = {mass}",
                            self.grid.r_min
                        ),
                    ));
                }
            }
            InitialData::MassAspect { mass, scale } => {
                if !mass.is_finite() || mass < 0.0 {
                    return Err(config_err(
                        "initial_data.mass",
                        format!("mass must be non-negative, got {mass}"),
                    ));
                }
                if !scale.is_finite() || scale <= 0.0 {
                    return Err(config_err(
                        "initial_data.scale",
                        format!("scale must be positive, got {scale}"),
                    ));
                }
                // 2 m(r) / r peaks at r = scale * 2^(1/3) (or at r_min if the
                // peak sits outside the domain); the profile must stay above
                // its own horizon everywhere.
                let r_peak = (scale * 2f64.cbrt()).max(self.grid.r_min);
                let ratio = 2.0 * mass * r_peak * r_peak / (r_peak.powi(3) + scale.powi(3));
                if ratio >= 1.0 {
                    return Err(config_err(
                        "initial_data.mass",
                        format!(
                            "horizon precondition 2 m(r) < r fails near r = {r_peak:.6} \
                             (2m/r = {ratio:.6})"
                        ),
                    ));
                }
            }
        }

        self.scheme
            .validate()
            .map_err(|e| config_err("scheme", e.to_string()))?;
        if self.scheme.scheme == Scheme::ExplicitEuler && self.scheme.fixed_dt.is_some() {
            return Err(config_err(
                "scheme.fixed_dt",
                "only meaningful with scheme.kind = crank_nicolson",
            ));
        }

        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(config_err(
                "flow.t_end",
                format!("must be non-negative, got {}", self.t_end),
            ));
        }
        if self.sample_every == 0 {
            return Err(config_err("flow.sample_every", "must be at least 1"));
        }

        for &r in &self.radii {
            if !r.is_finite() || r <= self.grid.r_min || r >= self.grid.r_max {
                return Err(config_err(
                    "surfaces.radii",
                    format!(
                        "radius {r} must lie strictly inside ({}, {})",
                        self.grid.r_min, self.grid.r_max
                    ),
                ));
            }
        }

        if !self.epsilon_r.is_finite() || self.epsilon_r <= 0.0 {
            return Err(config_err(
                "guards.epsilon_r",
                format!("must be positive, got {}", self.epsilon_r),
            ));
        }

        if self.output_dir.is_empty() {
            return Err(config_err("output.directory", "must not be empty"));
        }
        if self.output_dir.contains('#')
            || self.output_dir.contains('\n')
            || self.output_dir.trim() != self.output_dir
        {
            return Err(config_err(
                "output.directory",
                "must not contain '#', newlines, or surrounding whitespace",
            ));
        }

        Ok(())
    }
}

/// Key-value entries with strict-single-use consumption.
struct Entries(BTreeMap<String, String>);

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_err(
                    &format!("line {}", idx + 1),
                    format!("expected `key = value`, got {line:?}"),
                ));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(config_err(
                    &format!("line {}", idx + 1),
                    "missing key before '='",
                ));
            }
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(config_err(&key, "duplicate key"));
            }
        }
        Ok(Entries(map))
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| config_err(key, format!("expected a number, got {v:?}")))
            })
            .transpose()
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| config_err(key, format!("expected a non-negative integer, got {v:?}")))
            })
            .transpose()
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        self.take(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| config_err(key, format!("expected a non-negative integer, got {v:?}")))
            })
            .transpose()
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(config_err(key, format!("expected true or false, got {other:?}"))),
            })
            .transpose()
    }

    /// Rejects whatever was never consumed; the BTreeMap order makes the
    /// reported key deterministic.
    fn finish(self) -> Result<()> {
        match self.0.into_iter().next() {
            None => Ok(()),
            Some((key, _)) => Err(config_err(&key, "unknown key")),
        }
    }
}

fn parse_radii(key: &str, text: &str) -> Result<Vec<f64>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|piece| {
            let piece = piece.trim();
            piece
                .parse::<f64>()
                .map_err(|_| config_err(key, format!("expected a number, got {piece:?}")))
        })
        .collect()
}

/// Parses and fully validates a configuration document; missing keys take
/// the documented defaults, unknown keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries = Entries::parse(text)?;
    let defaults = RunConfig::default();

    let grid = GridConfig {
        r_min: entries.take_f64("grid.r_min")?.unwrap_or(defaults.grid.r_min),
        r_max: entries.take_f64("grid.r_max")?.unwrap_or(defaults.grid.r_max),
        n_points: entries
            .take_usize("grid.n_points")?
            .unwrap_or(defaults.grid.n_points),
    };

    let family = entries
        .take("initial_data.family")
        .unwrap_or_else(|| "mass_aspect".into());
    let mass = entries.take_f64("initial_data.mass")?.unwrap_or(1.0);
    let scale = entries.take_f64("initial_data.scale")?;
    let initial_data = match family.as_str() {
        "mass_aspect" => InitialData::MassAspect {
            mass,
            scale: scale.unwrap_or(1.0),
        },
        "schwarzschild" => {
            if scale.is_some() {
                return Err(config_err(
                    "initial_data.scale",
                    "only meaningful with initial_data.family = mass_aspect",
                ));
            }
            InitialData::Schwarzschild { mass }
        }
        other => {
            return Err(config_err(
                "initial_data.family",
                format!("expected schwarzschild or mass_aspect, got {other:?}"),
            ))
        }
    };

    let scheme_defaults = SchemeConfig::default();
    let scheme_kind = entries
        .take("scheme.kind")
        .unwrap_or_else(|| "explicit_euler".into());
    let scheme = SchemeConfig {
        scheme: match scheme_kind.as_str() {
            "explicit_euler" => Scheme::ExplicitEuler,
            "crank_nicolson" => Scheme::CrankNicolson,
            other => {
                return Err(config_err(
                    "scheme.kind",
                    format!("expected explicit_euler or crank_nicolson, got {other:?}"),
                ))
            }
        },
        cfl_safety: entries
            .take_f64("scheme.cfl_safety")?
            .unwrap_or(scheme_defaults.cfl_safety),
        fixed_dt: entries.take_f64("scheme.fixed_dt")?,
        max_newton_iters: entries
            .take_usize("scheme.max_newton_iters")?
            .unwrap_or(scheme_defaults.max_newton_iters),
        newton_tol: entries
            .take_f64("scheme.newton_tol")?
            .unwrap_or(scheme_defaults.newton_tol),
    };

    let t_end = entries.take_f64("flow.t_end")?.unwrap_or(defaults.t_end);
    let sample_every = entries
        .take_usize("flow.sample_every")?
        .unwrap_or(defaults.sample_every);

    let radii = match entries.take("surfaces.radii") {
        Some(text) => parse_radii("surfaces.radii", &text)?,
        None => defaults.radii.clone(),
    };
    let speed = match entries.take("surfaces.speed").as_deref() {
        None | Some("forward") => SpeedKind::Forward,
        Some("backward") => SpeedKind::Backward,
        Some(other) => {
            return Err(config_err(
                "surfaces.speed",
                format!("expected forward or backward, got {other:?}"),
            ))
        }
    };

    let epsilon_r = entries
        .take_f64("guards.epsilon_r")?
        .unwrap_or(defaults.epsilon_r);

    let output_dir = entries
        .take("output.directory")
        .unwrap_or_else(|| defaults.output_dir.clone());
    let emit_svg = entries
        .take_bool("output.emit_svg")?
        .unwrap_or(defaults.emit_svg);
    let seed = entries.take_u64("seed")?.unwrap_or(defaults.seed);

    entries.finish()?;

    let config = RunConfig {
        grid,
        initial_data,
        scheme,
        t_end,
        sample_every,
        radii,
        speed,
        epsilon_r,
        output_dir,
        emit_svg,
        seed,
    };
    config.validate()?;
    Ok(config)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Canonical echo of a configuration: every key explicit, floats rendered
/// so they parse back bit-identically. `parse_config(render_config(c)) == c`
/// for any valid `c`.
pub fn render_config(config: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("grid.r_min = {}\n", fmt_f64(config.grid.r_min)));
    out.push_str(&format!("grid.r_max = {}\n", fmt_f64(config.grid.r_max)));
    out.push_str(&format!("grid.n_points = {}\n", config.grid.n_points));
    match config.initial_data {
        InitialData::Schwarzschild { mass } => {
            out.push_str("initial_data.family = schwarzschild\n");
            out.push_str(&format!("initial_data.mass = {}\n", fmt_f64(mass)));
        }
        InitialData::MassAspect { mass, scale } => {
            out.push_str("initial_data.family = mass_aspect\n");
            out.push_str(&format!("initial_data.mass = {}\n", fmt_f64(mass)));
            out.push_str(&format!("initial_data.scale = {}\n", fmt_f64(scale)));
        }
    }
    out.push_str(&format!(
        "scheme.kind = {}\n",
        match config.scheme.scheme {
            Scheme::ExplicitEuler => "explicit_euler",
            Scheme::CrankNicolson => "crank_nicolson",
        }
    ));
    out.push_str(&format!(
        "scheme.cfl_safety = {}\n",
        fmt_f64(config.scheme.cfl_safety)
    ));
    if let Some(dt) = config.scheme.fixed_dt {
        out.push_str(&format!("scheme.fixed_dt = {}\n", fmt_f64(dt)));
    }
    out.push_str(&format!(
        "scheme.max_newton_iters = {}\n",
        config.scheme.max_newton_iters
    ));
    out.push_str(&format!(
        "scheme.newton_tol = {}\n",
        fmt_f64(config.scheme.newton_tol)
    ));
    out.push_str(&format!("flow.t_end = {}\n", fmt_f64(config.t_end)));
    out.push_str(&format!("flow.sample_every = {}\n", config.sample_every));
    let radii: Vec<String> = config.radii.iter().map(|&r| fmt_f64(r)).collect();
    out.push_str(&format!("surfaces.radii = {}\n", radii.join(", ")));
    out.push_str(&format!(
        "surfaces.speed = {}\n",
        match config.speed {
            SpeedKind::Forward => "forward",
            SpeedKind::Backward => "backward",
        }
    ));
    out.push_str(&format!("guards.epsilon_r = {}\n", fmt_f64(config.epsilon_r)));
    out.push_str(&format!("output.directory = {}\n", config.output_dir));
    out.push_str(&format!("output.emit_svg = {}\n", config.emit_svg));
    out.push_str(&format!("seed = {}\n", config.seed));
    out
}

/// Scalar parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKey {
    Mass,
    Scale,
    TEnd,
    CflSafety,
    EpsilonR,
}

impl SweepKey {
    pub const ALL: [SweepKey; 5] = [
        SweepKey::Mass,
        SweepKey::Scale,
        SweepKey::TEnd,
        SweepKey::CflSafety,
        SweepKey::EpsilonR,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKey::Mass => "initial_data.mass",
            SweepKey::Scale => "initial_data.scale",
            SweepKey::TEnd => "flow.t_end",
            SweepKey::CflSafety => "scheme.cfl_safety",
            SweepKey::EpsilonR => "guards.epsilon_r",
        }
    }

    fn parse(text: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == text)
            .ok_or_else(|| {
                let allowed: Vec<&str> = Self::ALL.iter().map(|k| k.as_str()).collect();
                config_err(
                    "sweep",
                    format!("cannot sweep {text:?}; allowed: {}", allowed.join(", ")),
                )
            })
    }
}

/// One swept parameter with its resolved sample values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

/// Parses a sweep range of the form `key=start:stop:n` into `n` evenly
/// spaced values including both ends.
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec> {
    let Some((key, range)) = text.split_once('=') else {
        return Err(config_err(
            "sweep",
            format!("expected key=start:stop:n, got {text:?}"),
        ));
    };
    let key = SweepKey::parse(key.trim())?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(config_err(
            "sweep",
            format!("expected start:stop:n, got {range:?}"),
        ));
    }
    let parse_num = |piece: &str| -> Result<f64> {
        piece
            .trim()
            .parse::<f64>()
            .map_err(|_| config_err("sweep", format!("expected a number, got {piece:?}")))
    };
    let start = parse_num(parts[0])?;
    let stop = parse_num(parts[1])?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| config_err("sweep", format!("expected a point count, got {:?}", parts[2])))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(config_err("sweep", "range ends must be finite"));
    }
    if n == 0 {
        return Err(config_err("sweep", "empty range: n must be at least 1"));
    }
    if n == 1 && start != stop {
        return Err(config_err(
            "sweep",
            format!("a single-point range needs start == stop, got {start}:{stop}"),
        ));
    }
    let values: Vec<f64> = if n == 1 {
        vec![start]
    } else {
        (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect()
    };
    // Finite ends can still overflow in the middle (stop - start).
    if values.iter().any(|v| !v.is_finite()) {
        return Err(config_err("sweep", "range too wide: values overflow"));
    }
    Ok(SweepSpec { key, values })
}

/// Sets one swept parameter; the caller re-validates the resulting config.
pub fn apply_override(config: &mut RunConfig, key: SweepKey, value: f64) -> Result<()> {
    match key {
        SweepKey::Mass => match &mut config.initial_data {
            InitialData::Schwarzschild { mass } | InitialData::MassAspect { mass, .. } => {
                *mass = value;
            }
        },
        SweepKey::Scale => match &mut config.initial_data {
            InitialData::MassAspect { scale, .. } => *scale = value,
            InitialData::Schwarzschild { .. } => {
                return Err(config_err(
                    "initial_data.scale",
                    "cannot sweep the scale of a schwarzschild family",
                ))
            }
        },
        SweepKey::TEnd => config.t_end = value,
        SweepKey::CflSafety => config.scheme.cfl_safety = value,
        SweepKey::EpsilonR => config.epsilon_r = value,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_document_yields_the_documented_defaults() {
        let config = parse_config("").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.grid.r_min, 3.0);
        assert_eq!(config.grid.r_max, 200.0);
        assert_eq!(config.grid.n_points, 2048);
        assert_eq!(
            config.initial_data,
            InitialData::MassAspect {
                mass: 1.0,
                scale: 1.0
            }
        );
        assert_eq!(config.scheme.scheme, Scheme::ExplicitEuler);
        assert_eq!(config.scheme.cfl_safety, 0.4);
        assert_eq!(config.t_end, 1.0);
        assert_eq!(config.sample_every, 10);
        assert_eq!(config.radii, vec![10.0, 20.0, 50.0, 100.0]);
        assert_eq!(config.speed, SpeedKind::Forward);
        assert_eq!(config.epsilon_r, 1e-12);
        assert_eq!(config.output_dir, "out");
        assert!(!config.emit_svg);
        assert_eq!(config.seed, 0);
    }

    #[test]
    fn comments_and_spacing_are_tolerated() {
        let text = "
            # a run
            grid.n_points = 512   # coarse
            initial_data.mass = 0.5

            surfaces.radii = 10, 20.5
        ";
        let config = parse_config(text).unwrap();
        assert_eq!(config.grid.n_points, 512);
        assert_eq!(
            config.initial_data,
            InitialData::MassAspect {
                mass: 0.5,
                scale: 1.0
            }
        );
        assert_eq!(config.radii, vec![10.0, 20.5]);
    }

    #[test]
    fn unknown_duplicate_and_malformed_keys_are_rejected() {
        match parse_config("colour = red") {
            Err(Error::Config { key, reason }) => {
                assert_eq!(key, "colour");
                assert!(reason.contains("unknown"));
            }
            other => panic!("expected unknown-key error, got {other:?}"),
        }
        assert!(matches!(
            parse_config("flow.t_end = 1\nflow.t_end = 2"),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse_config("just some words"),
            Err(Error::Config { .. })
        ));
        match parse_config("flow.t_end = soon") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "flow.t_end"),
            other => panic!("expected number error, got {other:?}"),
        }
    }

    #[test]
    fn horizon_preconditions_surface_at_parse_time() {
        let text = "
            initial_data.family = schwarzschild
            initial_data.mass = 1.0
            grid.r_min = 1.0
            surfaces.radii = 10, 20
        ";
        match parse_config(text) {
            Err(Error::Config { key, reason }) => {
                assert_eq!(key, "initial_data.mass");
                assert!(reason.contains("r_min > 2M"), "reason: {reason}");
            }
            other => panic!("expected horizon error, got {other:?}"),
        }

        // The perturbed family has its own bound: 2m(r)/r < 1 everywhere.
        assert!(parse_config("initial_data.mass = 1.5").is_ok());
        assert!(matches!(
            parse_config("initial_data.mass = 1.6"),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn scale_is_rejected_for_schwarzschild() {
        let text = "
            initial_data.family = schwarzschild
            initial_data.mass = 1.0
            initial_data.scale = 2.0
        ";
        match parse_config(text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "initial_data.scale"),
            other => panic!("expected scale rejection, got {other:?}"),
        }
    }

    #[test]
    fn fixed_dt_requires_crank_nicolson() {
        assert!(matches!(
            parse_config("scheme.fixed_dt = 0.001"),
            Err(Error::Config { .. })
        ));
        let config = parse_config("scheme.kind = crank_nicolson\nscheme.fixed_dt = 0.001").unwrap();
        assert_eq!(config.scheme.fixed_dt, Some(0.001));
    }

    #[test]
    fn radii_must_sit_inside_the_grid() {
        assert!(matches!(
            parse_config("surfaces.radii = 10, 200"),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse_config("surfaces.radii = 3.0"),
            Err(Error::Config { .. })
        ));
        // An empty list is a metric-only run.
        let config = parse_config("surfaces.radii =").unwrap();
        assert!(config.radii.is_empty());
    }

    #[test]
    fn canonical_echo_round_trips() {
        let config = RunConfig::default();
        assert_eq!(parse_config(&render_config(&config)).unwrap(), config);

        let custom = parse_config(
            "
            grid.r_min = 2.5
            grid.r_max = 120.0
            grid.n_points = 300
            initial_data.family = schwarzschild
            initial_data.mass = 0.75
            scheme.kind = crank_nicolson
            scheme.fixed_dt = 0.0125
            scheme.max_newton_iters = 40
            scheme.newton_tol = 1e-11
            flow.t_end = 0.25
            flow.sample_every = 3
            surfaces.radii = 7.25, 11.5
            surfaces.speed = backward
            guards.epsilon_r = 1e-10
            output.directory = runs/alt
            output.emit_svg = true
            seed = 42
        ",
        )
        .unwrap();
        assert_eq!(parse_config(&render_config(&custom)).unwrap(), custom);
    }

    #[test]
    fn sweep_specs_parse_and_reject_bad_shapes() {
        let spec = parse_sweep_spec("initial_data.mass=0.5:2.0:4").unwrap();
        assert_eq!(spec.key, SweepKey::Mass);
        assert_eq!(spec.values, vec![0.5, 1.0, 1.5, 2.0]);

        let single = parse_sweep_spec("flow.t_end=0.5:0.5:1").unwrap();
        assert_eq!(single.values, vec![0.5]);

        assert!(parse_sweep_spec("initial_data.mass=0.5:2.0:0").is_err());
        assert!(parse_sweep_spec("initial_data.mass=0.5:2.0:2:9").is_err());
        assert!(parse_sweep_spec("initial_data.mass=0.5:1.0:1").is_err());
        assert!(parse_sweep_spec("grid.n_points=10:20:2").is_err());
        assert!(parse_sweep_spec("no-equals").is_err());
    }

    #[test]
    fn overrides_hit_the_right_fields() {
        let mut config = RunConfig::default();
        apply_override(&mut config, SweepKey::Mass, 0.5).unwrap();
        apply_override(&mut config, SweepKey::Scale, 2.0).unwrap();
        apply_override(&mut config, SweepKey::TEnd, 0.1).unwrap();
        assert_eq!(
            config.initial_data,
            InitialData::MassAspect {
                mass: 0.5,
                scale: 2.0
            }
        );
        assert_eq!(config.t_end, 0.1);
        assert!(config.validate().is_ok());

        apply_override(&mut config, SweepKey::EpsilonR, -1.0).unwrap();
        assert!(config.validate().is_err());

        let mut schw = RunConfig {
            initial_data: InitialData::Schwarzschild { mass: 1.0 },
            ..RunConfig::default()
        };
        assert!(apply_override(&mut schw, SweepKey::Scale, 2.0).is_err());
        apply_override(&mut schw, SweepKey::Mass, 1.2).unwrap();
        assert_eq!(schw.initial_data, InitialData::Schwarzschild { mass: 1.2 });
    }

    proptest! {
        /// Valid configs survive the echo round-trip bit-exactly.
        #[test]
        fn render_parse_round_trip(
            r_min in 1.0f64..5.0,
            span in 20.0f64..300.0,
            n_points in 16usize..4096,
            mass in 0.0f64..1.4,
            scale in 0.1f64..4.0,
            cfl in 0.05f64..0.95,
            t_end in 0.0f64..2.0,
            sample_every in 1usize..50,
            seed in any::<u64>(),
            emit_svg in any::<bool>(),
            backward in any::<bool>(),
        ) {
            let config = RunConfig {
                grid: GridConfig { r_min, r_max: r_min + span, n_points },
                initial_data: InitialData::MassAspect { mass, scale },
                scheme: SchemeConfig { cfl_safety: cfl, ..SchemeConfig::default() },
                t_end,
                sample_every,
                radii: vec![r_min + 0.25 * span, r_min + 0.5 * span],
                speed: if backward { SpeedKind::Backward } else { SpeedKind::Forward },
                epsilon_r: 1e-12,
                output_dir: "out".into(),
                emit_svg,
                seed,
            };
            prop_assume!(config.validate().is_ok());
            let echoed = parse_config(&render_config(&config)).unwrap();
            prop_assert_eq!(echoed, config);
        }

        /// The sweep-spec parser never panics on arbitrary input.
        #[test]
        fn sweep_parser_total(text in ".{0,80}") {
            let _ = parse_sweep_spec(&text);
        }
    }
}
