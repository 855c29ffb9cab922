//! Run configuration: a TOML file of flat dotted keys.
//!
//! Every key is optional except `scenario`; defaults are filled in by
//! [`RunConfig::parse`] and echoed by `ddmet validate`.

use std::fmt;
use std::path::{Path, PathBuf};

use ddmet_core::ddt::{Controlled, PulseSchedule};
use ddmet_core::jcmodel::{OmegaDependence, ReservoirParams};
use ddmet_core::opalg::pauli;
use ddmet_core::ComplexMatrix;
use serde::{Deserialize, Serialize};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Fig1,
    Fig2,
    Fig3,
    TheoremDemo,
    OracleConvergence,
    Custom,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::TheoremDemo => "theorem-demo",
            Scenario::OracleConvergence => "oracle-convergence",
            Scenario::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReservoirSection {
    pub lambda: f64,
    pub gamma0: f64,
    pub delta: f64,
    pub omega0: f64,
}

impl Default for ReservoirSection {
    fn default() -> Self {
        Self { lambda: 0.5, gamma0: 5.0, delta: 1.5, omega0: 10.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickAxis {
    X,
    Y,
    Z,
}

fn default_axis() -> KickAxis {
    KickAxis::Z
}

fn default_kick_angle() -> f64 {
    std::f64::consts::FRAC_PI_2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// Pulse period in `time_unit`s.
    pub period: f64,
    #[serde(default = "default_axis")]
    pub axis: KickAxis,
    #[serde(default = "default_kick_angle")]
    pub kick_angle: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { t_min: 0.0, t_max: 10.0, n_points: 500 }
    }
}

impl GridSection {
    pub fn points(&self) -> Vec<f64> {
        ddmet_core::jcmodel::uniform_grid(self.t_min, self.t_max, self.n_points)
    }
}

/// Unit of every time-valued key and of the `t` column: `"1/lambda"` or a
/// positive number of model time units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeUnit {
    Named(String),
    Value(f64),
}

impl Default for TimeUnit {
    fn default() -> Self {
        TimeUnit::Named("1/lambda".into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoremSection {
    pub tolerance: f64,
    pub n_env_samples: usize,
}

impl Default for TheoremSection {
    fn default() -> Self {
        Self { tolerance: ddmet_core::ddcond::DEFAULT_TOLERANCE, n_env_samples: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// Finest Volterra step in `time_unit`s; the study also runs `2dt` and `4dt`.
    pub dt: f64,
    /// Bath sizes for the discrete-mode study.
    pub modes: Vec<usize>,
    /// Mode spacing `Δω` (model frequency units); the window is `K·Δω/2`.
    pub mode_spacing: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { dt: 1e-3, modes: vec![100, 200, 400], mode_spacing: 0.1 }
    }
}

/// Columns a `custom` run may request.
pub const CUSTOM_CURVES: &[&str] =
    &["qfi_noiseless", "qfi_noisy", "qfi_ddt", "decay_rate", "lamb_shift", "ce_abs", "ce_ddt_abs"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CustomSection {
    pub curves: Vec<String>,
}

/// Parsed and defaulted configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub reservoir: ReservoirSection,
    #[serde(default)]
    pub schedule: Option<ScheduleSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time_unit: TimeUnit,
    #[serde(default)]
    pub qfi_mode: OmegaDependence,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub theorem: TheoremSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub custom: CustomSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("ddmet-out")
}

/// One problem found in a config, tied to a key path or a source line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

fn diag(location: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic { location: location.into(), message: message.into() }
}

impl RunConfig {
    /// Parses and validates; `source` names the file in diagnostics.
    pub fn parse(text: &str, source: &str) -> Result<Self, Vec<Diagnostic>> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    format!("{source}:{line}")
                }
                None => source.to_string(),
            };
            vec![diag(&location, e.message().trim())]
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, Vec<Diagnostic>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![diag(&path.display().to_string(), format!("cannot read config: {e}"))])?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Applies the `OUTPUT_DIR` override, if set and nonempty.
    pub fn with_env_output_dir(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
        self
    }

    /// Model time per config time unit.
    pub fn time_scale(&self) -> f64 {
        match &self.time_unit {
            TimeUnit::Named(_) => 1.0 / self.reservoir.lambda,
            TimeUnit::Value(u) => *u,
        }
    }

    pub fn reservoir_params(&self) -> ReservoirParams {
        let r = &self.reservoir;
        ReservoirParams::new(r.lambda, r.gamma0, r.delta, r.omega0).expect("validated reservoir")
    }

    /// Schedule in model time units.
    pub fn pulse_schedule(&self) -> Option<PulseSchedule> {
        self.schedule.map(|s| {
            PulseSchedule::new(s.period * self.time_scale(), axis_matrix(s.axis), s.kick_angle).expect("validated schedule")
        })
    }

    fn needs_schedule(&self) -> bool {
        match self.scenario {
            Scenario::Fig3 => true,
            Scenario::Custom => self.custom.curves.iter().any(|c| c.contains("ddt")),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<(), Vec<Diagnostic>> {
        let mut out = Vec::new();
        let r = &self.reservoir;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(r.lambda) {
            out.push(diag("reservoir.lambda", format!("must be > 0, got {}", r.lambda)));
        }
        if !(r.gamma0 >= 0.0 && r.gamma0.is_finite()) {
            out.push(diag("reservoir.gamma0", format!("must be ≥ 0, got {}", r.gamma0)));
        }
        if !r.delta.is_finite() {
            out.push(diag("reservoir.delta", "must be finite"));
        }
        if !r.omega0.is_finite() {
            out.push(diag("reservoir.omega0", "must be finite"));
        }

        let g = &self.grid;
        if g.n_points < 2 {
            out.push(diag("grid.n_points", format!("must be ≥ 2, got {}", g.n_points)));
        }
        if !(g.t_min >= 0.0 && g.t_min.is_finite()) {
            out.push(diag("grid.t_min", format!("must be ≥ 0, got {}", g.t_min)));
        }
        if !(g.t_max > g.t_min && g.t_max.is_finite()) {
            out.push(diag("grid.t_max", format!("must exceed grid.t_min = {}, got {}", g.t_min, g.t_max)));
        }

        match &self.time_unit {
            TimeUnit::Named(s) if s == "1/lambda" => {}
            TimeUnit::Named(s) => out.push(diag("time_unit", format!("expected \"1/lambda\" or a positive number, got {s:?}"))),
            TimeUnit::Value(u) if !positive(*u) => out.push(diag("time_unit", format!("must be > 0, got {u}"))),
            TimeUnit::Value(_) => {}
        }

        match &self.schedule {
            None if self.needs_schedule() => {
                out.push(diag("schedule.period", format!("required by scenario {}", self.scenario.as_str())))
            }
            None => {}
            Some(s) => {
                if !positive(s.period) {
                    out.push(diag("schedule.period", format!("must be > 0, got {}", s.period)));
                } else if !s.kick_angle.is_finite() {
                    out.push(diag("schedule.kick_angle", "must be finite"));
                } else if out.is_empty() {
                    let sched = self.pulse_schedule().expect("schedule present");
                    if Controlled::new(sched).is_err() {
                        out.push(diag(
                            "schedule.axis",
                            "only kicks that flip the sign of σ₊ are supported (axis = \"z\", kick_angle ≡ π/2 mod π)",
                        ));
                    }
                }
            }
        }

        let t = &self.theorem;
        if !positive(t.tolerance) {
            out.push(diag("theorem.tolerance", format!("must be > 0, got {}", t.tolerance)));
        }
        if t.n_env_samples < ddmet_core::ddcond::MIN_ENV_SAMPLES {
            out.push(diag(
                "theorem.n_env_samples",
                format!("must be ≥ {}, got {}", ddmet_core::ddcond::MIN_ENV_SAMPLES, t.n_env_samples),
            ));
        }

        let o = &self.oracle;
        if !positive(o.dt) {
            out.push(diag("oracle.dt", format!("must be > 0, got {}", o.dt)));
        }
        if !positive(o.mode_spacing) {
            out.push(diag("oracle.mode_spacing", format!("must be > 0, got {}", o.mode_spacing)));
        }
        if self.scenario == Scenario::OracleConvergence {
            // The study runs steps dt, 2dt and 4dt; all must tile the grid.
            let aligned = |x: f64| {
                let m = x / (4.0 * o.dt);
                (m - m.round()).abs() < 1e-9 * m.max(1.0)
            };
            if positive(o.dt) && !aligned(g.t_max) {
                out.push(diag("oracle.dt", format!("grid.t_max = {} must be a multiple of 4·oracle.dt", g.t_max)));
            }
            if let Some(s) = &self.schedule {
                if positive(o.dt) && positive(s.period) && !aligned(s.period) {
                    out.push(diag("oracle.dt", format!("schedule.period = {} must be a multiple of 4·oracle.dt", s.period)));
                }
            }
            if o.modes.is_empty() {
                out.push(diag("oracle.modes", "must list at least one bath size"));
            }
            for &k in &o.modes {
                if k < 50 {
                    out.push(diag("oracle.modes", format!("bath sizes must be ≥ 50, got {k}")));
                } else if positive(r.lambda) && (k as f64 * o.mode_spacing / 2.0) < 10.0 * r.lambda {
                    out.push(diag(
                        "oracle.modes",
                        format!("K = {k} gives window {} < 10·lambda", k as f64 * o.mode_spacing / 2.0),
                    ));
                }
            }
        }

        if self.scenario == Scenario::Custom && self.custom.curves.is_empty() {
            out.push(diag("custom.curves", "required by scenario custom"));
        }
        for c in &self.custom.curves {
            if !CUSTOM_CURVES.contains(&c.as_str()) {
                out.push(diag("custom.curves", format!("unknown curve {c:?}; expected one of {}", CUSTOM_CURVES.join(", "))));
            }
        }

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Resolved configuration as `key = value` lines in the input grammar.
    pub fn resolved_lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("scenario = {:?}", self.scenario.as_str()),
            format!("reservoir.lambda = {}", self.reservoir.lambda),
            format!("reservoir.gamma0 = {}", self.reservoir.gamma0),
            format!("reservoir.delta = {}", self.reservoir.delta),
            format!("reservoir.omega0 = {}", self.reservoir.omega0),
        ];
        if let Some(s) = &self.schedule {
            let axis = match s.axis {
                KickAxis::X => "x",
                KickAxis::Y => "y",
                KickAxis::Z => "z",
            };
            v.push(format!("schedule.period = {}", s.period));
            v.push(format!("schedule.axis = {axis:?}"));
            v.push(format!("schedule.kick_angle = {}", s.kick_angle));
        }
        v.push(format!("grid.t_min = {}", self.grid.t_min));
        v.push(format!("grid.t_max = {}", self.grid.t_max));
        v.push(format!("grid.n_points = {}", self.grid.n_points));
        v.push(match &self.time_unit {
            TimeUnit::Named(s) => format!("time_unit = {s:?}"),
            TimeUnit::Value(u) => format!("time_unit = {u}"),
        });
        let mode = match self.qfi_mode {
            OmegaDependence::PhaseOnly => "phase-only",
            OmegaDependence::Full => "full",
        };
        v.push(format!("qfi_mode = {mode:?}"));
        v.push(format!("seed = {}", self.seed));
        v.push(format!("output_dir = {:?}", self.output_dir.display().to_string()));
        v.push(format!("theorem.tolerance = {:e}", self.theorem.tolerance));
        v.push(format!("theorem.n_env_samples = {}", self.theorem.n_env_samples));
        v.push(format!("oracle.dt = {}", self.oracle.dt));
        v.push(format!("oracle.modes = {:?}", self.oracle.modes));
        v.push(format!("oracle.mode_spacing = {}", self.oracle.mode_spacing));
        v.push(format!("custom.curves = {:?}", self.custom.curves));
        v
    }
}

fn axis_matrix(axis: KickAxis) -> ComplexMatrix {
    match axis {
        KickAxis::X => pauli::sigma_x(),
        KickAxis::Y => pauli::sigma_y(),
        KickAxis::Z => pauli::sigma_z(),
    }
}
