//! Scenario bodies. Each returns its artifacts in memory; nothing touches the
//! filesystem until every curve has been computed.

use std::fmt::Write as _;

use ddmet_core::ddcond::{self, CheckOptions, ConditionReport, MixedUnitaryChannel};
use ddmet_core::ddt::{self, Controlled};
use ddmet_core::jcmodel::{self, AmplitudeProvider, ClosedForm, OmegaDependence, ReservoirParams, PROBE_AMPLITUDE};
use ddmet_core::opalg::{self, pauli};
use ddmet_core::{oracle, qfi, ComplexMatrix, Error, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Scenario};

/// A named output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Shortest round-trip decimal, `nan` for undefined points.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// CSV with a header row; every column has one entry per row.
pub fn csv(header: &[&str], columns: &[Vec<f64>]) -> Vec<u8> {
    let mut s = header.join(",");
    s.push('\n');
    let rows = columns.first().map_or(0, Vec::len);
    for r in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| format_number(c[r])).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

struct Ctx {
    p: ReservoirParams,
    /// Grid in config units (the `t` column) and in model units.
    grid: Vec<f64>,
    model_grid: Vec<f64>,
    scale: f64,
    mode: OmegaDependence,
}

impl Ctx {
    fn new(cfg: &RunConfig) -> Self {
        let grid = cfg.grid.points();
        let scale = cfg.time_scale();
        Self {
            p: cfg.reservoir_params(),
            model_grid: grid.iter().map(|t| t * scale).collect(),
            grid,
            scale,
            mode: cfg.qfi_mode,
        }
    }

    /// QFI in `time_unit⁻²`-scaled form: `F / u²`.
    fn qfi(&self, p: &ReservoirParams, provider: &dyn AmplitudeProvider) -> ddmet_core::Result<Vec<f64>> {
        let state = jcmodel::reduced_family(*p, provider, self.mode);
        let u2 = self.scale * self.scale;
        self.model_grid.par_iter().map(|&t| Ok(qfi::qfi_mixed(&state, t)?.value / u2)).collect()
    }

    /// Applies `f` per point, with a vanishing amplitude mapped to `nan`.
    fn rate(&self, f: fn(&ReservoirParams, f64) -> ddmet_core::Result<f64>) -> ddmet_core::Result<Vec<f64>> {
        self.model_grid
            .par_iter()
            .map(|&t| match f(&self.p, t) {
                Ok(v) => Ok(v * self.scale),
                Err(Error::AmplitudeVanished { .. }) => Ok(f64::NAN),
                Err(e) => Err(e),
            })
            .collect()
    }

    fn amplitude(&self, provider: &dyn AmplitudeProvider) -> ddmet_core::Result<Vec<f64>> {
        self.model_grid.par_iter().map(|&t| Ok(provider.ce(&self.p, t)?.norm())).collect()
    }

    fn noiseless(&self) -> ReservoirParams {
        ReservoirParams { gamma0: 0.0, ..self.p }
    }
}

/// Computes every artifact of the configured scenario.
pub fn run_scenario(cfg: &RunConfig) -> ddmet_core::Result<Vec<Artifact>> {
    let ctx = Ctx::new(cfg);
    match cfg.scenario {
        Scenario::Fig1 | Scenario::Fig3 => {
            let free = ClosedForm::default();
            let (noiseless, noisy) = rayon::join(|| ctx.qfi(&ctx.noiseless(), &free), || ctx.qfi(&ctx.p, &free));
            let mut header = vec!["t", "qfi_noiseless", "qfi_noisy"];
            let mut cols = vec![ctx.grid.clone(), noiseless?, noisy?];
            if cfg.scenario == Scenario::Fig3 {
                let ctrl = Controlled::new(cfg.pulse_schedule().expect("fig3 has a schedule"))?;
                header.push("qfi_ddt");
                cols.push(ctx.qfi(&ctx.p, &ctrl)?);
            }
            Ok(vec![Artifact { name: format!("{}.csv", cfg.scenario.as_str()), bytes: csv(&header, &cols) }])
        }
        Scenario::Fig2 => {
            let rate = ctx.rate(jcmodel::decay_rate)?;
            Ok(vec![Artifact { name: "fig2.csv".into(), bytes: csv(&["t", "decay_rate"], &[ctx.grid.clone(), rate]) }])
        }
        Scenario::Custom => {
            let free = ClosedForm::default();
            let ctrl = cfg.pulse_schedule().map(Controlled::new).transpose()?;
            let mut header = vec!["t"];
            let mut cols = vec![ctx.grid.clone()];
            for name in &cfg.custom.curves {
                let col = match name.as_str() {
                    "qfi_noiseless" => ctx.qfi(&ctx.noiseless(), &free)?,
                    "qfi_noisy" => ctx.qfi(&ctx.p, &free)?,
                    "qfi_ddt" => ctx.qfi(&ctx.p, ctrl.as_ref().expect("validated schedule"))?,
                    "decay_rate" => ctx.rate(jcmodel::decay_rate)?,
                    "lamb_shift" => ctx.rate(jcmodel::lamb_shift)?,
                    "ce_abs" => ctx.amplitude(&free)?,
                    "ce_ddt_abs" => ctx.amplitude(ctrl.as_ref().expect("validated schedule"))?,
                    other => unreachable!("unvalidated curve {other}"),
                };
                header.push(name);
                cols.push(col);
            }
            Ok(vec![Artifact { name: "custom.csv".into(), bytes: csv(&header, &cols) }])
        }
        Scenario::TheoremDemo => theorem_demo(cfg),
        Scenario::OracleConvergence => oracle_convergence(cfg, &ctx),
    }
}

#[derive(Serialize)]
struct DemoCase {
    name: &'static str,
    h_s: &'static str,
    h_se: &'static str,
    report: ConditionReport,
}

#[derive(Serialize)]
struct RoundTrip {
    channel: &'static str,
    control_sequence_length: usize,
    h_se_eff_max_abs: f64,
    h_s_eff_deviation: f64,
}

#[derive(Serialize)]
struct DemoReport {
    cases: Vec<DemoCase>,
    round_trip: RoundTrip,
}

fn theorem_demo(cfg: &RunConfig) -> ddmet_core::Result<Vec<Artifact>> {
    let opts = CheckOptions { n_env_samples: cfg.theorem.n_env_samples, tolerance: cfg.theorem.tolerance };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let h_s = pauli::sigma_z();
    let xx = opalg::kron(&pauli::sigma_x(), &pauli::sigma_x())?;
    let zx = opalg::kron(&pauli::sigma_z(), &pauli::sigma_x())?;
    let zz = opalg::kron(&pauli::sigma_z(), &pauli::sigma_z())?;
    let pinch = ddcond::pinching_channel(&[pauli::excited(), pauli::ground()])?;

    let mut cases = Vec::new();
    let mut push = |name, h_se_label, h_se: &ComplexMatrix, channel: &MixedUnitaryChannel| -> ddmet_core::Result<()> {
        let report = ddcond::check_theorem(&h_s, h_se, (2, 2), channel, opts, &mut rng)?;
        cases.push(DemoCase { name, h_s: "sigma_z", h_se: h_se_label, report });
        Ok(())
    };
    push("corollary:sigma_x_x", "sigma_x⊗sigma_x", &xx, &MixedUnitaryChannel::identity(2))?;
    push("corollary:sigma_z_x", "sigma_z⊗sigma_x", &zx, &MixedUnitaryChannel::identity(2))?;
    push("corollary:sigma_z_z", "sigma_z⊗sigma_z", &zz, &MixedUnitaryChannel::identity(2))?;
    push("pinching:sigma_x_x", "sigma_x⊗sigma_x", &xx, &pinch)?;

    let controls = ddcond::discretize_channel(&pinch, 2)?;
    let (hs_eff, se_eff) = ddt::effective_hamiltonians(&h_s, &xx, &controls)?;
    let round_trip = RoundTrip {
        channel: "pinching in {|e⟩, |g⟩}",
        control_sequence_length: controls.len(),
        h_se_eff_max_abs: se_eff.max_abs(),
        h_s_eff_deviation: hs_eff.max_abs_diff(&h_s),
    };

    let mut text = String::new();
    for case in &cases {
        let _ = writeln!(text, "[{}]", case.name);
        let _ = writeln!(text, "h_s = {}", case.h_s);
        let _ = writeln!(text, "h_se = {}", case.h_se);
        text.push_str(&case.report.to_text());
        text.push('\n');
    }
    let _ = writeln!(text, "[round-trip]");
    let _ = writeln!(text, "control_sequence_length = {}", round_trip.control_sequence_length);
    let _ = writeln!(text, "h_se_eff_max_abs = {:e}", round_trip.h_se_eff_max_abs);
    let _ = writeln!(text, "h_s_eff_deviation = {:e}", round_trip.h_s_eff_deviation);

    let report = DemoReport { cases, round_trip };
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    Ok(vec![
        Artifact { name: "theorem_report.json".into(), bytes: json },
        Artifact { name: "theorem_report.txt".into(), bytes: text.into_bytes() },
    ])
}

fn oracle_convergence(cfg: &RunConfig, ctx: &Ctx) -> ddmet_core::Result<Vec<Artifact>> {
    let p = ctx.p;
    let sched = cfg.pulse_schedule();
    let probe = C64::new(PROBE_AMPLITUDE, 0.0);
    let reference = |t: f64| match &sched {
        Some(s) => ddt::ce_ddt_recurrence(&p, s, t, probe),
        None => jcmodel::ce_closed_form(&p, t, probe),
    };
    let t_max = cfg.grid.t_max * ctx.scale;

    let steps: Vec<f64> = [4.0, 2.0, 1.0].iter().map(|m| m * cfg.oracle.dt).collect();
    let volterra: Vec<f64> = steps
        .par_iter()
        .map(|dt| Ok(oracle::volterra_ce(&p, t_max, dt * ctx.scale, sched.as_ref())?.max_relative_error(reference, t_max)))
        .collect::<ddmet_core::Result<_>>()?;
    let ratios: Vec<f64> =
        std::iter::once(f64::NAN).chain(volterra.windows(2).map(|w| w[0] / w[1])).collect();

    let ks: Vec<f64> = cfg.oracle.modes.iter().map(|&k| k as f64).collect();
    let windows: Vec<f64> = ks.iter().map(|k| k * cfg.oracle.mode_spacing / 2.0).collect();
    let bath: Vec<f64> = cfg
        .oracle
        .modes
        .par_iter()
        .zip(&windows)
        .map(|(&k, &w)| {
            let modes = oracle::sample_bath(&p, k, w)?;
            let states = oracle::discrete_global_trajectory(&modes, &p, &ctx.model_grid, sched.as_ref(), oracle::GLOBAL_DT)?;
            Ok(states.iter().map(|s| (s.frame_ce().norm() - reference(s.t).norm()).abs()).fold(0.0, f64::max))
        })
        .collect::<ddmet_core::Result<_>>()?;

    Ok(vec![
        Artifact {
            name: "volterra_convergence.csv".into(),
            bytes: csv(&["dt", "max_relative_error", "ratio"], &[steps, volterra, ratios]),
        },
        Artifact {
            name: "bath_convergence.csv".into(),
            bytes: csv(&["modes", "window", "max_modulus_error"], &[ks, windows, bath]),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(2.0), "2");
    }

    #[test]
    fn csv_layout() {
        let bytes = csv(&["t", "y"], &[vec![0.0, 0.5], vec![1.0, f64::NAN]]);
        assert_eq!(String::from_utf8(bytes).unwrap(), "t,y\n0,1\n0.5,nan\n");
    }
}
