//! Cross-module agreement between the closed forms and the numerical oracles.

use ddmet_core::ddt::{self, Controlled, PulseSchedule};
use ddmet_core::jcmodel::{self, ClosedForm, OmegaDependence, ReservoirParams, PROBE_AMPLITUDE};
use ddmet_core::oracle;
use ddmet_core::C64;

fn probe() -> C64 {
    C64::new(PROBE_AMPLITUDE, 0.0)
}

fn params() -> ReservoirParams {
    ReservoirParams::new(0.5, 5.0, 1.5, 10.0).unwrap()
}

#[test]
fn controlled_closed_form_against_both_oracles() {
    let p = params();
    for period in [0.4, 0.2, 0.1] {
        let sched = PulseSchedule::sigma_z(period).unwrap();
        let exact = |t: f64| ddt::ce_ddt(&p, &sched, t, probe()).unwrap();
        let aux = oracle::aux_ode_ce(&p, 10.0, 1e-3, Some(&sched)).unwrap();
        let vol = oracle::volterra_ce(&p, 10.0, 1e-3, Some(&sched)).unwrap();
        let aux_err = aux.times.iter().zip(&aux.ce).map(|(t, c)| (c - exact(*t)).norm()).fold(0.0, f64::max);
        let vol_err = vol.times.iter().zip(&vol.ce).map(|(t, c)| (c - exact(*t)).norm()).fold(0.0, f64::max);
        assert!(aux_err < 1e-9, "T={period}: aux {aux_err:e}");
        assert!(vol_err < 3e-6, "T={period}: volterra {vol_err:e}");
    }
}

#[test]
fn resonant_and_strongly_detuned_reservoirs() {
    for delta in [0.0, -4.0, 8.0] {
        let p = ReservoirParams::new(0.5, 5.0, delta, 10.0).unwrap();
        let vol = oracle::volterra_ce(&p, 5.0, 1e-3, None).unwrap();
        // At resonance c_e passes through zero, so compare absolutely.
        let dev = vol.times.iter().zip(&vol.ce).map(|(t, c)| (c - jcmodel::ce_closed_form(&p, *t, probe())).norm()).fold(0.0, f64::max);
        assert!(dev < 5e-6, "Δ={delta}: {dev:e}");
    }
}

#[test]
fn discrete_bath_reproduces_reduced_qfi() {
    let p = params();
    let bath = oracle::sample_bath(&p, 400, 20.0).unwrap();
    let free = ClosedForm::default();
    let closed = jcmodel::qfi_trajectory(&p, &free, &[1.0, 3.0, 6.0], OmegaDependence::Full).unwrap();
    for (t, q) in closed {
        let g = oracle::global_qfi(&bath, &p, t, None).unwrap();
        assert!((g.reduced.value - q.value).abs() < 5e-3 * q.value.max(1.0), "t={t}: {} vs {}", g.reduced.value, q.value);
    }
}

#[test]
fn discrete_bath_under_pulses() {
    let p = params();
    let sched = PulseSchedule::sigma_z(0.25).unwrap();
    let bath = oracle::sample_bath(&p, 400, 20.0).unwrap();
    let grid = jcmodel::uniform_grid(0.0, 6.0, 25);
    let states = oracle::discrete_global_trajectory(&bath, &p, &grid, Some(&sched), oracle::GLOBAL_DT).unwrap();
    let ctrl = Controlled::new(sched.clone()).unwrap();
    let kick = sched.kick_unitary().unwrap();
    for s in &states {
        // The lab-frame marginal is the toggling-frame one conjugated by the
        // kicks applied so far.
        let mut want = jcmodel::reduced_state(&p, s.t, &ctrl).unwrap();
        for _ in 0..sched.interval(s.t).0 {
            want = want.conjugate_by(&kick);
        }
        assert!(s.reduced_state().max_abs_diff(&want) < 2e-3, "t={}", s.t);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn decoupling_raises_the_long_time_qfi() {
    let p = params();
    let grid = jcmodel::uniform_grid(5.0, 10.0, 51);
    let free = jcmodel::qfi_trajectory(&p, &ClosedForm::default(), &grid, OmegaDependence::Full).unwrap();
    let sched = PulseSchedule::sigma_z(0.1).unwrap();
    let ctrl = ddt::ddt_qfi_trajectory(&p, &sched, &grid, OmegaDependence::Full).unwrap();
    for ((t, f), (_, c)) in free.iter().zip(&ctrl) {
        assert!(c.value > f.value, "t={t}");
        assert!(c.value <= t * t * (1.0 + 1e-9));
    }
}
