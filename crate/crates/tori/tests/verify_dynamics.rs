//! Flow of the original Hamiltonian around the constructed torus.

use std::f64::consts::PI;
use tori::fixture::{standard_config, standard_state};
use tori::normalize::{normalize, NormalizationRun};
use tori::verify::{integrate, integrators, torus_invariance_error, transverse_spectrum, InvarianceParams, RealPoint, SpectrumParams, Tolerance};

fn run(eps: f64, r: usize) -> NormalizationRun {
    let mut cfg = standard_config(r, "strict");
    cfg.s_max = r as u32;
    normalize(standard_state(eps, r as u32).unwrap(), &cfg).unwrap()
}

#[test]
fn fixture_energy_is_conserved_over_a_thousand_time_units() {
    let h = standard_state(1e-3, 1).unwrap().total_series();
    let x0 = RealPoint { p: vec![0.01, -0.02], q: vec![0.3, 1.0], x: vec![0.05], y: vec![-0.02] };
    let a = integrate(&h, &x0, 1000.0, 1.0, integrators().get("dop853").unwrap().as_ref(), Tolerance::default()).unwrap();
    let b = integrate(&h, &x0, 1000.0, 1.0, integrators().get("gbs").unwrap().as_ref(), Tolerance::default()).unwrap();
    assert!(a.energy_drift() < 1e-9 && b.energy_drift() < 1e-9, "{:e} {:e}", a.energy_drift(), b.energy_drift());
    let (ea, eb) = (a.points.last().unwrap().flat(), b.points.last().unwrap().flat());
    for (u, v) in ea.iter().zip(&eb) {
        assert!((u - v).abs() < 1e-7, "{ea:?} vs {eb:?}");
    }
}

#[test]
fn unperturbed_torus_is_exactly_invariant() {
    let r = run(0.0, 1);
    let p = InvarianceParams { t_end: 50.0, seeds: 4, ..Default::default() };
    let res = torus_invariance_error(&r.states[0], &r.generators, 0.0, 1, &p).unwrap();
    assert!(res.error < 1e-14, "{res:?}");
}

#[test]
fn invariance_error_drops_with_each_step() {
    let eps = 2e-3;
    let p = InvarianceParams { t_end: 50.0, seeds: 2, ..Default::default() };
    let run = run(eps, 3);
    let errs: Vec<f64> = (1..=3).map(|r| torus_invariance_error(&run.states[0], &run.generators, eps, r, &p).unwrap().error).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    // generators reaching step 3 are required for r = 3
    assert!(torus_invariance_error(&run.states[0], run.generators_to(2), eps, 3, &p).is_err());
    assert!(torus_invariance_error(&run.states[0], &run.generators, 2.0 * eps, 1, &p).is_err());
}

#[test]
fn transverse_peaks_sit_on_the_normalized_frequency() {
    let p = SpectrumParams::default();
    let bin = 2.0 * PI / (p.samples as f64 * p.dt);

    let r0 = run(0.0, 1);
    let peak = transverse_spectrum(&r0.states[0], &r0.generators, 0.0, 1, &p).unwrap();
    assert!((peak[0] - r0.states[0].big_omega[0]).abs() < 0.05 * bin);

    let eps = 1e-3;
    let r3 = run(eps, 3);
    let p2 = transverse_spectrum(&r3.states[0], &r3.generators, eps, 2, &p).unwrap()[0];
    let p3 = transverse_spectrum(&r3.states[0], &r3.generators, eps, 3, &p).unwrap()[0];
    let big3 = r3.states[3].big_omega[0];
    assert!((p3 - big3).abs() < eps, "{p3} vs {big3}");
    // the peak barely moves once the transform is refined by a step
    let shift = (r3.states[3].big_omega[0] - r3.states[2].big_omega[0]).abs();
    assert!((p3 - p2).abs() <= shift, "{p2} → {p3}, |ΔΩ| = {shift:e}");
}
