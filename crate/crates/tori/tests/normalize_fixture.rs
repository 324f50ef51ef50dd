//! Normalization of the shipped model, checked against hand-derived values.

use tori::fixture::{standard_config, standard_model, standard_state};
use tori::model::{ingest, IngestOptions};
use tori::normalize::{normalize, NormalizationRun};
use tori::verify::RealPoint;

const EPS: f64 = 1e-3;

fn run(r_max: usize, monolithic: bool) -> NormalizationRun {
    let mut cfg = standard_config(r_max, "strict");
    cfg.check_monolithic = monolithic;
    normalize(standard_state(EPS, cfg.effective_s_max()).unwrap(), &cfg).unwrap()
}

#[test]
fn every_step_is_exact_and_matches_the_monolithic_transform() {
    let run = run(3, true);
    for rep in &run.reports {
        for (j, res) in rep.residuals.iter().enumerate() {
            assert!(*res <= 1e-13, "step {} stage {j}: residual {res:e}", rep.r);
        }
        assert!(rep.normal_form_ok && rep.real, "step {}", rep.r);
        let mono = rep.monolithic.as_ref().expect("monolithic check requested");
        for (j, cmp) in mono.iter().enumerate() {
            assert!(cmp.cells_compared > 0);
            assert!(cmp.worst_relative <= 1e-12, "step {} stage {j}: {:e} at {:?}", rep.r, cmp.worst_relative, cmp.worst_cell);
        }
    }
    for (r, h) in run.states.iter().enumerate() {
        for (&(ell, s), f) in &h.cells {
            if ell <= 2 && s as usize <= r {
                assert!(f.is_zero(), "H^({r}) keeps f_{ell}^({r},{s})");
            }
        }
    }
}

#[test]
fn first_generator_is_the_quadrature_of_the_angle_terms() {
    // f₀ = 0.5 cos q₁ + 0.3 cos q₂ + 0.2 cos(q₁+q₂) ⇒ χ₀ = Σ c sin(k·q)/(k·ω)
    let run = run(1, false);
    let spec = standard_model();
    let (w1, w2) = (spec.omega0[0], spec.omega0[1]);
    let chi0 = &run.generators[0];
    assert_eq!((chi0.stage, chi0.step), (0, 1));
    for (q1, q2) in [(0.3, 1.1), (2.0, -0.7), (4.4, 5.9)] {
        let pt = RealPoint { p: vec![0.2, -0.1], q: vec![q1, q2], x: vec![0.3], y: vec![-0.4] };
        let got = chi0.series.evaluate(&pt.phase());
        let want = 0.5 * q1.sin() / w1 + 0.3 * q2.sin() / w2 + 0.2 * (q1 + q2).sin() / (w1 + w2);
        assert!((got.re - want).abs() < 1e-14 && got.im.abs() < 1e-14, "{got} vs {want}");
    }
}

#[test]
fn first_frequency_shift_comes_from_the_averaged_y_squared_term() {
    // the only averaged class-2 term at order ε is 0.15 y² = 0.15 (x² + y²)/2 + oscillating parts,
    // so Ω moves by 0.15 ε and ω does not move
    let run = run(1, false);
    let rep = &run.reports[0];
    assert!((rep.delta_big_omega[0] - 0.15 * EPS).abs() < 1e-17, "{:?}", rep.delta_big_omega);
    assert!(rep.delta_omega.iter().all(|d| d.abs() < 1e-18), "{:?}", rep.delta_omega);
    assert!((run.states[1].big_omega[0] - run.states[0].big_omega[0] - 0.15 * EPS).abs() < 1e-15);
}

#[test]
fn strict_mode_aborts_on_a_large_gamma() {
    let mut cfg = standard_config(2, "strict");
    cfg.gamma = 10.0;
    let err = normalize(standard_state(EPS, cfg.effective_s_max()).unwrap(), &cfg).unwrap_err();
    assert!(err.is_resonance(), "{err}");
    cfg.mode = "exploratory".into();
    assert!(normalize(standard_state(EPS, cfg.effective_s_max()).unwrap(), &cfg).is_ok());
}

#[test]
fn runs_serialize_identically() {
    let a = serde_json::to_string(&run(2, false)).unwrap();
    let b = serde_json::to_string(&run(2, false)).unwrap();
    assert_eq!(a, b);
    let back: NormalizationRun = serde_json::from_str(&a).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), a);
}

#[test]
fn ingest_rejects_an_order_budget_below_the_model() {
    let spec = standard_model();
    assert!(ingest(&spec, &spec.omega0, &IngestOptions { k_budget: 1, epsilon: EPS, s_max: 1 }).is_err());
}
