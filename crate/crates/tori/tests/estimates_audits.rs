//! Measured norms of fixture runs and random series against the explicit bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, PI};
use tori::estimates::{audit_lemma4, audit_lemma6, compute_constants, convergence_summary, d_r, lemma3_check, measure_bound, EstimateParams};
use tori::fixture::{standard_config, standard_estimates, standard_state};
use tori::ledger::build_nu;
use tori::model::{TermSpec, Trig};
use tori::normalize::normalize;
use tori::{NormParameters, PoissonSeries};

fn random_series(rng: &mut ChaCha8Rng, count: usize) -> PoissonSeries {
    (0..count)
        .map(|_| TermSpec {
            p_exp: vec![rng.gen_range(0..2), rng.gen_range(0..2)],
            x_exp: vec![rng.gen_range(0..3)],
            y_exp: vec![rng.gen_range(0..2)],
            k: vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
            coeff: rng.gen_range(-1.0..1.0),
            trig: if rng.gen_bool(0.5) { Trig::Cos } else { Trig::Sin },
            coeff_im: None,
            eps_power: None,
        })
        .fold(PoissonSeries::zero(2, 1), |acc, t| acc.add(&t.to_series(2, 1)))
}

#[test]
fn lie_derivative_bound_holds_on_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let np = NormParameters::new(0.5, 0.5, 0.5);
    let mut checked = 0;
    for _ in 0..40 {
        let chi = random_series(&mut rng, 4);
        let g = random_series(&mut rng, 4);
        let d = rng.gen_range(0.05..0.4);
        let dprime = rng.gen_range(0.0..0.5);
        for j in 1..=3 {
            let (measured, bound) = lemma3_check(&chi, &g, d, dprime, j, &np).unwrap();
            assert!(measured <= bound * (1.0 + 1e-9), "j = {j}, d = {d}, d' = {dprime}: {measured:e} > {bound:e}");
            checked += 1;
        }
    }
    assert_eq!(checked, 120);
    assert!(lemma3_check(&random_series(&mut rng, 2), &random_series(&mut rng, 2), 0.6, 0.5, 1, &np).is_err());
}

#[test]
fn fixture_audits_at_a_tenth_of_the_analytic_threshold() {
    let (hyp, consts) = standard_estimates(3).unwrap();
    assert!(hyp.ok(), "{:?}", hyp.failures);
    let eps = consts.eps_an / 10.0;
    let cfg = standard_config(3, "strict");
    let run = normalize(standard_state(eps, cfg.effective_s_max()).unwrap(), &cfg).unwrap();
    let l4 = audit_lemma4(&run, &consts);
    let l6 = audit_lemma6(&run, &consts);
    assert!(l4.checked > 50 && l6.checked > 50);
    assert_eq!(l4.violations, 0, "{:?}", l4.rows.iter().filter(|r| !r.ok).collect::<Vec<_>>());
    assert_eq!(l6.violations, 0, "{:?}", l6.rows.iter().filter(|r| !r.ok).collect::<Vec<_>>());
    let conv = convergence_summary(&[&run], &consts);
    assert_eq!(conv.rows.len(), 3);
    assert!(conv.rows.iter().all(|r| r.ok && r.bound.is_finite()));
}

#[test]
fn constants_follow_their_definitions() {
    let p = EstimateParams { ebar: 5.0, gamma: 1e-4, tau: 3.0, k_budget: 4, rho: 0.5, sigma: 0.5, big_r: 0.5, j0: 0.1, theta0: 0.35, n1: 2, n2: 1, diameter: 0.02, box_volume: 4e-4, levels: 6 };
    let c = compute_constants(&p).unwrap();
    let m = 4.0 * PI.powi(4) * 5.0 * 64.0 / 1e-4 * (2.0 * E / 0.25 + E * E / 0.25);
    assert!((c.m - m).abs() < 1e-12 * m);
    // 𝒜 = M³ 2^{56+12τ} through logarithms
    let ln_a = 3.0 * m.ln() + 92.0 * 2f64.ln();
    assert!((c.cal_a.ln() - ln_a).abs() < 1e-12 * ln_a);
    assert!((c.log2_cal_a - ln_a / 2f64.ln()).abs() < 1e-10);
    assert_eq!(c.eps_an, 1.0 / c.cal_a);
    assert!(c.eps_star <= c.eps_ge && c.eps_ge <= c.eps_an);
    for r in 1..6 {
        assert!((c.h[r] / c.h[r - 1] - 2f64.powi(-5)).abs() < 1e-15);
    }
    assert!((d_r(1_000_000) - 0.25).abs() < 1e-6);
}

#[test]
fn restriction_sequence_increases_to_a_quarter() {
    let mut last = 0.0;
    for r in [1usize, 10, 100, 1000, 10_000] {
        let d = d_r(r);
        assert!(d > last && d < 0.25);
        // tail Σ_{i>r} 3/(2π² i²) lies between 3/(2π²(r+1)) and 3/(2π² r)
        let tail = 0.25 - d;
        assert!(tail > 3.0 / (2.0 * PI * PI * (r + 1) as f64) && tail < 3.0 / (2.0 * PI * PI * r as f64));
        last = d;
    }
}

#[test]
fn nu_table_against_hand_recursion() {
    // ν^{(I)}_{1,s} = s + 1; ν^{(II)}_{1,1} = 2 + 2·1; ν_{1,1} = 4 + 4·1
    let t = build_nu(3, 20);
    assert_eq!(t.nu_i(1, 1).to_string(), "2");
    assert_eq!(t.nu_ii(1, 1).to_string(), "4");
    assert_eq!(t.nu(1, 1).to_string(), "8");
    for s in 0..=20 {
        assert_eq!(t.nu_i(1, s).to_string(), (s + 1).to_string());
    }
    assert!(t.bound_violations().is_empty());
    let full = build_nu(20, 20);
    assert!(full.bound_violations().is_empty());
}

#[test]
fn measure_bound_is_linear_in_gamma() {
    let b = |g: f64| measure_bound(g, 3.0, 4, 0.35, 2, 1, 0.02).unwrap().0;
    assert!((b(2e-4) / b(1e-4) - 2.0).abs() < 1e-12);
    // Σ_{r≥2} r^{-2} = π²/6 − 1
    let pre = 1e-4 * 32.0 * 6.0 * 0.02 / (0.35 * 4.0);
    assert!((b(1e-4) / pre - (PI * PI / 6.0 - 1.0)).abs() < 2e-7);
    assert!(b(1e-4) / pre >= PI * PI / 6.0 - 1.0);
    assert!(measure_bound(1e-4, 2.0, 4, 0.35, 2, 1, 0.02).is_none());
}
