//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::Instant;
use tori::estimates::{audit_lemma4, audit_lemma6, convergence_summary, d_r, lemma3_check, AuditKind, EstimateReport};
use tori::fixture::*;
use tori::geometry::{build_maps, carve, measure_compare, FrequencyDomain, FrequencyMaps, MeasureParams};
use tori::ledger::{audit_selection_rules, build_nu, LedgerBook};
use tori::model::{TermSpec, Trig};
use tori::normalize::{normalize, NormalizationRun};
use tori::verify::{torus_invariance_error, InvarianceParams};
use tori::{NormParameters, PoissonSeries};

const HOMOLOGICAL_TOL: f64 = 1e-13;
const MONOLITHIC_TOL: f64 = 1e-12;
const D_LIMIT_TOL: f64 = 1e-6;
const CAL_A_TOL: f64 = 1e-12;
const SLOPE_TOL: f64 = 0.3;
const GAMMA_SLOPE_TOL: f64 = 0.05;
const EPS_DYNAMICS: [f64; 4] = [1e-3, 2e-3, 4e-3, 8e-3];
const MC_SAMPLES: usize = 100_000;
const MC_SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

fn strict_run(eps: f64, r_max: usize, s_max: u32, monolithic: bool) -> NormalizationRun {
    let mut cfg = standard_config(r_max, "strict");
    cfg.s_max = s_max;
    cfg.check_monolithic = monolithic;
    normalize(standard_state(eps, cfg.effective_s_max()).expect("fixture ingests"), &cfg).expect("fixture normalizes")
}

fn criterion1(run: &NormalizationRun) -> Outcome {
    let worst = run.reports.iter().flat_map(|r| r.residuals).fold(0.0, f64::max);
    outcome(worst <= HOMOLOGICAL_TOL, format!("homological residuals over {} steps × 3 stages: max {worst:.2e} ≤ {HOMOLOGICAL_TOL:e} × source norm", run.reports.len()))
}

fn criterion2(run: &NormalizationRun) -> Outcome {
    let mut nonzero = 0;
    let mut checked = 0;
    for (r, h) in run.states.iter().enumerate() {
        for ell in 0..=2 {
            for s in 0..=r as u32 {
                checked += 1;
                nonzero += usize::from(h.cell(ell, s).is_some_and(|f| !f.is_zero()));
            }
        }
    }
    let flags = run.reports.iter().all(|r| r.normal_form_ok);
    outcome(nonzero == 0 && flags, format!("f_ℓ^(r,s), ℓ ≤ 2, s ≤ r: {nonzero} nonzero of {checked} cells; step flags {flags}"))
}

fn criterion3(run: &NormalizationRun) -> Outcome {
    let mut worst = 0.0f64;
    let mut cells = 0;
    for rep in &run.reports {
        for cmp in rep.monolithic.iter().flatten() {
            worst = worst.max(cmp.worst_relative);
            cells += cmp.cells_compared;
        }
    }
    outcome(cells > 0 && worst <= MONOLITHIC_TOL, format!("stagewise vs monolithic Lie transform, {cells} cell comparisons: max relative {worst:.2e} ≤ {MONOLITHIC_TOL:e}"))
}

fn criterion4() -> Outcome {
    let run = strict_run(1e-3, 6, 8, false);
    let a = audit_selection_rules(&run.book, 6, 8, 3);
    let mut book = LedgerBook::for_model(TAU, 4, 12);
    for _ in 0..6 {
        book.push_step();
    }
    let b = audit_selection_rules(&book, 6, 12, 4);
    outcome(
        a.violations + b.violations == 0 && a.checked > 0,
        format!("selection rules to r = 6: run ledgers {}/{} violations, full book (s ≤ 12) {}/{} violations", a.violations, a.checked, b.violations, b.checked),
    )
}

fn criterion5() -> Outcome {
    let t = build_nu(20, 20);
    let mut bad = 0;
    for r in 0..=20 {
        for s in 0..=20u64 {
            let nu = t.nu(r, s as usize);
            let bits = nu.bits();
            let within = bits <= 8 * s || (bits == 8 * s + 1 && nu.trailing_zeros() == Some(8 * s));
            bad += usize::from(!within);
        }
    }
    // hand-unrolled: ν^I_{1,1} = ν_{0,1}^0 ν_{0,1} + ν_{0,1} ν_{0,0} = 2, ν^II_{1,1} = 2 + 2·1, ν_{1,1} = 4 + 4·1
    let nu_i = 1 + 1;
    let nu_ii = nu_i + nu_i;
    let hand = nu_ii + nu_ii;
    let got = t.nu(1, 1).to_string();
    outcome(bad == 0 && got == hand.to_string() && hand == 8, format!("ν_(r,s) ≤ 2^(8s) for r, s ≤ 20: {bad} violations; ν_(1,1) = {got} (hand {hand})"))
}

fn random_series(rng: &mut ChaCha8Rng) -> PoissonSeries {
    (0..4)
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

fn criterion6(run: &NormalizationRun, consts: &EstimateReport) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let np = NormParameters::new(0.5, 0.5, 0.5);
    let mut l3 = (0, 0);
    for _ in 0..30 {
        let (chi, g) = (random_series(&mut rng), random_series(&mut rng));
        let (d, dp) = (rng.gen_range(0.05..0.4), rng.gen_range(0.0..0.5));
        for j in 1..=3 {
            let (m, b) = lemma3_check(&chi, &g, d, dp, j, &np).expect("valid radii");
            l3.0 += 1;
            l3.1 += usize::from(m.log2() > b.log2() + 1e-9 * b.log2().abs().max(1.0));
        }
    }
    let l4 = audit_lemma4(run, consts);
    let l6 = audit_lemma6(run, consts);
    let conv = convergence_summary(&[run], consts);
    let pv = conv.rows.iter().filter(|r| !r.ok).count();
    outcome(
        l3.1 + l4.violations + l6.violations + pv == 0,
        format!(
            "ε = ε*_an/10 = {:.2e}: Lemma 3 {}/{}, Lemma 4 {}/{}, Lemma 6 {}/{}, Prop 1 {}/{} violations",
            run.states[0].epsilon, l3.1, l3.0, l4.violations, l4.checked, l6.violations, l6.checked, pv, conv.rows.len()
        ),
    )
}

fn criterion7(consts: &EstimateReport) -> Outcome {
    let d = d_r(1_000_000);
    // M and 𝒜 recomputed from their definitions in the log domain
    let np = NormParameters::new(consts.rho, consts.sigma, consts.big_r);
    let cauchy = 2.0 * E / (np.rho * np.sigma) + E * E / (np.big_r * np.big_r);
    let m = (4.0 * PI.powi(4) * consts.ebar * (consts.k_budget as f64).powf(consts.tau) / consts.gamma * cauchy).max(1.0);
    let ln_a = 3.0 * m.ln() + (56.0 + 12.0 * consts.tau) * 2f64.ln();
    let rel = (consts.cal_a.ln() - ln_a).abs() / ln_a;
    let rel2 = (consts.log2_cal_a * 2f64.ln() - ln_a).abs() / ln_a;
    outcome(
        (d - 0.25).abs() < D_LIMIT_TOL && rel < CAL_A_TOL && rel2 < CAL_A_TOL,
        format!("|d_(10^6) − 1/4| = {:.2e} < {D_LIMIT_TOL:e}; 𝒜 = {:.4e} vs M³2^(56+12τ) = e^{ln_a:.6}: relative {rel:.1e}", (d - 0.25).abs(), consts.cal_a),
    )
}

fn criterion8() -> Outcome {
    let p = InvarianceParams::default();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut at_smallest = Vec::new();
    for r in 1..=3usize {
        let mut pts = Vec::new();
        for &eps in &EPS_DYNAMICS {
            let run = strict_run(eps, r, r as u32, false);
            let res = torus_invariance_error(&run.states[0], &run.generators, eps, r, &p).expect("integration succeeds");
            pts.push((eps.ln(), res.error.ln()));
            if eps == EPS_DYNAMICS[0] {
                at_smallest.push(res.error);
            }
        }
        let slope = fit_slope(&pts);
        pass &= (slope - (r as f64 + 1.0)).abs() <= SLOPE_TOL;
        lines.push(format!("r={r} slope {slope:.3}"));
    }
    let monotone = at_smallest.windows(2).all(|w| w[1] < w[0]);
    outcome(
        pass && monotone,
        format!(
            "T = {}, ε ∈ {EPS_DYNAMICS:?}: {} (target r+1 ± {SLOPE_TOL}); error at ε = 1e-3 by r: {}",
            p.t_end,
            lines.join(", "),
            at_smallest.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" > ")
        ),
    )
}

fn criterion9(run: &NormalizationRun, consts: &EstimateReport) -> Outcome {
    let l6 = audit_lemma6(run, consts);
    let rows: Vec<_> = l6.rows.iter().filter(|r| matches!(r.kind, AuditKind::FastFrequency | AuditKind::TransverseFrequency)).collect();
    let bad = rows.iter().filter(|r| !r.ok).count();
    let worst = rows.iter().filter(|r| r.measured > 0.0).map(|r| r.measured.log2() - r.log2_bound).fold(f64::NEG_INFINITY, f64::max);
    outcome(!rows.is_empty() && bad == 0, format!("|δω| ≤ γσ(ε𝒜)^r, |ΔΩ| ≤ γ(ε𝒜)^r over {} rows: {bad} violations (worst log2 ratio {worst:.1})", rows.len()))
}

fn carved(domain: &FrequencyDomain, maps: &FrequencyMaps, gamma: f64) -> FrequencyDomain {
    let mut d = domain.clone();
    for r in 1..=3 {
        d = carve(&d, r, maps, gamma, TAU, K_BUDGET).expect("carving in step order");
    }
    d
}

fn criterion10() -> Outcome {
    let spec = standard_model();
    let domain = standard_domain(5);
    let maps = build_maps(&spec, &domain, &standard_config(3, "exploratory"), 1e-3, K_BUDGET).expect("maps build");
    let params = |gamma| MeasureParams { gamma, tau: TAU, k_budget: K_BUDGET, theta0: THETA0, samples: MC_SAMPLES, seed: MC_SEED };
    let main = measure_compare(&carved(&domain, &maps, GAMMA), &maps, 3, &params(GAMMA)).expect("measure");
    let bound = main.total_bound.unwrap_or(f64::NAN);
    let sweep = [GAMMA, 2.0 * GAMMA, 4.0 * GAMMA, 8.0 * GAMMA];
    let mut pts = Vec::new();
    let mut mc = Vec::new();
    for &g in &sweep {
        let rep = measure_compare(&carved(&domain, &maps, g), &maps, 3, &params(g)).expect("measure");
        pts.push((g.ln(), rep.total_bound.unwrap_or(f64::NAN).ln()));
        mc.push(format!("{:.1e}", rep.measured));
    }
    let slope = fit_slope(&pts);
    outcome(
        main.measured <= bound && main.ok && (slope - 1.0).abs() <= GAMMA_SLOPE_TOL,
        format!(
            "γ = {GAMMA:e}, {MC_SAMPLES} samples: MC {:.2e} ± {:.1e} ≤ bound {bound:.3e} (box {:.1e}); bound slope in γ {slope:.4}; MC over sweep {}",
            main.measured,
            main.std_error,
            main.box_volume,
            mc.join(", ")
        ),
    )
}

fn reports_once() -> Vec<String> {
    let run = strict_run(1e-3, 2, 0, false);
    let (hyp, consts) = standard_estimates(3).expect("estimates");
    let spec = standard_model();
    let domain = standard_domain(3);
    let maps = build_maps(&spec, &domain, &standard_config(2, "exploratory"), 1e-3, K_BUDGET).expect("maps");
    let mp = MeasureParams { gamma: GAMMA, tau: TAU, k_budget: K_BUDGET, theta0: THETA0, samples: 5_000, seed: MC_SEED };
    let measure = measure_compare(&domain, &maps, 2, &mp).expect("measure");
    vec![
        serde_json::to_string(&run).expect("json"),
        serde_json::to_string(&hyp).expect("json"),
        serde_json::to_string(&consts).expect("json"),
        serde_json::to_string(&audit_lemma4(&run, &consts)).expect("json"),
        serde_json::to_string(&measure).expect("json"),
    ]
}

fn criterion11() -> Outcome {
    let (a, b) = (reports_once(), reports_once());
    let same = a == b;
    let bytes: usize = a.iter().map(String::len).sum();
    outcome(same, format!("{} reports ({bytes} bytes) byte-identical across two runs: {same}", a.len()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (_, consts) = standard_estimates(3).expect("fixture estimates");
    let small = strict_run(consts.eps_an / 10.0, 3, 0, false);
    let full = strict_run(1e-3, 4, 0, true);

    let results: Vec<(usize, Outcome)> = vec![
        (1, criterion1(&full)),
        (2, criterion2(&full)),
        (3, criterion3(&full)),
        (4, criterion4()),
        (5, criterion5()),
        (6, criterion6(&small, &consts)),
        (7, criterion7(&consts)),
        (8, criterion8()),
        (9, criterion9(&small, &consts)),
        (10, criterion10()),
        (11, criterion11()),
    ];
    let mut failed = 0;
    for (i, o) in &results {
        println!("criterion {i:>2} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", results.len() - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
