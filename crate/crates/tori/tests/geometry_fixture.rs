//! Frequency maps, carving, hull checks and resonant measure on the shipped box.

use tori::fixture::{standard_config, standard_domain, standard_model, K_BUDGET, TAU, THETA0};
use tori::geometry::{build_maps, carve, convex_hull_check, measure_compare, MeasureParams};

fn params(gamma: f64, samples: usize, seed: u64) -> MeasureParams {
    MeasureParams { gamma, tau: TAU, k_budget: K_BUDGET, theta0: THETA0, samples, seed }
}

// union length in ω₂ of the strips |a ω₁ + b ω₂ + c| < w at fixed ω₁
fn covered(intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(lo, hi) in intervals.iter() {
        match cur {
            Some((a, b)) if lo <= b => cur = Some((a, b.max(hi))),
            Some((a, b)) => {
                total += b - a;
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
    }
    total + cur.map_or(0.0, |(a, b)| b - a)
}

#[test]
fn unperturbed_measure_matches_strip_areas() {
    // at ε = 0 the maps are the identity and Ω = 2.5 + 0.1 ω₂, so the resonant
    // set is a union of straight strips whose area is integrated directly
    let gamma = 8e-3;
    let spec = standard_model();
    let domain = standard_domain(3);
    let maps = build_maps(&spec, &domain, &standard_config(3, "exploratory"), 0.0, K_BUDGET).unwrap();
    let rep = measure_compare(&domain, &maps, 3, &params(gamma, 100_000, 5)).unwrap();

    let (lo, hi) = (&domain.lo, &domain.hi);
    let n = 4000;
    let h = (hi[0] - lo[0]) / n as f64;
    let mut area = 0.0;
    for i in 0..n {
        let w1 = lo[0] + (i as f64 + 0.5) * h;
        let mut iv = Vec::new();
        for r in 1..=3i32 {
            let width = 2.0 * gamma / (((r + 1) * K_BUDGET as i32) as f64).powf(TAU);
            for k1 in -16i32..=16 {
                for k2 in -16i32..=16 {
                    let nk = k1.abs() + k2.abs();
                    if nk <= r * K_BUDGET as i32 || nk > (r + 1) * K_BUDGET as i32 {
                        continue;
                    }
                    for l in -2i32..=2 {
                        let (b, c) = (k2 as f64 + 0.1 * l as f64, k1 as f64 * w1 + 2.5 * l as f64);
                        if b == 0.0 {
                            if c.abs() < width {
                                iv.push((lo[1], hi[1]));
                            }
                            continue;
                        }
                        let (a1, a2) = ((-width - c) / b, (width - c) / b);
                        let (s, e) = (a1.min(a2).max(lo[1]), a1.max(a2).min(hi[1]));
                        if s < e {
                            iv.push((s, e));
                        }
                    }
                }
            }
        }
        area += covered(&mut iv) * h;
    }
    assert!(rep.hits > 50, "{rep:?}");
    assert!((rep.measured - area).abs() < 4.0 * rep.std_error, "MC {:e} ± {:e} vs {area:e}", rep.measured, rep.std_error);
    assert!(rep.ok && rep.measured <= rep.strip_bound);
}

#[test]
fn fixture_geometry_at_small_epsilon() {
    let spec = standard_model();
    let mut domain = standard_domain(3);
    let maps = build_maps(&spec, &domain, &standard_config(3, "exploratory"), 1e-3, K_BUDGET).unwrap();
    assert!(maps.failed.iter().all(|f| !f));
    for r in 1..=3 {
        domain = carve(&domain, r, &maps, tori::fixture::GAMMA, TAU, K_BUDGET).unwrap();
    }
    assert_eq!(domain.alive_count(3), 9);
    for r in 0..=3 {
        let h = convex_hull_check(&domain, &maps, r, THETA0, 3 * (r as u32 + 1) * K_BUDGET).unwrap();
        assert!(h.ok && h.drift_ok, "{h:?}");
    }
    let a = measure_compare(&domain, &maps, 3, &params(tori::fixture::GAMMA, 20_000, 1)).unwrap();
    let b = measure_compare(&domain, &maps, 3, &params(tori::fixture::GAMMA, 20_000, 1)).unwrap();
    assert_eq!(a.hits, b.hits);
    assert!(a.ok && a.det_ok && a.res_measure_condition, "{a:?}");
    assert!(carve(&domain, 5, &maps, 1e-4, TAU, K_BUDGET).is_err());
}
