//! Bracket, evaluation and Lie-series flow against real-variable oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tori::ledger::IndexList;
use tori::model::{TermSpec, Trig};
use tori::normalize::{Direction, GeneratingFunction, NearIdentityMap};
use tori::series::poisson_bracket;
use tori::verify::{integrate, integrators, RealPoint, Tolerance};
use tori::PoissonSeries;

const N1: usize = 2;
const N2: usize = 1;

fn random_terms(rng: &mut ChaCha8Rng, count: usize) -> Vec<TermSpec> {
    (0..count)
        .map(|_| TermSpec {
            p_exp: (0..N1).map(|_| rng.gen_range(0..2)).collect(),
            x_exp: vec![rng.gen_range(0..3)],
            y_exp: vec![rng.gen_range(0..2)],
            k: (0..N1).map(|_| rng.gen_range(-2..=2)).collect(),
            coeff: rng.gen_range(-1.0..1.0),
            trig: if rng.gen_bool(0.5) { Trig::Cos } else { Trig::Sin },
            coeff_im: None,
            eps_power: None,
        })
        .collect()
}

fn series_of(terms: &[TermSpec]) -> PoissonSeries {
    terms.iter().fold(PoissonSeries::zero(N1, N2), |acc, t| acc.add(&t.to_series(N1, N2)))
}

fn eval_terms(terms: &[TermSpec], v: &[f64]) -> f64 {
    terms.iter().map(|t| t.evaluate(&v[0..2], &v[2..4], &v[4..5], &v[5..6])).sum()
}

// central differences in the flat (p, q, x, y) layout
fn grad(terms: &[TermSpec], v: &[f64]) -> Vec<f64> {
    let h = 1e-5;
    (0..v.len())
        .map(|i| {
            let mut a = v.to_vec();
            let mut b = v.to_vec();
            a[i] += h;
            b[i] -= h;
            (eval_terms(terms, &a) - eval_terms(terms, &b)) / (2.0 * h)
        })
        .collect()
}

fn random_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..6).map(|i| if i == 2 || i == 3 { rng.gen_range(0.0..std::f64::consts::TAU) } else { rng.gen_range(-0.7..0.7) }).collect()
}

#[test]
fn series_evaluation_matches_term_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let terms = random_terms(&mut rng, 6);
        let s = series_of(&terms);
        let v = random_point(&mut rng);
        let got = RealPoint::from_flat(&v, N1, N2);
        let val = s.evaluate(&got.phase());
        assert!((val.re - eval_terms(&terms, &v)).abs() < 1e-13, "{val} vs {}", eval_terms(&terms, &v));
        assert!(val.im.abs() < 1e-13);
    }
}

#[test]
fn bracket_matches_real_variable_formula() {
    // {f, g} = Σ f_q g_p − f_p g_q + f_y g_x − f_x g_y
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let f = random_terms(&mut rng, 5);
        let g = random_terms(&mut rng, 5);
        let b = poisson_bracket(&series_of(&f), &series_of(&g)).unwrap();
        let v = random_point(&mut rng);
        let (df, dg) = (grad(&f, &v), grad(&g, &v));
        let oracle = df[2] * dg[0] - df[0] * dg[2] + df[3] * dg[1] - df[1] * dg[3] + df[5] * dg[4] - df[4] * dg[5];
        let got = b.evaluate(&RealPoint::from_flat(&v, N1, N2).phase());
        assert!((got.re - oracle).abs() < 1e-7 * (1.0 + oracle.abs()), "{got} vs {oracle}");
        assert!(got.im.abs() < 1e-12);
    }
}

#[test]
fn jacobi_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (f, g, h) = (series_of(&random_terms(&mut rng, 4)), series_of(&random_terms(&mut rng, 4)), series_of(&random_terms(&mut rng, 4)));
    let br = |a: &PoissonSeries, b: &PoissonSeries| poisson_bracket(a, b).unwrap();
    let sum = br(&f, &br(&g, &h)).add(&br(&g, &br(&h, &f))).add(&br(&h, &br(&f, &g)));
    let scale = br(&f, &br(&g, &h)).max_abs();
    assert!(sum.max_abs() < 1e-13 * scale.max(1.0));
}

// class ≤ 2 terms with |k| ≤ 1, the shape of a generating function; their
// repeated brackets stay in class ≤ 2
fn generator_terms(rng: &mut ChaCha8Rng, count: usize) -> Vec<TermSpec> {
    random_terms(rng, count)
        .into_iter()
        .map(|mut t| {
            for k in t.k.iter_mut() {
                *k = (*k).clamp(-1, 1);
            }
            if t.p_exp.iter().sum::<u16>() > 0 {
                t.p_exp = if t.p_exp[0] > 0 { vec![1, 0] } else { vec![0, 1] };
                t.x_exp = vec![0];
                t.y_exp = vec![0];
            } else if t.x_exp[0] + t.y_exp[0] > 2 {
                t.x_exp = vec![1];
            }
            t
        })
        .collect()
}

#[test]
fn lie_series_map_is_the_time_one_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let chi = series_of(&generator_terms(&mut rng, 5));
    let a = 0.02;
    let gen = GeneratingFunction { stage: 0, step: 1, series: chi.clone(), divisor_min: f64::INFINITY, margin: f64::INFINITY, ledger: IndexList::empty() };
    let map = NearIdentityMap::new(&[gen], a, 20, 1e-18).unwrap();
    let integ = integrators().get("gbs").unwrap();
    for _ in 0..5 {
        let x0 = RealPoint::from_flat(&random_point(&mut rng), N1, N2);
        let mapped = RealPoint::from_phase(&map.apply(&x0.phase(), Direction::ToOriginal)).flat();
        let flowed = integrate(&chi.scale_re(a), &x0, 1.0, 1.0, integ.as_ref(), Tolerance { rtol: 1e-14, atol: 1e-15 }).unwrap();
        let end = flowed.points.last().unwrap().flat();
        for (m, e) in mapped.iter().zip(&end) {
            assert!((m - e).abs() < 1e-11, "{mapped:?} vs {end:?}");
        }
        let back = RealPoint::from_phase(&map.apply(&RealPoint::from_flat(&mapped, N1, N2).phase(), Direction::ToNormal)).flat();
        for (b, x) in back.iter().zip(x0.flat()) {
            assert!((b - x).abs() < 1e-12);
        }
    }
}
