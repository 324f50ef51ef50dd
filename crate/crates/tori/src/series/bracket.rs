use super::{Accumulator, MonomialKey, PoissonSeries, Truncation};
use crate::Result;
use num_complex::Complex64;
use rayon::prelude::*;

// fixed chunk size keeps the reduction order independent of the thread count
const CHUNK: usize = 48;
const PARALLEL_WORK: usize = 1 << 14;

/// {f, g} = Σ_j (f_{q_j} g_{p_j} − f_{p_j} g_{q_j}) + Σ_j (f_{w_j} g_{z_j} − f_{z_j} g_{w_j}).
pub fn poisson_bracket(f: &PoissonSeries, g: &PoissonSeries) -> Result<PoissonSeries> {
    poisson_bracket_with(f, g, &Truncation::default())
}

pub fn poisson_bracket_with(f: &PoissonSeries, g: &PoissonSeries, trunc: &Truncation) -> Result<PoissonSeries> {
    f.check_dims(g)?;
    let (n1, n2) = (f.n1(), f.n2());
    let cutoff = f.trig_cutoff() + g.trig_cutoff();
    let mut out = if f.len() * g.len() >= PARALLEL_WORK {
        let parts: Vec<Accumulator> = f.terms().par_chunks(CHUNK).map(|chunk| bracket_chunk(chunk, g, trunc)).collect();
        let mut acc = Accumulator::with_capacity(f.len() * g.len() / 4);
        for p in parts {
            acc.merge(p);
        }
        acc.finish(n1, n2, cutoff, trunc)
    } else {
        bracket_chunk(f.terms(), g, trunc).finish(n1, n2, cutoff, trunc)
    };
    out.set_ledger(f.ledger().union(g.ledger()));
    Ok(out)
}

fn bracket_chunk(fs: &[(MonomialKey, Complex64)], g: &PoissonSeries, trunc: &Truncation) -> Accumulator {
    let mut acc = Accumulator::with_capacity(fs.len() * g.len());
    let n1 = g.n1();
    let n2 = g.n2();
    for (ka, ca) in fs {
        let cls_a = ka.class();
        for (kb, cb) in g.terms() {
            let cls = cls_a + kb.class();
            if cls < 2 || trunc.max_class.map_or(false, |c| cls - 2 > c) {
                continue;
            }
            let k_sum: super::Harm = ka.k.iter().zip(&kb.k).map(|(a, b)| a + b).collect();
            if let Some(h) = trunc.max_harmonic {
                if k_sum.iter().map(|x| x.unsigned_abs()).sum::<u32>() > h {
                    continue;
                }
            }
            let cc = ca * cb;
            let base = MonomialKey {
                m: ka.m.iter().zip(&kb.m).map(|(a, b)| a + b).collect(),
                l: ka.l.iter().zip(&kb.l).map(|(a, b)| a + b).collect(),
                lbar: ka.lbar.iter().zip(&kb.lbar).map(|(a, b)| a + b).collect(),
                k: k_sum,
            };
            for j in 0..n1 {
                let t = ka.k[j] as f64 * kb.m[j] as f64 - ka.m[j] as f64 * kb.k[j] as f64;
                if t != 0.0 {
                    let mut key = base.clone();
                    key.m[j] -= 1;
                    acc.add(key, cc * Complex64::new(0.0, t));
                }
            }
            for j in 0..n2 {
                let t = ka.lbar[j] as f64 * kb.l[j] as f64 - ka.l[j] as f64 * kb.lbar[j] as f64;
                if t != 0.0 {
                    let mut key = base.clone();
                    key.l[j] -= 1;
                    key.lbar[j] -= 1;
                    acc.add(key, cc * t);
                }
            }
        }
    }
    acc
}

/// L_χ g = {g, χ}, the derivative of g along the flow generated by χ.
pub fn lie_derivative(chi: &PoissonSeries, g: &PoissonSeries, trunc: &Truncation) -> Result<PoissonSeries> {
    poisson_bracket_with(g, chi, trunc)
}

/// Σ_{j=0}^{j_max} (scale^j / j!) L_χ^j g.
pub fn lie_series_apply(chi: &PoissonSeries, g: &PoissonSeries, scale: Complex64, j_max: usize, trunc: &Truncation) -> Result<PoissonSeries> {
    let mut sum = g.truncate(trunc);
    let mut term = sum.clone();
    for j in 1..=j_max {
        term = lie_derivative(chi, &term, trunc)?.scale(scale / j as f64);
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bracket_of_angle_and_action() {
        let w1 = 1.3;
        let e = PoissonSeries::exp_iq(0, &[1]);
        let h = PoissonSeries::p(1, 0, 0).scale_re(w1);
        let b = poisson_bracket(&e, &h).unwrap();
        assert_eq!(b, PoissonSeries::exp_iq(0, &[1]).scale(c(0.0, w1)));
    }

    #[test]
    fn self_bracket_vanishes() {
        let f = PoissonSeries::p(2, 1, 0)
            .mul(&PoissonSeries::cos_q(1, &[1, -1]), &Truncation::default())
            .add(&PoissonSeries::z(2, 1, 0).mul(&PoissonSeries::w(2, 1, 0), &Truncation::default()));
        assert!(poisson_bracket(&f, &f).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_of_kernel() {
        let om = [1.0, 0.618];
        let kernel = PoissonSeries::p(2, 0, 0).scale_re(om[0]).add(&PoissonSeries::p(2, 0, 1).scale_re(om[1]));
        let chi = PoissonSeries::exp_iq(0, &[2, -3]).scale(c(0.5, 0.25));
        let got = lie_derivative(&chi, &kernel, &Truncation::default()).unwrap();
        let kw = 2.0 * om[0] - 3.0 * om[1];
        assert_eq!(got, chi.scale(c(0.0, -kw)));
    }

    #[test]
    fn transverse_divisor_sign() {
        // {H0, z e^{iq}} with H0 = ω p − iΩ z w gives −i(ω + Ω) z e^{iq}
        let (om, big) = (1.0, 2.5);
        let zw = PoissonSeries::z(1, 1, 0).mul(&PoissonSeries::w(1, 1, 0), &Truncation::default());
        let h0 = PoissonSeries::p(1, 1, 0).scale_re(om).add(&zw.scale(c(0.0, -big)));
        let chi = PoissonSeries::z(1, 1, 0).mul(&PoissonSeries::exp_iq(1, &[1]), &Truncation::default());
        let got = lie_derivative(&chi, &h0, &Truncation::default()).unwrap();
        assert_eq!(got, chi.scale(c(0.0, -(om + big))));
    }

    #[test]
    fn lie_series_zero_order_is_identity() {
        let g = PoissonSeries::cos_q(1, &[1]);
        let chi = PoissonSeries::sin_q(1, &[2]);
        assert_eq!(lie_series_apply(&chi, &g, c(0.1, 0.0), 0, &Truncation::default()).unwrap(), g);
    }
}
