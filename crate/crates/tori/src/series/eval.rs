use super::PoissonSeries;
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

/// A point (p, q, z, w) of the complexified phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub p: Vec<Complex64>,
    pub q: Vec<f64>,
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl PhasePoint {
    /// Real point with z = (x + i y)/√2 and w = i z̄.
    pub fn from_real(p: &[f64], q: &[f64], x: &[f64], y: &[f64]) -> Self {
        let z: Vec<Complex64> = x.iter().zip(y).map(|(a, b)| Complex64::new(*a, *b) / SQRT_2).collect();
        let w = z.iter().map(|z| Complex64::i() * z.conj()).collect();
        PhasePoint { p: p.iter().map(|&v| Complex64::new(v, 0.0)).collect(), q: q.to_vec(), z, w }
    }

    /// Real coordinates (p, q, x, y), dropping imaginary round-off.
    pub fn to_real(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let p = self.p.iter().map(|c| c.re).collect();
        let x = self.z.iter().map(|z| SQRT_2 * z.re).collect();
        let y = self.z.iter().map(|z| SQRT_2 * z.im).collect();
        (p, self.q.clone(), x, y)
    }
}

/// Value and all first partial derivatives of a series at a point.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub value: Complex64,
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

struct Powers {
    // table[v][e] = x_v^e
    table: Vec<Vec<Complex64>>,
}

impl Powers {
    fn new(xs: &[Complex64], max_exp: &[usize]) -> Self {
        let table = xs
            .iter()
            .zip(max_exp)
            .map(|(&x, &n)| {
                let mut row = Vec::with_capacity(n + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=n {
                    row.push(acc);
                    acc *= x;
                }
                row
            })
            .collect();
        Powers { table }
    }

    #[inline]
    fn get(&self, v: usize, e: usize) -> Complex64 {
        self.table[v][e]
    }
}

impl PoissonSeries {
    fn exponent_bounds(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut bm = vec![0usize; self.n1()];
        let mut bl = vec![0usize; self.n2()];
        let mut bb = vec![0usize; self.n2()];
        let mut bk = vec![0usize; self.n1()];
        for (k, _) in self.terms() {
            for j in 0..self.n1() {
                bm[j] = bm[j].max(k.m[j] as usize);
                bk[j] = bk[j].max(k.k[j].unsigned_abs() as usize);
            }
            for j in 0..self.n2() {
                bl[j] = bl[j].max(k.l[j] as usize);
                bb[j] = bb[j].max(k.lbar[j] as usize);
            }
        }
        (bm, bl, bb, bk)
    }

    fn tables(&self, pt: &PhasePoint) -> (Powers, Powers, Powers, Powers, Powers) {
        let (bm, bl, bb, bk) = self.exponent_bounds();
        let e: Vec<Complex64> = pt.q.iter().map(|&q| Complex64::new(0.0, q).exp()).collect();
        let einv: Vec<Complex64> = e.iter().map(|x| x.conj()).collect();
        (Powers::new(&pt.p, &bm), Powers::new(&pt.z, &bl), Powers::new(&pt.w, &bb), Powers::new(&e, &bk), Powers::new(&einv, &bk))
    }

    pub fn evaluate(&self, pt: &PhasePoint) -> Complex64 {
        assert!(pt.p.len() == self.n1() && pt.q.len() == self.n1() && pt.z.len() == self.n2() && pt.w.len() == self.n2());
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let (pp, zp, wp, ep, en) = self.tables(pt);
        let mut total = Complex64::new(0.0, 0.0);
        for (k, c) in self.terms() {
            let mut v = *c;
            for j in 0..self.n1() {
                v *= pp.get(j, k.m[j] as usize);
                let kj = k.k[j];
                v *= if kj >= 0 { ep.get(j, kj as usize) } else { en.get(j, (-kj) as usize) };
            }
            for j in 0..self.n2() {
                v *= zp.get(j, k.l[j] as usize) * wp.get(j, k.lbar[j] as usize);
            }
            total += v;
        }
        total
    }

    /// Evaluation at a real point, w = i z̄.
    pub fn evaluate_real(&self, p: &[f64], q: &[f64], z: &[Complex64]) -> Complex64 {
        let w = z.iter().map(|z| Complex64::i() * z.conj()).collect();
        let pt = PhasePoint { p: p.iter().map(|&v| Complex64::new(v, 0.0)).collect(), q: q.to_vec(), z: z.to_vec(), w };
        self.evaluate(&pt)
    }

    pub fn gradient(&self, pt: &PhasePoint) -> Gradient {
        let (n1, n2) = (self.n1(), self.n2());
        let zero = Complex64::new(0.0, 0.0);
        let mut g = Gradient { value: zero, p: vec![zero; n1], q: vec![zero; n1], z: vec![zero; n2], w: vec![zero; n2] };
        if self.is_zero() {
            return g;
        }
        let (pp, zp, wp, ep, en) = self.tables(pt);
        let nv = n1 + 2 * n2;
        let mut fac = vec![zero; nv];
        let mut dfac = vec![zero; nv];
        let mut suffix = vec![zero; nv + 1];
        for (k, c) in self.terms() {
            let mut trig = *c;
            for j in 0..n1 {
                let kj = k.k[j];
                trig *= if kj >= 0 { ep.get(j, kj as usize) } else { en.get(j, (-kj) as usize) };
            }
            for j in 0..n1 {
                let e = k.m[j] as usize;
                fac[j] = pp.get(j, e);
                dfac[j] = if e > 0 { pp.get(j, e - 1) * e as f64 } else { zero };
            }
            for j in 0..n2 {
                let (el, eb) = (k.l[j] as usize, k.lbar[j] as usize);
                fac[n1 + j] = zp.get(j, el);
                dfac[n1 + j] = if el > 0 { zp.get(j, el - 1) * el as f64 } else { zero };
                fac[n1 + n2 + j] = wp.get(j, eb);
                dfac[n1 + n2 + j] = if eb > 0 { wp.get(j, eb - 1) * eb as f64 } else { zero };
            }
            suffix[nv] = Complex64::new(1.0, 0.0);
            for v in (0..nv).rev() {
                suffix[v] = suffix[v + 1] * fac[v];
            }
            let value = trig * suffix[0];
            g.value += value;
            for j in 0..n1 {
                if k.k[j] != 0 {
                    g.q[j] += value * Complex64::new(0.0, k.k[j] as f64);
                }
            }
            let mut prefix = trig;
            for v in 0..nv {
                if dfac[v] != zero {
                    let d = prefix * dfac[v] * suffix[v + 1];
                    if v < n1 {
                        g.p[v] += d;
                    } else if v < n1 + n2 {
                        g.z[v - n1] += d;
                    } else {
                        g.w[v - n1 - n2] += d;
                    }
                }
                prefix *= fac[v];
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Truncation;

    #[test]
    fn evaluate_simple() {
        let p1 = PoissonSeries::p(1, 0, 0);
        let pt = PhasePoint { p: vec![Complex64::new(2.0, 0.0)], q: vec![0.3], z: vec![], w: vec![] };
        assert_eq!(p1.evaluate(&pt), Complex64::new(2.0, 0.0));
        assert_eq!(PoissonSeries::zero(1, 0).evaluate(&pt), Complex64::new(0.0, 0.0));
        let c = PoissonSeries::cos_q(0, &[2]);
        assert!((c.evaluate(&pt).re - (0.6f64).cos()).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_component_derivatives() {
        let t = Truncation::default();
        let f = PoissonSeries::p(2, 1, 0)
            .mul(&PoissonSeries::p(2, 1, 1), &t)
            .mul(&PoissonSeries::cos_q(1, &[1, 2]), &t)
            .add(&PoissonSeries::z(2, 1, 0).mul(&PoissonSeries::z(2, 1, 0), &t).mul(&PoissonSeries::w(2, 1, 0), &t).mul(&PoissonSeries::sin_q(1, &[0, 1]), &t));
        let pt = PhasePoint {
            p: vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.05)],
            q: vec![0.7, -1.1],
            z: vec![Complex64::new(0.2, -0.4)],
            w: vec![Complex64::new(0.1, 0.3)],
        };
        let g = f.gradient(&pt);
        assert!((g.value - f.evaluate(&pt)).norm() < 1e-14);
        for j in 0..2 {
            assert!((g.p[j] - f.deriv_p(j).evaluate(&pt)).norm() < 1e-14);
            assert!((g.q[j] - f.deriv_q(j).evaluate(&pt)).norm() < 1e-14);
        }
        assert!((g.z[0] - f.deriv_z(0).evaluate(&pt)).norm() < 1e-14);
        assert!((g.w[0] - f.deriv_w(0).evaluate(&pt)).norm() < 1e-14);
    }
}
