use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// ν_{r,s}, ν^{(I)}_{r,s}, ν^{(II)}_{r,s} for 0 ≤ r ≤ r_max, 0 ≤ s ≤ s_max.
///
/// Row r = 0 of the intermediate tables repeats ν_{0,s} = 1.
#[derive(Clone, Debug, Serialize)]
pub struct NuTable {
    pub r_max: usize,
    pub s_max: usize,
    nu: Vec<Vec<BigUint>>,
    nu1: Vec<Vec<BigUint>>,
    nu2: Vec<Vec<BigUint>>,
}

pub fn build_nu(r_max: usize, s_max: usize) -> NuTable {
    // ν_{r−1,r} is needed for every r ≤ r_max, so the s range covers r_max
    let sw = s_max.max(r_max);
    let ones = vec![BigUint::one(); sw + 1];
    let mut nu = vec![ones.clone()];
    let mut nu1 = vec![ones.clone()];
    let mut nu2 = vec![ones];
    for r in 1..=r_max {
        let prev = &nu[r - 1];
        let row1 = sweep(&prev[r], prev, r, sw);
        let row2 = sweep(&row1[r], &row1, r, sw);
        let row = sweep(&row2[r], &row2, r, sw);
        nu1.push(row1);
        nu2.push(row2);
        nu.push(row);
    }
    for t in [&mut nu, &mut nu1, &mut nu2] {
        for row in t.iter_mut() {
            row.truncate(s_max + 1);
        }
    }
    NuTable { r_max, s_max, nu, nu1, nu2 }
}

// out_s = Σ_{j=0}^{⌊s/r⌋} base^j · src_{s−jr}
fn sweep(base: &BigUint, src: &[BigUint], r: usize, sw: usize) -> Vec<BigUint> {
    (0..=sw)
        .map(|s| {
            let mut acc = BigUint::zero();
            let mut pw = BigUint::one();
            for j in 0..=s / r {
                acc += &pw * &src[s - j * r];
                pw *= base;
            }
            acc
        })
        .collect()
}

impl NuTable {
    pub fn nu(&self, r: usize, s: usize) -> &BigUint {
        &self.nu[r][s]
    }

    pub fn nu_i(&self, r: usize, s: usize) -> &BigUint {
        &self.nu1[r][s]
    }

    pub fn nu_ii(&self, r: usize, s: usize) -> &BigUint {
        &self.nu2[r][s]
    }

    pub fn log2_nu(&self, r: usize, s: usize) -> f64 {
        log2_big(&self.nu[r][s])
    }

    pub fn log2_nu_i(&self, r: usize, s: usize) -> f64 {
        log2_big(&self.nu1[r][s])
    }

    pub fn log2_nu_ii(&self, r: usize, s: usize) -> f64 {
        log2_big(&self.nu2[r][s])
    }

    /// Entries violating ν^{(I)} ≤ ν^{(II)} ≤ ν ≤ 2^{8s}, as (r, s).
    pub fn bound_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..=self.r_max {
            for s in 0..=self.s_max {
                let cap = BigUint::one() << (8 * s);
                let ok = self.nu[r][s] <= cap && self.nu1[r][s] <= self.nu2[r][s] && self.nu2[r][s] <= self.nu[r][s];
                if !ok {
                    out.push((r, s));
                }
            }
        }
        out
    }
}

pub(crate) fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("finite").log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("finite").log2() + shift as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_row_by_hand() {
        let t = build_nu(1, 3);
        // ν^{(I)}_{1,s} = s + 1
        for s in 0..=3 {
            assert_eq!(t.nu_i(1, s), &BigUint::from(s as u32 + 1));
            assert_eq!(t.nu(0, s), &BigUint::one());
        }
        assert_eq!(t.nu_ii(1, 1), &BigUint::from(4u32));
        assert_eq!(t.nu(1, 1), &BigUint::from(8u32));
    }

    #[test]
    fn log2_of_large_values() {
        let x = BigUint::one() << 2000u32;
        assert!((log2_big(&x) - 2000.0).abs() < 1e-9);
        assert!((log2_big(&BigUint::from(8u32)) - 3.0).abs() < 1e-15);
    }
}
