use super::homological::GeneratingFunction;
use crate::model::HamiltonianState;
use crate::series::{lie_derivative, PoissonSeries, Truncation};
use crate::{Complex64, Result};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Order and class range kept by the stages.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub s_max: u32,
    pub max_class: u32,
}

impl Budget {
    pub fn truncation(&self, k_budget: u32) -> Truncation {
        Truncation::caps(self.max_class, self.s_max * k_budget)
    }
}

type Chains = BTreeMap<(u32, u32), Vec<PoissonSeries>>;

/// chain[j] = (1/j!) L_χ^j g for j ≤ (s_max − s)/r, stopping at zero.
fn chain(chi: &PoissonSeries, g: &PoissonSeries, s: u32, r: u32, s_max: u32, trunc: &Truncation) -> Result<Vec<PoissonSeries>> {
    let mut out = vec![g.clone()];
    let jmax = (s_max.saturating_sub(s)) / r;
    for j in 1..=jmax {
        let next = lie_derivative(chi, out.last().unwrap(), trunc)?.scale_re(1.0 / j as f64);
        if next.is_zero() {
            break;
        }
        out.push(next);
    }
    Ok(out)
}

fn chains(chi: &PoissonSeries, h: &HamiltonianState, r: u32, budget: &Budget) -> Result<Chains> {
    let trunc = budget.truncation(h.k_budget);
    let cells: Vec<(&(u32, u32), &PoissonSeries)> = h.cells.iter().filter(|(&(_, s), _)| s <= budget.s_max).collect();
    let built: Vec<Result<((u32, u32), Vec<PoissonSeries>)>> =
        cells.par_iter().map(|(&(ell, s), f)| chain(chi, f, s, r, budget.s_max, &trunc).map(|c| ((ell, s), c))).collect();
    built.into_iter().collect()
}

/// Lookup of (1/j!) L^j f_ℓ^{(s)}.
struct Terms<'a> {
    chains: &'a Chains,
}

impl<'a> Terms<'a> {
    fn get(&self, ell: u32, s: i64, j: u32) -> Option<&'a PoissonSeries> {
        if s < 0 {
            return None;
        }
        self.chains.get(&(ell, s as u32)).and_then(|c| c.get(j as usize))
    }
}

/// One output cell as a weighted list of (series, factor).
type Recipe<'a> = Vec<(&'a PoissonSeries, f64)>;

fn assemble(recipes: Vec<((u32, u32), Recipe)>, n1: usize, n2: usize, k_budget: u32) -> BTreeMap<(u32, u32), PoissonSeries> {
    let built: Vec<((u32, u32), PoissonSeries)> = recipes
        .into_par_iter()
        .map(|((ell, s), parts)| {
            let mut acc = PoissonSeries::zero(n1, n2);
            for (f, a) in parts {
                acc = acc.combine(Complex64::new(1.0, 0.0), f, Complex64::new(a, 0.0));
            }
            ((ell, s), acc.filter(|k| k.harmonic() <= s * k_budget).with_cutoff(s * k_budget))
        })
        .collect();
    built.into_iter().filter(|(_, f)| !f.is_zero()).collect()
}

fn sum_over_j<'a>(t: &Terms<'a>, jmax: u32, f: impl Fn(u32) -> (u32, i64)) -> Recipe<'a> {
    (0..=jmax).filter_map(|j| {
        let (ell, s) = f(j);
        t.get(ell, s, j).map(|g| (g, 1.0))
    })
    .collect()
}

fn finish(h: &HamiltonianState, cells: BTreeMap<(u32, u32), PoissonSeries>) -> HamiltonianState {
    let mut out = h.clone();
    out.cells = cells;
    out
}

/// H^{(I;r)} = exp(ε^r L_χ₀) H^{(r−1)}; ⟨f₀^{(r−1,r)}⟩ goes to the energy offset.
pub fn apply_stage1(h: &HamiltonianState, chi0: &GeneratingFunction, average: &PoissonSeries, budget: &Budget) -> Result<HamiltonianState> {
    let r = chi0.step as u32;
    let ch = chains(&chi0.series, h, r, budget)?;
    let t = Terms { chains: &ch };
    let (ri, mut recipes) = (r as i64, Vec::new());
    for ell in 0..=budget.max_class {
        for s in 0..=budget.s_max {
            let si = s as i64;
            let parts: Recipe = match ell {
                0 if s <= r => continue,
                0 if s < 2 * r => t.get(0, si, 0).map(|g| vec![(g, 1.0)]).unwrap_or_default(),
                1 | 2 if s < r => continue,
                _ => sum_over_j(&t, s / r, |j| (ell + 2 * j, si - j as i64 * ri)),
            };
            recipes.push(((ell, s), parts));
        }
    }
    let mut out = finish(h, assemble(recipes, h.n1, h.n2, h.k_budget));
    let c = average.coeff(&crate::MonomialKey::one(h.n1, h.n2));
    out.energy_offset += h.epsilon.powi(r as i32) * c.re;
    Ok(out)
}

/// H^{(II;r)} = exp(ε^r L_χ₁) H^{(I;r)}.
pub fn apply_stage2(h: &HamiltonianState, chi1: &GeneratingFunction, budget: &Budget) -> Result<HamiltonianState> {
    let r = chi1.step as u32;
    let ch = chains(&chi1.series, h, r, budget)?;
    let t = Terms { chains: &ch };
    let (ri, mut recipes) = (r as i64, Vec::new());
    for ell in 0..=budget.max_class {
        for s in 0..=budget.s_max {
            let si = s as i64;
            let copy = |e: u32| t.get(e, si, 0).map(|g| (g, 1.0));
            let parts: Recipe = match ell {
                0 | 1 if s <= r => continue,
                0 | 1 if s < 2 * r => copy(ell).into_iter().collect(),
                0 if s == 2 * r => copy(0).into_iter().chain(t.get(1, ri, 1).map(|g| (g, 0.5))).collect(),
                0 if s < 3 * r => copy(0).into_iter().chain(t.get(1, si - ri, 1).map(|g| (g, 1.0))).collect(),
                2 if s < r => continue,
                _ => sum_over_j(&t, s / r, |j| (ell + j, si - j as i64 * ri)),
            };
            recipes.push(((ell, s), parts));
        }
    }
    Ok(finish(h, assemble(recipes, h.n1, h.n2, h.k_budget)))
}

/// H^{(r)} = exp(ε^r L_χ₂) H^{(II;r)} with Z^{(r)} recollected in the
/// frequencies.
pub fn apply_stage3(h: &HamiltonianState, chi2: &GeneratingFunction, z: &PoissonSeries, budget: &Budget) -> Result<HamiltonianState> {
    let r = chi2.step as u32;
    let trunc = budget.truncation(h.k_budget);
    let ch = chains(&chi2.series, h, r, budget)?;
    let zc = chain(&chi2.series, z, r, r, budget.s_max, &trunc)?;
    let t = Terms { chains: &ch };
    let (ri, mut recipes) = (r as i64, Vec::new());
    for ell in 0..=budget.max_class {
        for s in 0..=budget.s_max {
            let si = s as i64;
            let (q, m) = (s / r, s % r);
            let parts: Recipe = match ell {
                0..=2 if s <= r => continue,
                0 | 1 => sum_over_j(&t, q - 1, |j| (ell, si - j as i64 * ri)),
                2 if m == 0 => {
                    let mut v: Recipe = Vec::new();
                    let jf = q as f64;
                    if let Some(g) = t.get(2, ri, q - 1) {
                        v.push((g, (jf - 1.0) / jf));
                    }
                    if let Some(g) = zc.get(q as usize - 1) {
                        v.push((g, 1.0 / jf));
                    }
                    v.extend(sum_over_j(&t, q.saturating_sub(2), |i| (2, (q - i) as i64 * ri)));
                    v
                }
                2 => sum_over_j(&t, q - 1, |i| (2, ((q - i) * r + m) as i64)),
                _ => sum_over_j(&t, q, |j| (ell, si - j as i64 * ri)),
            };
            recipes.push(((ell, s), parts));
        }
    }
    let mut out = finish(h, assemble(recipes, h.n1, h.n2, h.k_budget));
    let (dw, dbig) = frequency_shift(z, h.epsilon.powi(r as i32));
    for (w, d) in out.omega.iter_mut().zip(&dw) {
        *w += d;
    }
    for (w, d) in out.big_omega.iter_mut().zip(&dbig) {
        *w += d;
    }
    out.r = r as usize;
    Ok(out)
}

/// (δω, ΔΩ) = ε^r (∂Z/∂p, i·[z_j w_j]Z).
pub fn frequency_shift(z: &PoissonSeries, eps_r: f64) -> (Vec<f64>, Vec<f64>) {
    let (n1, n2) = (z.n1(), z.n2());
    let one = crate::MonomialKey::one(n1, n2);
    let dw = (0..n1)
        .map(|j| {
            let mut k = one.clone();
            k.m[j] = 1;
            eps_r * z.coeff(&k).re
        })
        .collect();
    let dbig = (0..n2)
        .map(|j| {
            let mut k = one.clone();
            k.l[j] = 1;
            k.lbar[j] = 1;
            eps_r * (Complex64::i() * z.coeff(&k)).re
        })
        .collect();
    (dw, dbig)
}
