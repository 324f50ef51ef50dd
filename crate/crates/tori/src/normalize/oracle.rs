//! The Lie transform of a whole Hamiltonian computed in one piece, used to
//! cross-check the stage recursions.

use super::homological::kernel;
use super::stages::Budget;
use crate::model::HamiltonianState;
use crate::series::{lie_derivative, PoissonSeries};
use crate::{Complex64, MonomialKey, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// exp(ε^r L_χ) H graded by order, then split by class. The kernel is
/// included at order 0 and transformed like every other term. Also returns,
/// per cell, the largest coefficient among the summed contributions.
pub fn monolithic_transform(h: &HamiltonianState, chi: &PoissonSeries, r: u32, budget: &Budget) -> Result<(BTreeMap<(u32, u32), PoissonSeries>, BTreeMap<(u32, u32), f64>)> {
    let trunc = budget.truncation(h.k_budget);
    let mut orders: BTreeMap<u32, PoissonSeries> = BTreeMap::new();
    orders.insert(0, kernel(&h.omega, &h.big_omega));
    for (&(_, s), f) in &h.cells {
        if s <= budget.s_max {
            let slot = orders.entry(s).or_insert_with(|| PoissonSeries::zero(h.n1, h.n2));
            *slot = slot.add(f);
        }
    }
    let mut out: BTreeMap<u32, PoissonSeries> = BTreeMap::new();
    let mut gross: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (&s, g) in &orders {
        let mut term = g.clone();
        let mut j = 0;
        loop {
            let target = s + j * r;
            for (ell, part) in split(&term) {
                let e = gross.entry((ell, target)).or_insert(0.0);
                *e = e.max(part.max_abs());
            }
            let slot = out.entry(target).or_insert_with(|| PoissonSeries::zero(h.n1, h.n2));
            *slot = slot.add(&term);
            if target + r > budget.s_max {
                break;
            }
            j += 1;
            term = lie_derivative(chi, &term, &trunc)?.scale_re(1.0 / j as f64);
            if term.is_zero() {
                break;
            }
        }
    }
    let mut cells = BTreeMap::new();
    for (s, f) in out {
        for (ell, part) in split(&f) {
            cells.insert((ell, s), part);
        }
    }
    Ok((cells, gross))
}

fn split(f: &PoissonSeries) -> Vec<(u32, PoissonSeries)> {
    let mut classes: Vec<u32> = f.terms().iter().map(|(k, _)| k.class()).collect();
    classes.sort_unstable();
    classes.dedup();
    classes.into_iter().map(|ell| (ell, f.class_part(ell))).collect()
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OracleComparison {
    /// max over cells of max|stagewise − monolithic| / (largest contribution).
    pub worst_relative: f64,
    pub worst_cell: Option<(u32, u32)>,
    pub cells_compared: usize,
}

/// Compares a stagewise result with the monolithic transform of its input.
/// `absorbed` lists what the stage moved out of the cells (the energy
/// constant, Z^{(r)}) together with the kernel, which the monolithic result
/// carries at order 0.
pub fn compare_with_monolithic(stagewise: &HamiltonianState, input: &HamiltonianState, chi: &PoissonSeries, r: u32, budget: &Budget, absorbed: &[((u32, u32), PoissonSeries)]) -> Result<OracleComparison> {
    let (mono, gross) = monolithic_transform(input, chi, r, budget)?;
    let mut expected: BTreeMap<(u32, u32), PoissonSeries> = stagewise.cells.iter().filter(|(&(_, s), _)| s <= budget.s_max).map(|(k, v)| (*k, v.clone())).collect();
    let mut extra = absorbed.to_vec();
    extra.push(((2, 0), kernel(&input.omega, &input.big_omega)));
    for (cell, f) in extra {
        let slot = expected.entry(cell).or_insert_with(|| PoissonSeries::zero(input.n1, input.n2));
        *slot = slot.add(&f);
    }
    let mut keys: Vec<(u32, u32)> = mono.keys().chain(expected.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let zero = PoissonSeries::zero(input.n1, input.n2);
    let mut cmp = OracleComparison::default();
    for cell in keys {
        let a = mono.get(&cell).unwrap_or(&zero);
        let b = expected.get(&cell).unwrap_or(&zero);
        let diff = a.sub(b).max_abs();
        let scale = gross.get(&cell).copied().unwrap_or(0.0).max(b.max_abs());
        let rel = if diff == 0.0 { 0.0 } else if scale == 0.0 { f64::INFINITY } else { diff / scale };
        cmp.cells_compared += 1;
        if rel > cmp.worst_relative {
            cmp.worst_relative = rel;
            cmp.worst_cell = Some(cell);
        }
    }
    Ok(cmp)
}

/// The constant ⟨f₀⟩ as a class-0 series.
pub fn constant_series(n1: usize, n2: usize, c: Complex64) -> PoissonSeries {
    PoissonSeries::monomial(MonomialKey::one(n1, n2), c)
}
