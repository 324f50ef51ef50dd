//! The r-th normalization step: three homological equations, three Lie
//! transforms and the frequency corrections, with divisor ledgers.

mod homological;
mod oracle;
mod policy;
mod run;
mod stages;
mod transform;

pub use homological::{homological_residual, kernel, solve_chi0, solve_chi1, solve_chi2, GeneratingFunction, StepContext};
pub use oracle::{compare_with_monolithic, constant_series, monolithic_transform, OracleComparison};
pub use policy::{divisor_policies, Divisor, DivisorPolicy, Exploratory, Floors, Strict};
pub use run::{normalization_step, normalize, NormalizationRun, NormalizeConfig, StepReport};
pub use stages::{apply_stage1, apply_stage2, apply_stage3, frequency_shift, Budget};
pub use transform::{transform_point, Direction, NearIdentityMap};

use crate::lattice::{dot, l1_ball_nonzero, l1_shell};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct WorstDivisor {
    pub value: f64,
    pub floor: f64,
    pub k: Vec<i32>,
    pub l: Vec<i32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonResonance {
    pub ok: bool,
    /// Smallest |k·ω + ℓ·Ω| over 0 < |k| ≤ rK, |ℓ| ≤ 2.
    pub worst_a: Option<WorstDivisor>,
    /// Smallest |ℓ·Ω| over 0 < |ℓ| ≤ 2.
    pub worst_b: Option<WorstDivisor>,
}

/// Exhaustive check of the order-r non-resonance conditions.
pub fn check_nonresonance(omega: &[f64], big_omega: &[f64], r: usize, gamma: f64, tau: f64, k_budget: u32) -> NonResonance {
    let rk = r as u32 * k_budget;
    let floor_a = gamma / (rk as f64).powf(tau);
    let mut worst_a: Option<WorstDivisor> = None;
    let ls = l1_shell(big_omega.len(), 0, 2);
    for k in l1_ball_nonzero(omega.len(), rk) {
        let kw = dot(&k, omega);
        for l in &ls {
            let v = (kw + dot(l, big_omega)).abs();
            if worst_a.as_ref().map_or(true, |w| v < w.value) {
                worst_a = Some(WorstDivisor { value: v, floor: floor_a, k: k.clone(), l: l.clone() });
            }
        }
    }
    let mut worst_b: Option<WorstDivisor> = None;
    for l in l1_shell(big_omega.len(), 1, 2) {
        let v = dot(&l, big_omega).abs();
        if worst_b.as_ref().map_or(true, |w| v < w.value) {
            worst_b = Some(WorstDivisor { value: v, floor: gamma, k: vec![0; omega.len()], l });
        }
    }
    let ok = worst_a.as_ref().map_or(true, |w| w.value >= w.floor) && worst_b.as_ref().map_or(true, |w| w.value >= w.floor);
    NonResonance { ok, worst_a, worst_b }
}
