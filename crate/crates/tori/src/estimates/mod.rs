//! Explicit constants, restriction sequences and measured-vs-bound audits.
//!
//! Every bound is compared in the log domain: a violation means
//! `ln(measured) > ln(bound) + SLACK·max(1, |ln(bound)|)`.

mod audit;

pub use audit::{audit_lemma4, audit_lemma6, convergence_summary, lemma3_check, AuditKind, BoundAudit, BoundRow, ConvergenceRow, ConvergenceTable, DecayFit};

use crate::geometry::FrequencyDomain;
use crate::model::{HypothesisParams, HypothesisReport};
use crate::series::NormParameters;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, LN_2, PI};

/// Relative slack of the log-domain comparisons.
pub const SLACK: f64 = 1e-9;

/// δ_r = 1/(2π²r²).
pub fn delta_r(r: usize) -> f64 {
    if r == 0 {
        return 0.0;
    }
    let r = r as f64;
    1.0 / (2.0 * PI * PI * r * r)
}

/// d_r = Σ_{i≤r} 3δ_i, summed with Neumaier compensation.
pub fn d_r(r: usize) -> f64 {
    d_sequence(r)[r]
}

/// d_0, …, d_n.
pub fn d_sequence(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    out.push(0.0);
    for i in 1..=n {
        let x = 3.0 * delta_r(i);
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

/// ζ_ℓ = 3 − ℓ for ℓ ≤ 3, 0 otherwise.
pub fn zeta(ell: u32) -> u32 {
    3u32.saturating_sub(ell)
}

/// 2e/(ρσ) + e²/R².
pub fn cauchy_factor(np: &NormParameters) -> f64 {
    2.0 * E / (np.rho * np.sigma) + E * E / (np.big_r * np.big_r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    #[serde(rename = "Ebar")]
    pub ebar: f64,
    pub gamma: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k_budget: u32,
    pub rho: f64,
    pub sigma: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "J0")]
    pub j0: f64,
    #[serde(rename = "Theta0")]
    pub theta0: f64,
    pub n1: usize,
    pub n2: usize,
    /// Sup-norm diameter of the frequency box.
    #[serde(rename = "D")]
    pub diameter: f64,
    /// Lebesgue measure of the frequency box.
    pub box_volume: f64,
    /// Number of h_r, d_r, δ_r entries reported.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    8
}

impl EstimateParams {
    /// Ē and J₀ from a hypothesis check, D and the volume from its box.
    pub fn from_hypotheses(hp: &HypothesisParams, rep: &HypothesisReport, domain: &FrequencyDomain, n2: usize) -> Self {
        EstimateParams {
            ebar: rep.ebar,
            gamma: hp.gamma,
            tau: hp.tau,
            k_budget: hp.k_budget,
            rho: hp.norm.rho,
            sigma: hp.norm.sigma,
            big_r: hp.norm.big_r,
            j0: rep.j0,
            theta0: hp.theta0,
            n1: domain.dim(),
            n2,
            diameter: domain.diameter(),
            box_volume: domain.volume(),
            levels: default_levels(),
        }
    }

    pub fn norm(&self) -> NormParameters {
        NormParameters::new(self.rho, self.sigma, self.big_r)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(rename = "Ebar")]
    pub ebar: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "calA")]
    pub cal_a: f64,
    /// log₂ 𝒜, kept separately for bounds with large powers of 𝒜.
    pub log2_cal_a: f64,
    #[serde(rename = "calB")]
    pub cal_b: f64,
    pub eps_an: f64,
    pub eps_ge: f64,
    pub eps_star: f64,
    pub gamma: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k_budget: u32,
    #[serde(rename = "J0")]
    pub j0: f64,
    #[serde(rename = "Theta0")]
    pub theta0: f64,
    pub sigma: f64,
    pub rho: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub h: Vec<f64>,
    pub d: Vec<f64>,
    pub delta: Vec<f64>,
    pub eta: f64,
    /// None when τ ≤ n₁ (the series diverges).
    pub measure_bound: Option<f64>,
    /// Integral bound on the part of Σ r^{−(τ−n₁+1)} not summed explicitly
    /// (already included in `measure_bound`).
    pub measure_tail: f64,
    pub box_volume: f64,
    pub res_measure_condition: bool,
}

/// Σ_{r≥2} r^{−p} for p > 1 as (upper bound, tail allowance).
///
/// Terms are added until the integral tail ∫_N^∞ x^{−p} dx drops below
/// 1e-12 of the partial sum or N reaches 10⁷; the tail integral is then
/// added so the result never underestimates the series.
pub fn zeta_tail_sum(p: f64) -> (f64, f64) {
    assert!(p > 1.0);
    let tail = |n: f64| n.powf(1.0 - p) / (p - 1.0);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut n = 2u64;
    loop {
        let x = (n as f64).powf(-p);
        let t = sum + x;
        comp += if sum >= x { (sum - t) + x } else { (x - t) + sum };
        sum = t;
        let rest = tail(n as f64);
        if rest < 1e-12 * (sum + comp) || n >= 10_000_000 {
            return (sum + comp + rest, rest);
        }
        n += 1;
    }
}

/// γ 2^{n₁+3} c_{n₂} D^{n₁−1}/(Θ₀ K^{τ−n₁}) Σ_{r≥2} r^{−(τ−n₁+1)}.
pub fn measure_bound(gamma: f64, tau: f64, k_budget: u32, theta0: f64, n1: usize, n2: usize, diameter: f64) -> Option<(f64, f64)> {
    if tau <= n1 as f64 {
        return None;
    }
    let c = ((n2 + 1) * (2 * n2 + 1)) as f64;
    let (sum, tail) = zeta_tail_sum(tau - n1 as f64 + 1.0);
    let pre = gamma * 2f64.powi(n1 as i32 + 3) * c * diameter.powi(n1 as i32 - 1) / (theta0 * (k_budget as f64).powf(tau - n1 as f64));
    Some((pre * sum, pre * tail))
}

pub fn compute_constants(p: &EstimateParams) -> Result<EstimateReport> {
    let positive = [p.ebar, p.gamma, p.tau, p.rho, p.sigma, p.big_r, p.theta0, p.diameter, p.box_volume];
    if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || p.k_budget == 0 || p.n1 == 0 || !(p.j0 >= 0.0) {
        return Err(Error::Config(format!("estimate parameters must be positive: {p:?}")));
    }
    let kt = (p.k_budget as f64).powf(p.tau);
    let m = (4.0 * PI.powi(4) * p.ebar * kt / p.gamma * cauchy_factor(&p.norm())).max(1.0);
    let log2_cal_a = 3.0 * m.log2() + 56.0 + 12.0 * p.tau;
    let cal_a = m.powi(3) * 2f64.powf(56.0 + 12.0 * p.tau);
    let eps_an = 1.0 / cal_a;

    let eta = (1.0 / p.k_budget as f64).min(p.sigma);
    let h0 = eta.min(1.0 / (E * (p.j0 + 1.0 / p.sigma))) * p.gamma / (8.0 * kt);
    let mut h = vec![h0];
    for _ in 1..p.levels {
        let last = *h.last().expect("h0 pushed");
        h.push(last / 2f64.powf(p.tau + 2.0));
    }
    let ratio = h0 / (p.sigma * p.gamma);
    let cal_b = ratio.min(2f64.powf(-p.tau));
    let eps_ge = ratio.min(1.0) / (2f64.powf(p.tau + 3.0) * cal_a);
    let eps_star = eps_ge
        .min(p.theta0 * cal_b / (64.0 * cal_a * (1.0 / p.sigma + p.j0)))
        .min(cal_b * LN_2 / (16.0 * cal_a * (p.n1 * p.n1) as f64));

    let mb = measure_bound(p.gamma, p.tau, p.k_budget, p.theta0, p.n1, p.n2, p.diameter);
    let res_measure_condition = mb.is_some_and(|(b, _)| b < p.box_volume);
    Ok(EstimateReport {
        ebar: p.ebar,
        m,
        cal_a,
        log2_cal_a,
        cal_b,
        eps_an,
        eps_ge,
        eps_star,
        gamma: p.gamma,
        tau: p.tau,
        k_budget: p.k_budget,
        j0: p.j0,
        theta0: p.theta0,
        sigma: p.sigma,
        rho: p.rho,
        big_r: p.big_r,
        d: d_sequence(p.levels.saturating_sub(1)),
        delta: (0..p.levels).map(delta_r).collect(),
        h,
        eta,
        measure_bound: mb.map(|(b, _)| b),
        measure_tail: mb.map_or(0.0, |(_, t)| t),
        box_volume: p.box_volume,
        res_measure_condition,
    })
}

/// e^{−2}(2e/(ρσ) + e²/R²)^j d^{−2j} ‖χ‖^j ‖g‖, the bound on
/// ‖(1/j!) L_χ^j g‖_{1−d−d'} for χ, g measured at 1 − d'.
pub fn lie_norm_rhs(chi_norm: f64, g_norm: f64, d: f64, dprime: f64, j: u32, np: &NormParameters) -> Result<f64> {
    if !(d > 0.0 && dprime >= 0.0 && d + dprime < 1.0) {
        return Err(Error::Domain(format!("need d > 0, d' ≥ 0, d + d' < 1; got d = {d}, d' = {dprime}")));
    }
    Ok((-2.0f64).exp() * (cauchy_factor(np) * chi_norm / (d * d)).powi(j as i32) * g_norm)
}

/// Log-domain comparison with the module slack; `log2_bound` may be ±∞.
pub fn within_bound(measured: f64, log2_bound: f64) -> bool {
    if measured <= 0.0 || log2_bound == f64::INFINITY {
        return true;
    }
    let lm = measured.log2();
    lm <= log2_bound + SLACK * log2_bound.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_table() {
        assert_eq!(zeta(0), 3);
        assert_eq!(zeta(2), 1);
        assert_eq!(zeta(3), 0);
        assert_eq!(zeta(5), 0);
    }

    #[test]
    fn restriction_sequence_start() {
        assert_eq!(d_r(0), 0.0);
        assert!((d_r(1) - 3.0 / (2.0 * PI * PI)).abs() < 1e-16);
        assert!((delta_r(2) - 1.0 / (8.0 * PI * PI)).abs() < 1e-18);
    }

    #[test]
    fn lie_rhs_domain() {
        let np = NormParameters::new(1.0, 1.0, 1.0);
        assert!(lie_norm_rhs(1.0, 1.0, 0.5, 0.5, 1, &np).is_err());
        assert!(lie_norm_rhs(1.0, 1.0, 0.0, 0.1, 1, &np).is_err());
        let r1 = lie_norm_rhs(1.0, 1.0, 0.2, 0.1, 1, &np).unwrap();
        let r2 = lie_norm_rhs(1.0, 1.0, 0.2, 0.1, 2, &np).unwrap();
        assert!((r2 - r1 * r1 * E * E).abs() < 1e-12 * r2);
    }

    #[test]
    fn large_gamma_gives_unit_m() {
        let p = EstimateParams { ebar: 1.0, gamma: 1e30, tau: 3.0, k_budget: 4, rho: 1.0, sigma: 1.0, big_r: 1.0, j0: 0.1, theta0: 0.3, n1: 2, n2: 1, diameter: 0.05, box_volume: 0.0025, levels: 4 };
        let rep = compute_constants(&p).unwrap();
        assert_eq!(rep.m, 1.0);
        assert_eq!(rep.log2_cal_a, 92.0);
    }
}
