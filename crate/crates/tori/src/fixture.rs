//! The shipped two-plus-one model and the parameter sets used with it.

use crate::estimates::{compute_constants, EstimateParams, EstimateReport};
use crate::geometry::FrequencyDomain;
use crate::model::{check_hypotheses, ingest, HamiltonianState, HypothesisParams, HypothesisReport, IngestOptions, ModelSpec};
use crate::normalize::NormalizeConfig;
use crate::series::NormParameters;
use crate::Result;

pub const STANDARD_MODEL: &str = include_str!("../fixtures/standard.toml");

pub const K_BUDGET: u32 = 4;
pub const TAU: f64 = 3.0;
pub const GAMMA: f64 = 1e-4;
pub const THETA0: f64 = 0.35;
/// Side of the frequency box centred on ω⁰.
pub const BOX_SIDE: f64 = 0.02;

pub fn standard_model() -> ModelSpec {
    ModelSpec::from_toml(STANDARD_MODEL).expect("shipped fixture parses")
}

pub fn standard_norm() -> NormParameters {
    NormParameters::new(0.5, 0.5, 0.5)
}

/// H^{(0)} at ω⁰.
pub fn standard_state(epsilon: f64, s_max: u32) -> Result<HamiltonianState> {
    let spec = standard_model();
    ingest(&spec, &spec.omega0, &IngestOptions { k_budget: K_BUDGET, epsilon, s_max })
}

pub fn standard_config(r_max: usize, mode: &str) -> NormalizeConfig {
    NormalizeConfig {
        r_max,
        s_max: 0,
        gamma: GAMMA,
        tau: TAU,
        mode: mode.into(),
        norm: standard_norm(),
        hard_floor_rel: 1e-12,
        check_monolithic: false,
    }
}

pub fn standard_domain(points_per_dim: usize) -> FrequencyDomain {
    let spec = standard_model();
    let lo = spec.omega0.iter().map(|w| w - BOX_SIDE / 2.0).collect();
    let hi = spec.omega0.iter().map(|w| w + BOX_SIDE / 2.0).collect();
    FrequencyDomain::new(lo, hi, points_per_dim).expect("fixture box is valid")
}

pub fn standard_hypotheses(epsilon: f64, s_max: u32) -> HypothesisParams {
    HypothesisParams { gamma: GAMMA, tau: TAU, k_budget: K_BUDGET, theta0: THETA0, norm: standard_norm(), epsilon, s_max, hull_k_max: 3 * K_BUDGET }
}

/// Hypothesis check on a grid of the standard box and the constants it feeds.
pub fn standard_estimates(points_per_dim: usize) -> Result<(HypothesisReport, EstimateReport)> {
    let spec = standard_model();
    let domain = standard_domain(points_per_dim);
    let hp = standard_hypotheses(0.0, 1);
    let rep = check_hypotheses(&spec, &domain, &hp)?;
    let consts = compute_constants(&EstimateParams::from_hypotheses(&hp, &rep, &domain, spec.n2))?;
    Ok((rep, consts))
}
