use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use tori::fixture;
use tori::geometry::{FrequencyDomain, MeasureParams};
use tori::model::{HypothesisParams, IngestOptions, ModelSpec};
use tori::normalize::NormalizeConfig;
use tori::verify::{InvarianceParams, Tolerance};
use tori::{Error, NormParameters, Result};

/// Everything a run directory is built from. Missing keys take the values of
/// the shipped model's parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Model file; the shipped model when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Verbs executed by `tori run`, in dependency order.
    pub verbs: Vec<String>,
    pub epsilon: f64,
    pub r_max: usize,
    /// 0 means 2·r_max.
    pub s_max: u32,
    pub mode: String,
    pub gamma: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k_budget: u32,
    #[serde(rename = "Theta0")]
    pub theta0: f64,
    pub hard_floor_rel: f64,
    pub check_monolithic: bool,
    pub norm: NormSection,
    #[serde(rename = "box")]
    pub frequency_box: BoxSection,
    pub measure: MeasureSection,
    pub verify: VerifySection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    pub rho: f64,
    pub sigma: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxSection {
    /// Corners of the frequency box; ω⁰ ∓ half the default side when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub epsilons: Vec<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    pub seeds: usize,
    pub integrator: String,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let n = fixture::standard_norm();
        PipelineConfig {
            model: None,
            verbs: vec![],
            epsilon: 1e-3,
            r_max: 3,
            s_max: 0,
            mode: "strict".into(),
            gamma: fixture::GAMMA,
            tau: fixture::TAU,
            k_budget: fixture::K_BUDGET,
            theta0: fixture::THETA0,
            hard_floor_rel: 1e-12,
            check_monolithic: false,
            norm: NormSection { rho: n.rho, sigma: n.sigma, big_r: n.big_r },
            frequency_box: BoxSection::default(),
            measure: MeasureSection::default(),
            verify: VerifySection::default(),
        }
    }
}

impl Default for BoxSection {
    fn default() -> Self {
        BoxSection { lo: None, hi: None, grid: 3 }
    }
}

impl Default for MeasureSection {
    fn default() -> Self {
        MeasureSection { samples: 20_000, seed: 2024 }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        let p = InvarianceParams::default();
        VerifySection { epsilons: vec![1e-3, 2e-3, 4e-3, 8e-3], t_end: p.t_end, dt: p.dt, seeds: p.seeds, integrator: p.integrator, rtol: p.tol.rtol, atol: p.tol.atol }
    }
}

pub const VERBS: [&str; 6] = ["normalize", "certify", "audit-ledger", "measure", "verify", "report"];

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // model paths are relative to the config file
        if let (Some(m), Some(parent)) = (&cfg.model, path.parent()) {
            if m.is_relative() {
                cfg.model = Some(parent.join(m));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.normalize_config().validate()?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be finite and ≥ 0, got {}", self.epsilon)));
        }
        if self.r_max == 0 || self.k_budget == 0 || !(self.theta0 > 0.0) || self.frequency_box.grid == 0 {
            return Err(Error::Config("r_max, K, Theta0 and box.grid must be positive".into()));
        }
        if let Some(v) = self.verbs.iter().find(|v| !VERBS.contains(&v.as_str())) {
            return Err(Error::Unknown { kind: "verb", name: v.clone() });
        }
        let v = &self.verify;
        if v.epsilons.iter().any(|e| !(*e > 0.0)) || !(v.t_end > 0.0) || !(v.dt > 0.0) || v.seeds == 0 {
            return Err(Error::Config("verify needs positive epsilons, T, dt and seeds".into()));
        }
        Ok(())
    }

    /// The model text and where it came from.
    pub fn model_source(&self) -> Result<(String, String)> {
        match &self.model {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                Ok((text, p.display().to_string()))
            }
            None => Ok((fixture::STANDARD_MODEL.to_string(), "builtin:standard".into())),
        }
    }

    pub fn norm(&self) -> NormParameters {
        NormParameters::new(self.norm.rho, self.norm.sigma, self.norm.big_r)
    }

    pub fn normalize_config(&self) -> NormalizeConfig {
        NormalizeConfig {
            r_max: self.r_max,
            s_max: self.s_max,
            gamma: self.gamma,
            tau: self.tau,
            mode: self.mode.clone(),
            norm: self.norm(),
            hard_floor_rel: self.hard_floor_rel,
            check_monolithic: self.check_monolithic,
        }
    }

    pub fn ingest_options(&self, epsilon: f64) -> IngestOptions {
        IngestOptions { k_budget: self.k_budget, epsilon, s_max: self.normalize_config().effective_s_max() }
    }

    pub fn hypotheses(&self) -> HypothesisParams {
        HypothesisParams {
            gamma: self.gamma,
            tau: self.tau,
            k_budget: self.k_budget,
            theta0: self.theta0,
            norm: self.norm(),
            epsilon: 0.0,
            s_max: 1,
            hull_k_max: self.hull_k_max(),
        }
    }

    pub fn hull_k_max(&self) -> u32 {
        3 * self.k_budget
    }

    pub fn domain(&self, spec: &ModelSpec) -> Result<FrequencyDomain> {
        let b = &self.frequency_box;
        let half = fixture::BOX_SIDE / 2.0;
        let lo = b.lo.clone().unwrap_or_else(|| spec.omega0.iter().map(|w| w - half).collect());
        let hi = b.hi.clone().unwrap_or_else(|| spec.omega0.iter().map(|w| w + half).collect());
        if lo.len() != spec.n1 || hi.len() != spec.n1 {
            return Err(Error::Config(format!("box corners need {} entries", spec.n1)));
        }
        FrequencyDomain::new(lo, hi, b.grid)
    }

    pub fn measure_params(&self) -> MeasureParams {
        MeasureParams { gamma: self.gamma, tau: self.tau, k_budget: self.k_budget, theta0: self.theta0, samples: self.measure.samples, seed: self.measure.seed }
    }

    pub fn invariance_params(&self) -> InvarianceParams {
        let v = &self.verify;
        InvarianceParams { t_end: v.t_end, dt: v.dt, seeds: v.seeds, integrator: v.integrator.clone(), tol: Tolerance { rtol: v.rtol, atol: v.atol } }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_the_defaults() {
        let cfg: PipelineConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_verbs_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("epsilon = 1e-3\nepsiloon = 2").is_err());
        let cfg: PipelineConfig = toml::from_str("verbs = [\"normalise\"]").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Unknown { .. })));
    }

    #[test]
    fn resolved_config_round_trips_through_toml() {
        let mut cfg = PipelineConfig::default();
        cfg.frequency_box.lo = Some(vec![0.99, 0.6]);
        cfg.frequency_box.hi = Some(vec![1.01, 0.62]);
        let back: PipelineConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
