use super::homological::{homological_residual, solve_chi0, solve_chi1, solve_chi2, GeneratingFunction, StepContext};
use super::oracle::{compare_with_monolithic, constant_series, OracleComparison};
use super::policy::{divisor_policies, DivisorPolicy, Floors};
use super::stages::{apply_stage1, apply_stage2, apply_stage3, frequency_shift, Budget};
use crate::estimates::{d_r, delta_r};
use crate::ledger::{CellId, IndexList, LedgerBook, Stage};
use crate::model::HamiltonianState;
use crate::series::NormParameters;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizeConfig {
    pub r_max: usize,
    /// Highest order s kept; 0 means 2·r_max.
    #[serde(default)]
    pub s_max: u32,
    pub gamma: f64,
    pub tau: f64,
    /// "strict" or "exploratory".
    pub mode: String,
    pub norm: NormParameters,
    /// Divisors below this times max(|ω|, |Ω|) abort the run.
    #[serde(default = "default_hard_floor")]
    pub hard_floor_rel: f64,
    /// Cross-check every stage against the monolithic transform.
    #[serde(default)]
    pub check_monolithic: bool,
}

fn default_hard_floor() -> f64 {
    1e-12
}

impl NormalizeConfig {
    pub fn effective_s_max(&self) -> u32 {
        if self.s_max == 0 {
            2 * self.r_max as u32
        } else {
            self.s_max
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.norm.validate()?;
        if !(self.gamma >= 0.0) || !(self.tau > 0.0) {
            return Err(Error::Config("gamma must be ≥ 0 and tau > 0".into()));
        }
        if (self.effective_s_max() as usize) < self.r_max {
            return Err(Error::Config("s_max must be at least r_max".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepReport {
    pub r: usize,
    /// ‖χ_j‖ at the shrunk radii 1 − d_{r−1} − j δ_r.
    pub chi_norms: [f64; 3],
    pub chi_norms_full: [f64; 3],
    pub delta_omega: Vec<f64>,
    pub delta_big_omega: Vec<f64>,
    pub divisor_min: [f64; 3],
    pub divisor_margin: [f64; 3],
    pub generator_ledgers: [IndexList; 3],
    /// Relative residuals of the three homological equations.
    pub residuals: [f64; 3],
    pub energy_shift: f64,
    /// Σ_{ℓ≤2} ε^{r+1} ‖f_ℓ^{(r,r+1)}‖.
    pub remainder_norm: f64,
    /// f_ℓ^{(r,s)} = 0 for ℓ ≤ 2, s ≤ r.
    pub normal_form_ok: bool,
    pub real: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monolithic: Option<[OracleComparison; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizationRun {
    pub config: NormalizeConfig,
    /// H^{(0)}, …, H^{(r_max)}.
    pub states: Vec<HamiltonianState>,
    /// χ₀^{(1)}, χ₁^{(1)}, χ₂^{(1)}, χ₀^{(2)}, …
    pub generators: Vec<GeneratingFunction>,
    pub reports: Vec<StepReport>,
    pub book: LedgerBook,
}

impl NormalizationRun {
    pub fn last(&self) -> &HamiltonianState {
        self.states.last().expect("run has H^(0)")
    }

    pub fn generators_to(&self, r: usize) -> &[GeneratingFunction] {
        &self.generators[..3 * r]
    }
}

fn attach_ledgers(h: &mut HamiltonianState, book: &LedgerBook, stage: Stage, r: u32) {
    for (&(ell, s), f) in h.cells.iter_mut() {
        f.set_ledger(book.get(CellId::new(stage, r, ell, s)).cloned().unwrap_or_default());
    }
}

fn max_class(h: &HamiltonianState) -> u32 {
    h.cells.keys().map(|&(l, _)| l).max().unwrap_or(0)
}

/// Runs steps 1..=r_max from H^{(0)}.
pub fn normalize(h0: HamiltonianState, cfg: &NormalizeConfig) -> Result<NormalizationRun> {
    cfg.validate()?;
    let policy = divisor_policies().get(&cfg.mode)?;
    let s_max = cfg.effective_s_max();
    let mut book = LedgerBook::for_model(cfg.tau, max_class(&h0), s_max);
    let mut h = h0;
    h.cells.retain(|&(_, s), _| s <= s_max);
    attach_ledgers(&mut h, &book, Stage::Final, 0);
    let mut run = NormalizationRun { config: cfg.clone(), states: vec![h], generators: vec![], reports: vec![], book: book.clone() };
    for _ in 1..=cfg.r_max {
        book.push_step();
        let (next, report, gens) = normalization_step(run.last(), cfg, policy.as_ref(), &book)?;
        run.states.push(next);
        run.reports.push(report);
        run.generators.extend(gens);
    }
    run.book = book;
    Ok(run)
}

/// One step H^{(r−1)} → H^{(r)}; `book` must already hold the lists of step r.
pub fn normalization_step(h: &HamiltonianState, cfg: &NormalizeConfig, policy: &dyn DivisorPolicy, book: &LedgerBook) -> Result<(HamiltonianState, StepReport, Vec<GeneratingFunction>)> {
    let r = h.r + 1;
    let ru = r as u32;
    if book.last_step() < ru {
        return Err(Error::Config(format!("ledger book stops at step {}", book.last_step())));
    }
    let budget = Budget { s_max: cfg.effective_s_max(), max_class: book.max_class.min(max_class(h).max(2)) };
    let scale = h.omega.iter().chain(&h.big_omega).fold(0.0f64, |m, x| m.max(x.abs()));
    let floors = Floors {
        hard: cfg.hard_floor_rel * scale,
        diophantine: cfg.gamma / ((ru * h.k_budget) as f64).powf(cfg.tau),
        transverse: cfg.gamma,
    };
    let ctx = StepContext { step: r, omega: &h.omega, big_omega: &h.big_omega, floors, policy };
    let np = &cfg.norm;

    let f0 = h.cell_or_zero(0, ru);
    let (mut chi0, avg) = solve_chi0(&f0, &ctx)?;
    set_generator_ledger(&mut chi0, book, 0);
    let res0 = homological_residual(&chi0.series, &f0, &avg, &h.omega, &h.big_omega, np)?;
    let mut h1 = apply_stage1(h, &chi0, &avg, &budget)?;
    attach_ledgers(&mut h1, book, Stage::First, ru);

    let f1 = h1.cell_or_zero(1, ru);
    let mut chi1 = solve_chi1(&f1, &ctx)?;
    set_generator_ledger(&mut chi1, book, 1);
    let res1 = homological_residual(&chi1.series, &f1, &crate::PoissonSeries::zero(h.n1, h.n2), &h.omega, &h.big_omega, np)?;
    let mut h2 = apply_stage2(&h1, &chi1, &budget)?;
    attach_ledgers(&mut h2, book, Stage::Second, ru);

    let f2 = h2.cell_or_zero(2, ru);
    let (mut chi2, z) = solve_chi2(&f2, &ctx)?;
    set_generator_ledger(&mut chi2, book, 2);
    let res2 = homological_residual(&chi2.series, &f2, &z, &h.omega, &h.big_omega, np)?;
    let mut h3 = apply_stage3(&h2, &chi2, &z, &budget)?;
    attach_ledgers(&mut h3, book, Stage::Final, ru);

    let monolithic = if cfg.check_monolithic {
        let c = avg.coeff(&crate::MonomialKey::one(h.n1, h.n2));
        Some([
            compare_with_monolithic(&h1, h, &chi0.series, ru, &budget, &[((0, ru), constant_series(h.n1, h.n2, c))])?,
            compare_with_monolithic(&h2, &h1, &chi1.series, ru, &budget, &[])?,
            compare_with_monolithic(&h3, &h2, &chi2.series, ru, &budget, &[((2, ru), z.clone())])?,
        ])
    } else {
        None
    };

    let (dw, dbig) = frequency_shift(&z, h.epsilon.powi(r as i32));
    let d_prev = d_r(r - 1);
    let dl = delta_r(r);
    let gens = [&chi0, &chi1, &chi2];
    let chi_norms = [0, 1, 2].map(|j| gens[j].series.weighted_norm(&np.shrunk(1.0 - d_prev - j as f64 * dl)));
    let chi_norms_full = [0, 1, 2].map(|j| gens[j].series.weighted_norm(np));
    let remainder_norm = (0..=2).filter_map(|l| h3.cell(l, ru + 1)).map(|f| h.epsilon.powi(r as i32 + 1) * f.weighted_norm(np)).sum();
    let normal_form_ok = h3.cells.iter().all(|(&(l, s), f)| l > 2 || s > ru || f.is_zero());
    let real = h3.cells.values().all(|f| f.realify_check(1e-10)) && [&chi0, &chi1, &chi2].iter().all(|g| g.series.realify_check(1e-10));
    let report = StepReport {
        r,
        chi_norms,
        chi_norms_full,
        delta_omega: dw,
        delta_big_omega: dbig,
        divisor_min: gens.map(|g| g.divisor_min),
        divisor_margin: gens.map(|g| g.margin),
        generator_ledgers: gens.map(|g| g.ledger.clone()),
        residuals: [res0, res1, res2],
        energy_shift: h3.energy_offset - h.energy_offset,
        remainder_norm,
        normal_form_ok,
        real,
        monolithic,
    };
    Ok((h3, report, vec![chi0, chi1, chi2]))
}

fn set_generator_ledger(g: &mut GeneratingFunction, book: &LedgerBook, j: usize) {
    let l = book.generator(g.step as u32, j).clone();
    g.series.set_ledger(l.clone());
    g.ledger = l;
}
