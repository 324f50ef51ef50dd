use super::{cauchy_factor, d_r, delta_r, lie_norm_rhs, within_bound, zeta, EstimateReport};
use crate::ledger::{build_nu, eval_v};
use crate::normalize::NormalizationRun;
use crate::series::{lie_derivative, NormParameters, Truncation};
use crate::{PoissonSeries, Result};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    Generator,
    Term,
    Frequency,
    FastFrequency,
    TransverseFrequency,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub kind: AuditKind,
    pub r: usize,
    /// Class ℓ for terms, stage j for generators.
    pub index: u32,
    pub s: u32,
    pub measured: f64,
    pub log2_bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundAudit {
    pub checked: usize,
    pub violations: usize,
    pub rows: Vec<BoundRow>,
}

impl BoundAudit {
    fn from_rows(rows: Vec<BoundRow>) -> Self {
        let violations = rows.iter().filter(|r| !r.ok).count();
        BoundAudit { checked: rows.len(), violations, rows }
    }

    /// Largest log₂(measured/bound) over rows with a nonzero measurement.
    pub fn worst_log2_ratio(&self) -> f64 {
        self.rows.iter().filter(|r| r.measured > 0.0).map(|r| r.measured.log2() - r.log2_bound).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn row(kind: AuditKind, r: usize, index: u32, s: u32, measured: f64, log2_bound: f64) -> BoundRow {
    BoundRow { kind, r, index, s, measured, log2_bound, ok: within_bound(measured, log2_bound) }
}

// cells whose norms the estimates control at step r
fn in_range(r: usize, ell: u32, s: u32) -> bool {
    r == 0 || ell >= 3 || s as usize > r
}

fn generator_measure(run: &NormalizationRun, r: usize, j: usize) -> f64 {
    let np = &run.config.norm;
    cauchy_factor(np) / (delta_r(r) * delta_r(r)) * run.reports[r - 1].chi_norms[j]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Iterative estimates: terms at 1 − d_r against Ē M^{3s−ζ_ℓ} 2^{−ℓ} 𝒱(ℋ) ν_{r,s},
/// the three generators, and the frequency shifts.
pub fn audit_lemma4(run: &NormalizationRun, consts: &EstimateReport) -> BoundAudit {
    let r_max = run.reports.len();
    let s_max = run.states.iter().map(|h| h.max_order()).max().unwrap_or(0).max(run.config.effective_s_max());
    let nu = build_nu(r_max, s_max as usize);
    let tau = run.config.tau;
    let lm = consts.m.log2();
    let le = consts.ebar.log2();
    let np = &run.config.norm;

    let mut rows: Vec<BoundRow> = run
        .states
        .par_iter()
        .enumerate()
        .flat_map_iter(|(r, h)| {
            let shrunk = np.shrunk(1.0 - d_r(r));
            let nu = &nu;
            h.cells.iter().filter(move |(&(ell, s), _)| in_range(r, ell, s)).map(move |(&(ell, s), f)| {
                let expo = 3.0 * s as f64 - zeta(ell) as f64;
                let bound = le + expo * lm - ell as f64 + eval_v(f.ledger(), tau) + nu.log2_nu(r, s as usize);
                row(AuditKind::Term, r, ell, s, f.weighted_norm(&shrunk), bound)
            })
        })
        .collect();

    for r in 1..=r_max {
        let rep = &run.reports[r - 1];
        let ru = r as u32;
        let nus = [nu.log2_nu(r - 1, r), nu.log2_nu_i(r, r), nu.log2_nu_ii(r, r)];
        for j in 0..3 {
            let bound = (3 * r + j - 2) as f64 * lm + eval_v(&rep.generator_ledgers[j], tau) + nus[j];
            rows.push(row(AuditKind::Generator, r, j as u32, ru, generator_measure(run, r, j), bound));
        }
        let shift = (max_abs(&rep.delta_omega) / np.sigma).max(max_abs(&rep.delta_big_omega));
        let eps = run.states[r].epsilon;
        let bound = consts.gamma.log2() + r as f64 * eps.log2() + 3.0 * r as f64 * lm + eval_v(&rep.generator_ledgers[2], tau) + nu.log2_nu(r, r);
        rows.push(row(AuditKind::Frequency, r, 2, ru, shift, bound));
    }
    BoundAudit::from_rows(rows)
}

/// Uniform bounds: generators by 𝒜^r, terms by Ē 2^{−ℓ} 𝒜^s, frequency
/// shifts by γσ(ε𝒜)^r and γ(ε𝒜)^r.
pub fn audit_lemma6(run: &NormalizationRun, consts: &EstimateReport) -> BoundAudit {
    let la = consts.log2_cal_a;
    let le = consts.ebar.log2();
    let np = &run.config.norm;
    let mut rows = Vec::new();
    for (r, h) in run.states.iter().enumerate() {
        let shrunk = np.shrunk(1.0 - d_r(r));
        for (&(ell, s), f) in h.cells.iter().filter(|(&(ell, s), _)| in_range(r, ell, s)) {
            rows.push(row(AuditKind::Term, r, ell, s, f.weighted_norm(&shrunk), le - ell as f64 + s as f64 * la));
        }
    }
    for r in 1..=run.reports.len() {
        let rep = &run.reports[r - 1];
        let ru = r as u32;
        for j in 0..3 {
            rows.push(row(AuditKind::Generator, r, j as u32, ru, generator_measure(run, r, j), r as f64 * la));
        }
        let lea = run.states[r].epsilon.log2() + la;
        rows.push(row(AuditKind::FastFrequency, r, 0, ru, max_abs(&rep.delta_omega), (consts.gamma * np.sigma).log2() + r as f64 * lea));
        rows.push(row(AuditKind::TransverseFrequency, r, 0, ru, max_abs(&rep.delta_big_omega), consts.gamma.log2() + r as f64 * lea));
    }
    BoundAudit::from_rows(rows)
}

/// Measures ‖(1/j!) L_χ^j g‖_{1−d−d'} against the Lie-derivative bound,
/// with χ and g normed at 1 − d'. Returns (measured, bound).
pub fn lemma3_check(chi: &PoissonSeries, g: &PoissonSeries, d: f64, dprime: f64, j: u32, np: &NormParameters) -> Result<(f64, f64)> {
    let outer = np.shrunk(1.0 - dprime);
    let rhs = lie_norm_rhs(chi.weighted_norm(&outer), g.weighted_norm(&outer), d, dprime, j, np)?;
    let mut term = g.clone();
    let trunc = Truncation::default();
    for i in 1..=j {
        term = lie_derivative(chi, &term, &trunc)?.scale_re(1.0 / i as f64);
    }
    Ok((term.weighted_norm(&np.shrunk(1.0 - d - dprime)), rhs))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub r: usize,
    /// ‖H^{(r)} − H^{(r−1)}‖_{3/4} from the run.
    pub measured: f64,
    /// (n₁γσρ + n₂γR² + 4Ē/(1−ε𝒜))(ε𝒜)^r; infinite when ε𝒜 ≥ 1.
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub epsilon: f64,
    /// exp of the least-squares slope of ln(measured) against r.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub fits: Vec<DecayFit>,
}

/// Per-step differences ‖H^{(r)} − H^{(r−1)}‖_{3/4} of each run against the
/// Cauchy-sequence bound; every run carries its own ε.
pub fn convergence_summary(runs: &[&NormalizationRun], consts: &EstimateReport) -> ConvergenceTable {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for run in runs {
        let np = run.config.norm.shrunk(0.75);
        let first = &run.states[0];
        let eps = first.epsilon;
        let ea = eps * consts.cal_a;
        let pre = first.n1 as f64 * consts.gamma * consts.sigma * consts.rho + first.n2 as f64 * consts.gamma * consts.big_r * consts.big_r + 4.0 * consts.ebar / (1.0 - ea);
        let totals: Vec<PoissonSeries> = run.states.iter().map(|h| h.total_series()).collect();
        let mut pts = Vec::new();
        for r in 1..run.states.len() {
            let measured = totals[r].sub(&totals[r - 1]).weighted_norm(&np);
            let bound = if ea < 1.0 { pre * ea.powi(r as i32) } else { f64::INFINITY };
            let ok = bound == f64::INFINITY || within_bound(measured, bound.log2());
            if measured > 0.0 {
                pts.push((r as f64, measured.ln()));
            }
            rows.push(ConvergenceRow { epsilon: eps, r, measured, bound, ok });
        }
        if pts.len() >= 2 {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            fits.push(DecayFit { epsilon: eps, ratio: (sxy / sxx).exp() });
        }
    }
    ConvergenceTable { rows, fits }
}
