use super::policy::{Divisor, DivisorPolicy, Floors};
use crate::lattice::dot;
use crate::ledger::IndexList;
use crate::series::{lie_derivative, MonomialKey, NormParameters, PoissonSeries, Truncation};
use crate::{Complex64, Result};
use serde::{Deserialize, Serialize};

/// χ_stage^{(r)} with the bookkeeping of its divisors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratingFunction {
    pub stage: u8,
    pub step: usize,
    #[serde(with = "series_doc")]
    pub series: PoissonSeries,
    /// Smallest |divisor| used (∞ when nothing was divided).
    pub divisor_min: f64,
    /// Smallest |divisor|/floor used.
    pub margin: f64,
    pub ledger: IndexList,
}

mod series_doc {
    use crate::series::{PoissonSeries, SeriesDoc};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: &PoissonSeries, ser: S) -> Result<S::Ok, S::Error> {
        SeriesDoc::from(s).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<PoissonSeries, D::Error> {
        SeriesDoc::deserialize(de)?.try_into().map_err(serde::de::Error::custom)
    }
}

/// Frequencies and thresholds of the step being performed.
pub struct StepContext<'a> {
    pub step: usize,
    pub omega: &'a [f64],
    pub big_omega: &'a [f64],
    pub floors: Floors,
    pub policy: &'a dyn DivisorPolicy,
}

/// ω·p − i Σ Ω_j z_j w_j.
pub fn kernel(omega: &[f64], big_omega: &[f64]) -> PoissonSeries {
    let (n1, n2) = (omega.len(), big_omega.len());
    let mut out = PoissonSeries::zero(n1, n2);
    for (j, &w) in omega.iter().enumerate() {
        out = out.add(&PoissonSeries::p(n1, n2, j).scale_re(w));
    }
    for (j, &w) in big_omega.iter().enumerate() {
        let mut key = MonomialKey::one(n1, n2);
        key.l[j] = 1;
        key.lbar[j] = 1;
        out = out.add(&PoissonSeries::monomial(key, Complex64::new(0.0, -w)));
    }
    out
}

fn l_minus_lbar(key: &MonomialKey) -> Vec<i32> {
    key.l.iter().zip(&key.lbar).map(|(&a, &b)| a as i32 - b as i32).collect()
}

/// Divides every non-projected monomial of `source` by i[k·ω + (l−l̄)·Ω].
/// Returns χ and the projected part.
fn solve(stage: u8, source: &PoissonSeries, ctx: &StepContext, project: impl Fn(&MonomialKey) -> bool) -> Result<(GeneratingFunction, PoissonSeries)> {
    let (n1, n2) = (source.n1(), source.n2());
    let mut chi_terms = Vec::new();
    let mut kept = Vec::new();
    let (mut dmin, mut margin) = (f64::INFINITY, f64::INFINITY);
    for (key, c) in source.terms() {
        if project(key) {
            kept.push((key.clone(), *c));
            continue;
        }
        let l = l_minus_lbar(key);
        let value = dot(&key.k, ctx.omega) + dot(&l, ctx.big_omega);
        let d = Divisor { step: ctx.step, k: &key.k, l: &l, value };
        ctx.policy.admit(&d, &ctx.floors)?;
        dmin = dmin.min(value.abs());
        margin = margin.min(value.abs() / ctx.floors.for_divisor(&d));
        chi_terms.push((key.clone(), c / Complex64::new(0.0, value)));
    }
    let series = PoissonSeries::from_terms(n1, n2, chi_terms).with_cutoff(source.trig_cutoff());
    let ledger = source.ledger().with(ctx.step as u32);
    let gf = GeneratingFunction { stage, step: ctx.step, series: series.with_ledger(ledger.clone()), divisor_min: dmin, margin, ledger };
    Ok((gf, PoissonSeries::from_terms(n1, n2, kept).with_cutoff(0)))
}

/// χ₀ from f₀^{(r−1,r)}; the second value is the average ⟨f₀⟩.
pub fn solve_chi0(f0: &PoissonSeries, ctx: &StepContext) -> Result<(GeneratingFunction, PoissonSeries)> {
    solve(0, f0, ctx, MonomialKey::is_average)
}

/// χ₁ from f₁^{(I;r,r)}.
pub fn solve_chi1(f1: &PoissonSeries, ctx: &StepContext) -> Result<GeneratingFunction> {
    Ok(solve(1, f1, ctx, |_| false)?.0)
}

/// χ₂ and Z^{(r)} from f₂^{(II;r,r)}: Z keeps the k = 0 monomials p_j and
/// z_j w_j.
pub fn solve_chi2(f2: &PoissonSeries, ctx: &StepContext) -> Result<(GeneratingFunction, PoissonSeries)> {
    solve(2, f2, ctx, |k| k.is_average() && k.l == k.lbar && (k.degree_p() == 1 || k.degree_z() == 2))
}

/// ‖L_χ(kernel) + source − projection‖ / ‖source‖ in the weighted norm.
pub fn homological_residual(chi: &PoissonSeries, source: &PoissonSeries, projection: &PoissonSeries, omega: &[f64], big_omega: &[f64], np: &NormParameters) -> Result<f64> {
    let lk = lie_derivative(chi, &kernel(omega, big_omega), &Truncation::default())?;
    let res = lk.add(source).sub(projection);
    let scale = source.weighted_norm(np);
    Ok(if scale == 0.0 { res.weighted_norm(np) } else { res.weighted_norm(np) / scale })
}
