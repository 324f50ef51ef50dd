//! User models in real variables and their complexified expansion.
//!
//! A model file (TOML) declares
//!
//! ```toml
//! n1 = 2
//! n2 = 1
//! omega0 = [1.0, 0.6180339887]
//! Omega0 = ["2.5 + 0.1*w2"]
//! E_bound = 4.0                # optional
//!
//! [[terms]]                     # coeff · p^m x^a y^b · trig(k·q)
//! p_exp = [0, 0]
//! x_exp = [1]
//! y_exp = [0]
//! k = [1, 0]
//! coeff = 0.5
//! trig = "cos"                  # "cos" (default), "sin" or "exp"
//! # coeff_im = 0.0             # imaginary part, "exp" only
//! # eps_power = 1              # overrides the natural ε power
//! ```
//!
//! The real pair (x, y) is related to the complex pair by z = (x + i y)/√2,
//! w = i z̄, so x = (z − i w)/√2 and y = (−i z + w)/√2, and the quadratic
//! part Ω(x² + y²)/2 becomes Ω z z̄ = −i Ω z w.

mod expr;
mod hypotheses;
mod state;

pub use expr::{Expr, Func};
pub use hypotheses::{check_hypotheses, jacobian_bound, HypothesisParams, HypothesisReport};
pub use state::HamiltonianState;

use crate::series::{MonomialKey, PoissonSeries, Truncation};
use crate::{Complex64, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    #[default]
    Cos,
    Sin,
    Exp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub p_exp: Vec<u16>,
    pub x_exp: Vec<u16>,
    pub y_exp: Vec<u16>,
    pub k: Vec<i32>,
    pub coeff: f64,
    #[serde(default)]
    pub trig: Trig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_power: Option<u32>,
}

impl TermSpec {
    /// The index j = 2 deg(p) + deg(x, y) of the group ℱ_j the term belongs to.
    pub fn class(&self) -> u32 {
        let sum = |v: &[u16]| v.iter().map(|&e| e as u32).sum::<u32>();
        2 * sum(&self.p_exp) + sum(&self.x_exp) + sum(&self.y_exp)
    }

    pub fn harmonic(&self) -> u32 {
        self.k.iter().map(|k| k.unsigned_abs()).sum()
    }

    /// ε power of the term in the unexpanded Hamiltonian: averaged terms of
    /// class ≥ 3 are of order one, everything else carries one ε.
    pub fn natural_eps_power(&self) -> u32 {
        self.eps_power.unwrap_or(if self.class() >= 3 && self.harmonic() == 0 { 0 } else { 1 })
    }

    /// Value at a real phase point.
    pub fn evaluate(&self, p: &[f64], q: &[f64], x: &[f64], y: &[f64]) -> f64 {
        let mut v = 1.0;
        for (b, &e) in p.iter().zip(&self.p_exp) {
            v *= b.powi(e as i32);
        }
        for (b, &e) in x.iter().zip(&self.x_exp) {
            v *= b.powi(e as i32);
        }
        for (b, &e) in y.iter().zip(&self.y_exp) {
            v *= b.powi(e as i32);
        }
        let phase: f64 = self.k.iter().zip(q).map(|(&k, &q)| k as f64 * q).sum();
        match self.trig {
            Trig::Cos => self.coeff * v * phase.cos(),
            Trig::Sin => self.coeff * v * phase.sin(),
            Trig::Exp => (Complex64::new(self.coeff, self.coeff_im.unwrap_or(0.0)) * Complex64::new(0.0, phase).exp()).re * v,
        }
    }

    /// The term as a series in (p, q, z, w).
    pub fn to_series(&self, n1: usize, n2: usize) -> PoissonSeries {
        let trunc = Truncation::default();
        let s = FRAC_1_SQRT_2;
        let mut out = PoissonSeries::constant(n1, n2, Complex64::new(1.0, 0.0));
        for (j, &e) in self.p_exp.iter().enumerate() {
            for _ in 0..e {
                out = out.mul(&PoissonSeries::p(n1, n2, j), &trunc);
            }
        }
        for j in 0..n2 {
            let z = PoissonSeries::z(n1, n2, j);
            let w = PoissonSeries::w(n1, n2, j);
            let x = z.combine(Complex64::new(s, 0.0), &w, Complex64::new(0.0, -s));
            let y = z.combine(Complex64::new(0.0, -s), &w, Complex64::new(s, 0.0));
            for _ in 0..self.x_exp[j] {
                out = out.mul(&x, &trunc);
            }
            for _ in 0..self.y_exp[j] {
                out = out.mul(&y, &trunc);
            }
        }
        let trig = match self.trig {
            Trig::Cos => PoissonSeries::cos_q(n2, &self.k).scale_re(self.coeff),
            Trig::Sin => PoissonSeries::sin_q(n2, &self.k).scale_re(self.coeff),
            Trig::Exp => PoissonSeries::exp_iq(n2, &self.k).scale(Complex64::new(self.coeff, self.coeff_im.unwrap_or(0.0))),
        };
        out.mul(&trig, &trunc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n1: usize,
    pub n2: usize,
    pub omega0: Vec<f64>,
    #[serde(rename = "Omega0")]
    pub omega_transverse: Vec<String>,
    #[serde(rename = "E_bound", default, skip_serializing_if = "Option::is_none")]
    pub e_bound: Option<f64>,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

impl ModelSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ModelSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        ModelSpec::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model serialization")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 {
            return Err(Error::Model("n1 must be positive".into()));
        }
        if self.omega0.len() != self.n1 || self.omega_transverse.len() != self.n2 {
            return Err(Error::Model(format!("omega0 needs {} entries and Omega0 {}", self.n1, self.n2)));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.p_exp.len() != self.n1 || t.k.len() != self.n1 || t.x_exp.len() != self.n2 || t.y_exp.len() != self.n2 {
                return Err(Error::Model(format!("term {i}: exponent or harmonic vector has the wrong length")));
            }
            if !t.coeff.is_finite() || t.coeff_im.is_some_and(|c| !c.is_finite()) {
                return Err(Error::Model(format!("term {i}: coefficient is not finite")));
            }
            if t.coeff_im.is_some() && t.trig != Trig::Exp {
                return Err(Error::Model(format!("term {i}: coeff_im requires trig = \"exp\"")));
            }
        }
        self.transverse_exprs()?;
        if let Some(e) = self.e_bound {
            if !(e > 0.0) {
                return Err(Error::Model("E_bound must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn transverse_exprs(&self) -> Result<Vec<Expr>> {
        self.omega_transverse.iter().map(|s| Expr::parse(s, self.n1)).collect()
    }

    /// Ω⁰(ω⁰).
    pub fn transverse_frequencies(&self, omega: &[f64]) -> Result<Vec<f64>> {
        Ok(self.transverse_exprs()?.iter().map(|e| e.eval(omega)).collect())
    }

    /// The original Hamiltonian at ε as one numeric series.
    pub fn hamiltonian_series(&self, omega: &[f64], epsilon: f64) -> Result<PoissonSeries> {
        let (n1, n2) = (self.n1, self.n2);
        let big = self.transverse_frequencies(omega)?;
        let mut out = PoissonSeries::zero(n1, n2);
        for (j, &w) in omega.iter().enumerate() {
            out = out.add(&PoissonSeries::p(n1, n2, j).scale_re(w));
        }
        for (j, &w) in big.iter().enumerate() {
            let zw = PoissonSeries::z(n1, n2, j).mul(&PoissonSeries::w(n1, n2, j), &Truncation::default());
            out = out.add(&zw.scale(Complex64::new(0.0, -w)));
        }
        for t in &self.terms {
            out = out.add(&t.to_series(n1, n2).scale_re(epsilon.powi(t.natural_eps_power() as i32)));
        }
        Ok(out)
    }

    /// Real-variable value of the Hamiltonian at ε.
    pub fn evaluate_real(&self, omega: &[f64], epsilon: f64, p: &[f64], q: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
        let big = self.transverse_frequencies(omega)?;
        let mut v: f64 = omega.iter().zip(p).map(|(a, b)| a * b).sum();
        for j in 0..self.n2 {
            v += 0.5 * big[j] * (x[j] * x[j] + y[j] * y[j]);
        }
        for t in &self.terms {
            v += epsilon.powi(t.natural_eps_power() as i32) * t.evaluate(p, q, x, y);
        }
        Ok(v)
    }

    pub fn max_class(&self) -> u32 {
        self.terms.iter().map(TermSpec::class).max().unwrap_or(0)
    }
}

/// Settings for [`ingest`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    #[serde(rename = "K")]
    pub k_budget: u32,
    pub epsilon: f64,
    /// Largest admissible order s.
    pub s_max: u32,
}

/// The expansion H^{(0)} at the frequency ω⁰.
///
/// A term of natural order e and harmonic |k| goes to s = max(e, ⌈|k|/K⌉);
/// when s > e its coefficient is divided by ε^{s−e} so the numeric
/// Hamiltonian is unchanged.
pub fn ingest(spec: &ModelSpec, omega: &[f64], opts: &IngestOptions) -> Result<HamiltonianState> {
    spec.validate()?;
    if omega.len() != spec.n1 {
        return Err(Error::Dimension(omega.len(), 0, spec.n1, 0));
    }
    if opts.k_budget == 0 {
        return Err(Error::Config("K must be positive".into()));
    }
    let (n1, n2) = (spec.n1, spec.n2);
    let big = spec.transverse_frequencies(omega)?;
    let mut state = HamiltonianState::new(n1, n2, omega.to_vec(), big, opts.epsilon, opts.k_budget);
    let mut pieces: std::collections::BTreeMap<(u32, u32), PoissonSeries> = Default::default();
    for t in &spec.terms {
        let ell = t.class();
        let e = t.natural_eps_power();
        let need = t.harmonic().div_ceil(opts.k_budget);
        let s = e.max(need);
        if s == 0 && ell <= 2 {
            return Err(Error::Model(format!("term with k = {:?} of class {ell} cannot be of order ε⁰", t.k)));
        }
        if s > opts.s_max {
            let key = MonomialKey::new(&t.p_exp, &t.x_exp, &t.y_exp, &t.k);
            return Err(Error::Model(format!("term {key:?}: harmonic {} needs order {s} > s_max = {}", t.harmonic(), opts.s_max)));
        }
        let mut f = t.to_series(n1, n2);
        if s > e {
            if opts.epsilon == 0.0 {
                return Err(Error::Model(format!("term with k = {:?} needs ε-rescaling but ε = 0", t.k)));
            }
            f = f.scale_re(opts.epsilon.powi(-((s - e) as i32)));
        }
        let slot = pieces.entry((ell, s)).or_insert_with(|| PoissonSeries::zero(n1, n2));
        *slot = slot.add(&f);
    }
    for ((ell, s), f) in pieces {
        state.set_cell(ell, s, f.with_cutoff(s * opts.k_budget));
    }
    Ok(state)
}
