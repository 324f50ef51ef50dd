//! Sparse truncated Taylor–Fourier series in (p, q, z, w) with w = i z̄.
//!
//! A series is stored as a vector of `(MonomialKey, coefficient)` pairs in
//! canonical key order. All operations are pure; accumulation happens in a
//! hash map that is filled in a fixed order, so results do not depend on
//! thread scheduling.

mod bracket;
mod eval;
mod io;
mod key;

pub use bracket::{lie_derivative, lie_series_apply, poisson_bracket, poisson_bracket_with};
pub use eval::{Gradient, PhasePoint};
pub use io::SeriesDoc;
pub use key::{Exps, Harm, MonomialKey};

use crate::ledger::{max_list, IndexList};
use crate::{Error, Result};
use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_PRUNE: f64 = 1e-300;

/// Global caps applied to the output of every operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub max_class: Option<u32>,
    pub max_harmonic: Option<u32>,
    pub prune: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { max_class: None, max_harmonic: None, prune: DEFAULT_PRUNE }
    }
}

impl Truncation {
    pub fn caps(max_class: u32, max_harmonic: u32) -> Self {
        Truncation { max_class: Some(max_class), max_harmonic: Some(max_harmonic), prune: DEFAULT_PRUNE }
    }

    pub fn admits(&self, key: &MonomialKey) -> bool {
        self.max_class.map_or(true, |c| key.class() <= c) && self.max_harmonic.map_or(true, |h| key.harmonic() <= h)
    }

    fn cap_cutoff(&self, cutoff: u32) -> u32 {
        self.max_harmonic.map_or(cutoff, |h| cutoff.min(h))
    }
}

/// Radii of the analyticity domain and the common shrink factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParameters {
    pub rho: f64,
    pub sigma: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub shrink: f64,
}

impl NormParameters {
    pub fn new(rho: f64, sigma: f64, big_r: f64) -> Self {
        NormParameters { rho, sigma, big_r, shrink: 1.0 }
    }

    pub fn shrunk(&self, shrink: f64) -> Self {
        NormParameters { shrink, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.rho, self.sigma, self.big_r, self.shrink].iter().all(|x| x.is_finite() && *x > 0.0);
        if !ok || self.shrink > 1.0 {
            return Err(Error::Config(format!("invalid norm parameters {self:?}")));
        }
        Ok(())
    }
}

/// Class tag (ℓ, sK) of a homogeneous series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTag {
    pub ell: u32,
    pub sk: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassOf {
    Zero,
    Homogeneous(ClassTag),
    Mixed(BTreeMap<u32, PoissonSeries>),
}

#[derive(Clone, Debug)]
pub struct PoissonSeries {
    n1: usize,
    n2: usize,
    trig_cutoff: u32,
    terms: Vec<(MonomialKey, Complex64)>,
    ledger: IndexList,
}

impl PartialEq for PoissonSeries {
    fn eq(&self, other: &Self) -> bool {
        self.n1 == other.n1 && self.n2 == other.n2 && self.terms == other.terms
    }
}

/// Order-preserving accumulator of monomials.
#[derive(Default)]
pub(crate) struct Accumulator {
    map: FxHashMap<MonomialKey, Complex64>,
}

impl Accumulator {
    pub fn with_capacity(n: usize) -> Self {
        Accumulator { map: FxHashMap::with_capacity_and_hasher(n, Default::default()) }
    }

    #[inline]
    pub fn add(&mut self, key: MonomialKey, c: Complex64) {
        *self.map.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add_series(&mut self, s: &PoissonSeries, factor: Complex64) {
        for (k, c) in &s.terms {
            self.add(k.clone(), c * factor);
        }
    }

    // chunk merges happen in chunk order, so every key sees the same sequence of additions
    pub fn merge(&mut self, other: Accumulator) {
        let mut items: Vec<_> = other.map.into_iter().collect();
        items.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for (k, c) in items {
            self.add(k, c);
        }
    }

    pub fn finish(self, n1: usize, n2: usize, cutoff: u32, trunc: &Truncation) -> PoissonSeries {
        let max = self.map.values().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = trunc.prune * max;
        let mut terms: Vec<_> = self
            .map
            .into_iter()
            .filter(|(k, c)| trunc.admits(k) && *c != Complex64::new(0.0, 0.0) && c.norm() >= floor)
            .collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let cut = trunc.cap_cutoff(cutoff.max(terms.iter().map(|t| t.0.harmonic()).max().unwrap_or(0)));
        PoissonSeries { n1, n2, trig_cutoff: cut, terms, ledger: IndexList::empty() }
    }
}

impl PoissonSeries {
    pub fn zero(n1: usize, n2: usize) -> Self {
        PoissonSeries { n1, n2, trig_cutoff: 0, terms: Vec::new(), ledger: IndexList::empty() }
    }

    /// Builds a series from possibly repeated, unordered monomials.
    pub fn from_terms(n1: usize, n2: usize, terms: impl IntoIterator<Item = (MonomialKey, Complex64)>) -> Self {
        let mut acc = Accumulator::default();
        for (k, c) in terms {
            assert!(k.n1() == n1 && k.n2() == n2, "key dimensions do not match the series");
            acc.add(k, c);
        }
        acc.finish(n1, n2, 0, &Truncation::default())
    }

    pub fn monomial(key: MonomialKey, c: Complex64) -> Self {
        let (n1, n2) = (key.n1(), key.n2());
        PoissonSeries::from_terms(n1, n2, [(key, c)])
    }

    pub fn constant(n1: usize, n2: usize, c: Complex64) -> Self {
        PoissonSeries::monomial(MonomialKey::one(n1, n2), c)
    }

    /// The action p_j.
    pub fn p(n1: usize, n2: usize, j: usize) -> Self {
        let mut key = MonomialKey::one(n1, n2);
        key.m[j] = 1;
        PoissonSeries::monomial(key, Complex64::new(1.0, 0.0))
    }

    /// The transverse variable z_j.
    pub fn z(n1: usize, n2: usize, j: usize) -> Self {
        let mut key = MonomialKey::one(n1, n2);
        key.l[j] = 1;
        PoissonSeries::monomial(key, Complex64::new(1.0, 0.0))
    }

    /// The conjugate variable w_j = i z̄_j.
    pub fn w(n1: usize, n2: usize, j: usize) -> Self {
        let mut key = MonomialKey::one(n1, n2);
        key.lbar[j] = 1;
        PoissonSeries::monomial(key, Complex64::new(1.0, 0.0))
    }

    /// e^{i k·q}.
    pub fn exp_iq(n2: usize, k: &[i32]) -> Self {
        let mut key = MonomialKey::one(k.len(), n2);
        key.k.copy_from_slice(k);
        PoissonSeries::monomial(key, Complex64::new(1.0, 0.0))
    }

    /// cos(k·q) as (e^{ik·q} + e^{−ik·q})/2.
    pub fn cos_q(n2: usize, k: &[i32]) -> Self {
        let neg: Vec<i32> = k.iter().map(|x| -x).collect();
        PoissonSeries::exp_iq(n2, k).add(&PoissonSeries::exp_iq(n2, &neg)).scale(Complex64::new(0.5, 0.0))
    }

    /// sin(k·q) as (e^{ik·q} − e^{−ik·q})/(2i).
    pub fn sin_q(n2: usize, k: &[i32]) -> Self {
        let neg: Vec<i32> = k.iter().map(|x| -x).collect();
        PoissonSeries::exp_iq(n2, k).sub(&PoissonSeries::exp_iq(n2, &neg)).scale(Complex64::new(0.0, -0.5))
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn trig_cutoff(&self) -> u32 {
        self.trig_cutoff
    }

    pub fn with_cutoff(mut self, cutoff: u32) -> Self {
        assert!(self.terms.iter().all(|t| t.0.harmonic() <= cutoff), "cutoff below a stored harmonic");
        self.trig_cutoff = cutoff;
        self
    }

    pub fn ledger(&self) -> &IndexList {
        &self.ledger
    }

    pub fn with_ledger(mut self, ledger: IndexList) -> Self {
        self.ledger = ledger;
        self
    }

    pub fn set_ledger(&mut self, ledger: IndexList) {
        self.ledger = ledger;
    }

    pub fn terms(&self) -> &[(MonomialKey, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &MonomialKey) -> Complex64 {
        match self.terms.binary_search_by(|t| t.0.cmp(key)) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max)
    }

    pub fn max_class(&self) -> u32 {
        self.terms.iter().map(|t| t.0.class()).max().unwrap_or(0)
    }

    pub(crate) fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n1 != other.n1 || self.n2 != other.n2 {
            return Err(Error::Dimension(self.n1, self.n2, other.n1, other.n2));
        }
        Ok(())
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        self.check_dims(other).expect("series dimensions differ");
        let mut acc = Accumulator::with_capacity(self.len() + other.len());
        acc.add_series(self, a);
        acc.add_series(other, b);
        let mut out = acc.finish(self.n1, self.n2, self.trig_cutoff.max(other.trig_cutoff), &Truncation::default());
        out.ledger = max_list([&self.ledger, &other.ledger], 0.0);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        if a == Complex64::new(0.0, 0.0) {
            return PoissonSeries::zero(self.n1, self.n2).with_ledger(self.ledger.clone());
        }
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), c * a)).collect();
        PoissonSeries { terms, ..self.clone() }
    }

    pub fn scale_re(&self, a: f64) -> Self {
        self.scale(Complex64::new(a, 0.0))
    }

    /// Keeps the monomials satisfying `pred`.
    pub fn filter(&self, mut pred: impl FnMut(&MonomialKey) -> bool) -> Self {
        let terms = self.terms.iter().filter(|t| pred(&t.0)).cloned().collect();
        PoissonSeries { terms, ..self.clone() }
    }

    pub fn truncate(&self, trunc: &Truncation) -> Self {
        let mut out = self.filter(|k| trunc.admits(k));
        out.trig_cutoff = trunc.cap_cutoff(out.trig_cutoff);
        out
    }

    /// Ordinary product of two series.
    pub fn mul(&self, other: &Self, trunc: &Truncation) -> Self {
        self.check_dims(other).expect("series dimensions differ");
        let mut acc = Accumulator::with_capacity(self.len() * other.len());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = ka.product(kb);
                if trunc.admits(&key) {
                    acc.add(key, ca * cb);
                }
            }
        }
        let mut out = acc.finish(self.n1, self.n2, self.trig_cutoff + other.trig_cutoff, trunc);
        out.ledger = self.ledger.union(&other.ledger);
        out
    }

    /// Angle average ⟨g⟩_q: the k = 0 monomials.
    pub fn average_q(&self) -> Self {
        let mut out = self.filter(|k| k.is_average());
        out.trig_cutoff = 0;
        out
    }

    /// The part of class ℓ.
    pub fn class_part(&self, ell: u32) -> Self {
        self.filter(|k| k.class() == ell)
    }

    pub fn class_of(&self) -> ClassOf {
        let mut parts: BTreeMap<u32, Vec<(MonomialKey, Complex64)>> = BTreeMap::new();
        for (k, c) in &self.terms {
            parts.entry(k.class()).or_default().push((k.clone(), *c));
        }
        match parts.len() {
            0 => ClassOf::Zero,
            1 => {
                let ell = *parts.keys().next().unwrap();
                ClassOf::Homogeneous(ClassTag { ell, sk: self.terms.iter().map(|t| t.0.harmonic()).max().unwrap() })
            }
            _ => ClassOf::Mixed(
                parts
                    .into_iter()
                    .map(|(ell, terms)| {
                        let s = PoissonSeries { n1: self.n1, n2: self.n2, trig_cutoff: self.trig_cutoff, terms, ledger: self.ledger.clone() };
                        (ell, s)
                    })
                    .collect(),
            ),
        }
    }

    /// True when every monomial has class ℓ and |k| ≤ sK.
    pub fn in_class(&self, ell: u32, sk: u32) -> bool {
        self.terms.iter().all(|(k, _)| k.class() == ell && k.harmonic() <= sk)
    }

    /// Σ |c| (αρ)^{|m|} (αR)^{|l|+|lbar|} e^{|k|ασ}.
    pub fn weighted_norm(&self, np: &NormParameters) -> f64 {
        let a = np.shrink;
        let (rho, sigma, big_r) = (a * np.rho, a * np.sigma, a * np.big_r);
        self.terms
            .iter()
            .map(|(k, c)| c.norm() * rho.powi(k.degree_p() as i32) * big_r.powi(k.degree_z() as i32) * (k.harmonic() as f64 * sigma).exp())
            .sum()
    }

    /// Checks c(m, lbar, l, −k) = conj(c(m, l, lbar, k))·(−i)^{|l|+|lbar|}.
    pub fn realify_check(&self, rel_tol: f64) -> bool {
        let tol = rel_tol * self.max_abs();
        self.terms.iter().all(|(k, c)| {
            let partner = self.coeff(&k.partner());
            (partner - c.conj() * minus_i_pow(k.degree_z())).norm() <= tol
        })
    }

    /// Derivative with respect to p_j.
    pub fn deriv_p(&self, j: usize) -> Self {
        self.map_terms(|k, c| {
            (k.m[j] > 0).then(|| {
                let mut nk = k.clone();
                nk.m[j] -= 1;
                (nk, c * k.m[j] as f64)
            })
        })
    }

    pub fn deriv_q(&self, j: usize) -> Self {
        self.map_terms(|k, c| (k.k[j] != 0).then(|| (k.clone(), c * Complex64::new(0.0, k.k[j] as f64))))
    }

    pub fn deriv_z(&self, j: usize) -> Self {
        self.map_terms(|k, c| {
            (k.l[j] > 0).then(|| {
                let mut nk = k.clone();
                nk.l[j] -= 1;
                (nk, c * k.l[j] as f64)
            })
        })
    }

    pub fn deriv_w(&self, j: usize) -> Self {
        self.map_terms(|k, c| {
            (k.lbar[j] > 0).then(|| {
                let mut nk = k.clone();
                nk.lbar[j] -= 1;
                (nk, c * k.lbar[j] as f64)
            })
        })
    }

    // key maps used here are injective, so the canonical order only needs a re-sort
    fn map_terms(&self, mut f: impl FnMut(&MonomialKey, Complex64) -> Option<(MonomialKey, Complex64)>) -> Self {
        let mut terms: Vec<_> = self.terms.iter().filter_map(|(k, c)| f(k, *c)).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        PoissonSeries { terms, ..self.clone() }
    }
}

pub(crate) fn minus_i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canonical_order_is_by_class_then_harmonic() {
        let a = MonomialKey::new(&[1], &[0], &[0], &[0]);
        let b = MonomialKey::new(&[0], &[1], &[0], &[3]);
        let d = MonomialKey::new(&[0], &[0], &[0], &[-1]);
        let s = PoissonSeries::from_terms(1, 1, [(a.clone(), c(1.0, 0.0)), (b.clone(), c(2.0, 0.0)), (d.clone(), c(3.0, 0.0))]);
        let keys: Vec<_> = s.terms().iter().map(|t| t.0.clone()).collect();
        assert_eq!(keys, vec![d, b, a]);
    }

    #[test]
    fn average_and_classes() {
        let s = PoissonSeries::p(1, 0, 0).add(&PoissonSeries::p(1, 0, 0).mul(&PoissonSeries::exp_iq(0, &[1]), &Truncation::default()));
        assert_eq!(s.average_q(), PoissonSeries::p(1, 0, 0));
        assert!(PoissonSeries::exp_iq(0, &[1]).average_q().is_zero());
        let t = PoissonSeries::p(1, 0, 0).mul(&PoissonSeries::exp_iq(0, &[3]), &Truncation::default());
        assert_eq!(t.class_of(), ClassOf::Homogeneous(ClassTag { ell: 2, sk: 3 }));
        match PoissonSeries::z(1, 1, 0).add(&PoissonSeries::p(1, 1, 0)).class_of() {
            ClassOf::Mixed(parts) => assert_eq!(parts.keys().copied().collect::<Vec<_>>(), vec![1, 2]),
            other => panic!("expected mixed, got {other:?}"),
        }
    }

    #[test]
    fn single_term_norms() {
        let np = NormParameters::new(0.3, 0.5, 0.2);
        let e = PoissonSeries::exp_iq(1, &[2, -1]).scale(c(0.0, 2.0));
        assert!((e.weighted_norm(&np) - 2.0 * (3.0f64 * 0.5).exp()).abs() < 1e-14);
        assert!((PoissonSeries::p(2, 1, 0).weighted_norm(&np) - 0.3).abs() < 1e-16);
        assert!((PoissonSeries::z(2, 1, 0).weighted_norm(&np.shrunk(0.5)) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn reality_pairing() {
        assert!(PoissonSeries::cos_q(0, &[1]).realify_check(1e-14));
        assert!(PoissonSeries::sin_q(1, &[1, 2]).realify_check(1e-14));
        assert!(!PoissonSeries::exp_iq(0, &[1]).scale(c(0.0, 1.0)).realify_check(1e-14));
        // z z̄ = −i z w is real
        let zz = PoissonSeries::z(1, 1, 0).mul(&PoissonSeries::w(1, 1, 0), &Truncation::default()).scale(c(0.0, -1.0));
        assert!(zz.realify_check(1e-14));
    }

    #[test]
    fn truncation_caps() {
        let s = PoissonSeries::cos_q(1, &[3]).add(&PoissonSeries::cos_q(1, &[1]));
        let t = s.truncate(&Truncation::caps(4, 2));
        assert_eq!(t.len(), 2);
        assert_eq!(t.trig_cutoff(), 2);
    }
}
