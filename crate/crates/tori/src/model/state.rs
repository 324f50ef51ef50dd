use crate::series::{NormParameters, PoissonSeries};
use crate::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// H^{(r)} = ω^{(r)}·p + Σ Ω_j^{(r)} z_j z̄_j + Σ_{ℓ,s} ε^s f_ℓ^{(r,s)}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianState {
    pub r: usize,
    pub n1: usize,
    pub n2: usize,
    pub omega: Vec<f64>,
    #[serde(rename = "Omega")]
    pub big_omega: Vec<f64>,
    /// f_ℓ^{(r,s)} keyed by (ℓ, s); absent cells vanish.
    #[serde(with = "cells_serde")]
    pub cells: BTreeMap<(u32, u32), PoissonSeries>,
    pub energy_offset: f64,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k_budget: u32,
}

impl HamiltonianState {
    pub fn new(n1: usize, n2: usize, omega: Vec<f64>, big_omega: Vec<f64>, epsilon: f64, k_budget: u32) -> Self {
        assert_eq!(omega.len(), n1);
        assert_eq!(big_omega.len(), n2);
        HamiltonianState { r: 0, n1, n2, omega, big_omega, cells: BTreeMap::new(), energy_offset: 0.0, epsilon, k_budget }
    }

    pub fn cell(&self, ell: u32, s: u32) -> Option<&PoissonSeries> {
        self.cells.get(&(ell, s))
    }

    pub fn cell_or_zero(&self, ell: u32, s: u32) -> PoissonSeries {
        self.cell(ell, s).cloned().unwrap_or_else(|| PoissonSeries::zero(self.n1, self.n2))
    }

    /// Stores a cell, dropping it when it vanishes and carries no ledger.
    pub fn set_cell(&mut self, ell: u32, s: u32, f: PoissonSeries) {
        if f.is_zero() && f.ledger().is_empty() {
            self.cells.remove(&(ell, s));
        } else {
            self.cells.insert((ell, s), f);
        }
    }

    pub fn max_class(&self) -> u32 {
        self.cells.iter().filter(|(_, f)| !f.is_zero()).map(|(&(l, _), _)| l).max().unwrap_or(0)
    }

    pub fn max_order(&self) -> u32 {
        self.cells.iter().filter(|(_, f)| !f.is_zero()).map(|(&(_, s), _)| s).max().unwrap_or(0)
    }

    /// ω·p − i Σ Ω_j z_j w_j, i.e. ω·p + Σ Ω_j z_j z̄_j.
    pub fn kernel(&self) -> PoissonSeries {
        let mut out = PoissonSeries::zero(self.n1, self.n2);
        for (j, &w) in self.omega.iter().enumerate() {
            out = out.add(&PoissonSeries::p(self.n1, self.n2, j).scale_re(w));
        }
        for (j, &w) in self.big_omega.iter().enumerate() {
            let zw = PoissonSeries::z(self.n1, self.n2, j).mul(&PoissonSeries::w(self.n1, self.n2, j), &Default::default());
            out = out.add(&zw.scale(Complex64::new(0.0, -w)));
        }
        out
    }

    /// The order-s part Σ_ℓ f_ℓ^{(r,s)} (without the kernel).
    pub fn order(&self, s: u32) -> PoissonSeries {
        let mut out = PoissonSeries::zero(self.n1, self.n2);
        for (&(_, so), f) in &self.cells {
            if so == s {
                out = out.add(f);
            }
        }
        out
    }

    /// The full Hamiltonian as a single numeric series at the stored ε.
    pub fn total_series(&self) -> PoissonSeries {
        let mut out = self.kernel();
        for (&(_, s), f) in &self.cells {
            out = out.add(&f.scale_re(self.epsilon.powi(s as i32)));
        }
        out
    }

    /// Σ_{ℓ,s} ε^s ‖f_ℓ^{(r,s)}‖ at the shrunk radii.
    pub fn hamiltonian_total(&self, np: &NormParameters, shrink: f64) -> f64 {
        let np = np.shrunk(shrink);
        self.cells.iter().map(|(&(_, s), f)| self.epsilon.powi(s as i32) * f.weighted_norm(&np)).sum()
    }

    /// Ē = max_{ℓ,s} 2^ℓ ‖f_ℓ^{(r,s)}‖_{ρ,σ,R}.
    pub fn ebar(&self, np: &NormParameters) -> f64 {
        self.cells.iter().map(|(&(l, _), f)| 2f64.powi(l as i32) * f.weighted_norm(np)).fold(0.0, f64::max)
    }
}

mod cells_serde {
    use crate::series::{PoissonSeries, SeriesDoc};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Cell {
        ell: u32,
        s: u32,
        series: SeriesDoc,
    }

    pub fn serialize<S: Serializer>(cells: &BTreeMap<(u32, u32), PoissonSeries>, ser: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Cell> = cells.iter().map(|(&(ell, s), f)| Cell { ell, s, series: f.into() }).collect();
        v.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<(u32, u32), PoissonSeries>, D::Error> {
        let v: Vec<Cell> = Vec::deserialize(de)?;
        v.into_iter()
            .map(|c| {
                let f: PoissonSeries = c.series.try_into().map_err(serde::de::Error::custom)?;
                Ok(((c.ell, c.s), f))
            })
            .collect()
    }
}
