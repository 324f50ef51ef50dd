use super::FrequencyDomain;
use crate::model::{ingest, IngestOptions, ModelSpec};
use crate::normalize::{normalize, NormalizeConfig};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

/// ω^{(r)}(ω⁰) and Ω^{(r)}(ω⁰) at every grid node, r = 0..=r_max.
///
/// Values between nodes are multilinear interpolants; outside the box the
/// boundary cell is extended linearly.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyMaps {
    pub r_max: usize,
    pub epsilon: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points_per_dim: usize,
    /// omega[r][node]
    pub omega: Vec<Vec<Vec<f64>>>,
    /// big_omega[r][node]
    pub big_omega: Vec<Vec<Vec<f64>>>,
    /// Nodes where normalization stopped on a zero divisor.
    pub failed: Vec<bool>,
}

/// Runs the normalization (exploratory, orders s ≤ r_max) at every node.
///
/// Frequencies after step r only involve orders s ≤ r, so s_max = r_max
/// loses nothing for the maps.
pub fn build_maps(spec: &ModelSpec, domain: &FrequencyDomain, template: &NormalizeConfig, epsilon: f64, k_budget: u32) -> Result<FrequencyMaps> {
    if domain.points_per_dim < 2 {
        return Err(Error::Config("frequency maps need at least two grid points per axis".into()));
    }
    let r_max = template.r_max;
    let cfg = NormalizeConfig { s_max: r_max.max(1) as u32, mode: "exploratory".into(), check_monolithic: false, ..template.clone() };
    let per_node: Vec<Result<Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>>> = domain
        .nodes
        .par_iter()
        .map(|w| {
            let h0 = ingest(spec, w, &IngestOptions { k_budget, epsilon, s_max: cfg.s_max })?;
            match normalize(h0, &cfg) {
                Ok(run) => Ok(Some((run.states.iter().map(|h| h.omega.clone()).collect(), run.states.iter().map(|h| h.big_omega.clone()).collect()))),
                Err(e) if e.is_resonance() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let n = domain.nodes.len();
    let mut omega = vec![Vec::with_capacity(n); r_max + 1];
    let mut big_omega = vec![Vec::with_capacity(n); r_max + 1];
    let mut failed = Vec::with_capacity(n);
    for (res, w) in per_node.into_iter().zip(&domain.nodes) {
        match res? {
            Some((om, big)) => {
                for r in 0..=r_max {
                    omega[r].push(om[r].clone());
                    big_omega[r].push(big[r].clone());
                }
                failed.push(false);
            }
            None => {
                let big0 = spec.transverse_frequencies(w)?;
                for r in 0..=r_max {
                    omega[r].push(if r == 0 { w.clone() } else { vec![f64::NAN; w.len()] });
                    big_omega[r].push(if r == 0 { big0.clone() } else { vec![f64::NAN; spec.n2] });
                }
                failed.push(true);
            }
        }
    }
    Ok(FrequencyMaps { r_max, epsilon, lo: domain.lo.clone(), hi: domain.hi.clone(), points_per_dim: domain.points_per_dim, omega, big_omega, failed })
}

/// Estimates of the frequency maps at step r over a set of nodes.
#[derive(Clone, Debug, Serialize)]
pub struct MapEstimates {
    pub r: usize,
    /// sup |ω^{(r)} − ω⁰|_∞.
    pub mu: f64,
    /// sup of the row-sum norm of ∂Ω^{(r)}/∂ω⁰.
    pub j: f64,
    /// sup of the row-sum norm of ∂(Ω^{(r)}∘φ^{(r)})/∂ω.
    pub j_bar: f64,
}

impl FrequencyMaps {
    pub fn n1(&self) -> usize {
        self.lo.len()
    }

    pub fn n2(&self) -> usize {
        self.big_omega[0].first().map_or(0, Vec::len)
    }

    fn node_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &v| acc * self.points_per_dim + v)
    }

    fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.n1()];
        for d in (0..self.n1()).rev() {
            out[d] = i % self.points_per_dim;
            i /= self.points_per_dim;
        }
        out
    }

    fn interpolate(&self, table: &[Vec<f64>], w0: &[f64]) -> Vec<f64> {
        let n = self.points_per_dim;
        let dim = self.n1();
        let mut base = vec![0usize; dim];
        let mut frac = vec![0.0; dim];
        for d in 0..dim {
            let t = (w0[d] - self.lo[d]) / (self.hi[d] - self.lo[d]) * (n - 1) as f64;
            let i = (t.floor().max(0.0) as usize).min(n - 2);
            base[d] = i;
            frac[d] = t - i as f64;
        }
        let width = table[0].len();
        let mut out = vec![0.0; width];
        for corner in 0..(1usize << dim) {
            let mut weight = 1.0;
            let mut idx = base.clone();
            for d in 0..dim {
                if corner >> d & 1 == 1 {
                    idx[d] += 1;
                    weight *= frac[d];
                } else {
                    weight *= 1.0 - frac[d];
                }
            }
            for (o, v) in out.iter_mut().zip(&table[self.node_index(&idx)]) {
                *o += weight * v;
            }
        }
        out
    }

    /// ω^{(r)}(ω⁰).
    pub fn omega_at(&self, r: usize, w0: &[f64]) -> Vec<f64> {
        self.interpolate(&self.omega[r], w0)
    }

    /// Ω^{(r)}(ω⁰).
    pub fn big_omega_at(&self, r: usize, w0: &[f64]) -> Vec<f64> {
        self.interpolate(&self.big_omega[r], w0)
    }

    /// φ^{(r)}(ω): the ω⁰ with ω^{(r)}(ω⁰) = ω, by fixed-point iteration.
    pub fn invert(&self, r: usize, target: &[f64]) -> Result<Vec<f64>> {
        let scale = target.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut x = target.to_vec();
        for _ in 0..100 {
            let img = self.omega_at(r, &x);
            let res: Vec<f64> = img.iter().zip(target).map(|(a, b)| a - b).collect();
            let err = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !err.is_finite() {
                break;
            }
            if err < 1e-10 * scale.max(1e-300) {
                return Ok(x);
            }
            for (xi, ri) in x.iter_mut().zip(&res) {
                *xi -= ri;
            }
        }
        Err(Error::NoConvergence(format!("inverse frequency map at step {r} for ω = {target:?}")))
    }

    /// Ω^{(r)}∘φ^{(r)}(ω).
    pub fn transverse_on_current(&self, r: usize, w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.big_omega_at(r, &self.invert(r, w)?))
    }

    // grid finite difference of table along axis d at node i
    fn node_derivative(&self, table: &[Vec<f64>], i: usize, d: usize) -> Vec<f64> {
        let idx = self.multi_index(i);
        let n = self.points_per_dim;
        let step = (self.hi[d] - self.lo[d]) / (n - 1) as f64;
        let (a, b) = if idx[d] == 0 {
            (idx[d], idx[d] + 1)
        } else if idx[d] == n - 1 {
            (idx[d] - 1, idx[d])
        } else {
            (idx[d] - 1, idx[d] + 1)
        };
        let mut ia = idx.clone();
        let mut ib = idx;
        ia[d] = a;
        ib[d] = b;
        let (va, vb) = (&table[self.node_index(&ia)], &table[self.node_index(&ib)]);
        va.iter().zip(vb).map(|(x, y)| (y - x) / ((b - a) as f64 * step)).collect()
    }

    /// ∂ω^{(r)}/∂ω⁰ at node i (rows: components of ω^{(r)}).
    pub fn omega_jacobian(&self, r: usize, i: usize) -> DMatrix<f64> {
        let n1 = self.n1();
        let cols: Vec<Vec<f64>> = (0..n1).map(|d| self.node_derivative(&self.omega[r], i, d)).collect();
        DMatrix::from_fn(n1, n1, |row, c| cols[c][row])
    }

    /// ∂Ω^{(r)}/∂ω⁰ at node i.
    pub fn big_omega_jacobian(&self, r: usize, i: usize) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = (0..self.n1()).map(|d| self.node_derivative(&self.big_omega[r], i, d)).collect();
        DMatrix::from_fn(self.n2(), self.n1(), |row, c| cols[c][row])
    }

    /// ∂φ^{(r)}/∂ω at the image of node i.
    pub fn inverse_jacobian(&self, r: usize, i: usize) -> Result<DMatrix<f64>> {
        self.omega_jacobian(r, i).try_inverse().ok_or_else(|| Error::Domain(format!("singular frequency map at node {i}, step {r}")))
    }

    /// ∂(Ω^{(r)}∘φ^{(r)})/∂ω at the image of node i.
    pub fn transverse_gradient(&self, r: usize, i: usize) -> Result<DMatrix<f64>> {
        Ok(self.big_omega_jacobian(r, i) * self.inverse_jacobian(r, i)?)
    }

    pub fn estimates(&self, r: usize, nodes: &[usize]) -> Result<MapEstimates> {
        let row_sum = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut out = MapEstimates { r, mu: 0.0, j: 0.0, j_bar: 0.0 };
        for &i in nodes {
            let drift = self.omega[r][i].iter().zip(&self.omega[0][i]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            out.mu = out.mu.max(drift);
            out.j = out.j.max(row_sum(&self.big_omega_jacobian(r, i)));
            out.j_bar = out.j_bar.max(row_sum(&self.transverse_gradient(r, i)?));
        }
        Ok(out)
    }
}
