use super::{ingest, IngestOptions, ModelSpec};
use crate::geometry::{hull_distance, FrequencyDomain};
use crate::lattice::{dot, l1_ball_nonzero, l1_shell};
use crate::series::NormParameters;
use crate::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisParams {
    pub gamma: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k_budget: u32,
    #[serde(rename = "Theta0")]
    pub theta0: f64,
    pub norm: NormParameters,
    pub epsilon: f64,
    pub s_max: u32,
    /// Integer vectors with 0 < |k| ≤ this are tested against the hulls.
    pub hull_k_max: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisorWitness {
    pub value: f64,
    pub node: Vec<f64>,
    pub k: Vec<i32>,
    pub l: Vec<i32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub divisor_a: DivisorWitness,
    pub floor_a: f64,
    pub ok_a: bool,
    pub divisor_b: DivisorWitness,
    pub floor_b: f64,
    pub ok_b: bool,
    pub transverse_distinct_nonzero: bool,
    #[serde(rename = "J0")]
    pub j0: f64,
    pub fd_step: f64,
    pub hull_distance: f64,
    pub hull_k: Vec<i32>,
    pub hull_l: Vec<i32>,
    pub hull_floor: f64,
    pub ok_hull: bool,
    #[serde(rename = "Ebar")]
    pub ebar: f64,
    pub ok_ebar: bool,
    /// Nodes violating (a'), reported by index into the grid.
    pub resonant_nodes: Vec<usize>,
    pub failures: Vec<String>,
}

impl HypothesisReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Central-difference Jacobian ∂Ω⁰/∂ω⁰ at ω (rows: Ω components).
pub fn jacobian(spec: &ModelSpec, omega: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let mut jac = vec![vec![0.0; spec.n1]; spec.n2];
    for c in 0..spec.n1 {
        let mut a = omega.to_vec();
        let mut b = omega.to_vec();
        a[c] += h;
        b[c] -= h;
        let (fa, fb) = (spec.transverse_frequencies(&a)?, spec.transverse_frequencies(&b)?);
        for r in 0..spec.n2 {
            jac[r][c] = (fa[r] - fb[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// sup over the nodes of the ∞-norm (max row sum) of the Jacobian.
pub fn jacobian_bound(spec: &ModelSpec, nodes: &[Vec<f64>], h: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for w in nodes {
        let jac = jacobian(spec, w, h)?;
        for row in &jac {
            best = best.max(row.iter().map(|x| x.abs()).sum());
        }
    }
    Ok(best)
}

fn h0(j0: f64, p: &HypothesisParams) -> f64 {
    let eta = (1.0 / p.k_budget as f64).min(p.norm.sigma);
    eta.min(1.0 / (std::f64::consts::E * (j0 + 1.0 / p.norm.sigma))) * p.gamma / (8.0 * (p.k_budget as f64).powf(p.tau))
}

/// Checks (a')–(d') on the grid of `domain`. Failures are recorded, not
/// returned as errors.
pub fn check_hypotheses(spec: &ModelSpec, domain: &FrequencyDomain, p: &HypothesisParams) -> Result<HypothesisReport> {
    spec.validate()?;
    let nodes = &domain.nodes;
    let transverse: Vec<Vec<f64>> = nodes.iter().map(|w| spec.transverse_frequencies(w)).collect::<Result<_>>()?;
    let ks = l1_ball_nonzero(spec.n1, p.k_budget);
    let ls = l1_shell(spec.n2, 0, 2);
    let ls_nonzero = l1_shell(spec.n2, 1, 2);

    let per_node: Vec<(DivisorWitness, bool)> = nodes
        .par_iter()
        .zip(&transverse)
        .map(|(w, big)| {
            let mut best = DivisorWitness { value: f64::INFINITY, node: w.clone(), k: vec![], l: vec![] };
            for k in &ks {
                let kw = dot(k, w);
                for l in &ls {
                    let v = (kw + dot(l, big)).abs();
                    if v < best.value {
                        best = DivisorWitness { value: v, node: w.clone(), k: k.clone(), l: l.clone() };
                    }
                }
            }
            let floor = 2.0 * p.gamma / (p.k_budget as f64).powf(p.tau);
            let ok = best.value > floor;
            (best, ok)
        })
        .collect();
    let floor_a = 2.0 * p.gamma / (p.k_budget as f64).powf(p.tau);
    let resonant_nodes: Vec<usize> = per_node.iter().enumerate().filter(|(_, (_, ok))| !ok).map(|(i, _)| i).collect();
    let divisor_a = per_node.iter().map(|(d, _)| d.clone()).min_by(|a, b| a.value.total_cmp(&b.value)).expect("grid is not empty");

    let mut divisor_b = DivisorWitness { value: f64::INFINITY, node: vec![], k: vec![0; spec.n1], l: vec![] };
    let mut distinct = true;
    for (w, big) in nodes.iter().zip(&transverse) {
        for l in &ls_nonzero {
            let v = dot(l, big).abs();
            if v < divisor_b.value {
                divisor_b = DivisorWitness { value: v, node: w.clone(), k: vec![0; spec.n1], l: l.clone() };
            }
        }
        for i in 0..big.len() {
            distinct &= big[i] != 0.0 && big[..i].iter().all(|&o| o != big[i]);
        }
    }
    if spec.n2 == 0 {
        divisor_b.value = f64::INFINITY;
    }
    let floor_b = 2.0 * p.gamma;

    let scale = domain.hi.iter().chain(&domain.lo).fold(1.0f64, |m, x| m.max(x.abs()));
    let j_first = jacobian_bound(spec, nodes, 1e-6 * scale)?;
    let fd_step = h0(j_first, p) / 10.0;
    let j0 = jacobian_bound(spec, nodes, fd_step)?;

    let mut hull_best = (f64::INFINITY, vec![], vec![]);
    if spec.n2 > 0 {
        let jacs: Vec<Vec<Vec<f64>>> = nodes.iter().map(|w| jacobian(spec, w, fd_step)).collect::<Result<_>>()?;
        for l in &ls_nonzero {
            let cloud: Vec<Vec<f64>> = jacs.iter().map(|jac| (0..spec.n1).map(|c| (0..spec.n2).map(|r| l[r] as f64 * jac[r][c]).sum()).collect()).collect();
            for k in l1_ball_nonzero(spec.n1, p.hull_k_max) {
                let kf: Vec<f64> = k.iter().map(|&x| x as f64).collect();
                let d = hull_distance(&kf, &cloud).lower;
                if d < hull_best.0 {
                    hull_best = (d, k, l.clone());
                }
            }
        }
    }
    let hull_floor = 2.0 * p.theta0;

    let h = ingest(spec, &spec.omega0, &IngestOptions { k_budget: p.k_budget, epsilon: p.epsilon, s_max: p.s_max })?;
    let ebar = h.ebar(&p.norm);
    let ok_ebar = spec.e_bound.map_or(true, |e| ebar <= e);

    let mut failures = Vec::new();
    let ok_a = resonant_nodes.is_empty();
    if !ok_a {
        failures.push(format!("(a') non-resonance up to order K fails at {} node(s); min divisor {:e} ≤ {:e}", resonant_nodes.len(), divisor_a.value, floor_a));
    }
    let ok_b = divisor_b.value > floor_b;
    if !ok_b {
        failures.push(format!("(a') transverse divisor {:e} ≤ 2γ = {:e}", divisor_b.value, floor_b));
    }
    if !distinct {
        failures.push("Ω⁰ components are not pairwise distinct and nonzero on the grid".into());
    }
    let ok_hull = hull_best.0 >= hull_floor;
    if !ok_hull {
        failures.push(format!("(b') dist(k, K_l) = {} < 2Θ₀ for k = {:?}, l = {:?}", hull_best.0, hull_best.1, hull_best.2));
    }
    if !ok_ebar {
        failures.push(format!("(d') Ē = {ebar} exceeds E_bound"));
    }
    Ok(HypothesisReport {
        divisor_a,
        floor_a,
        ok_a,
        divisor_b,
        floor_b,
        ok_b,
        transverse_distinct_nonzero: distinct,
        j0,
        fd_step,
        hull_distance: hull_best.0,
        hull_k: hull_best.1,
        hull_l: hull_best.2,
        hull_floor,
        ok_hull,
        ebar,
        ok_ebar,
        resonant_nodes,
        failures,
    })
}
