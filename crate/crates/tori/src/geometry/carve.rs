use super::{hull_distance, FrequencyDomain, FrequencyMaps, RemovedStrip};
use crate::estimates::measure_bound;
use crate::lattice::{dot, l1_ball_nonzero, l1_shell};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// 2γ/((r+1)K)^τ.
pub fn strip_width(r: usize, gamma: f64, tau: f64, k_budget: u32) -> f64 {
    2.0 * gamma / (((r + 1) as f64) * k_budget as f64).powf(tau)
}

fn shell(n1: usize, r: usize, k_budget: u32) -> Vec<Vec<i32>> {
    l1_shell(n1, r as u32 * k_budget + 1, (r as u32 + 1) * k_budget)
}

/// Whether ω lies in the resonant strip ℛ^{(r)}_{k,ℓ}.
#[allow(clippy::too_many_arguments)]
pub fn strip_test(maps: &FrequencyMaps, omega: &[f64], r: usize, k: &[i32], l: &[i32], gamma: f64, tau: f64, k_budget: u32) -> Result<bool> {
    let norm_k: u32 = k.iter().map(|x| x.unsigned_abs()).sum();
    let norm_l: u32 = l.iter().map(|x| x.unsigned_abs()).sum();
    let ru = r as u32;
    if norm_k <= ru * k_budget || norm_k > (ru + 1) * k_budget || norm_l > 2 {
        return Err(Error::Domain(format!("strip (k = {k:?}, ℓ = {l:?}) is not in the shell of step {r}")));
    }
    let big = maps.transverse_on_current(r, omega)?;
    Ok((dot(k, omega) + dot(l, &big)).abs() < strip_width(r, gamma, tau, k_budget))
}

fn hits_at(omega: &[f64], big: &[f64], ks: &[Vec<i32>], ls: &[Vec<i32>], width: f64, mut f: impl FnMut(usize, usize)) {
    for (a, k) in ks.iter().enumerate() {
        let kw = dot(k, omega);
        for (b, l) in ls.iter().enumerate() {
            if (kw + dot(l, big)).abs() < width {
                f(a, b);
            }
        }
    }
}

/// 𝒲^{(r)} = 𝒲^{(r−1)} minus every node whose step-r frequencies fall in a
/// strip with rK < |k| ≤ (r+1)K, |ℓ| ≤ 2. Nodes whose normalization failed
/// are removed as well.
pub fn carve(domain: &FrequencyDomain, r: usize, maps: &FrequencyMaps, gamma: f64, tau: f64, k_budget: u32) -> Result<FrequencyDomain> {
    if r == 0 || domain.last_step() + 1 != r || r > maps.r_max {
        return Err(Error::Config(format!("carving step {r} after step {} with maps up to {}", domain.last_step(), maps.r_max)));
    }
    let ks = shell(domain.dim(), r, k_budget);
    let ls = l1_shell(maps.n2(), 0, 2);
    let width = strip_width(r, gamma, tau, k_budget);
    let prev = &domain.alive[r - 1];
    let per_node: Vec<(bool, Vec<(usize, usize)>)> = (0..domain.nodes.len())
        .into_par_iter()
        .map(|i| {
            if !prev[i] {
                return (false, vec![]);
            }
            if maps.failed[i] {
                return (false, vec![]);
            }
            let mut hit = Vec::new();
            hits_at(&maps.omega[r][i], &maps.big_omega[r][i], &ks, &ls, width, |a, b| hit.push((a, b)));
            (hit.is_empty(), hit)
        })
        .collect();
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (_, hit) in &per_node {
        for &p in hit {
            *counts.entry(p).or_default() += 1;
        }
    }
    let mut out = domain.clone();
    out.alive.push(per_node.iter().map(|(a, _)| *a).collect());
    out.removed.extend(counts.into_iter().map(|((a, b), hits)| RemovedStrip { r, k: ks[a].clone(), l: ls[b].clone(), hits }));
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct HullCheck {
    pub r: usize,
    pub theta0: f64,
    /// Smallest certified dist(k, 𝒦_ℓ^{(r)}) over the sampled k.
    pub min_distance: f64,
    pub worst_k: Vec<i32>,
    pub worst_l: Vec<i32>,
    pub ok: bool,
    /// sup |∂[ℓ·Ω^{(r)}∘φ^{(r)} − ℓ·Ω^{(r−1)}∘φ^{(r−1)}]| over alive nodes.
    pub drift: f64,
    pub drift_bound: f64,
    pub drift_ok: bool,
    pub nodes: usize,
}

/// dist(k, 𝒦_ℓ^{(r)}) ≥ Θ₀ for 0 < |k| ≤ k_max, 0 < |ℓ| ≤ 2, with the hull
/// spanned by the gradients of ℓ·Ω^{(r)}∘φ^{(r)} at the nodes alive at r,
/// plus the per-step drift bound Θ₀/2^r.
///
/// The drift compares gradients at the images of the same node under the
/// two maps, which differ by the step-r frequency shift.
pub fn convex_hull_check(domain: &FrequencyDomain, maps: &FrequencyMaps, r: usize, theta0: f64, k_max: u32) -> Result<HullCheck> {
    let alive: Vec<usize> = (0..domain.nodes.len()).filter(|&i| domain.alive[r.min(domain.last_step())][i] && !maps.failed[i]).collect();
    let grads: Vec<DMatrix<f64>> = alive.iter().map(|&i| maps.transverse_gradient(r, i)).collect::<Result<_>>()?;
    let n1 = maps.n1();
    let ls = l1_shell(maps.n2(), 1, 2);
    let mut best = (f64::INFINITY, vec![], vec![]);
    let ks = l1_ball_nonzero(n1, k_max);
    let mut drift = 0.0f64;
    let prev: Vec<DMatrix<f64>> = if r > 0 { alive.iter().map(|&i| maps.transverse_gradient(r - 1, i)).collect::<Result<_>>()? } else { vec![] };
    for l in &ls {
        let lrow = DMatrix::from_fn(1, maps.n2(), |_, c| l[c] as f64);
        let cloud: Vec<Vec<f64>> = grads.iter().map(|g| (&lrow * g).iter().copied().collect()).collect();
        if cloud.is_empty() {
            continue;
        }
        for (g, p) in grads.iter().zip(&prev) {
            drift = drift.max((&lrow * (g - p)).norm());
        }
        let reach = cloud.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        for k in &ks {
            let kf: Vec<f64> = k.iter().map(|&x| x as f64).collect();
            let norm = kf.iter().map(|x| x * x).sum::<f64>().sqrt();
            // every hull point has length ≤ reach
            if norm - reach >= theta0 && norm - reach >= best.0 {
                continue;
            }
            let d = hull_distance(&kf, &cloud).lower;
            if d < best.0 {
                best = (d, k.clone(), l.clone());
            }
        }
    }
    let drift_bound = theta0 / 2f64.powi(r as i32);
    Ok(HullCheck {
        r,
        theta0,
        min_distance: best.0,
        worst_k: best.1,
        worst_l: best.2,
        ok: best.0 >= theta0,
        drift,
        drift_bound,
        drift_ok: r == 0 || drift <= drift_bound,
        nodes: alive.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub gamma: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k_budget: u32,
    #[serde(rename = "Theta0")]
    pub theta0: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub r_max: usize,
    pub samples: usize,
    pub hits: usize,
    pub hits_per_step: Vec<usize>,
    /// Monte-Carlo estimate of m(∪_r φ^{(r)}(ℛ^{(r)})).
    pub measured: f64,
    pub std_error: f64,
    /// Gershgorin bound on sup det ∂φ^{(r)}/∂ω over alive nodes, per step.
    pub det_bounds: Vec<f64>,
    pub det_ok: bool,
    /// Σ_{r≤r_max} Σ_{k,ℓ} 4γD^{n₁−1}/(Θ₀((r+1)K)^τ) · det bound.
    pub strip_bound: f64,
    /// Total bound over all r ≥ 1 (None when τ ≤ n₁).
    pub total_bound: Option<f64>,
    pub box_volume: f64,
    pub res_measure_condition: bool,
    pub ok: bool,
}

fn gershgorin_det_bound(m: &DMatrix<f64>) -> f64 {
    let radius = (0..m.nrows()).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    radius.powi(m.nrows() as i32)
}

/// Monte-Carlo resonant measure in the original frequencies against the
/// per-strip and total analytic bounds.
pub fn measure_compare(domain: &FrequencyDomain, maps: &FrequencyMaps, r_max: usize, p: &MeasureParams) -> Result<MeasureReport> {
    let r_max = r_max.min(maps.r_max);
    let n1 = domain.dim();
    let n2 = maps.n2();
    let ls = l1_shell(n2, 0, 2);
    let shells: Vec<Vec<Vec<i32>>> = (0..=r_max).map(|r| shell(n1, r, p.k_budget)).collect();
    let widths: Vec<f64> = (0..=r_max).map(|r| strip_width(r, p.gamma, p.tau, p.k_budget)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let points: Vec<Vec<f64>> = (0..p.samples).map(|_| (0..n1).map(|d| rng.gen_range(domain.lo[d]..domain.hi[d])).collect()).collect();
    let per_sample: Vec<Vec<bool>> = points
        .par_iter()
        .map(|w0| {
            (1..=r_max)
                .map(|r| {
                    let (om, big) = (maps.omega_at(r, w0), maps.big_omega_at(r, w0));
                    let mut hit = false;
                    hits_at(&om, &big, &shells[r], &ls, widths[r], |_, _| hit = true);
                    hit
                })
                .collect()
        })
        .collect();
    let hits = per_sample.iter().filter(|v| v.iter().any(|&h| h)).count();
    let hits_per_step = (0..r_max).map(|i| per_sample.iter().filter(|v| v[i]).count()).collect();
    let vol = domain.volume();
    let frac = hits as f64 / p.samples.max(1) as f64;
    let measured = frac * vol;
    let std_error = vol * (frac * (1.0 - frac) / p.samples.max(1) as f64).sqrt();

    let mut det_bounds = Vec::new();
    let mut strip_bound = 0.0;
    let diam = domain.diameter();
    for r in 1..=r_max {
        let step = r.min(domain.last_step());
        let mut det = 0.0f64;
        for i in (0..domain.nodes.len()).filter(|&i| domain.alive[step][i] && !maps.failed[i]) {
            det = det.max(gershgorin_det_bound(&maps.inverse_jacobian(r, i)?));
        }
        det_bounds.push(det);
        let per_strip = 4.0 * p.gamma * diam.powi(n1 as i32 - 1) / (p.theta0 * (((r + 1) as f64) * p.k_budget as f64).powf(p.tau));
        strip_bound += per_strip * det * (shells[r].len() * ls.len()) as f64;
    }
    let det_ok = det_bounds.iter().all(|&d| d <= 2.0);
    let total_bound = measure_bound(p.gamma, p.tau, p.k_budget, p.theta0, n1, n2, diam).map(|(b, _)| b);
    let res_measure_condition = total_bound.is_some_and(|b| b < vol);
    let ok = measured <= strip_bound && total_bound.map_or(true, |b| measured <= b);
    Ok(MeasureReport {
        r_max,
        samples: p.samples,
        hits,
        hits_per_step,
        measured,
        std_error,
        det_bounds,
        det_ok,
        strip_bound,
        total_bound,
        box_volume: vol,
        res_measure_condition,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_maps(d: &FrequencyDomain, big: f64) -> FrequencyMaps {
        FrequencyMaps {
            r_max: 2,
            epsilon: 0.0,
            lo: d.lo.clone(),
            hi: d.hi.clone(),
            points_per_dim: d.points_per_dim,
            omega: vec![d.nodes.clone(); 3],
            big_omega: vec![vec![vec![big]; d.nodes.len()]; 3],
            failed: vec![false; d.nodes.len()],
        }
    }

    #[test]
    fn strip_on_resonance_and_zero_gamma() {
        let d = FrequencyDomain::new(vec![0.9, 0.4], vec![1.1, 0.6], 3).unwrap();
        let m = flat_maps(&d, 7.0);
        // k·ω = 0 for k = (−1, 2) at ω = (1, 0.5); |k| = 3 lies in (0, 4] only for r = 0
        assert!(strip_test(&m, &[1.0, 0.5], 1, &[-2, 4], &[0], 1e-3, 2.0, 4).unwrap());
        assert!(!strip_test(&m, &[1.0, 0.5], 1, &[-2, 4], &[0], 0.0, 2.0, 4).unwrap());
        assert!(strip_test(&m, &[1.0, 0.5], 1, &[-1, 2], &[0], 1e-3, 2.0, 4).is_err());
    }

    #[test]
    fn carving_removes_the_resonant_node_only() {
        let d = FrequencyDomain::new(vec![0.9, 0.4], vec![1.1, 0.6], 3).unwrap();
        let m = flat_maps(&d, 7.0);
        let out = carve(&d, 1, &m, 1e-6, 2.0, 4).unwrap();
        let dead: Vec<usize> = (0..9).filter(|&i| !out.alive[1][i]).collect();
        let direct: Vec<usize> = (0..9)
            .filter(|&i| shell(2, 1, 4).iter().any(|k| l1_shell(1, 0, 2).iter().any(|l| (dot(k, &d.nodes[i]) + dot(l, &[7.0])).abs() < strip_width(1, 1e-6, 2.0, 4))))
            .collect();
        assert_eq!(dead, direct);
        assert!(dead.contains(&4));
        let none = carve(&d, 1, &m, 0.0, 2.0, 4).unwrap();
        assert_eq!(none.alive_count(1), 9);
    }

    #[test]
    fn constant_transverse_frequency_hull_is_origin() {
        let d = FrequencyDomain::new(vec![0.9, 0.4], vec![1.1, 0.6], 3).unwrap();
        let m = flat_maps(&d, 7.0);
        let h = convex_hull_check(&d, &m, 0, 0.4, 3).unwrap();
        assert!((h.min_distance - 1.0).abs() < 1e-9);
        assert!(h.ok);
    }
}
