use super::{integrate, integrators, RealPoint, Tolerance};
use crate::model::HamiltonianState;
use crate::normalize::{Direction, GeneratingFunction, NearIdentityMap};
use crate::{Complex64, Error, Result};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceParams {
    pub t_end: f64,
    /// Sampling interval of the distance.
    pub dt: f64,
    pub seeds: usize,
    pub integrator: String,
    pub tol: Tolerance,
}

impl Default for InvarianceParams {
    fn default() -> Self {
        InvarianceParams { t_end: 200.0, dt: 0.5, seeds: 8, integrator: "dop853".into(), tol: Tolerance::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvarianceResult {
    pub epsilon: f64,
    pub r: usize,
    /// max over seeds and samples of ‖P‖ + ‖(X, Y)‖².
    pub error: f64,
    pub per_seed: Vec<f64>,
    pub energy_drift: f64,
}

fn map_to(h0: &HamiltonianState, generators: &[GeneratingFunction], epsilon: f64, r: usize) -> Result<NearIdentityMap> {
    if (h0.epsilon - epsilon).abs() > 1e-15 * epsilon.abs().max(1.0) {
        return Err(Error::Config(format!("H^(0) was expanded at ε = {}, not {epsilon}", h0.epsilon)));
    }
    let gens: Vec<GeneratingFunction> = generators.iter().filter(|g| g.step <= r).cloned().collect();
    let reached = gens.iter().map(|g| g.step).max().unwrap_or(0);
    if reached < r {
        return Err(Error::Config(format!("generators reach step {reached}, need {r}")));
    }
    NearIdentityMap::new(&gens, epsilon, 20, 1e-30)
}

/// Seeds points on the approximate torus P = 0, X = Y = 0, flows them with
/// the original Hamiltonian and measures the distance from the torus in the
/// normalized coordinates of step r.
pub fn torus_invariance_error(h0: &HamiltonianState, generators: &[GeneratingFunction], epsilon: f64, r: usize, params: &InvarianceParams) -> Result<InvarianceResult> {
    let map = map_to(h0, generators, epsilon, r)?;
    let integ = integrators().get(&params.integrator)?;
    let h = h0.total_series();
    let (n1, n2) = (h0.n1, h0.n2);
    let seeds = params.seeds.max(1);
    let runs: Vec<(f64, f64)> = (0..seeds)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let q = (0..n1).map(|j| 2.0 * PI * (i as f64 + 0.5 * j as f64) / seeds as f64).collect();
            let seed = RealPoint { p: vec![0.0; n1], q, x: vec![0.0; n2], y: vec![0.0; n2] };
            let x0 = RealPoint::from_phase(&map.apply(&seed.phase(), Direction::ToOriginal));
            let rec = integrate(&h, &x0, params.t_end, params.dt, integ.as_ref(), params.tol)?;
            let worst = rec.points.iter().map(|pt| RealPoint::from_phase(&map.apply(&pt.phase(), Direction::ToNormal)).torus_distance()).fold(0.0, f64::max);
            Ok((worst, rec.energy_drift()))
        })
        .collect::<Result<_>>()?;
    let per_seed: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(InvarianceResult {
        epsilon,
        r,
        error: per_seed.iter().copied().fold(0.0, f64::max),
        per_seed,
        energy_drift: runs.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    /// Initial X_j in normalized coordinates.
    pub amplitude: f64,
    pub dt: f64,
    pub samples: usize,
    pub integrator: String,
    pub tol: Tolerance,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams { amplitude: 1e-3, dt: 0.25, samples: 4096, integrator: "dop853".into(), tol: Tolerance::default() }
    }
}

// angular frequency of the largest Hann-windowed peak, refined by a
// Gaussian fit through the three top bins
fn peak_frequency(signal: &[Complex64], dt: f64) -> f64 {
    let n = signal.len();
    let mut buf: Vec<Complex64> = signal.iter().enumerate().map(|(i, z)| z * (0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let top = (0..n).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap_or(0);
    let (l, c, r) = (mag[(top + n - 1) % n].ln(), mag[top].ln(), mag[(top + 1) % n].ln());
    let denom = l - 2.0 * c + r;
    let shift = if denom.is_finite() && denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    let bin = if top > n / 2 { top as f64 - n as f64 } else { top as f64 };
    2.0 * PI * (bin + shift) / (n as f64 * dt)
}

/// Peak angular frequency of each transverse mode: the mode j is excited
/// with X_j = amplitude on the normalized torus and z_j(t) is read back in
/// normalized coordinates.
pub fn transverse_spectrum(h0: &HamiltonianState, generators: &[GeneratingFunction], epsilon: f64, r: usize, params: &SpectrumParams) -> Result<Vec<f64>> {
    if params.samples < 8 {
        return Err(Error::Config("spectrum needs at least 8 samples".into()));
    }
    let map = map_to(h0, generators, epsilon, r)?;
    let integ = integrators().get(&params.integrator)?;
    let h = h0.total_series();
    let (n1, n2) = (h0.n1, h0.n2);
    (0..n2)
        .into_par_iter()
        .map(|j| {
            let mut x = vec![0.0; n2];
            x[j] = params.amplitude;
            let seed = RealPoint { p: vec![0.0; n1], q: vec![0.0; n1], x, y: vec![0.0; n2] };
            let x0 = RealPoint::from_phase(&map.apply(&seed.phase(), Direction::ToOriginal));
            let t_end = params.dt * (params.samples - 1) as f64;
            let rec = integrate(&h, &x0, t_end, params.dt, integ.as_ref(), params.tol)?;
            let signal: Vec<Complex64> = rec
                .points
                .iter()
                .map(|pt| {
                    let back = RealPoint::from_phase(&map.apply(&pt.phase(), Direction::ToNormal));
                    Complex64::new(back.x[j], back.y[j]) / SQRT_2
                })
                .collect();
            Ok(peak_frequency(&signal, params.dt))
        })
        .collect()
}
