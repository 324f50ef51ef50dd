//! Numerical integration of the original flow and invariance checks of the
//! constructed torus.
//!
//! Real states are laid out as (p₁…p_{n₁}, q₁…q_{n₁}, x₁…x_{n₂}, y₁…y_{n₂})
//! with z = (x + iy)/√2. Hamilton's equations come from exact
//! differentiation of the series: q̇ = H_p, ṗ = −H_q, ż = −H_w.

mod integrators;
mod torus;

pub use integrators::{integrators, Dop853Integrator, Field, GbsIntegrator, Integrator, Tolerance};
pub use torus::{torus_invariance_error, transverse_spectrum, InvarianceParams, InvarianceResult, SpectrumParams};

use crate::series::PhasePoint;
use crate::{Complex64, Error, PoissonSeries, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Real phase point (p, q, x, y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPoint {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl RealPoint {
    pub fn from_flat(v: &[f64], n1: usize, n2: usize) -> Self {
        RealPoint { p: v[..n1].to_vec(), q: v[n1..2 * n1].to_vec(), x: v[2 * n1..2 * n1 + n2].to_vec(), y: v[2 * n1 + n2..2 * n1 + 2 * n2].to_vec() }
    }

    pub fn flat(&self) -> Vec<f64> {
        [&self.p[..], &self.q, &self.x, &self.y].concat()
    }

    pub fn phase(&self) -> PhasePoint {
        PhasePoint::from_real(&self.p, &self.q, &self.x, &self.y)
    }

    pub fn from_phase(pt: &PhasePoint) -> Self {
        let (p, q, x, y) = pt.to_real();
        RealPoint { p, q, x, y }
    }

    /// ‖P‖ + ‖(X, Y)‖².
    pub fn torus_distance(&self) -> f64 {
        let p: f64 = self.p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let t: f64 = self.x.iter().chain(&self.y).map(|v| v * v).sum();
        p + t
    }
}

/// Hamilton's equations of a real series on the flat real state.
pub fn hamiltonian_field(h: &PoissonSeries, state: &[f64], out: &mut [f64]) {
    let (n1, n2) = (h.n1(), h.n2());
    let pt = RealPoint::from_flat(state, n1, n2).phase();
    let g = h.gradient(&pt);
    for j in 0..n1 {
        out[j] = -g.q[j].re;
        out[n1 + j] = g.p[j].re;
    }
    for j in 0..n2 {
        let zdot: Complex64 = -g.w[j];
        out[2 * n1 + j] = SQRT_2 * zdot.re;
        out[2 * n1 + n2 + j] = SQRT_2 * zdot.im;
    }
}

pub fn energy(h: &PoissonSeries, pt: &RealPoint) -> f64 {
    h.evaluate(&pt.phase()).re
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub points: Vec<RealPoint>,
    pub energy: Vec<f64>,
    /// ‖P‖ + ‖(X, Y)‖² in normalized coordinates; empty unless filled by
    /// the caller.
    pub distance: Vec<f64>,
}

impl TrajectoryRecord {
    /// max |E(t) − E(0)| / max(1, |E(0)|).
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs().max(1.0)
    }
}

/// Integrates the flow of `h` from `x0`, sampling every `dt` up to `t_end`.
pub fn integrate(h: &PoissonSeries, x0: &RealPoint, t_end: f64, dt: f64, integrator: &dyn Integrator, tol: Tolerance) -> Result<TrajectoryRecord> {
    let (n1, n2) = (h.n1(), h.n2());
    if x0.p.len() != n1 || x0.q.len() != n1 || x0.x.len() != n2 || x0.y.len() != n2 {
        return Err(Error::Dimension(x0.p.len(), x0.x.len(), n1, n2));
    }
    if !h.realify_check(1e-10) {
        return Err(Error::Model("integrated Hamiltonian must be real".into()));
    }
    if !(t_end >= 0.0 && dt > 0.0) {
        return Err(Error::Config(format!("need t_end ≥ 0 and dt > 0, got {t_end}, {dt}")));
    }
    let n = (t_end / dt).round() as usize;
    let field = |_t: f64, y: &[f64], dy: &mut [f64]| hamiltonian_field(h, y, dy);
    let states = integrator.sample(&field, &x0.flat(), dt, n, tol)?;
    let points: Vec<RealPoint> = states.iter().map(|s| RealPoint::from_flat(s, n1, n2)).collect();
    let energy = points.iter().map(|pt| energy(h, pt)).collect();
    Ok(TrajectoryRecord { times: (0..=n).map(|i| i as f64 * dt).collect(), points, energy, distance: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(omega: f64) -> PoissonSeries {
        let zw = PoissonSeries::z(1, 1, 0).mul(&PoissonSeries::w(1, 1, 0), &Default::default());
        zw.scale(Complex64::new(0.0, -omega))
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let big = 2.5;
        let h = oscillator(big);
        let x0 = RealPoint { p: vec![0.0], q: vec![0.0], x: vec![0.3], y: vec![0.0] };
        let period = 2.0 * PI / big;
        for name in ["dop853", "gbs"] {
            let integ = integrators().get(name).unwrap();
            let rec = integrate(&h, &x0, period, period / 8.0, integ.as_ref(), Tolerance::default()).unwrap();
            let last = rec.points.last().unwrap();
            assert!((last.x[0] - 0.3).abs() < 1e-9 && last.y[0].abs() < 1e-9, "{name}: {last:?}");
            // quarter period: a circle of radius 0.3
            let quarter = &rec.points[2];
            assert!((quarter.x[0].hypot(quarter.y[0]) - 0.3).abs() < 1e-12);
            assert!(rec.energy_drift() < 1e-13);
        }
    }

    #[test]
    fn free_rotation_is_linear_in_time() {
        let h = PoissonSeries::p(2, 1, 0).scale_re(1.0).add(&PoissonSeries::p(2, 1, 1).scale_re(0.618));
        let x0 = RealPoint { p: vec![0.1, -0.2], q: vec![0.5, 1.0], x: vec![0.0], y: vec![0.0] };
        let integ = integrators().get("gbs").unwrap();
        let rec = integrate(&h, &x0, 10.0, 1.0, integ.as_ref(), Tolerance::default()).unwrap();
        for (t, pt) in rec.times.iter().zip(&rec.points) {
            assert!((pt.q[0] - 0.5 - t).abs() < 1e-12);
            assert!((pt.q[1] - 1.0 - 0.618 * t).abs() < 1e-12);
            assert_eq!(pt.p, vec![0.1, -0.2]);
        }
    }

    #[test]
    fn flat_layout_round_trip() {
        let pt = RealPoint { p: vec![1.0, 2.0], q: vec![3.0, 4.0], x: vec![5.0], y: vec![6.0] };
        assert_eq!(RealPoint::from_flat(&pt.flat(), 2, 1), pt);
        assert!((RealPoint::from_phase(&pt.phase()).y[0] - 6.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_integrator_is_reported() {
        assert!(integrators().get("rk4").is_err());
    }
}
