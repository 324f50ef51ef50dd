use crate::registry::Registry;
use crate::{Error, Result};
use ode_solvers::{DVector, Dop853, OutputType, System};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Right-hand side y' = f(t, y).
pub type Field<'a> = dyn Fn(f64, &[f64], &mut [f64]) + Sync + 'a;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-13, atol: 1e-15 }
    }
}

/// Adaptive integrator sampled on a uniform time grid.
pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;

    /// States at t = 0, dt, …, n·dt.
    fn sample(&self, f: &Field, y0: &[f64], dt: f64, n: usize, tol: Tolerance) -> Result<Vec<Vec<f64>>>;
}

fn check_args(y0: &[f64], dt: f64, tol: Tolerance) -> Result<()> {
    if !(dt > 0.0) || !(tol.rtol > 0.0) || !(tol.atol >= 0.0) {
        return Err(Error::Config(format!("need dt > 0 and positive tolerances, got dt = {dt}, {tol:?}")));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration("non-finite initial state".into()));
    }
    Ok(())
}

struct OdeSystem<'a, 'b> {
    f: &'b Field<'a>,
}

impl System<f64, DVector<f64>> for OdeSystem<'_, '_> {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        (self.f)(t, y.as_slice(), dy.as_mut_slice());
    }
}

/// Dormand–Prince 8(5,3) with its 7th-order dense output.
pub struct Dop853Integrator;

impl Integrator for Dop853Integrator {
    fn name(&self) -> &'static str {
        "dop853"
    }

    fn sample(&self, f: &Field, y0: &[f64], dt: f64, n: usize, tol: Tolerance) -> Result<Vec<Vec<f64>>> {
        check_args(y0, dt, tol)?;
        if n == 0 {
            return Ok(vec![y0.to_vec()]);
        }
        // the solver's own endpoint sample is unreliable, so stop half a
        // sample past the last requested time
        let t_end = dt * (n as f64 + 0.5);
        let y = DVector::from_column_slice(y0);
        let mut solver = Dop853::from_param(OdeSystem { f }, 0.0, t_end, dt, y, tol.rtol, tol.atol, 0.9, 0.0, 0.333, 6.0, t_end, 0.0, u32::MAX, u32::MAX, OutputType::Dense);
        solver.integrate().map_err(|e| Error::Integration(e.to_string()))?;
        let out = solver.y_out();
        if out.len() < n + 1 {
            return Err(Error::Integration(format!("dense output has {} samples, expected {}", out.len(), n + 1)));
        }
        Ok(out[..=n].iter().map(|v| v.as_slice().to_vec()).collect())
    }
}

/// Gragg–Bulirsch–Stoer extrapolation with the even step sequence 2, 4, 6, …
pub struct GbsIntegrator {
    pub max_columns: usize,
}

impl Default for GbsIntegrator {
    fn default() -> Self {
        GbsIntegrator { max_columns: 10 }
    }
}

fn modified_midpoint(f: &Field, t: f64, y: &[f64], f0: &[f64], big_h: f64, steps: usize) -> Vec<f64> {
    let h = big_h / steps as f64;
    let mut prev = y.to_vec();
    let mut cur: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h * b).collect();
    let mut d = vec![0.0; y.len()];
    for m in 1..steps {
        f(t + m as f64 * h, &cur, &mut d);
        for i in 0..y.len() {
            let next = prev[i] + 2.0 * h * d[i];
            prev[i] = cur[i];
            cur[i] = next;
        }
    }
    f(t + big_h, &cur, &mut d);
    (0..y.len()).map(|i| 0.5 * (cur[i] + prev[i] + h * d[i])).collect()
}

impl GbsIntegrator {
    // one extrapolated step; returns (y_new, error norm, columns used)
    fn step(&self, f: &Field, t: f64, y: &[f64], f0: &[f64], big_h: f64, tol: Tolerance) -> (Vec<f64>, f64, usize) {
        let dim = y.len();
        let seq = |j: usize| 2.0 * (j + 1) as f64;
        let mut prev: Vec<Vec<f64>> = Vec::new();
        let mut err = f64::INFINITY;
        for j in 0..self.max_columns {
            let mut row = vec![modified_midpoint(f, t, y, f0, big_h, 2 * (j + 1))];
            for k in 1..=j {
                let ratio = (seq(j) / seq(j - k)).powi(2) - 1.0;
                let next = (0..dim).map(|i| row[k - 1][i] + (row[k - 1][i] - prev[k - 1][i]) / ratio).collect();
                row.push(next);
            }
            if j >= 1 {
                let (best, below) = (&row[j], &row[j - 1]);
                let s: f64 = (0..dim).map(|i| ((best[i] - below[i]) / (tol.atol + tol.rtol * y[i].abs().max(best[i].abs()))).powi(2)).sum();
                err = (s / dim as f64).sqrt();
                if err <= 1.0 && j >= 2 {
                    return (row.swap_remove(j), err, j + 1);
                }
            }
            prev = row;
        }
        (prev.pop().unwrap_or_else(|| y.to_vec()), err, self.max_columns)
    }
}

impl Integrator for GbsIntegrator {
    fn name(&self) -> &'static str {
        "gbs"
    }

    fn sample(&self, f: &Field, y0: &[f64], dt: f64, n: usize, tol: Tolerance) -> Result<Vec<Vec<f64>>> {
        check_args(y0, dt, tol)?;
        let mut out = vec![y0.to_vec()];
        let mut y = y0.to_vec();
        let mut t = 0.0;
        let mut h = dt;
        let mut f0 = vec![0.0; y.len()];
        for i in 1..=n {
            let target = dt * i as f64;
            while t < target {
                let last = t + h >= target * (1.0 - 1e-14);
                let step = if last { target - t } else { h };
                f(t, &y, &mut f0);
                let (y_new, err, cols) = self.step(f, t, &y, &f0, step, tol);
                if !err.is_finite() || err > 1.0 {
                    let shrink = if err.is_finite() { (0.9 * err.powf(-1.0 / (2 * cols - 1) as f64)).clamp(0.1, 0.7) } else { 0.25 };
                    h = step * shrink;
                    if h <= f64::EPSILON * target.max(1.0) {
                        return Err(Error::Integration(format!("step size underflow at t = {t}")));
                    }
                    continue;
                }
                let grow = if err > 0.0 { (0.9 * err.powf(-1.0 / (2 * cols - 1) as f64)).clamp(0.2, 4.0) } else { 4.0 };
                y = y_new;
                if last {
                    t = target;
                    h = h.max(step * grow);
                } else {
                    t += step;
                    h = step * grow;
                }
            }
            out.push(y.clone());
        }
        Ok(out)
    }
}

pub fn integrators() -> Registry<dyn Integrator> {
    let mut reg: Registry<dyn Integrator> = Registry::new("integrator");
    reg.register("dop853", Arc::new(Dop853Integrator)).register("gbs", Arc::new(GbsIntegrator::default()));
    reg
}
