use super::homological::GeneratingFunction;
use crate::series::{lie_derivative, PhasePoint, PoissonSeries, Truncation};
use crate::{Complex64, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Normalized coordinates to original ones: x₀ = Φ^{(r)}(x_r).
    ToOriginal,
    /// Original coordinates to normalized ones.
    ToNormal,
}

/// The time-one flow of one generator, as Lie series of the coordinate
/// functions: x ↦ x + Σ_{n≥1} (1/n!) L^{n−1}(L x) with L = L_{a·χ}.
#[derive(Clone, Debug)]
struct CoordinateFlow {
    dp: Vec<PoissonSeries>,
    dq: Vec<PoissonSeries>,
    dz: Vec<PoissonSeries>,
    dw: Vec<PoissonSeries>,
}

fn displacement(chi: &PoissonSeries, first: PoissonSeries, n_max: usize, tol: f64) -> Result<PoissonSeries> {
    let trunc = Truncation::default();
    let mut term = first;
    let mut sum = term.clone();
    for n in 2..=n_max {
        term = lie_derivative(chi, &term, &trunc)?.scale_re(1.0 / n as f64);
        if term.is_zero() || term.max_abs() < tol {
            break;
        }
        sum = sum.add(&term);
    }
    Ok(sum)
}

impl CoordinateFlow {
    fn new(chi: &PoissonSeries, n_max: usize, tol: f64) -> Result<Self> {
        let (n1, n2) = (chi.n1(), chi.n2());
        let mut f = CoordinateFlow { dp: vec![], dq: vec![], dz: vec![], dw: vec![] };
        for j in 0..n1 {
            // L q_j = χ_{p_j}, L p_j = −χ_{q_j}
            f.dq.push(displacement(chi, chi.deriv_p(j), n_max, tol)?);
            f.dp.push(displacement(chi, chi.deriv_q(j).scale_re(-1.0), n_max, tol)?);
        }
        for j in 0..n2 {
            // L z_j = −χ_{w_j}, L w_j = χ_{z_j}
            f.dz.push(displacement(chi, chi.deriv_w(j).scale_re(-1.0), n_max, tol)?);
            f.dw.push(displacement(chi, chi.deriv_z(j), n_max, tol)?);
        }
        Ok(f)
    }

    fn apply(&self, x: &PhasePoint) -> PhasePoint {
        let mut y = x.clone();
        for (j, d) in self.dp.iter().enumerate() {
            y.p[j] += d.evaluate(x);
        }
        for (j, d) in self.dq.iter().enumerate() {
            y.q[j] += d.evaluate(x).re;
        }
        for (j, d) in self.dz.iter().enumerate() {
            y.z[j] += d.evaluate(x);
        }
        for (j, d) in self.dw.iter().enumerate() {
            y.w[j] += d.evaluate(x);
        }
        y
    }
}

/// Φ^{(r)} = φ^{(1)}∘…∘φ^{(r)} with φ^{(r)} = flow(ε^r χ₀)∘flow(ε^r χ₁)∘flow(ε^r χ₂),
/// and its inverse.
#[derive(Clone, Debug)]
pub struct NearIdentityMap {
    flows: Vec<CoordinateFlow>,
    inverse: Vec<CoordinateFlow>,
}

impl NearIdentityMap {
    /// `generators` in the order produced (step 1 stage 0 first). Lie series
    /// stop after `n_max` terms or when a term drops below `tol`.
    pub fn new(generators: &[GeneratingFunction], epsilon: f64, n_max: usize, tol: f64) -> Result<Self> {
        let mut flows = Vec::new();
        let mut inverse = Vec::new();
        for g in generators {
            let a = epsilon.powi(g.step as i32);
            flows.push(CoordinateFlow::new(&g.series.scale(Complex64::new(a, 0.0)), n_max, tol)?);
            inverse.push(CoordinateFlow::new(&g.series.scale(Complex64::new(-a, 0.0)), n_max, tol)?);
        }
        Ok(NearIdentityMap { flows, inverse })
    }

    pub fn apply(&self, x: &PhasePoint, direction: Direction) -> PhasePoint {
        match direction {
            Direction::ToOriginal => self.flows.iter().rev().fold(x.clone(), |y, f| f.apply(&y)),
            Direction::ToNormal => self.inverse.iter().fold(x.clone(), |y, f| f.apply(&y)),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.flows.is_empty()
    }
}

/// Applies the composed map to a real phase point (p, q, x, y).
pub fn transform_point(generators: &[GeneratingFunction], epsilon: f64, point: (&[f64], &[f64], &[f64], &[f64]), direction: Direction) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let map = NearIdentityMap::new(generators, epsilon, 20, 1e-30)?;
    let x = PhasePoint::from_real(point.0, point.1, point.2, point.3);
    Ok(map.apply(&x, direction).to_real())
}
