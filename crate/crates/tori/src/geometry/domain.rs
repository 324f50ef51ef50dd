use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A resonant strip removed at step r with the number of grid nodes it hit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovedStrip {
    pub r: usize,
    pub k: Vec<i32>,
    pub l: Vec<i32>,
    pub hits: usize,
}

/// The box 𝒲^{(0)} sampled on a tensor grid, with the nodes surviving each
/// carving step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrequencyDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points_per_dim: usize,
    pub nodes: Vec<Vec<f64>>,
    /// alive[r][i]: node i belongs to 𝒲^{(r)}.
    pub alive: Vec<Vec<bool>>,
    /// Extension radii h_0, h_1, … attached by the caller.
    pub h: Vec<f64>,
    pub removed: Vec<RemovedStrip>,
}

impl FrequencyDomain {
    /// Grid with `points_per_dim` equispaced points per axis, endpoints
    /// included (a single point sits at the centre).
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, points_per_dim: usize) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Config("box bounds must have equal, nonzero length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Config("box needs lo < hi in every coordinate".into()));
        }
        if points_per_dim == 0 {
            return Err(Error::Config("grid needs at least one point per axis".into()));
        }
        let axis = |d: usize| -> Vec<f64> {
            if points_per_dim == 1 {
                vec![0.5 * (lo[d] + hi[d])]
            } else {
                (0..points_per_dim).map(|i| lo[d] + (hi[d] - lo[d]) * i as f64 / (points_per_dim - 1) as f64).collect()
            }
        };
        let axes: Vec<Vec<f64>> = (0..lo.len()).map(axis).collect();
        let mut nodes = vec![vec![]];
        for ax in &axes {
            nodes = nodes.into_iter().flat_map(|pre: Vec<f64>| ax.iter().map(move |&v| [pre.clone(), vec![v]].concat())).collect();
        }
        let n = nodes.len();
        Ok(FrequencyDomain { lo, hi, points_per_dim, nodes, alive: vec![vec![true; n]], h: vec![], removed: vec![] })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Sup-norm diameter D.
    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x <= b)
    }

    /// Index of the last carving step.
    pub fn last_step(&self) -> usize {
        self.alive.len() - 1
    }

    pub fn alive_count(&self, r: usize) -> usize {
        self.alive[r].iter().filter(|&&a| a).count()
    }

    /// Row-major multi-index of node i.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let n = self.points_per_dim;
        let mut out = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            out[d] = i % n;
            i /= n;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &v| acc * self.points_per_dim + v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let d = FrequencyDomain::new(vec![0.0, 1.0], vec![1.0, 3.0], 3).unwrap();
        assert_eq!(d.nodes.len(), 9);
        assert_eq!(d.nodes[5], vec![0.5, 3.0]);
        assert_eq!(d.multi_index(5), vec![1, 2]);
        assert_eq!(d.flat_index(&[1, 2]), 5);
        assert_eq!(d.diameter(), 2.0);
        assert_eq!(d.volume(), 2.0);
        assert!(FrequencyDomain::new(vec![1.0], vec![0.0], 3).is_err());
    }
}
