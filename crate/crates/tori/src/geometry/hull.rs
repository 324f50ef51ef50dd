//! Euclidean distance from a point to the convex hull of a point cloud.

use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HullDistance {
    /// Distance to the best hull point found.
    pub upper: f64,
    /// Certified lower bound from a separating hyperplane.
    pub lower: f64,
    pub iterations: usize,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Frank–Wolfe on min ‖k − x‖² over x ∈ conv(cloud), with exact line
/// search. The lower bound is min_i ⟨k − g_i, u⟩ for u the unit vector from
/// the current iterate to k, which every hull point respects.
pub fn hull_distance(k: &[f64], cloud: &[Vec<f64>]) -> HullDistance {
    assert!(!cloud.is_empty(), "empty gradient cloud");
    let nearest = cloud.iter().min_by(|a, b| dotf(&sub(k, a), &sub(k, a)).total_cmp(&dotf(&sub(k, b), &sub(k, b)))).unwrap();
    let mut x = nearest.clone();
    let mut best = HullDistance { upper: f64::INFINITY, lower: 0.0, iterations: 0 };
    for it in 0..20_000 {
        let r = sub(k, &x);
        let dist = dotf(&r, &r).sqrt();
        best.upper = best.upper.min(dist);
        best.iterations = it;
        if dist == 0.0 {
            best.lower = 0.0;
            break;
        }
        let u: Vec<f64> = r.iter().map(|v| v / dist).collect();
        let (mut lo, mut arg) = (f64::INFINITY, 0);
        for (i, g) in cloud.iter().enumerate() {
            let v = dotf(&sub(k, g), &u);
            if v < lo {
                lo = v;
                arg = i;
            }
        }
        best.lower = best.lower.max(lo.max(0.0));
        if best.upper - best.lower <= 1e-12 * (1.0 + best.upper) {
            break;
        }
        let d = sub(&cloud[arg], &x);
        let dd = dotf(&d, &d);
        if dd == 0.0 {
            break;
        }
        let t = (dotf(&r, &d) / dd).clamp(0.0, 1.0);
        if t == 0.0 {
            break;
        }
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += t * di;
        }
    }
    best.lower = best.lower.min(best.upper);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_and_single_point() {
        let cloud = vec![vec![0.0, -1.0], vec![0.0, 1.0]];
        let d = hull_distance(&[2.0, 0.5], &cloud);
        assert!((d.upper - 2.0).abs() < 1e-9 && (d.lower - 2.0).abs() < 1e-9);
        let d = hull_distance(&[1.0, 1.0], &[vec![0.0, 0.0]]);
        assert!((d.lower - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn inside_point_has_zero_distance() {
        let cloud = vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![0.0, 2.0]];
        let d = hull_distance(&[0.1, 0.2], &cloud);
        assert!(d.upper < 1e-6 && d.lower == 0.0);
    }
}
