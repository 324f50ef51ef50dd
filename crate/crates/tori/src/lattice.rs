//! Enumeration of integer vectors by ℓ¹ norm.

/// All k ∈ ℤⁿ with lo ≤ |k|₁ ≤ hi, in lexicographic order.
pub fn l1_shell(n: usize, lo: u32, hi: u32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut cur = vec![0i32; n];
    fill(&mut cur, 0, hi as i32, &mut |v| {
        let norm: u32 = v.iter().map(|x| x.unsigned_abs()).sum();
        if norm >= lo {
            out.push(v.to_vec());
        }
    });
    out
}

/// All k ≠ 0 with |k|₁ ≤ hi.
pub fn l1_ball_nonzero(n: usize, hi: u32) -> Vec<Vec<i32>> {
    l1_shell(n, 1, hi)
}

fn fill(cur: &mut Vec<i32>, i: usize, budget: i32, f: &mut dyn FnMut(&[i32])) {
    if i == cur.len() {
        f(cur);
        return;
    }
    for v in -budget..=budget {
        cur[i] = v;
        fill(cur, i + 1, budget - v.abs(), f);
    }
    cur[i] = 0;
}

/// Transverse coupling vectors ℓ ∈ ℤ^{n₂} with |ℓ|₁ ≤ 2 (including 0).
pub fn transverse_couplings(n2: usize) -> Vec<Vec<i32>> {
    l1_shell(n2, 0, 2)
}

pub fn dot(k: &[i32], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_counts() {
        // |k|₁ = m in ℤ² has 4m points
        assert_eq!(l1_shell(2, 3, 3).len(), 12);
        assert_eq!(l1_ball_nonzero(2, 2).len(), 12);
        assert_eq!(transverse_couplings(1).len(), 5);
        assert_eq!(transverse_couplings(2).len(), 13);
        assert_eq!(l1_shell(0, 0, 2), vec![Vec::<i32>::new()]);
    }
}
