use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::cmp::Ordering;

pub type Exps = SmallVec<[u16; 4]>;
pub type Harm = SmallVec<[i32; 4]>;

/// Exponents of p^m z^l (i z̄)^lbar e^{i k·q}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialKey {
    pub m: Exps,
    pub l: Exps,
    pub lbar: Exps,
    pub k: Harm,
}

impl MonomialKey {
    pub fn new(m: &[u16], l: &[u16], lbar: &[u16], k: &[i32]) -> Self {
        MonomialKey {
            m: SmallVec::from_slice(m),
            l: SmallVec::from_slice(l),
            lbar: SmallVec::from_slice(lbar),
            k: SmallVec::from_slice(k),
        }
    }

    pub fn one(n1: usize, n2: usize) -> Self {
        MonomialKey {
            m: SmallVec::from_elem(0, n1),
            l: SmallVec::from_elem(0, n2),
            lbar: SmallVec::from_elem(0, n2),
            k: SmallVec::from_elem(0, n1),
        }
    }

    pub fn n1(&self) -> usize {
        self.m.len()
    }

    pub fn n2(&self) -> usize {
        self.l.len()
    }

    /// Class index 2|m| + |l| + |lbar|.
    pub fn class(&self) -> u32 {
        2 * sum(&self.m) + sum(&self.l) + sum(&self.lbar)
    }

    pub fn degree_p(&self) -> u32 {
        sum(&self.m)
    }

    pub fn degree_z(&self) -> u32 {
        sum(&self.l) + sum(&self.lbar)
    }

    /// |k| as the ℓ¹ norm.
    pub fn harmonic(&self) -> u32 {
        self.k.iter().map(|x| x.unsigned_abs()).sum()
    }

    pub fn is_average(&self) -> bool {
        self.k.iter().all(|&x| x == 0)
    }

    /// Key of the conjugate partner (m, lbar, l, −k).
    pub fn partner(&self) -> Self {
        MonomialKey {
            m: self.m.clone(),
            l: self.lbar.clone(),
            lbar: self.l.clone(),
            k: self.k.iter().map(|x| -x).collect(),
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        MonomialKey {
            m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect(),
            l: self.l.iter().zip(&other.l).map(|(a, b)| a + b).collect(),
            lbar: self.lbar.iter().zip(&other.lbar).map(|(a, b)| a + b).collect(),
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
        }
    }
}

fn sum(v: &[u16]) -> u32 {
    v.iter().map(|&x| x as u32).sum()
}

impl Ord for MonomialKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.class()
            .cmp(&other.class())
            .then_with(|| self.harmonic().cmp(&other.harmonic()))
            .then_with(|| self.m.cmp(&other.m))
            .then_with(|| self.l.cmp(&other.l))
            .then_with(|| self.lbar.cmp(&other.lbar))
            .then_with(|| self.k.cmp(&other.k))
    }
}

impl PartialOrd for MonomialKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
