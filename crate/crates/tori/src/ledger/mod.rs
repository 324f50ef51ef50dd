//! Index lists recording which small divisors produced a term, their
//! evaluation operator, the counting sequences ν and the selection-rule
//! audit.

mod audit;
mod book;
mod nu;

pub use audit::{audit_selection_rules, bound_generator, bound_hamiltonian, AuditRow, SelectionAudit};
pub use book::{inputs_for, ledger_update, rule_for, CellId, LedgerBook, Rule, Stage};
pub use nu::{build_nu, NuTable};

use serde::{Deserialize, Serialize};

/// A multiset of positive step indices, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexList(Vec<u32>);

impl IndexList {
    pub fn empty() -> Self {
        IndexList(Vec::new())
    }

    pub fn new(mut entries: Vec<u32>) -> Self {
        assert!(entries.iter().all(|&s| s >= 1), "index lists hold positive integers");
        entries.sort_unstable();
        IndexList(entries)
    }

    pub fn single(s: u32) -> Self {
        IndexList::new(vec![s])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiset union.
    pub fn union(&self, other: &IndexList) -> IndexList {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        IndexList(v)
    }

    /// Union with `times` copies of `other`.
    pub fn union_repeated(&self, other: &IndexList, times: usize) -> IndexList {
        let mut v = self.0.clone();
        for _ in 0..times {
            v.extend_from_slice(&other.0);
        }
        v.sort_unstable();
        IndexList(v)
    }

    pub fn with(&self, s: u32) -> IndexList {
        self.union(&IndexList::single(s))
    }
}

/// log₂ 𝒱(S) = (4+τ) Σ log₂ s.
pub fn eval_v(list: &IndexList, tau: f64) -> f64 {
    (4.0 + tau) * list.0.iter().map(|&s| (s as f64).log2()).sum::<f64>()
}

/// The candidate maximizing 𝒱; ties go to the lexicographically largest
/// ascending entry sequence.
pub fn max_list<'a>(candidates: impl IntoIterator<Item = &'a IndexList>, tau: f64) -> IndexList {
    let mut best: Option<(&IndexList, f64)> = None;
    for c in candidates {
        let v = eval_v(c, tau);
        best = match best {
            None => Some((c, v)),
            Some((b, bv)) => {
                if v > bv || (v == bv && c.0 > b.0) {
                    Some((c, v))
                } else {
                    Some((b, bv))
                }
            }
        };
    }
    best.map(|(b, _)| b.clone()).expect("max_list needs at least one candidate")
}

/// 𝒩_k(S) = #{s ∈ S : 2^k ≤ s < 2^{k+1}}.
pub fn count_nk(list: &IndexList, k: u32) -> usize {
    let lo = 1u64 << k;
    let hi = lo << 1;
    list.0.iter().filter(|&&s| (s as u64) >= lo && (s as u64) < hi).count()
}

pub fn floor_log2(r: u32) -> u32 {
    assert!(r >= 1);
    31 - r.leading_zeros()
}
