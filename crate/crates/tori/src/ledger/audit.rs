use super::{count_nk, floor_log2, CellId, IndexList, LedgerBook, Stage};
use serde::Serialize;

/// Upper bound on 𝒩_k of a Hamiltonian list ℋ_ℓ^{(r,s)} (also used for the
/// intermediate lists).
pub fn bound_hamiltonian(r: u32, ell: u32, s: u32, k: u32) -> i64 {
    let lg = floor_log2(r);
    let base = 3 * (s >> k) as i64;
    if k < lg {
        base
    } else if k == lg {
        if ell <= 3 {
            base - 3 + ell as i64
        } else {
            base
        }
    } else {
        0
    }
}

/// Upper bound on 𝒩_k(𝒢_j^{(r)}).
pub fn bound_generator(r: u32, j: usize, k: u32) -> i64 {
    let lg = floor_log2(r);
    if k < lg {
        3 * (r >> k) as i64
    } else if k == lg {
        j as i64 + 1
    } else {
        0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub list_id: String,
    pub r: u32,
    pub s: u32,
    pub k: u32,
    pub count: usize,
    pub bound: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionAudit {
    pub r_max: u32,
    pub s_max: u32,
    pub checked: usize,
    pub violations: usize,
    pub rows: Vec<AuditRow>,
}

fn k_range(list: &IndexList, r: u32) -> std::ops::RangeInclusive<u32> {
    let top = list.entries().iter().copied().max().unwrap_or(1).max(r);
    0..=floor_log2(top) + 1
}

/// Checks the selection rules on every generator list and every Hamiltonian
/// list of class ≤ `max_class` in the range where the rules are asserted
/// (s ≥ r for ℓ ≤ 2, any s for ℓ ≥ 3), including the intermediate lists.
pub fn audit_selection_rules(book: &LedgerBook, r_max: u32, s_max: u32, max_class: u32) -> SelectionAudit {
    let mut rows = Vec::new();
    let r_top = r_max.min(book.last_step());
    for r in 1..=r_top {
        for j in 0..3 {
            let g = book.generator(r, j);
            for k in k_range(g, r) {
                let count = count_nk(g, k);
                let bound = bound_generator(r, j, k);
                rows.push(AuditRow { list_id: format!("G{j}"), r, s: r, k, count, bound, ok: count as i64 <= bound });
            }
        }
    }
    for (id, list) in book.hamiltonian_lists() {
        let CellId { stage, r, ell, s } = id;
        if r > r_top || s > s_max || ell > max_class || (ell <= 2 && s < r) {
            continue;
        }
        let name = match stage {
            Stage::First => "H_I",
            Stage::Second => "H_II",
            Stage::Final => "H",
        };
        for k in k_range(list, r) {
            let count = count_nk(list, k);
            let bound = bound_hamiltonian(r, ell, s, k);
            rows.push(AuditRow { list_id: format!("{name}[{ell}]"), r, s, k, count, bound, ok: count as i64 <= bound });
        }
    }
    let violations = rows.iter().filter(|r| !r.ok).count();
    SelectionAudit { r_max: r_top, s_max, checked: rows.len(), violations, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_tables() {
        // 𝒢₀^{(1)} = {1}: 𝒩₀ = 1 ≤ j + 1
        assert_eq!(bound_generator(1, 0, 0), 1);
        assert_eq!(bound_generator(5, 2, 2), 3);
        assert_eq!(bound_generator(5, 2, 1), 6);
        assert_eq!(bound_generator(5, 2, 3), 0);
        assert_eq!(bound_hamiltonian(2, 0, 3, 1), 0);
        assert_eq!(bound_hamiltonian(2, 4, 5, 1), 6);
        assert_eq!(bound_hamiltonian(4, 1, 9, 0), 27);
    }
}
