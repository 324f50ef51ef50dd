use super::{max_list, IndexList};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which Hamiltonian of a step a list belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    /// ℋ^{(I; r, s)}
    First,
    /// ℋ^{(II; r, s)}
    Second,
    /// ℋ^{(r, s)}
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId {
    pub stage: Stage,
    pub r: u32,
    pub ell: u32,
    pub s: u32,
}

impl CellId {
    pub fn new(stage: Stage, r: u32, ell: u32, s: u32) -> Self {
        CellId { stage, r, ell, s }
    }
}

/// Rows of the index-list recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// ℋ^{(0,s)} = ∅
    Base,
    /// 𝓜𝓐𝓧_{j ≤ ⌊s/r⌋} {j·𝒢₀ ∪ ℋ_{ℓ+2j}^{(r−1, s−jr)}}
    FirstMax,
    /// ℋ₀^{(I;r,s)} = ℋ₀^{(r−1,s)}, r < s < 2r
    FirstPass,
    /// 𝓜𝓐𝓧_{j ≤ ⌊s/r⌋} {j·𝒢₁ ∪ ℋ_{ℓ+j}^{(I; r, s−jr)}}
    SecondMax,
    /// as `SecondMax` with j ≤ ⌊s/r⌋ − 1
    SecondShort,
    /// 𝓜𝓐𝓧_{j ≤ ⌊s/r⌋} {j·𝒢₂ ∪ ℋ_ℓ^{(II; r, s−jr)}}, ℓ ≥ 3
    FinalHigh,
    /// s = kr + m, 0 < m < r: j ≤ k − 1
    FinalOffset,
    /// s = kr, ℓ = 0, 1, k ≥ 2: j ≤ k − 2
    FinalMultipleLow,
    /// s = kr, ℓ = 2, k ≥ 1: j ≤ k − 1
    FinalMultipleTwo,
    /// 𝒢₀ = ℋ₀^{(r−1, r)} ∪ {r}
    GenZero,
    /// 𝒢₁ = ℋ₁^{(I; r, r)} ∪ {r}
    GenOne,
    /// 𝒢₂ = ℋ₂^{(II; r, r)} ∪ {r}
    GenTwo,
}

/// The row of the recursion defining a Hamiltonian list, or `None` when no
/// row applies (the corresponding function vanishes identically).
pub fn rule_for(stage: Stage, r: u32, ell: u32, s: u32) -> Option<Rule> {
    if r == 0 {
        return (stage == Stage::Final).then_some(Rule::Base);
    }
    match stage {
        Stage::First => match ell {
            0 if s >= 2 * r => Some(Rule::FirstMax),
            0 if s > r => Some(Rule::FirstPass),
            0 => None,
            _ => Some(Rule::FirstMax),
        },
        Stage::Second => match ell {
            0 if s >= 3 * r => Some(Rule::SecondMax),
            0 if s > r => Some(Rule::SecondShort),
            1 if s >= 2 * r => Some(Rule::SecondMax),
            1 if s > r => Some(Rule::SecondShort),
            2 if s >= r => Some(Rule::SecondMax),
            // ℓ ≥ 3 below s = r only admits j = 0
            e if e >= 3 => Some(Rule::SecondMax),
            _ => None,
        },
        Stage::Final => {
            if ell >= 3 {
                return Some(Rule::FinalHigh);
            }
            let (k, m) = (s / r, s % r);
            match (m, ell) {
                (0, 0 | 1) if k >= 2 => Some(Rule::FinalMultipleLow),
                (0, 2) if k >= 1 => Some(Rule::FinalMultipleTwo),
                (m, _) if m > 0 && k >= 1 => Some(Rule::FinalOffset),
                _ => None,
            }
        }
    }
}

/// The input cells of a Hamiltonian row, indexed by the repetition count j
/// of the stage's generator list.
pub fn inputs_for(rule: Rule, r: u32, ell: u32, s: u32) -> Vec<CellId> {
    let span = |jmax: u32, f: &dyn Fn(u32) -> CellId| (0..=jmax).map(f).collect::<Vec<_>>();
    match rule {
        Rule::Base => vec![],
        Rule::FirstMax => span(s / r, &|j| CellId::new(Stage::Final, r - 1, ell + 2 * j, s - j * r)),
        Rule::FirstPass => vec![CellId::new(Stage::Final, r - 1, 0, s)],
        Rule::SecondMax => span(s / r, &|j| CellId::new(Stage::First, r, ell + j, s - j * r)),
        Rule::SecondShort => span(s / r - 1, &|j| CellId::new(Stage::First, r, ell + j, s - j * r)),
        Rule::FinalHigh => span(s / r, &|j| CellId::new(Stage::Second, r, ell, s - j * r)),
        Rule::FinalOffset | Rule::FinalMultipleTwo => span(s / r - 1, &|j| CellId::new(Stage::Second, r, ell, s - j * r)),
        Rule::FinalMultipleLow => span(s / r - 2, &|j| CellId::new(Stage::Second, r, ell, s - j * r)),
        Rule::GenZero => vec![CellId::new(Stage::Final, r - 1, 0, r)],
        Rule::GenOne => vec![CellId::new(Stage::First, r, 1, r)],
        Rule::GenTwo => vec![CellId::new(Stage::Second, r, 2, r)],
    }
}

/// Applies one row: 𝓜𝓐𝓧 over j of (j copies of `gen`) ∪ inputs[j] for the
/// maximizing rows, plain copy for the pass-through row, inputs[0] ∪ {r}
/// for generator rows.
pub fn ledger_update(rule: Rule, r: u32, gen: &IndexList, inputs: &[IndexList], tau: f64) -> Result<IndexList> {
    let arity_ok = match rule {
        Rule::Base => inputs.is_empty(),
        Rule::FirstPass | Rule::GenZero | Rule::GenOne | Rule::GenTwo => inputs.len() == 1,
        _ => !inputs.is_empty(),
    };
    if !arity_ok {
        return Err(Error::Config(format!("rule {rule:?} does not accept {} inputs", inputs.len())));
    }
    Ok(match rule {
        Rule::Base => IndexList::empty(),
        Rule::FirstPass => inputs[0].clone(),
        Rule::GenZero | Rule::GenOne | Rule::GenTwo => inputs[0].with(r),
        _ => {
            let cands: Vec<IndexList> = inputs.iter().enumerate().map(|(j, h)| h.union_repeated(gen, j)).collect();
            max_list(cands.iter(), tau)
        }
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct StepLists {
    first: Vec<Vec<Option<IndexList>>>,
    second: Vec<Vec<Option<IndexList>>>,
    fin: Vec<Vec<Option<IndexList>>>,
    gens: Vec<IndexList>,
}

/// All index lists of a run, computed from the recursion for every cell in
/// range whether or not the corresponding series vanishes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerBook {
    pub tau: f64,
    pub max_class: u32,
    pub s_max: u32,
    steps: Vec<StepLists>,
}

impl LedgerBook {
    /// `max_class` should exceed the model's top class by 2·s_max so that the
    /// lists of every cell up to the model's top class are exact.
    pub fn new(tau: f64, max_class: u32, s_max: u32) -> Self {
        let grid = |v: Option<IndexList>| vec![vec![v; s_max as usize + 1]; max_class as usize + 1];
        let base = StepLists { first: grid(None), second: grid(None), fin: grid(Some(IndexList::empty())), gens: vec![] };
        LedgerBook { tau, max_class, s_max, steps: vec![base] }
    }

    pub fn for_model(tau: f64, model_class: u32, s_max: u32) -> Self {
        LedgerBook::new(tau, model_class + 2 * s_max, s_max)
    }

    /// Index of the last completed step.
    pub fn last_step(&self) -> u32 {
        self.steps.len() as u32 - 1
    }

    pub fn get(&self, id: CellId) -> Option<&IndexList> {
        let step = self.steps.get(id.r as usize)?;
        let table = match id.stage {
            Stage::First => &step.first,
            Stage::Second => &step.second,
            Stage::Final => &step.fin,
        };
        table.get(id.ell as usize)?.get(id.s as usize)?.as_ref()
    }

    pub fn generator(&self, r: u32, j: usize) -> &IndexList {
        &self.steps[r as usize].gens[j]
    }

    fn lookup(&self, id: CellId) -> IndexList {
        self.get(id).cloned().unwrap_or_default()
    }

    fn fill(&self, stage: Stage, r: u32, gen: &IndexList) -> Vec<Vec<Option<IndexList>>> {
        (0..=self.max_class)
            .map(|ell| {
                (0..=self.s_max)
                    .map(|s| {
                        rule_for(stage, r, ell, s).map(|rule| {
                            let inputs: Vec<IndexList> = inputs_for(rule, r, ell, s).into_iter().map(|c| self.lookup(c)).collect();
                            ledger_update(rule, r, gen, &inputs, self.tau).expect("arity is fixed by inputs_for")
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Computes the lists of the next step.
    pub fn push_step(&mut self) {
        let r = self.steps.len() as u32;
        let empty = || vec![vec![None; self.s_max as usize + 1]; self.max_class as usize + 1];
        self.steps.push(StepLists { first: empty(), second: empty(), fin: empty(), gens: vec![] });
        let g0 = ledger_update(Rule::GenZero, r, &IndexList::empty(), &[self.lookup(CellId::new(Stage::Final, r - 1, 0, r))], self.tau).unwrap();
        self.steps[r as usize].first = self.fill(Stage::First, r, &g0);
        let g1 = self.lookup(CellId::new(Stage::First, r, 1, r)).with(r);
        self.steps[r as usize].second = self.fill(Stage::Second, r, &g1);
        let g2 = self.lookup(CellId::new(Stage::Second, r, 2, r)).with(r);
        self.steps[r as usize].fin = self.fill(Stage::Final, r, &g2);
        self.steps[r as usize].gens = vec![g0, g1, g2];
    }

    /// Every defined Hamiltonian list of steps ≥ 1 with its cell id.
    pub fn hamiltonian_lists(&self) -> impl Iterator<Item = (CellId, &IndexList)> + '_ {
        self.steps.iter().enumerate().skip(1).flat_map(move |(r, st)| {
            [(Stage::First, &st.first), (Stage::Second, &st.second), (Stage::Final, &st.fin)].into_iter().flat_map(move |(stage, tab)| {
                tab.iter().enumerate().flat_map(move |(ell, row)| {
                    row.iter().enumerate().filter_map(move |(s, v)| v.as_ref().map(|l| (CellId::new(stage, r as u32, ell as u32, s as u32), l)))
                })
            })
        })
    }
}
