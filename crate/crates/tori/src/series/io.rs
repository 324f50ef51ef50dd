use super::{MonomialKey, PoissonSeries};
use crate::ledger::IndexList;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    pub m: Vec<u16>,
    pub l: Vec<u16>,
    pub lbar: Vec<u16>,
    pub k: Vec<i32>,
    pub re: f64,
    pub im: f64,
}

/// On-disk form of a series; entries are written in canonical key order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub n1: usize,
    pub n2: usize,
    pub trig_cutoff: u32,
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "IndexList::is_empty")]
    pub ledger: IndexList,
}

impl From<&PoissonSeries> for SeriesDoc {
    fn from(s: &PoissonSeries) -> Self {
        SeriesDoc {
            n1: s.n1(),
            n2: s.n2(),
            trig_cutoff: s.trig_cutoff(),
            entries: s
                .terms()
                .iter()
                .map(|(k, c)| Entry { m: k.m.to_vec(), l: k.l.to_vec(), lbar: k.lbar.to_vec(), k: k.k.to_vec(), re: c.re, im: c.im })
                .collect(),
            ledger: s.ledger().clone(),
        }
    }
}

impl TryFrom<SeriesDoc> for PoissonSeries {
    type Error = Error;

    fn try_from(doc: SeriesDoc) -> Result<Self> {
        let mut terms = Vec::with_capacity(doc.entries.len());
        for e in doc.entries {
            if e.m.len() != doc.n1 || e.k.len() != doc.n1 || e.l.len() != doc.n2 || e.lbar.len() != doc.n2 {
                return Err(Error::Model(format!("entry dimensions do not match n1 = {}, n2 = {}", doc.n1, doc.n2)));
            }
            let key = MonomialKey::new(&e.m, &e.l, &e.lbar, &e.k);
            if key.harmonic() > doc.trig_cutoff {
                return Err(Error::Model(format!("harmonic {:?} exceeds trig_cutoff {}", e.k, doc.trig_cutoff)));
            }
            terms.push((key, Complex64::new(e.re, e.im)));
        }
        Ok(PoissonSeries::from_terms(doc.n1, doc.n2, terms).with_cutoff(doc.trig_cutoff).with_ledger(doc.ledger))
    }
}

impl PoissonSeries {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SeriesDoc::from(self)).expect("series serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SeriesDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}
