use crate::registry::Registry;
use crate::{Error, Result};
use std::sync::Arc;

/// A homological divisor k·ω + (l − l̄)·Ω about to be divided by.
#[derive(Clone, Debug)]
pub struct Divisor<'a> {
    pub step: usize,
    pub k: &'a [i32],
    pub l: &'a [i32],
    pub value: f64,
}

/// Fixed thresholds of a step.
#[derive(Clone, Copy, Debug)]
pub struct Floors {
    /// Below this the divisor is treated as an exact resonance.
    pub hard: f64,
    /// γ/(rK)^τ, for k ≠ 0.
    pub diophantine: f64,
    /// γ, for k = 0.
    pub transverse: f64,
}

impl Floors {
    pub fn for_divisor(&self, d: &Divisor) -> f64 {
        if d.k.iter().all(|&x| x == 0) {
            self.transverse
        } else {
            self.diophantine
        }
    }
}

/// Decides whether a divisor may be used.
pub trait DivisorPolicy: Send + Sync {
    fn name(&self) -> &'static str;
    fn admit(&self, d: &Divisor, floors: &Floors) -> Result<()>;
}

fn hard_check(d: &Divisor, floors: &Floors) -> Result<()> {
    if d.value.abs() < floors.hard {
        return Err(Error::ZeroDivisor { step: d.step, k: d.k.to_vec(), l: d.l.to_vec(), value: d.value });
    }
    Ok(())
}

/// Enforces the non-resonance floors of the theorem.
pub struct Strict;

impl DivisorPolicy for Strict {
    fn name(&self) -> &'static str {
        "strict"
    }

    fn admit(&self, d: &Divisor, floors: &Floors) -> Result<()> {
        hard_check(d, floors)?;
        let floor = floors.for_divisor(d);
        if d.value.abs() < floor {
            return Err(Error::Resonance { step: d.step, k: d.k.to_vec(), l: d.l.to_vec(), value: d.value, floor });
        }
        Ok(())
    }
}

/// Accepts any divisor above the hard floor; margins are only reported.
pub struct Exploratory;

impl DivisorPolicy for Exploratory {
    fn name(&self) -> &'static str {
        "exploratory"
    }

    fn admit(&self, d: &Divisor, floors: &Floors) -> Result<()> {
        hard_check(d, floors)
    }
}

pub fn divisor_policies() -> Registry<dyn DivisorPolicy> {
    let mut reg: Registry<dyn DivisorPolicy> = Registry::new("divisor policy");
    reg.register("strict", Arc::new(Strict)).register("exploratory", Arc::new(Exploratory));
    reg
}
