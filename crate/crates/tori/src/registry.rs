//! Named registries of interchangeable strategies.

use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Maps names to shared strategy objects.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Arc<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry { kind, entries: BTreeMap::new() }
    }

    pub fn register(&mut self, name: &str, item: Arc<T>) -> &mut Self {
        self.entries.insert(name.to_string(), item);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::Unknown { kind: self.kind, name: name.to_string() })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
