use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Predicate;

/// Per-view predicates combined under cross-filter semantics: each view is filtered
/// by every entry except its own.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionContext {
    entries: BTreeMap<String, Predicate>,
}

impl SelectionContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets or replaces the predicate owned by `view`.
    pub fn set(&mut self, view: impl Into<String>, predicate: Predicate) {
        self.entries.insert(view.into(), predicate);
    }

    pub fn clear(&mut self, view: &str) -> Option<Predicate> {
        self.entries.remove(view)
    }

    pub fn clear_all(&mut self) {
        self.entries.clear();
    }

    pub fn get(&self, view: &str) -> Option<&Predicate> {
        self.entries.get(view)
    }

    pub fn entries(&self) -> &BTreeMap<String, Predicate> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Conjunction of all entries not owned by `target` (all entries when `target` is
    /// `None`). A single remaining entry is returned as-is; none yields match-all.
    pub fn resolve(&self, target: Option<&str>) -> Predicate {
        let mut of: Vec<Predicate> = self
            .entries
            .iter()
            .filter(|(view, _)| Some(view.as_str()) != target)
            .map(|(_, p)| p.clone())
            .collect();
        if of.len() == 1 {
            of.pop().expect("one element")
        } else {
            Predicate::And { of }
        }
    }
}
