//! Truncated log-likelihood ratio vectors and the bounded selection sorter
//! shared by the check and variable nodes.
//!
//! Messages live in the penalty domain: 0 marks the most likely symbol and
//! larger values are less likely. Keeping the `n_m` smallest penalties is
//! the same as keeping the `n_m` highest probabilities.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::gf::Symbol;
use crate::Error;

/// Penalties are never NaN; `-0.0` and `0.0` compare equal.
#[inline]
pub(crate) fn cmp_penalty(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// One `(penalty, symbol)` pair of a message.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Entry {
    pub penalty: f64,
    pub symbol: Symbol,
}

impl Entry {
    pub const fn new(penalty: f64, symbol: Symbol) -> Entry {
        Entry { penalty, symbol }
    }

    /// The pinned order: smaller penalty first, then smaller symbol.
    #[inline]
    pub fn key_cmp(&self, other: &Entry) -> Ordering {
        cmp_penalty(self.penalty, other.penalty).then(self.symbol.cmp(&other.symbol))
    }

    #[inline]
    fn precedes(&self, other: &Entry) -> bool {
        self.key_cmp(other) == Ordering::Less
    }
}

/// Sorted, truncated message: distinct symbols, penalties nondecreasing
/// with ties by ascending symbol, first penalty 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Llrv {
    entries: Vec<Entry>,
}

impl Llrv {
    /// Validates `entries` against every message invariant.
    pub fn new(entries: Vec<Entry>) -> Result<Llrv, Error> {
        let v = Llrv { entries };
        v.validate()?;
        Ok(v)
    }

    /// Sorts, normalizes and truncates arbitrary candidates. Symbols must be
    /// distinct.
    pub fn from_candidates(mut entries: Vec<Entry>, n_m: usize) -> Result<Llrv, Error> {
        entries.sort_unstable_by(Entry::key_cmp);
        entries.truncate(n_m);
        let v = Llrv::normalized(entries);
        v.validate()?;
        Ok(v)
    }

    /// Builds from entries that are already sorted and distinct, subtracting
    /// the first penalty from all of them.
    pub(crate) fn normalized(mut entries: Vec<Entry>) -> Llrv {
        if let Some(best) = entries.first().map(|e| e.penalty) {
            if best != 0.0 {
                for e in &mut entries {
                    e.penalty -= best;
                }
            }
        }
        Llrv { entries }
    }

    pub(crate) fn from_sorted_unchecked(entries: Vec<Entry>) -> Llrv {
        Llrv { entries }
    }

    /// The neutral element of check-node combination: symbol 0 for certain.
    pub fn identity() -> Llrv {
        Llrv {
            entries: alloc::vec![Entry::new(0.0, 0)],
        }
    }

    /// Message naming a single certain symbol.
    pub fn certain(symbol: Symbol) -> Llrv {
        Llrv {
            entries: alloc::vec![Entry::new(0.0, symbol)],
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Entry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Entry {
        self.entries[0]
    }

    pub fn worst_penalty(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.penalty)
    }

    pub fn penalty_of(&self, symbol: Symbol) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.symbol == symbol)
            .map(|e| e.penalty)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.entries.iter().map(|e| e.symbol)
    }

    /// Checks sortedness, distinct symbols, zero anchoring and that no
    /// penalty is negative or NaN.
    pub fn validate(&self) -> Result<(), Error> {
        let Some(first) = self.entries.first() else {
            return Err(Error::InvalidMessage("empty message"));
        };
        if first.penalty != 0.0 {
            return Err(Error::InvalidMessage("first penalty is not 0"));
        }
        let mut seen = [false; 256];
        for (k, e) in self.entries.iter().enumerate() {
            if e.penalty.is_nan() || e.penalty < 0.0 {
                return Err(Error::InvalidMessage("negative or NaN penalty"));
            }
            if core::mem::replace(&mut seen[e.symbol as usize], true) {
                return Err(Error::InvalidMessage("repeated symbol"));
            }
            if k > 0 && !self.entries[k - 1].precedes(e) {
                return Err(Error::InvalidMessage("entries out of order"));
            }
        }
        Ok(())
    }
}

/// Fixed-capacity sorter that keeps the best `cap` distinct symbols seen so
/// far, with a keyed update when a symbol reappears with a better penalty.
///
/// Feeding a whole candidate stream leaves exactly the `cap` best symbols by
/// minimum penalty, whatever the arrival order.
#[derive(Debug)]
pub(crate) struct BoundedSorter {
    cap: usize,
    slots: Vec<Entry>,
}

impl BoundedSorter {
    pub fn new(cap: usize) -> BoundedSorter {
        BoundedSorter {
            cap,
            slots: Vec::with_capacity(cap),
        }
    }

    pub fn reset(&mut self, cap: usize) {
        self.cap = cap;
        self.slots.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Whether a candidate with this score could still enter. When this is
    /// false, every candidate with a score at least this large is rejected.
    #[inline]
    pub fn admits(&self, score: f64) -> bool {
        self.slots.len() < self.cap
            || self
                .slots
                .last()
                .is_some_and(|w| cmp_penalty(score, w.penalty) != Ordering::Greater)
    }

    pub fn offer(&mut self, cand: Entry) {
        if let Some(pos) = self.slots.iter().position(|e| e.symbol == cand.symbol) {
            if cand.precedes(&self.slots[pos]) {
                self.slots.remove(pos);
                self.insert_sorted(cand);
            }
            return;
        }
        if self.slots.len() < self.cap {
            self.insert_sorted(cand);
        } else if self.slots.last().is_some_and(|w| cand.precedes(w)) {
            self.slots.pop();
            self.insert_sorted(cand);
        }
    }

    fn insert_sorted(&mut self, cand: Entry) {
        let at = self.slots.partition_point(|e| e.precedes(&cand));
        self.slots.insert(at, cand);
    }

    pub fn drain_into(&mut self, out: &mut Vec<Entry>) {
        out.append(&mut self.slots);
    }
}

/// Symbol set over GF(q <= 256).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SymbolSet([u64; 4]);

impl SymbolSet {
    #[inline]
    pub fn insert(&mut self, s: Symbol) {
        self.0[(s >> 6) as usize] |= 1 << (s & 63);
    }

    #[inline]
    pub fn contains(&self, s: Symbol) -> bool {
        self.0[(s >> 6) as usize] & (1 << (s & 63)) != 0
    }
}
