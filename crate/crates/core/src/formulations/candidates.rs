use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::Bundle;

/// Ordered, duplicate-free list of bundles with the empty bundle at index 0.
///
/// Pruning strategies also record which segments produced each bundle and,
/// for progressive pruning, the nested prefix chain of every segment.
#[derive(Clone, Debug, Default)]
pub struct CandidateSet {
    bundles: Vec<Bundle>,
    index: HashMap<Bundle, usize>,
    origins: Vec<Vec<usize>>,
    chains: Vec<Vec<usize>>,
}

impl PartialEq for CandidateSet {
    fn eq(&self, other: &Self) -> bool {
        self.bundles == other.bundles
            && self.origins == other.origins
            && self.chains == other.chains
    }
}

impl CandidateSet {
    /// Only the empty bundle.
    pub fn empty_only() -> Self {
        let mut set = CandidateSet::default();
        set.insert(Bundle::EMPTY);
        set
    }

    pub fn from_bundles<I: IntoIterator<Item = Bundle>>(bundles: I) -> Self {
        let mut set = CandidateSet::empty_only();
        for b in bundles {
            set.insert(b);
        }
        set
    }

    /// Every subset of `n` products, in mask order.
    pub fn full(n: usize) -> Self {
        CandidateSet::from_bundles(Bundle::all(n))
    }

    /// Adds `b` if absent and returns its position.
    pub fn insert(&mut self, b: Bundle) -> usize {
        if let Some(&i) = self.index.get(&b) {
            return i;
        }
        let i = self.bundles.len();
        self.bundles.push(b);
        self.index.insert(b, i);
        self.origins.push(Vec::new());
        i
    }

    /// Adds `b` and tags it as produced by `segment`'s pruning.
    pub fn insert_from(&mut self, b: Bundle, segment: usize) -> usize {
        let i = self.insert(b);
        if !self.origins[i].contains(&segment) {
            self.origins[i].push(segment);
        }
        i
    }

    /// Records the nested chain of `segment`. Each bundle must be a strict
    /// superset of its predecessor.
    pub fn set_chain(&mut self, segment: usize, chain: &[Bundle]) -> Result<()> {
        for pair in chain.windows(2) {
            if !(pair[0].is_subset(pair[1]) && pair[0] != pair[1]) {
                return Err(Error::arg(format!(
                    "chain of segment {segment} is not strictly nested at {} -> {}",
                    pair[0], pair[1]
                )));
            }
        }
        let positions: Vec<usize> = chain
            .iter()
            .map(|&b| self.insert_from(b, segment))
            .collect();
        if self.chains.len() <= segment {
            self.chains.resize(segment + 1, Vec::new());
        }
        self.chains[segment] = positions;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    /// Always false; the empty bundle is always present.
    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn get(&self, i: usize) -> Bundle {
        self.bundles[i]
    }

    pub fn position(&self, b: Bundle) -> Option<usize> {
        self.index.get(&b).copied()
    }

    pub fn contains(&self, b: Bundle) -> bool {
        self.index.contains_key(&b)
    }

    pub fn origins(&self, i: usize) -> &[usize] {
        &self.origins[i]
    }

    /// Per-segment chains as candidate positions; empty unless built by PCP.
    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Bundle)> + '_ {
        self.bundles.iter().copied().enumerate()
    }

    /// Largest product index referenced plus one.
    pub fn span(&self) -> usize {
        self.bundles.iter().map(|b| b.span()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_bundle_first_and_dedup() {
        let a = Bundle::from_indices([0, 2]);
        let set = CandidateSet::from_bundles([a, Bundle::EMPTY, a, Bundle::singleton(1)]);
        assert_eq!(set.bundles(), &[Bundle::EMPTY, a, Bundle::singleton(1)]);
        assert_eq!(set.position(a), Some(1));
        assert_eq!(CandidateSet::full(3).len(), 8);
    }

    #[test]
    fn origins_accumulate_segments() {
        let mut set = CandidateSet::empty_only();
        let b = Bundle::singleton(0);
        set.insert_from(b, 2);
        set.insert_from(b, 0);
        set.insert_from(b, 2);
        assert_eq!(set.origins(1), &[2, 0]);
    }

    #[test]
    fn chains_must_nest_strictly() {
        let mut set = CandidateSet::empty_only();
        let chain = [Bundle::singleton(1), Bundle::from_indices([0, 1])];
        set.set_chain(1, &chain).unwrap();
        assert_eq!(set.chains()[1], vec![1, 2]);
        assert!(set.chains()[0].is_empty());
        let bad = [Bundle::singleton(1), Bundle::singleton(1)];
        assert!(set.set_chain(0, &bad).is_err());
    }
}
