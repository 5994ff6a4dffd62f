//! Indexed set of small integer keys with O(1) insert, remove and uniform
//! sampling. Backs the rejection-free scheduler.

use crate::rng::RngStream;

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct IndexedSet {
    items: Vec<u32>,
    slot: Vec<u32>,
}

impl IndexedSet {
    /// Empty set over keys `0..capacity`.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity < ABSENT as usize, "key space too large");
        Self { items: Vec::new(), slot: vec![ABSENT; capacity] }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, key: usize) -> bool {
        self.slot[key] != ABSENT
    }

    /// Returns false if already present.
    #[inline]
    pub fn insert(&mut self, key: usize) -> bool {
        if self.contains(key) {
            return false;
        }
        self.slot[key] = self.items.len() as u32;
        self.items.push(key as u32);
        true
    }

    /// Returns false if absent. Moves the last element into the hole.
    #[inline]
    pub fn remove(&mut self, key: usize) -> bool {
        let pos = self.slot[key];
        if pos == ABSENT {
            return false;
        }
        let last = self.items.pop().expect("non-empty");
        if last as usize != key {
            self.items[pos as usize] = last;
            self.slot[last as usize] = pos;
        }
        self.slot[key] = ABSENT;
        true
    }

    #[inline]
    pub fn set(&mut self, key: usize, present: bool) {
        if present {
            self.insert(key);
        } else {
            self.remove(key);
        }
    }

    /// Uniform element; one draw. `None` when empty (no draw consumed).
    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> Option<usize> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.below(self.items.len() as u64) as usize] as usize)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().map(|&k| k as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn sample_is_uniform() {
        let mut s = IndexedSet::new(10);
        for k in [1, 3, 5, 7] {
            s.insert(k);
        }
        s.remove(3);
        let mut rng = RngStream::new(3);
        let mut hits = [0usize; 10];
        for _ in 0..30_000 {
            hits[s.sample(&mut rng).unwrap()] += 1;
        }
        assert_eq!(hits[3], 0);
        for k in [1, 5, 7] {
            // expected 10_000, sd ≈ 82
            assert!((hits[k] as i64 - 10_000).abs() < 400, "{hits:?}");
        }
    }

    #[test]
    fn empty_sample_consumes_nothing() {
        let s = IndexedSet::new(4);
        let mut rng = RngStream::new(0);
        assert_eq!(s.sample(&mut rng), None);
        assert_eq!(rng.draws(), 0);
    }

    proptest! {
        #[test]
        fn matches_btreeset(ops in proptest::collection::vec((0usize..64, any::<bool>()), 0..400)) {
            let mut s = IndexedSet::new(64);
            let mut model = BTreeSet::new();
            for (k, ins) in ops {
                if ins {
                    prop_assert_eq!(s.insert(k), model.insert(k));
                } else {
                    prop_assert_eq!(s.remove(k), model.remove(&k));
                }
                prop_assert_eq!(s.len(), model.len());
            }
            let got: BTreeSet<usize> = s.iter().collect();
            prop_assert_eq!(got, model.clone());
            for k in 0..64 {
                prop_assert_eq!(s.contains(k), model.contains(&k));
            }
        }
    }
}
