//! Fixed-capacity bit sets used for object sets and covering-index sets.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::marker::PhantomData;

const WORD: usize = 64;

/// Marker for sets of object ids (members of the universe).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Objects;

/// Marker for sets of covering indices (attributes).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coverings;

/// A bit set over `0..capacity`, tagged with what its members index.
pub struct BitSet<K> {
    capacity: usize,
    words: Vec<u64>,
    _kind: PhantomData<K>,
}

impl<K> Clone for BitSet<K> {
    fn clone(&self) -> Self {
        BitSet {
            capacity: self.capacity,
            words: self.words.clone(),
            _kind: PhantomData,
        }
    }
}

impl<K> PartialEq for BitSet<K> {
    fn eq(&self, other: &Self) -> bool {
        self.capacity == other.capacity && self.words == other.words
    }
}

impl<K> Eq for BitSet<K> {}

impl<K> Hash for BitSet<K> {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.capacity.hash(state);
        self.words.hash(state);
    }
}

/// Set of objects of a universe `0..n`.
pub type ObjectSet = BitSet<Objects>;

/// Set of covering indices `0..m`.
pub type CoveringIndexSet = BitSet<Coverings>;

fn words_for(capacity: usize) -> usize {
    capacity.div_ceil(WORD)
}

impl<K> BitSet<K> {
    pub fn empty(capacity: usize) -> Self {
        BitSet {
            capacity,
            words: vec![0; words_for(capacity)],
            _kind: PhantomData,
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::empty(capacity);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.trim();
        s
    }

    /// Builds a set from member ids; returns the first out-of-range id on failure.
    pub fn try_from_iter<I: IntoIterator<Item = usize>>(
        capacity: usize,
        items: I,
    ) -> Result<Self, usize> {
        let mut s = Self::empty(capacity);
        for i in items {
            if i >= capacity {
                return Err(i);
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Panics if any id is out of range.
    pub fn from_iter_checked<I: IntoIterator<Item = usize>>(capacity: usize, items: I) -> Self {
        Self::try_from_iter(capacity, items)
            .unwrap_or_else(|i| panic!("id {i} out of range for capacity {capacity}"))
    }

    /// The set `{i}`.
    pub fn singleton(capacity: usize, i: usize) -> Self {
        let mut s = Self::empty(capacity);
        s.insert(i);
        s
    }

    fn trim(&mut self) {
        let rem = self.capacity % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.capacity, "id {i} out of range for capacity {}", self.capacity);
        let (w, b) = (i / WORD, i % WORD);
        let was = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !was
    }

    pub fn remove(&mut self, i: usize) -> bool {
        if i >= self.capacity {
            return false;
        }
        let (w, b) = (i / WORD, i % WORD);
        let was = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        was
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.capacity && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert_eq!(self.capacity, other.capacity);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_proper_subset(&self, other: &Self) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn intersects(&self, other: &Self) -> bool {
        debug_assert_eq!(self.capacity, other.capacity);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Self) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &Self) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    /// Complement relative to `0..capacity`.
    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        for w in s.words.iter_mut() {
            *w = !*w;
        }
        s.trim();
        s
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a, K> IntoIterator for &'a BitSet<K> {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

/// Orders by sorted member list, so `{0,1} < {0,2} < {1}`.
impl<K> Ord for BitSet<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter()
            .cmp(other.iter())
            .then(self.capacity.cmp(&other.capacity))
    }
}

impl<K> PartialOrd for BitSet<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K> fmt::Debug for BitSet<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
