//! Finite multisets with exact arithmetic.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;

use thiserror::Error;

/// Removing more copies than a multiset holds.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("multiset underflow: wanted {wanted} copies, found {available}")]
pub struct Underflow {
    pub wanted: u64,
    pub available: u64,
}

/// A multiset over `T`. Stored multiplicities are always strictly positive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset<T: Ord> {
    counts: BTreeMap<T, u64>,
}

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Multiset {
            counts: BTreeMap::new(),
        }
    }
}

impl<T: Ord> Multiset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(item: T) -> Self {
        let mut m = Self::new();
        m.insert(item, 1);
        m
    }

    pub fn insert(&mut self, item: T, count: u64) {
        if count > 0 {
            *self.counts.entry(item).or_insert(0) += count;
        }
    }

    /// Removes `count` copies of `item`. Fails without modifying `self` when
    /// fewer copies are present.
    pub fn remove(&mut self, item: &T, count: u64) -> Result<(), Underflow>
    where
        T: Clone,
    {
        if count == 0 {
            return Ok(());
        }
        let available = self.count(item);
        if available < count {
            return Err(Underflow {
                wanted: count,
                available,
            });
        }
        if available == count {
            self.counts.remove(item);
        } else {
            *self.counts.get_mut(item).expect("present") -= count;
        }
        Ok(())
    }

    pub fn count(&self, item: &T) -> u64 {
        self.counts.get(item).copied().unwrap_or(0)
    }

    pub fn contains(&self, item: &T) -> bool {
        self.counts.contains_key(item)
    }

    /// Total number of elements, counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of distinct elements.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, T, u64> {
        self.counts.iter()
    }

    pub fn union_with(&mut self, other: &Multiset<T>)
    where
        T: Clone,
    {
        for (item, &count) in other.iter() {
            self.insert(item.clone(), count);
        }
    }

    pub fn union(mut self, other: &Multiset<T>) -> Self
    where
        T: Clone,
    {
        self.union_with(other);
        self
    }

    /// `self - other`, failing if `other` is not contained in `self`.
    pub fn difference(&self, other: &Multiset<T>) -> Result<Self, Underflow>
    where
        T: Clone,
    {
        let mut out = self.clone();
        for (item, &count) in other.iter() {
            out.remove(item, count)?;
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &Multiset<T>) -> bool {
        self.iter().all(|(item, &c)| other.count(item) >= c)
    }

    /// Applies `f` to every element, merging elements that collide.
    pub fn map<U: Ord>(&self, mut f: impl FnMut(&T) -> U) -> Multiset<U> {
        let mut out = Multiset::new();
        for (item, &count) in self.iter() {
            out.insert(f(item), count);
        }
        out
    }
}

impl<T: Ord> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for item in iter {
            m.insert(item, 1);
        }
        m
    }
}

impl<T: Ord> FromIterator<(T, u64)> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = (T, u64)>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for (item, count) in iter {
            m.insert(item, count);
        }
        m
    }
}

impl<'a, T: Ord> IntoIterator for &'a Multiset<T> {
    type Item = (&'a T, &'a u64);
    type IntoIter = btree_map::Iter<'a, T, u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl<T: Ord + fmt::Debug> fmt::Debug for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.counts.iter()).finish()
    }
}
