//! Per-category bags of discrete units.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::align::FrameAssignment;
use super::units::UnitSequence;

/// Unit counts observed under one category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitObservationBag {
    pub category: String,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl UnitObservationBag {
    pub fn new(category: impl Into<String>, omega_size: usize) -> Self {
        Self {
            category: category.into(),
            counts: vec![0; omega_size],
            total: 0,
        }
    }

    pub fn from_counts(category: impl Into<String>, counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self {
            category: category.into(),
            counts,
            total,
        }
    }

    #[inline]
    pub fn observe(&mut self, unit: usize) {
        self.counts[unit] += 1;
        self.total += 1;
    }

    pub fn omega_size(&self) -> usize {
        self.counts.len()
    }

    /// `(unit_id, count)` for every unit with a non-zero count, in unit order.
    pub fn sparse(&self) -> Vec<(usize, u64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c))
            .collect()
    }

    fn absorb(&mut self, other: &UnitObservationBag) {
        assert_eq!(
            self.counts.len(),
            other.counts.len(),
            "bag inventories differ"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }
}

/// Bags keyed by category over a shared unit inventory. Forms a commutative
/// monoid under [`BagSet::merge`], so per-utterance partial results can be
/// combined in any order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagSet {
    omega_size: usize,
    bags: BTreeMap<String, UnitObservationBag>,
}

impl BagSet {
    pub fn new(omega_size: usize) -> Self {
        Self {
            omega_size,
            bags: BTreeMap::new(),
        }
    }

    pub fn omega_size(&self) -> usize {
        self.omega_size
    }

    pub fn get(&self, category: &str) -> Option<&UnitObservationBag> {
        self.bags.get(category)
    }

    /// Bags in category order.
    pub fn iter(&self) -> impl Iterator<Item = &UnitObservationBag> {
        self.bags.values()
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn total_observations(&self) -> u64 {
        self.bags.values().map(|b| b.total).sum()
    }

    pub fn insert(&mut self, bag: UnitObservationBag) {
        assert_eq!(
            bag.omega_size(),
            self.omega_size,
            "bag inventory differs from set"
        );
        match self.bags.get_mut(&bag.category) {
            Some(existing) => existing.absorb(&bag),
            None => {
                self.bags.insert(bag.category.clone(), bag);
            }
        }
    }

    /// Adds one observation per codebook group for every assigned frame.
    ///
    /// Panics if `units` has a different inventory size than the set, or if a
    /// frame index is out of range.
    pub fn accumulate(&mut self, assignments: &[FrameAssignment<'_>], units: &UnitSequence) {
        assert_eq!(
            units.omega_size(),
            self.omega_size,
            "unit inventory differs from set"
        );
        for a in assignments {
            let frame = &units.frames[a.frame];
            let bag = match self.bags.get_mut(a.category) {
                Some(b) => b,
                None => self
                    .bags
                    .entry(a.category.to_string())
                    .or_insert_with(|| UnitObservationBag::new(a.category, self.omega_size)),
            };
            for (group, &local) in frame.iter().enumerate() {
                bag.observe(units.global_unit(group, local));
            }
        }
    }

    pub fn merge(mut self, other: BagSet) -> BagSet {
        for bag in other.bags.into_values() {
            self.insert(bag);
        }
        self
    }

    pub fn into_bags(self) -> Vec<UnitObservationBag> {
        self.bags.into_values().collect()
    }
}

/// Free-function form of [`BagSet::accumulate`].
pub fn accumulate_bags(
    assignments: &[FrameAssignment<'_>],
    units: &UnitSequence,
    bags: &mut BagSet,
) {
    bags.accumulate(assignments, units);
}
