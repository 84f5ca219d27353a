//! Maximum-likelihood distributions over the unit inventory.

use thiserror::Error;

use crate::corpus::UnitObservationBag;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistributionError {
    #[error("category {0:?} has no observations")]
    EmptyCategory(String),
    #[error("inconsistent unit inventories: {expected} vs {found}")]
    InconsistentInventory { expected: usize, found: usize },
}

/// Empirical distribution of one phonetic category over `omega_size` units.
#[derive(Debug, Clone, PartialEq)]
pub struct PhoneticDistribution<T> {
    pub category: String,
    pub probs: Vec<T>,
    pub support_size: usize,
    pub total_observations: u64,
}

impl<T: Scalar> PhoneticDistribution<T> {
    /// MLE estimate: `probs[i] = counts[i] / total`, no smoothing.
    pub fn estimate(bag: &UnitObservationBag) -> Result<Self, DistributionError> {
        if bag.total == 0 {
            return Err(DistributionError::EmptyCategory(bag.category.clone()));
        }
        let total = T::from_count(bag.total);
        let probs: Vec<T> = bag
            .counts
            .iter()
            .map(|&c| T::from_count(c) / total)
            .collect();
        let support_size = bag.counts.iter().filter(|&&c| c > 0).count();
        Ok(Self {
            category: bag.category.clone(),
            probs,
            support_size,
            total_observations: bag.total,
        })
    }

    /// Builds a distribution from probabilities that already sum to one.
    /// `total_observations` is left at zero.
    pub fn from_probs(category: impl Into<String>, probs: Vec<T>) -> Self {
        let support_size = probs.iter().filter(|p| **p > T::zero()).count();
        Self {
            category: category.into(),
            probs,
            support_size,
            total_observations: 0,
        }
    }

    pub fn omega_size(&self) -> usize {
        self.probs.len()
    }
}

/// Free-function form of [`PhoneticDistribution::estimate`].
pub fn estimate<T: Scalar>(
    bag: &UnitObservationBag,
) -> Result<PhoneticDistribution<T>, DistributionError> {
    PhoneticDistribution::estimate(bag)
}

pub(crate) fn check_inventory<T>(
    dists: &[PhoneticDistribution<T>],
) -> Result<usize, DistributionError> {
    let Some(first) = dists.first() else {
        return Ok(0);
    };
    let expected = first.probs.len();
    match dists.iter().find(|d| d.probs.len() != expected) {
        Some(d) => Err(DistributionError::InconsistentInventory {
            expected,
            found: d.probs.len(),
        }),
        None => Ok(expected),
    }
}

/// Fraction of the inventory with non-zero probability under at least one
/// distribution.
pub fn utilization<T: Scalar>(dists: &[PhoneticDistribution<T>]) -> Result<f64, DistributionError> {
    let omega = check_inventory(dists)?;
    if omega == 0 {
        return Ok(0.0);
    }
    let used = (0..omega)
        .filter(|&i| dists.iter().any(|d| d.probs[i] > T::zero()))
        .count();
    Ok(used as f64 / omega as f64)
}
