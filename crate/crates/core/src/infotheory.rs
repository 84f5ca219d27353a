//! Surprisal, entropy and divergences of phonetic distributions.
//!
//! All logarithms are base 2, so every quantity is in bits and the
//! Jensen-Shannon divergence lies in `[0, 1]`. Zero-probability terms are
//! skipped (the `0 · log 0 = 0` convention); nothing is floored with an
//! epsilon.

use rayon::prelude::*;
use thiserror::Error;

use crate::distribution::PhoneticDistribution;
use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InfoError {
    #[error("unit {unit} outside inventory of size {omega_size}")]
    UnitOutOfRange { unit: usize, omega_size: usize },
    #[error("inventory of size {0} is too small to normalize entropy")]
    DegenerateInventory(usize),
    #[error("inconsistent unit inventories: {left} vs {right}")]
    InconsistentInventory { left: usize, right: usize },
    #[error("need at least 2 distributions, got {0}")]
    TooFewDistributions(usize),
}

fn same_inventory<T>(p: &[T], q: &[T]) -> Result<(), InfoError> {
    if p.len() == q.len() {
        Ok(())
    } else {
        Err(InfoError::InconsistentInventory {
            left: p.len(),
            right: q.len(),
        })
    }
}

/// `-log2 p(unit)`; `+inf` for a zero-probability unit.
pub fn surprisal<T: Scalar>(dist: &PhoneticDistribution<T>, unit: usize) -> Result<T, InfoError> {
    let p = dist.probs.get(unit).ok_or(InfoError::UnitOutOfRange {
        unit,
        omega_size: dist.omega_size(),
    })?;
    Ok(if *p > T::zero() {
        -p.log2()
    } else {
        T::infinity()
    })
}

/// Entropy in bits of a probability vector.
pub fn entropy_of<T: Scalar>(probs: &[T]) -> T {
    let mut h = T::zero();
    for &p in probs {
        if p > T::zero() {
            h = h - p * p.log2();
        }
    }
    h.max(T::zero())
}

pub fn entropy<T: Scalar>(dist: &PhoneticDistribution<T>) -> T {
    entropy_of(&dist.probs)
}

/// Entropy divided by its maximum, `log2 |Ω|`.
pub fn normalized_entropy<T: Scalar>(dist: &PhoneticDistribution<T>) -> Result<T, InfoError> {
    let omega = dist.omega_size();
    if omega < 2 {
        return Err(InfoError::DegenerateInventory(omega));
    }
    Ok(entropy(dist) / T::from_len(omega).log2())
}

/// `D_KL(p || q)` in bits; `+inf` when `p` puts mass where `q` has none.
pub fn kl_of<T: Scalar>(p: &[T], q: &[T]) -> Result<T, InfoError> {
    same_inventory(p, q)?;
    let mut d = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > T::zero() {
            if qi <= T::zero() {
                return Ok(T::infinity());
            }
            d = d + pi * (pi / qi).log2();
        }
    }
    Ok(d.max(T::zero()))
}

pub fn kl_divergence<T: Scalar>(
    p: &PhoneticDistribution<T>,
    q: &PhoneticDistribution<T>,
) -> Result<T, InfoError> {
    kl_of(&p.probs, &q.probs)
}

/// Jensen-Shannon divergence against the midpoint mixture `m = (p + q) / 2`.
pub fn js_of<T: Scalar>(p: &[T], q: &[T]) -> Result<T, InfoError> {
    same_inventory(p, q)?;
    let half = T::lit(0.5);
    let (mut dp, mut dq, mut mass_p, mut mass_q) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (&pi, &qi) in p.iter().zip(q) {
        let m = (pi + qi) * half;
        if pi > T::zero() {
            dp = dp + pi * (pi / m).log2();
            mass_p = mass_p + pi;
        }
        if qi > T::zero() {
            dq = dq + qi * (qi / m).log2();
            mass_q = mass_q + qi;
        }
    }
    // Estimated probabilities sum to 1 only up to rounding; dividing by the
    // accumulated mass keeps that residue out of the result, so disjoint
    // supports give exactly 1.
    let term = |d: T, mass: T| {
        if mass > T::zero() {
            d / mass
        } else {
            T::zero()
        }
    };
    let d = (term(dp, mass_p) + term(dq, mass_q)) * half;
    Ok(d.max(T::zero()).min(T::one()))
}

pub fn js_divergence<T: Scalar>(
    p: &PhoneticDistribution<T>,
    q: &PhoneticDistribution<T>,
) -> Result<T, InfoError> {
    js_of(&p.probs, &q.probs)
}

/// Pairwise JSD matrix, labelled by category in input order. Cells are
/// computed in parallel; every cell is an independent pure computation, so
/// the result does not depend on scheduling.
pub fn jsd_matrix<T: Scalar>(
    dists: &[PhoneticDistribution<T>],
) -> Result<DistanceMatrix<T>, InfoError> {
    if dists.len() < 2 {
        return Err(InfoError::TooFewDistributions(dists.len()));
    }
    for d in &dists[1..] {
        same_inventory(&dists[0].probs, &d.probs)?;
    }
    let n = dists.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let upper: Vec<T> = pairs
        .par_iter()
        .map(|&(i, j)| js_of(&dists[i].probs, &dists[j].probs).expect("inventories checked"))
        .collect();
    let labels = dists.iter().map(|d| d.category.clone()).collect();
    Ok(DistanceMatrix::from_upper(labels, &upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(probs: &[f64]) -> PhoneticDistribution<f64> {
        PhoneticDistribution::from_probs("d", probs.to_vec())
    }

    // Frozen from a direct Python evaluation of the defining sums.
    const H_HALF_QUARTER: f64 = 1.5;
    const KL_HALF_VS_QUARTER: f64 = 0.20751874963942185;
    const JS_DELTA_VS_HALF: f64 = 0.31127812445913283;
    const LOG2_640: f64 = 9.321928094887362;

    #[test]
    fn surprisal_values() {
        let d = dist(&[0.25, 0.75, 0.0]);
        assert_eq!(surprisal(&d, 0).unwrap(), 2.0);
        assert_eq!(surprisal(&dist(&[1.0]), 0).unwrap(), 0.0);
        assert_eq!(surprisal(&d, 2).unwrap(), f64::INFINITY);
        assert_eq!(
            surprisal(&d, 3),
            Err(InfoError::UnitOutOfRange {
                unit: 3,
                omega_size: 3
            })
        );
    }

    #[test]
    fn entropy_values() {
        let mut delta = vec![0.0; 640];
        delta[17] = 1.0;
        assert_eq!(entropy(&dist(&delta)), 0.0);
        let uniform = dist(&vec![1.0 / 640.0; 640]);
        assert!((entropy(&uniform) - LOG2_640).abs() < 1e-9);
        assert!((entropy(&dist(&[0.5, 0.25, 0.25, 0.0])) - H_HALF_QUARTER).abs() < 1e-15);
    }

    #[test]
    fn normalized_entropy_values() {
        let uniform = dist(&vec![1.0 / 640.0; 640]);
        assert!((normalized_entropy(&uniform).unwrap() - 1.0).abs() < 1e-12);
        let mut delta = vec![0.0; 640];
        delta[0] = 1.0;
        assert_eq!(normalized_entropy(&dist(&delta)).unwrap(), 0.0);
        assert_eq!(
            normalized_entropy(&dist(&[1.0])),
            Err(InfoError::DegenerateInventory(1))
        );
        // uniform over 16 of 256 units: H = 4 of a possible 8 bits
        let mut half = vec![0.0; 256];
        half[..16].fill(1.0 / 16.0);
        assert!((normalized_entropy(&dist(&half)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kl_values() {
        let p = dist(&[0.5, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let q = dist(&[0.25, 0.75]);
        assert!((kl_divergence(&p, &q).unwrap() - KL_HALF_VS_QUARTER).abs() < 1e-12);
        assert_eq!(
            kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            kl_divergence(&p, &dist(&[1.0])),
            Err(InfoError::InconsistentInventory { .. })
        ));
    }

    #[test]
    fn js_values() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(js_divergence(&p, &p).unwrap(), 0.0);
        assert_eq!(
            js_divergence(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(),
            1.0
        );
        let v = js_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap();
        assert!((v - JS_DELTA_VS_HALF).abs() < 1e-12);
    }

    #[test]
    fn js_in_single_precision() {
        let p = PhoneticDistribution::from_probs("p", vec![1.0f32, 0.0]);
        let q = PhoneticDistribution::from_probs("q", vec![0.5f32, 0.5]);
        assert!((js_divergence(&p, &q).unwrap() - JS_DELTA_VS_HALF as f32).abs() < 1e-6);
    }

    #[test]
    fn matrix_small_cases() {
        let a = dist(&[0.5, 0.5]);
        let m = jsd_matrix(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(m.upper_triangle(), vec![0.0]);
        let m = jsd_matrix(&[dist(&[1.0, 0.0]), dist(&[0.0, 1.0])]).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(jsd_matrix(&[a]), Err(InfoError::TooFewDistributions(1)));
    }

    #[test]
    fn matrix_matches_pairwise_brute_force() {
        // direct expansion with natural logs, converted to bits
        fn brute(p: &[f64], q: &[f64]) -> f64 {
            let mut s = 0.0;
            for i in 0..p.len() {
                let m = (p[i] + q[i]) / 2.0;
                if p[i] > 0.0 {
                    s += 0.5 * p[i] * (p[i] / m).ln();
                }
                if q[i] > 0.0 {
                    s += 0.5 * q[i] * (q[i] / m).ln();
                }
            }
            s / std::f64::consts::LN_2
        }
        let ps = [
            [0.1, 0.2, 0.3, 0.4],
            [0.0, 0.5, 0.5, 0.0],
            [0.7, 0.0, 0.1, 0.2],
        ];
        let dists: Vec<_> = ps
            .iter()
            .enumerate()
            .map(|(i, p)| PhoneticDistribution::from_probs(format!("c{i}"), p.to_vec()))
            .collect();
        let m = jsd_matrix(&dists).unwrap();
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                if i != j {
                    assert!((m.get(i, j) - brute(&ps[i], &ps[j])).abs() < 1e-12);
                }
            }
        }
        assert_eq!(m.labels(), &["c0", "c1", "c2"]);
    }
}
