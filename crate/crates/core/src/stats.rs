//! Pearson correlation between dissimilarity matrices and nearest-neighbour
//! queries.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;
use crate::special::student_t_two_tailed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation is undefined for a constant input")]
    ConstantInput,
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("matrices do not share labels: {0}")]
    LabelMismatch(String),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("k = {k} exceeds the {max} available neighbours")]
    KTooLarge { k: usize, max: usize },
    #[error("k must be positive")]
    ZeroK,
}

/// Which categories enter a correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subset {
    All,
    Vowels,
    Consonants,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::All, Subset::Vowels, Subset::Consonants];

    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::Vowels => "vowels",
            Subset::Consonants => "consonants",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subset::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown subset {s:?} (expected all, vowels or consonants)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult<T> {
    pub r: T,
    pub p_value: T,
    pub n_pairs: usize,
    pub subset: Subset,
}

/// Product-moment correlation with a two-tailed t-test p-value
/// (`t = r sqrt((n - 2) / (1 - r^2))`, `n - 2` degrees of freedom).
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationResult<T>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewPoints(n));
    }
    let nf = T::from_len(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(StatsError::ConstantInput);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt()))
        .max(-T::one())
        .min(T::one());
    let df = T::from_len(n - 2);
    let p_value = if r.abs() == T::one() {
        T::zero()
    } else {
        let t = r * (df / (T::one() - r * r)).sqrt();
        student_t_two_tailed(t, df)
    };
    Ok(CorrelationResult {
        r,
        p_value,
        n_pairs: n,
        subset: Subset::All,
    })
}

/// Pearson correlation over the strictly-upper-triangular entries of two
/// matrices, paired by label. With `subset = Some(labels)` only those
/// categories are used (in the given order); otherwise both matrices must
/// carry the same label set.
pub fn correlate_matrices<T: Scalar, S: AsRef<str>>(
    a: &DistanceMatrix<T>,
    b: &DistanceMatrix<T>,
    subset: Option<&[S]>,
) -> Result<CorrelationResult<T>, StatsError> {
    let labels: Vec<String> = match subset {
        Some(keep) => keep.iter().map(|s| s.as_ref().to_string()).collect(),
        None => {
            let la: BTreeSet<&String> = a.labels().iter().collect();
            let lb: BTreeSet<&String> = b.labels().iter().collect();
            if la != lb {
                let diff: Vec<&str> = la.symmetric_difference(&lb).map(|s| s.as_str()).collect();
                return Err(StatsError::LabelMismatch(diff.join(", ")));
            }
            a.labels().to_vec()
        }
    };
    if labels.len() < 3 {
        return Err(StatsError::TooFewPoints(labels.len()));
    }
    let restrict = |m: &DistanceMatrix<T>| {
        m.subset(&labels)
            .map_err(|e| StatsError::LabelMismatch(e.to_string()))
    };
    let xa = restrict(a)?.upper_triangle();
    let xb = restrict(b)?.upper_triangle();
    pearson(&xa, &xb)
}

/// The `k` categories closest to `category`, ascending by divergence, ties
/// broken alphabetically.
pub fn top_k_similar<T: Scalar>(
    matrix: &DistanceMatrix<T>,
    category: &str,
    k: usize,
) -> Result<Vec<(String, T)>, StatsError> {
    let q = matrix
        .index_of(category)
        .ok_or_else(|| StatsError::UnknownCategory(category.to_string()))?;
    if k == 0 {
        return Err(StatsError::ZeroK);
    }
    let max = matrix.len() - 1;
    if k > max {
        return Err(StatsError::KTooLarge { k, max });
    }
    let mut others: Vec<(String, T)> = (0..matrix.len())
        .filter(|&j| j != q)
        .map(|j| (matrix.labels()[j].clone(), matrix.get(q, j)))
        .collect();
    others.sort_by(|x, y| {
        x.1.partial_cmp(&y.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| x.0.cmp(&y.0))
    });
    others.truncate(k);
    Ok(others)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_correlations() {
        let r = pearson(&[1.0f64, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r.r - 1.0).abs() < 1e-15);
        assert!(r.p_value < 1e-6);
        let r = pearson(&[1.0f64, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
        assert!((r.r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn four_point_example() {
        // Sxy = 5.5, Sxx = 5, Syy = 8.75; frozen from scipy.stats.pearsonr
        let r = pearson(&[1.0f64, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 5.0]).unwrap();
        assert!((r.r - 0.8315218406202999).abs() < 1e-12);
        assert!((r.p_value - 0.1684781593797).abs() < 1e-10);
        assert_eq!(r.n_pairs, 4);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        );
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewPoints(2))
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantInput)
        );
    }

    fn sample() -> DistanceMatrix<f64> {
        DistanceMatrix::from_rows(
            labels(&["a", "b", "c", "d"]),
            vec![
                vec![0.0, 0.1, 0.9, 0.5],
                vec![0.1, 0.0, 0.4, 0.6],
                vec![0.9, 0.4, 0.0, 0.3],
                vec![0.5, 0.6, 0.3, 0.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn matrix_self_and_affine_correlation() {
        let a = sample();
        assert!((correlate_matrices::<_, &str>(&a, &a, None).unwrap().r - 1.0).abs() < 1e-12);
        let upper: Vec<f64> = a.upper_triangle().iter().map(|v| 3.0 * v + 2.0).collect();
        let b = DistanceMatrix::from_upper(a.labels().to_vec(), &upper);
        let r = correlate_matrices::<_, &str>(&a, &b, None).unwrap();
        assert!((r.r - 1.0).abs() < 1e-12);
        assert_eq!(r.n_pairs, 6);
    }

    #[test]
    fn matrix_correlation_pairs_by_label() {
        let a = sample();
        let reordered = a.subset(&["d", "c", "b", "a"]).unwrap();
        let r = correlate_matrices::<_, &str>(&a, &reordered, None).unwrap();
        assert!((r.r - 1.0).abs() < 1e-12);
        let sub = correlate_matrices(&a, &reordered, Some(&["a", "b", "c"])).unwrap();
        assert_eq!(sub.n_pairs, 3);
        assert!(matches!(
            correlate_matrices(&a, &a, Some(&["a", "b"])),
            Err(StatsError::TooFewPoints(2))
        ));
        let other = DistanceMatrix::from_rows(labels(&["a", "b", "c", "z"]), vec![vec![0.0; 4]; 4])
            .unwrap();
        assert!(matches!(
            correlate_matrices::<_, &str>(&a, &other, None),
            Err(StatsError::LabelMismatch(_))
        ));
    }

    #[test]
    fn nearest_neighbours() {
        let m = DistanceMatrix::from_rows(
            labels(&["a", "b", "c"]),
            vec![
                vec![0.0, 0.1, 0.9],
                vec![0.1, 0.0, 0.5],
                vec![0.9, 0.5, 0.0],
            ],
        )
        .unwrap();
        assert_eq!(
            top_k_similar(&m, "a", 1).unwrap(),
            vec![("b".to_string(), 0.1)]
        );
        assert_eq!(
            top_k_similar(&m, "c", 2).unwrap(),
            vec![("b".to_string(), 0.5), ("a".to_string(), 0.9)]
        );
        assert_eq!(
            top_k_similar(&m, "a", 3),
            Err(StatsError::KTooLarge { k: 3, max: 2 })
        );
        assert_eq!(top_k_similar(&m, "a", 0), Err(StatsError::ZeroK));
        assert!(matches!(
            top_k_similar(&m, "q", 1),
            Err(StatsError::UnknownCategory(_))
        ));
    }

    #[test]
    fn nearest_ties_break_alphabetically() {
        let m = DistanceMatrix::from_rows(
            labels(&["q", "z", "y"]),
            vec![
                vec![0.0, 0.2, 0.2],
                vec![0.2, 0.0, 0.1],
                vec![0.2, 0.1, 0.0],
            ],
        )
        .unwrap();
        let got: Vec<String> = top_k_similar(&m, "q", 2)
            .unwrap()
            .into_iter()
            .map(|x| x.0)
            .collect();
        assert_eq!(got, vec!["y", "z"]);
    }
}
