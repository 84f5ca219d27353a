//! Labelled square dissimilarity matrices.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix has {rows} rows but {labels} labels")]
    Shape { rows: usize, labels: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    labels: Vec<String>,
    values: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Builds a matrix from rows. Symmetry is not checked here; see
    /// [`DistanceMatrix::max_asymmetry`].
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        let n = labels.len();
        if rows.len() != n {
            return Err(MatrixError::Shape {
                rows: rows.len(),
                labels: n,
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(MatrixError::DuplicateLabel(l.clone()));
            }
        }
        let mut values = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::Ragged {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
            values.extend(r);
        }
        Ok(Self { labels, values })
    }

    /// Fills a symmetric matrix with zero diagonal from `f(i, j)` for `i < j`.
    pub fn from_pairwise(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let n = labels.len();
        let mut values = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { labels, values }
    }

    /// Inverse of [`DistanceMatrix::upper_triangle`].
    pub fn from_upper(labels: Vec<String>, upper: &[T]) -> Self {
        let mut it = upper.iter().copied();
        Self::from_pairwise(labels, |_, _| it.next().expect("upper triangle too short"))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.labels.len() + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.labels.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn max_asymmetry(&self) -> T {
        let n = self.len();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diagonal(&self) -> T {
        (0..self.len())
            .map(|i| self.get(i, i).abs())
            .fold(T::zero(), T::max)
    }

    /// Restricts to `keep`, in the order given.
    pub fn subset<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self, MatrixError> {
        let idx = keep
            .iter()
            .map(|l| {
                self.index_of(l.as_ref())
                    .ok_or_else(|| MatrixError::UnknownLabel(l.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labels: Vec<String> = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let rows = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.get(i, j)).collect())
            .collect();
        Self::from_rows(labels, rows)
    }

    /// Strictly-upper-triangular entries in row-major order.
    pub fn upper_triangle(&self) -> Vec<T> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn subset_reorders_and_restricts() {
        let m = DistanceMatrix::from_rows(
            labels(&["a", "b", "c"]),
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 3.0],
                vec![2.0, 3.0, 0.0],
            ],
        )
        .unwrap();
        let s = m.subset(&["c", "a"]).unwrap();
        assert_eq!(s.labels(), &["c", "a"]);
        assert_eq!(s.get(0, 1), 2.0);
        assert_eq!(m.upper_triangle(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            m.subset(&["z"]),
            Err(MatrixError::UnknownLabel(_))
        ));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            DistanceMatrix::<f64>::from_rows(labels(&["a"]), vec![]),
            Err(MatrixError::Shape { .. })
        ));
        assert!(matches!(
            DistanceMatrix::from_rows(labels(&["a", "b"]), vec![vec![0.0], vec![0.0, 0.0]]),
            Err(MatrixError::Ragged { row: 0, .. })
        ));
        assert!(matches!(
            DistanceMatrix::from_rows(labels(&["a", "a"]), vec![vec![0.0; 2]; 2]),
            Err(MatrixError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn from_upper_round_trips() {
        let m = DistanceMatrix::from_upper(labels(&["a", "b", "c"]), &[1.0f32, 2.0, 3.0]);
        assert_eq!(m.upper_triangle(), vec![1.0, 2.0, 3.0]);
        assert_eq!(m.max_asymmetry(), 0.0);
    }
}
