//! Agglomerative Ward clustering over a precomputed dissimilarity matrix.
//!
//! Dissimilarities are squared internally and updated with the Lance-Williams
//! recurrence for Ward linkage; reported merge heights are the square roots.
//! This is the usual way Ward is applied to non-Euclidean input such as a
//! Jensen-Shannon divergence matrix, and on such input merge heights may
//! decrease. Those inversions are kept and reported in
//! [`Dendrogram::warnings`].
//!
//! Node ids `0..n` are leaves and `n..2n-1` are merges in creation order.
//! Among equally close pairs the one with the smallest `(lo, hi)` node-id
//! pair merges first.

use std::fmt::Write as _;

use thiserror::Error;

use crate::export::sig9;
use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("need at least 2 items to cluster, got {0}")]
    TooFewItems(usize),
    #[error("matrix is not symmetric (max deviation {0})")]
    AsymmetricMatrix(f64),
    #[error("matrix diagonal is not zero (max |d(i,i)| = {0})")]
    NonzeroDiagonal(f64),
    #[error("matrix has a negative or non-finite entry at ({0}, {1})")]
    InvalidEntry(usize, usize),
    #[error("k = {k} is outside 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("invalid dendrogram: {0}")]
    InvalidDendrogram(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge<T> {
    pub left: usize,
    pub right: usize,
    pub height: T,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram<T> {
    leaves: Vec<String>,
    merges: Vec<Merge<T>>,
    warnings: Vec<String>,
}

impl<T: Scalar> Dendrogram<T> {
    /// Validates a merge list: `n - 1` merges, children created before their
    /// parent, every node but the root used exactly once, sizes consistent.
    pub fn new(leaves: Vec<String>, merges: Vec<Merge<T>>) -> Result<Self, ClusterError> {
        let n = leaves.len();
        let bad = |m: String| Err(ClusterError::InvalidDendrogram(m));
        if n == 0 {
            return bad("no leaves".into());
        }
        if merges.len() != n - 1 {
            return bad(format!(
                "{} leaves need {} merges, got {}",
                n,
                n - 1,
                merges.len()
            ));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut sizes: Vec<usize> = vec![1; n];
        for (step, m) in merges.iter().enumerate() {
            let id = n + step;
            for child in [m.left, m.right] {
                if child >= id {
                    return bad(format!(
                        "merge {step} references node {child} not yet created"
                    ));
                }
                if std::mem::replace(&mut used[child], true) {
                    return bad(format!("node {child} merged twice"));
                }
            }
            if m.left == m.right {
                return bad(format!("merge {step} joins node {} with itself", m.left));
            }
            let size = sizes[m.left] + sizes[m.right];
            if size != m.size {
                return bad(format!(
                    "merge {step} has size {} but children hold {size}",
                    m.size
                ));
            }
            if m.height.is_nan() || m.height < T::zero() {
                return bad(format!("merge {step} has invalid height"));
            }
            sizes.push(size);
        }
        let warnings = height_inversions(&merges);
        Ok(Self {
            leaves,
            merges,
            warnings,
        })
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge<T>] {
        &self.merges
    }

    /// Non-fatal issues, currently merge-height inversions.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Height of a node: zero for leaves, the merge height otherwise.
    pub fn height(&self, node: usize) -> T {
        let n = self.leaves.len();
        if node < n {
            T::zero()
        } else {
            self.merges[node - n].height
        }
    }

    pub fn root(&self) -> usize {
        2 * self.leaves.len() - 2
    }
}

fn height_inversions<T: Scalar>(merges: &[Merge<T>]) -> Vec<String> {
    merges
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].height < w[0].height)
        .map(|(i, w)| {
            format!(
                "merge {} height {} is below previous merge height {}",
                i + 1,
                sig9(w[1].height.as_f64()),
                sig9(w[0].height.as_f64())
            )
        })
        .collect()
}

fn validate<T: Scalar>(matrix: &DistanceMatrix<T>) -> Result<(), ClusterError> {
    let n = matrix.len();
    if n < 2 {
        return Err(ClusterError::TooFewItems(n));
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    for i in 0..n {
        for j in 0..n {
            let v = matrix.get(i, j);
            if !v.is_finite() || v < T::zero() {
                return Err(ClusterError::InvalidEntry(i, j));
            }
        }
    }
    let asym = matrix.max_asymmetry();
    if asym > tol {
        return Err(ClusterError::AsymmetricMatrix(asym.as_f64()));
    }
    let diag = matrix.max_abs_diagonal();
    if diag > tol {
        return Err(ClusterError::NonzeroDiagonal(diag.as_f64()));
    }
    Ok(())
}

pub fn ward_cluster<T: Scalar>(matrix: &DistanceMatrix<T>) -> Result<Dendrogram<T>, ClusterError> {
    validate(matrix)?;
    let n = matrix.len();
    // squared dissimilarities between active slots; slot a keeps the merge of a and b
    let mut d2 = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let v = (matrix.get(i, j) + matrix.get(j, i)) * T::lit(0.5);
            d2[i * n + j] = v * v;
        }
    }
    let mut node: Vec<usize> = (0..n).collect();
    let mut size: Vec<usize> = vec![1; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(T, usize, usize, usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let d = d2[a * n + b];
                let (lo, hi) = if node[a] < node[b] {
                    (node[a], node[b])
                } else {
                    (node[b], node[a])
                };
                let better = match best {
                    None => true,
                    Some((bd, _, _, blo, bhi)) => d < bd || (d == bd && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((d, a, b, lo, hi));
                }
            }
        }
        let (dab, a, b, lo, hi) = best.expect("at least two active clusters");
        let (sa, sb) = (T::from_len(size[a]), T::from_len(size[b]));
        for &k in &active {
            if k == a || k == b {
                continue;
            }
            let sk = T::from_len(size[k]);
            let updated =
                ((sa + sk) * d2[a * n + k] + (sb + sk) * d2[b * n + k] - sk * dab) / (sa + sb + sk);
            let updated = updated.max(T::zero());
            d2[a * n + k] = updated;
            d2[k * n + a] = updated;
        }
        size[a] += size[b];
        node[a] = n + step;
        active.retain(|&s| s != b);
        merges.push(Merge {
            left: lo,
            right: hi,
            height: dab.sqrt(),
            size: size[a],
        });
    }
    let dendrogram = Dendrogram::new(matrix.labels().to_vec(), merges)?;
    for w in dendrogram.warnings() {
        log::warn!("ward clustering: {w}");
    }
    Ok(dendrogram)
}

/// Members (leaf indices) of every node, indexed by node id.
fn node_members<T: Scalar>(d: &Dendrogram<T>, merges_applied: usize) -> Vec<Option<Vec<usize>>> {
    let n = d.leaves.len();
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    for m in &d.merges[..merges_applied] {
        let mut joined = members[m.left].take().expect("node used once");
        joined.extend(members[m.right].take().expect("node used once"));
        members.push(Some(joined));
    }
    members
}

/// Partition into `k` clusters by undoing the last `k - 1` merges. Each
/// cluster is a sorted label list; clusters are ordered by their smallest
/// label.
pub fn cut<T: Scalar>(
    dendrogram: &Dendrogram<T>,
    k: usize,
) -> Result<Vec<Vec<String>>, ClusterError> {
    let n = dendrogram.leaves.len();
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let mut groups: Vec<Vec<String>> = node_members(dendrogram, n - k)
        .into_iter()
        .flatten()
        .map(|idx| {
            let mut labels: Vec<String> =
                idx.iter().map(|&i| dendrogram.leaves[i].clone()).collect();
            labels.sort();
            labels
        })
        .collect();
    groups.sort();
    Ok(groups)
}

fn newick_label(label: &str) -> String {
    let needs_quotes = label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || "()[]':;,".contains(c));
    if needs_quotes {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Newick text with branch length = parent height - child height.
pub fn to_newick<T: Scalar>(dendrogram: &Dendrogram<T>) -> String {
    fn write<T: Scalar>(d: &Dendrogram<T>, node: usize, out: &mut String) {
        let n = d.leaves.len();
        if node < n {
            out.push_str(&newick_label(&d.leaves[node]));
            return;
        }
        let m = &d.merges[node - n];
        out.push('(');
        for (i, child) in [m.left, m.right].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write(d, child, out);
            let _ = write!(out, ":{}", sig9((m.height - d.height(child)).as_f64()));
        }
        out.push(')');
    }
    let mut out = String::new();
    write(dendrogram, dendrogram.root(), &mut out);
    out.push(';');
    out
}
