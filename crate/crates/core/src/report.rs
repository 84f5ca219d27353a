//! The consolidated analysis report and the per-analysis pieces it is built
//! from. Subcommands call the same builders, so every report field matches
//! the corresponding standalone output.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cluster::{ward_cluster, Dendrogram};
use crate::distribution::{utilization, PhoneticDistribution};
use crate::export::{round9, DistributionExport, EntropyRow, NearestRow};
use crate::infotheory::jsd_matrix;
use crate::matrix::DistanceMatrix;
use crate::phonology::{
    class_entropy, feature_distance_matrix, vowel_consonant_entropy, ClassTable, FeatureTable,
};
use crate::pipeline::{entropy_rows, estimate_all, PipelineError};
use crate::stats::{correlate_matrices, top_k_similar, CorrelationResult, Subset};

pub const REPORT_FORMAT_VERSION: u32 = 1;
pub const INSUFFICIENT: &str = "insufficient categories";
pub const DEFAULT_NEIGHBORS: usize = 5;

/// A report section that may be unavailable for the given data.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Section<T> {
    Ready(T),
    Unavailable { status: String },
}

impl<T> Section<T> {
    pub fn unavailable(status: impl Into<String>) -> Self {
        Section::Unavailable {
            status: status.into(),
        }
    }

    pub fn ready(&self) -> Option<&T> {
        match self {
            Section::Ready(v) => Some(v),
            Section::Unavailable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMean {
    pub class: String,
    pub members: usize,
    pub mean_entropy_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VowelConsonant {
    pub vowels: Option<f64>,
    pub consonants: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixSection {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeRow {
    pub step: usize,
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DendrogramSection {
    pub newick: String,
    pub merges: Vec<MergeRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub n_pairs: usize,
    pub r: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub rank: usize,
    pub neighbor: String,
    pub jsd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearestEntry {
    pub query: String,
    pub neighbors: Vec<Neighbor>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub model_id: String,
    pub omega_size: usize,
    pub categories: Vec<String>,
    pub utilization: f64,
    pub mean_entropy_bits: f64,
    pub entropy: Vec<EntropyRow>,
    pub class_entropy: Section<Vec<ClassMean>>,
    pub vowel_consonant_entropy: Section<VowelConsonant>,
    pub jsd_matrix: Section<MatrixSection>,
    pub dendrogram: Section<DendrogramSection>,
    pub correlations: BTreeMap<String, Section<CorrelationRow>>,
    pub nearest: Section<Vec<NearestEntry>>,
}

/// Entropy rows with every real rounded to 9 significant digits.
pub fn rounded_entropy_rows(
    dists: &[PhoneticDistribution<f64>],
) -> Result<Vec<EntropyRow>, PipelineError> {
    let mut rows = entropy_rows(dists)?;
    for r in &mut rows {
        r.entropy_bits = round9(r.entropy_bits);
        r.normalized_entropy = round9(r.normalized_entropy);
    }
    Ok(rows)
}

/// Mean entropy per articulatory class, or the reason it is unavailable.
pub fn class_means(rows: &[EntropyRow], classes: &ClassTable) -> Result<Vec<ClassMean>, String> {
    let entropies: BTreeMap<String, f64> = rows
        .iter()
        .map(|r| (r.category.clone(), r.entropy_bits))
        .collect();
    let means = class_entropy(&entropies, classes).map_err(|e| e.to_string())?;
    Ok(means
        .into_iter()
        .map(|(class, mean)| ClassMean {
            class: class.to_string(),
            members: rows
                .iter()
                .filter(|r| classes.class_of(&r.category).ok() == Some(class))
                .count(),
            mean_entropy_bits: round9(mean),
        })
        .collect())
}

/// Mean entropy over vowels and over consonants.
pub fn vowel_consonant(
    rows: &[EntropyRow],
    classes: &ClassTable,
) -> Result<VowelConsonant, String> {
    let entropies: BTreeMap<String, f64> = rows
        .iter()
        .map(|r| (r.category.clone(), r.entropy_bits))
        .collect();
    let (v, c) = vowel_consonant_entropy(&entropies, classes).map_err(|e| e.to_string())?;
    Ok(VowelConsonant {
        vowels: v.map(round9),
        consonants: c.map(round9),
    })
}

/// Categories of `labels` belonging to `subset`.
pub fn subset_labels(
    labels: &[String],
    subset: Subset,
    classes: &ClassTable,
) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for l in labels {
        let keep = match subset {
            Subset::All => true,
            Subset::Vowels => classes.is_vowel(l).map_err(|e| e.to_string())?,
            Subset::Consonants => !classes.is_vowel(l).map_err(|e| e.to_string())?,
        };
        if keep {
            out.push(l.clone());
        }
    }
    Ok(out)
}

/// Correlation between the JSD matrix and feature-based Hamming distance over
/// one subset of categories.
pub fn feature_correlation(
    jsd: &DistanceMatrix<f64>,
    features: &FeatureTable,
    classes: &ClassTable,
    subset: Subset,
) -> Result<CorrelationResult<f64>, String> {
    let labels = subset_labels(jsd.labels(), subset, classes)?;
    if labels.len() < 3 {
        return Err(INSUFFICIENT.to_string());
    }
    let feat: DistanceMatrix<f64> =
        feature_distance_matrix(&labels, features).map_err(|e| e.to_string())?;
    let mut result = correlate_matrices(jsd, &feat, Some(&labels)).map_err(|e| e.to_string())?;
    result.subset = subset;
    result.r = round9(result.r);
    result.p_value = round9(result.p_value);
    Ok(result)
}

/// Top-`k` neighbours of each query (all categories when `queries` is empty).
pub fn nearest_rows(
    jsd: &DistanceMatrix<f64>,
    queries: &[String],
    k: usize,
) -> Result<Vec<NearestRow>, crate::stats::StatsError> {
    let all: Vec<String>;
    let queries = if queries.is_empty() {
        all = jsd.labels().to_vec();
        &all
    } else {
        queries
    };
    let mut rows = Vec::new();
    for q in queries {
        for (rank, (neighbor, d)) in top_k_similar(jsd, q, k)?.into_iter().enumerate() {
            rows.push(NearestRow {
                query: q.clone(),
                rank: rank + 1,
                neighbor,
                jsd: round9(d),
            });
        }
    }
    Ok(rows)
}

pub fn dendrogram_section(d: &Dendrogram<f64>) -> DendrogramSection {
    DendrogramSection {
        newick: crate::cluster::to_newick(d),
        merges: d
            .merges()
            .iter()
            .enumerate()
            .map(|(step, m)| MergeRow {
                step,
                left: m.left,
                right: m.right,
                height: round9(m.height),
                size: m.size,
            })
            .collect(),
        warnings: d.warnings().to_vec(),
    }
}

fn section<T>(r: Result<T, String>) -> Section<T> {
    match r {
        Ok(v) => Section::Ready(v),
        Err(status) => Section::unavailable(status),
    }
}

impl Report {
    pub fn build(
        export: &DistributionExport,
        features: &FeatureTable,
        classes: &ClassTable,
    ) -> Result<Self, PipelineError> {
        let dists = estimate_all(export)?;
        let entropy = rounded_entropy_rows(&dists)?;
        let raw_mean = entropy_rows(&dists)?
            .iter()
            .map(|r| r.entropy_bits)
            .sum::<f64>()
            / dists.len().max(1) as f64;
        let categories: Vec<String> = dists.iter().map(|d| d.category.clone()).collect();

        let class_entropy = section(class_means(&entropy, classes));
        let vowel_consonant_entropy = section(vowel_consonant(&entropy, classes));

        let (jsd_section, dendrogram, correlations, nearest);
        if dists.len() < 2 {
            jsd_section = Section::unavailable(INSUFFICIENT);
            dendrogram = Section::unavailable(INSUFFICIENT);
            nearest = Section::unavailable(INSUFFICIENT);
            correlations = Subset::ALL
                .into_iter()
                .map(|s| (s.to_string(), Section::unavailable(INSUFFICIENT)))
                .collect();
        } else {
            let jsd = jsd_matrix(&dists)?;
            jsd_section = Section::Ready(MatrixSection {
                labels: jsd.labels().to_vec(),
                values: (0..jsd.len())
                    .map(|i| jsd.row(i).iter().map(|&v| round9(v)).collect())
                    .collect(),
            });
            dendrogram = match ward_cluster(&jsd) {
                Ok(d) => Section::Ready(dendrogram_section(&d)),
                Err(e) => Section::unavailable(e.to_string()),
            };
            correlations = Subset::ALL
                .into_iter()
                .map(|s| {
                    let row =
                        feature_correlation(&jsd, features, classes, s).map(|c| CorrelationRow {
                            n_pairs: c.n_pairs,
                            r: c.r,
                            p_value: c.p_value,
                        });
                    (s.to_string(), section(row))
                })
                .collect();
            let k = DEFAULT_NEIGHBORS.min(jsd.len() - 1);
            let rows = nearest_rows(&jsd, &[], k).expect("k within range and queries from matrix");
            let mut entries: Vec<NearestEntry> = Vec::new();
            for row in rows {
                if entries.last().map(|e| &e.query) != Some(&row.query) {
                    entries.push(NearestEntry {
                        query: row.query.clone(),
                        neighbors: Vec::new(),
                    });
                }
                entries
                    .last_mut()
                    .expect("pushed above")
                    .neighbors
                    .push(Neighbor {
                        rank: row.rank,
                        neighbor: row.neighbor,
                        jsd: row.jsd,
                    });
            }
            nearest = Section::Ready(entries);
        }

        Ok(Report {
            format_version: REPORT_FORMAT_VERSION,
            model_id: export.model_id.clone(),
            omega_size: export.omega_size,
            categories,
            utilization: round9(utilization(&dists)?),
            mean_entropy_bits: round9(raw_mean),
            entropy,
            class_entropy,
            vowel_consonant_entropy,
            jsd_matrix: jsd_section,
            dendrogram,
            correlations,
            nearest,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
