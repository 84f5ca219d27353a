//! Corpus ingestion from disk and the per-analysis building blocks shared by
//! the command-line subcommands and the consolidated report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use walkdir::WalkDir;

use crate::corpus::{
    align_frames, apply_mapping, parse_phn, read_units, AlignError, BagSet, MappingError, PhnError,
    PhoneMapping, UnitSequence, UnitsError,
};
use crate::distribution::{DistributionError, PhoneticDistribution};
use crate::export::{DistributionExport, EntropyRow, ExportError};
use crate::infotheory::{entropy, normalized_entropy, InfoError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no unit sequences found in {0}")]
    NoUnitSequences(PathBuf),
    #[error("unit sequences from several models ({0}); select one with a model filter")]
    MultipleModels(String),
    #[error("no unit sequences for model {model:?} in {path}")]
    NoMatchingModel { model: String, path: PathBuf },
    #[error("utterance {utterance:?} has a {found}-unit inventory, expected {expected}")]
    InconsistentInventory {
        utterance: String,
        expected: String,
        found: String,
    },
    #[error("utterance {0:?} appears more than once in the unit sequences")]
    DuplicateUtterance(String),
    #[error("{path}: {source}")]
    Units {
        path: PathBuf,
        #[source]
        source: UnitsError,
    },
    #[error("{path}: {source}")]
    Phn {
        path: PathBuf,
        #[source]
        source: PhnError,
    },
    #[error("{path}: {source}")]
    Mapping {
        path: PathBuf,
        #[source]
        source: MappingError,
    },
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

/// Inputs of one ingestion pass.
#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// An interchange file, or a directory searched recursively for `*.jsonl`.
    pub units_path: PathBuf,
    /// Directory searched recursively for `.phn` files.
    pub alignments_path: PathBuf,
    pub mapping: PhoneMapping,
    pub model_id: Option<String>,
    pub sample_rate: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedSegment {
    pub utterance_id: String,
    pub label: String,
    pub begin: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestDiagnostics {
    pub model_id: String,
    pub omega_size: usize,
    pub num_groups: usize,
    pub utterances: usize,
    pub utterances_ingested: usize,
    pub utterances_without_alignment: usize,
    pub assigned_frames: u64,
    pub observations: u64,
    pub skipped_segments: usize,
    pub categories: usize,
    pub utilization: f64,
}

impl IngestDiagnostics {
    /// Every assigned frame contributed one observation per codebook group.
    pub fn conserved(&self) -> bool {
        self.observations == self.num_groups as u64 * self.assigned_frames
    }
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub export: DistributionExport,
    pub diagnostics: IngestDiagnostics,
    pub skipped: Vec<SkippedSegment>,
    pub warnings: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn files_with_extension(root: &Path, ext: &str) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| PipelineError::Io {
            path: root.to_path_buf(),
            source: e.into(),
        })?;
        if entry.file_type().is_file() && has_extension(entry.path(), ext) {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

/// Reads every unit sequence under `path`, in file then line order.
pub fn load_unit_sequences(path: &Path) -> Result<Vec<UnitSequence>, PipelineError> {
    let files = if path.is_dir() {
        files_with_extension(path, "jsonl")?
    } else {
        vec![path.to_path_buf()]
    };
    let mut out = Vec::new();
    for file in files {
        let f = fs::File::open(&file).map_err(io_err(&file))?;
        let seqs = read_units(BufReader::new(f)).map_err(|source| PipelineError::Units {
            path: file.clone(),
            source,
        })?;
        out.extend(seqs);
    }
    Ok(out)
}

/// Utterance id of an alignment file: its path relative to `root` without
/// extension, `/`-separated and lowercased.
pub fn utterance_key(root: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(root).unwrap_or(file).with_extension("");
    let parts: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().to_string())
        .collect();
    parts.join("/").to_lowercase()
}

/// Maps utterance keys to `.phn` paths.
pub fn index_alignments(root: &Path) -> Result<BTreeMap<String, PathBuf>, PipelineError> {
    Ok(files_with_extension(root, "phn")?
        .into_iter()
        .map(|p| (utterance_key(root, &p), p))
        .collect())
}

struct UtterancePartial {
    bags: BagSet,
    assigned_frames: u64,
    skipped: Vec<SkippedSegment>,
}

fn ingest_utterance(
    units: &UnitSequence,
    phn_path: &Path,
    mapping: &PhoneMapping,
    sample_rate: u32,
    omega_size: usize,
) -> Result<UtterancePartial, PipelineError> {
    let text = fs::read_to_string(phn_path).map_err(io_err(phn_path))?;
    let mut alignment = parse_phn(&text, sample_rate).map_err(|source| PipelineError::Phn {
        path: phn_path.to_path_buf(),
        source,
    })?;
    alignment.utterance_id = units.utterance_id.clone();
    let reduced = apply_mapping(&alignment, mapping).map_err(|source| PipelineError::Mapping {
        path: phn_path.to_path_buf(),
        source,
    })?;
    let framed = align_frames(&reduced, units)?;
    let mut bags = BagSet::new(omega_size);
    bags.accumulate(&framed.assignments, units);
    let skipped = framed
        .skipped
        .iter()
        .map(|s| SkippedSegment {
            utterance_id: units.utterance_id.clone(),
            label: s.label.clone(),
            begin: s.begin,
            end: s.end,
        })
        .collect();
    Ok(UtterancePartial {
        bags,
        assigned_frames: framed.assignments.len() as u64,
        skipped,
    })
}

fn select_model(
    seqs: Vec<UnitSequence>,
    filter: Option<&str>,
    path: &Path,
) -> Result<Vec<UnitSequence>, PipelineError> {
    match filter {
        Some(model) => {
            let kept: Vec<UnitSequence> =
                seqs.into_iter().filter(|s| s.model_id == model).collect();
            if kept.is_empty() {
                return Err(PipelineError::NoMatchingModel {
                    model: model.to_string(),
                    path: path.to_path_buf(),
                });
            }
            Ok(kept)
        }
        None => {
            let models: BTreeSet<&str> = seqs.iter().map(|s| s.model_id.as_str()).collect();
            if models.len() > 1 {
                return Err(PipelineError::MultipleModels(
                    models.into_iter().collect::<Vec<_>>().join(", "),
                ));
            }
            Ok(seqs)
        }
    }
}

/// Runs the corpus pass: unit sequences × alignments → per-category bags.
///
/// Utterances without an alignment file are skipped with a warning.
/// Utterances are processed in parallel and merged in input order.
pub fn ingest(config: &IngestConfig) -> Result<IngestOutcome, PipelineError> {
    let all = load_unit_sequences(&config.units_path)?;
    if all.is_empty() {
        return Err(PipelineError::NoUnitSequences(config.units_path.clone()));
    }
    let seqs = select_model(all, config.model_id.as_deref(), &config.units_path)?;
    let first = &seqs[0];
    let (num_groups, group_size) = (first.num_groups, first.group_size);
    let model_id = first.model_id.clone();
    let mut seen = BTreeSet::new();
    for s in &seqs {
        if (s.num_groups, s.group_size) != (num_groups, group_size) {
            return Err(PipelineError::InconsistentInventory {
                utterance: s.utterance_id.clone(),
                expected: format!("{num_groups}x{group_size}"),
                found: format!("{}x{}", s.num_groups, s.group_size),
            });
        }
        if !seen.insert(s.utterance_id.to_lowercase()) {
            return Err(PipelineError::DuplicateUtterance(s.utterance_id.clone()));
        }
    }
    let omega_size = num_groups * group_size;
    let index = index_alignments(&config.alignments_path)?;

    let partials: Vec<Option<Result<UtterancePartial, PipelineError>>> = seqs
        .par_iter()
        .map(|s| {
            index.get(&s.utterance_id.to_lowercase()).map(|phn| {
                ingest_utterance(s, phn, &config.mapping, config.sample_rate, omega_size)
            })
        })
        .collect();

    let mut bags = BagSet::new(omega_size);
    let mut assigned_frames = 0u64;
    let mut skipped = Vec::new();
    let mut warnings = Vec::new();
    let mut ingested = 0usize;
    for (seq, partial) in seqs.iter().zip(partials) {
        match partial {
            None => {
                let msg = format!("no alignment for utterance {:?}; skipped", seq.utterance_id);
                log::warn!("{msg}");
                warnings.push(msg);
            }
            Some(result) => {
                let p = result?;
                bags = bags.merge(p.bags);
                assigned_frames += p.assigned_frames;
                skipped.extend(p.skipped);
                ingested += 1;
            }
        }
    }

    let used = (0..omega_size)
        .filter(|&u| bags.iter().any(|b| b.counts[u] > 0))
        .count();
    let diagnostics = IngestDiagnostics {
        model_id: model_id.clone(),
        omega_size,
        num_groups,
        utterances: seqs.len(),
        utterances_ingested: ingested,
        utterances_without_alignment: seqs.len() - ingested,
        assigned_frames,
        observations: bags.total_observations(),
        skipped_segments: skipped.len(),
        categories: bags.len(),
        utilization: used as f64 / omega_size as f64,
    };
    Ok(IngestOutcome {
        export: DistributionExport {
            model_id,
            omega_size,
            bags: bags.into_bags(),
        },
        diagnostics,
        skipped,
        warnings,
    })
}

pub fn read_export(path: &Path) -> Result<DistributionExport, PipelineError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    Ok(DistributionExport::read(BufReader::new(f))?)
}

/// MLE distributions of every exported category, in category order.
pub fn estimate_all(
    export: &DistributionExport,
) -> Result<Vec<PhoneticDistribution<f64>>, PipelineError> {
    Ok(export
        .bags
        .iter()
        .map(PhoneticDistribution::estimate)
        .collect::<Result<_, _>>()?)
}

pub fn entropy_rows(dists: &[PhoneticDistribution<f64>]) -> Result<Vec<EntropyRow>, PipelineError> {
    dists
        .iter()
        .map(|d| {
            Ok(EntropyRow {
                category: d.category.clone(),
                total_observations: d.total_observations,
                entropy_bits: entropy(d),
                normalized_entropy: normalized_entropy(d)?,
                support_size: d.support_size,
            })
        })
        .collect()
}
