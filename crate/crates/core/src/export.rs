//! On-disk formats produced and consumed by the analysis stages.
//!
//! Numbers are written with at most 9 significant digits so that reports are
//! byte-identical across runs and thread counts.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::Dendrogram;
use crate::corpus::UnitObservationBag;
use crate::matrix::DistanceMatrix;
use crate::pipeline::SkippedSegment;
use crate::scalar::Scalar;
use crate::stats::CorrelationResult;

pub const EXPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("line {line}: {reason}")]
    Invalid { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("export contains no categories")]
    Empty,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Rounds to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Formats with at most 9 significant digits, no exponent.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{}", round9(x))
}

/// Per-category unit counts of one model, as written by ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionExport {
    pub model_id: String,
    pub omega_size: usize,
    /// Sorted by category.
    pub bags: Vec<UnitObservationBag>,
}

#[derive(Serialize, Deserialize)]
struct ExportRecord {
    format_version: u32,
    model_id: String,
    omega_size: usize,
    category: String,
    total_observations: u64,
    /// Sparse `(unit_id, count)` pairs, increasing unit id.
    counts: Vec<(usize, u64)>,
}

impl DistributionExport {
    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.bags.iter().map(|b| b.category.as_str())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), ExportError> {
        for bag in &self.bags {
            let rec = ExportRecord {
                format_version: EXPORT_FORMAT_VERSION,
                model_id: self.model_id.clone(),
                omega_size: self.omega_size,
                category: bag.category.clone(),
                total_observations: bag.total,
                counts: bag.sparse(),
            };
            serde_json::to_writer(&mut w, &rec).map_err(|e| ExportError::Io(e.into()))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, ExportError> {
        let mut header: Option<(String, usize)> = None;
        let mut bags: Vec<UnitObservationBag> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let text = line?;
            if text.trim().is_empty() {
                continue;
            }
            let invalid = |reason: String| ExportError::Invalid {
                line: line_no,
                reason,
            };
            let rec: ExportRecord =
                serde_json::from_str(&text).map_err(|source| ExportError::Json {
                    line: line_no,
                    source,
                })?;
            if rec.format_version != EXPORT_FORMAT_VERSION {
                return Err(invalid(format!(
                    "unsupported format_version {}",
                    rec.format_version
                )));
            }
            match &header {
                None => header = Some((rec.model_id.clone(), rec.omega_size)),
                Some((model, omega)) => {
                    if *model != rec.model_id || *omega != rec.omega_size {
                        return Err(invalid("records disagree on model_id or omega_size".into()));
                    }
                }
            }
            if bags.iter().any(|b| b.category == rec.category) {
                return Err(invalid(format!("duplicate category {:?}", rec.category)));
            }
            let mut counts = vec![0u64; rec.omega_size];
            let mut prev: Option<usize> = None;
            for &(unit, count) in &rec.counts {
                if unit >= rec.omega_size {
                    return Err(invalid(format!(
                        "unit {unit} outside inventory of {}",
                        rec.omega_size
                    )));
                }
                if prev.is_some_and(|p| p >= unit) {
                    return Err(invalid("unit ids must be strictly increasing".into()));
                }
                prev = Some(unit);
                counts[unit] = count;
            }
            let bag = UnitObservationBag::from_counts(rec.category, counts);
            if bag.total != rec.total_observations {
                return Err(invalid(format!(
                    "total_observations {} does not match count sum {}",
                    rec.total_observations, bag.total
                )));
            }
            bags.push(bag);
        }
        let (model_id, omega_size) = header.ok_or(ExportError::Empty)?;
        bags.sort_by(|a, b| a.category.cmp(&b.category));
        Ok(Self {
            model_id,
            omega_size,
            bags,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub category: String,
    pub total_observations: u64,
    pub entropy_bits: f64,
    pub normalized_entropy: f64,
    pub support_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestRow {
    pub query: String,
    pub rank: usize,
    pub neighbor: String,
    pub jsd: f64,
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer flushes");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn entropy_csv(rows: &[EntropyRow]) -> Result<String, ExportError> {
    let mut w = csv_writer();
    w.write_record([
        "category",
        "total_observations",
        "entropy_bits",
        "normalized_entropy",
        "support_size",
    ])?;
    for r in rows {
        w.write_record([
            r.category.clone(),
            r.total_observations.to_string(),
            sig9(r.entropy_bits),
            sig9(r.normalized_entropy),
            r.support_size.to_string(),
        ])?;
    }
    Ok(finish(w))
}

/// `(class, members, mean_entropy_bits)` rows.
pub fn class_entropy_csv(rows: &[(String, usize, f64)]) -> Result<String, ExportError> {
    let mut w = csv_writer();
    w.write_record(["class", "members", "mean_entropy_bits"])?;
    for (class, members, mean) in rows {
        w.write_record([class.clone(), members.to_string(), sig9(*mean)])?;
    }
    Ok(finish(w))
}

/// Square matrix with a header row and a leading label column.
pub fn matrix_csv<T: Scalar>(m: &DistanceMatrix<T>) -> Result<String, ExportError> {
    let mut w = csv_writer();
    let mut header = vec![String::new()];
    header.extend(m.labels().iter().cloned());
    w.write_record(&header)?;
    for (i, label) in m.labels().iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(m.row(i).iter().map(|v| sig9(v.as_f64())));
        w.write_record(&row)?;
    }
    Ok(finish(w))
}

/// Parses [`matrix_csv`] output.
pub fn read_matrix_csv(text: &str) -> Result<DistanceMatrix<f64>, ExportError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let labels: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ExportError::Invalid {
                line: i + 2,
                reason: e.to_string(),
            })?;
        rows.push(row);
    }
    DistanceMatrix::from_rows(labels, rows).map_err(|e| ExportError::Invalid {
        line: 1,
        reason: e.to_string(),
    })
}

/// `step,left,right,height,size` rows; steps and node ids as in the dendrogram.
pub fn merges_csv<T: Scalar>(d: &Dendrogram<T>) -> Result<String, ExportError> {
    let mut w = csv_writer();
    w.write_record(["step", "left", "right", "height", "size"])?;
    for (step, m) in d.merges().iter().enumerate() {
        w.write_record([
            step.to_string(),
            m.left.to_string(),
            m.right.to_string(),
            sig9(m.height.as_f64()),
            m.size.to_string(),
        ])?;
    }
    Ok(finish(w))
}

pub fn correlation_csv<T: Scalar>(rows: &[CorrelationResult<T>]) -> Result<String, ExportError> {
    let mut w = csv_writer();
    w.write_record(["subset", "n_pairs", "r", "p_value"])?;
    for c in rows {
        w.write_record([
            c.subset.to_string(),
            c.n_pairs.to_string(),
            sig9(c.r.as_f64()),
            sig9(c.p_value.as_f64()),
        ])?;
    }
    Ok(finish(w))
}

pub fn nearest_csv(rows: &[NearestRow]) -> Result<String, ExportError> {
    let mut w = csv_writer();
    w.write_record(["query", "rank", "neighbor", "jsd"])?;
    for r in rows {
        w.write_record([
            r.query.clone(),
            r.rank.to_string(),
            r.neighbor.clone(),
            sig9(r.jsd),
        ])?;
    }
    Ok(finish(w))
}

/// `utterance_id,label,begin,end` rows of segments that received no frame.
pub fn skipped_csv(rows: &[SkippedSegment]) -> Result<String, ExportError> {
    let mut w = csv_writer();
    w.write_record(["utterance_id", "label", "begin", "end"])?;
    for s in rows {
        w.write_record([
            s.utterance_id.clone(),
            s.label.clone(),
            s.begin.to_string(),
            s.end.to_string(),
        ])?;
    }
    Ok(finish(w))
}

/// `cluster,category` rows of a flat partition, clusters numbered from 1.
pub fn clusters_csv(groups: &[Vec<String>]) -> Result<String, ExportError> {
    let mut w = csv_writer();
    w.write_record(["cluster", "category"])?;
    for (i, g) in groups.iter().enumerate() {
        for c in g {
            w.write_record([(i + 1).to_string(), c.clone()])?;
        }
    }
    Ok(finish(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.31127812445913283), "0.311278124");
        assert_eq!(sig9(1.5), "1.5");
        assert_eq!(sig9(0.6 - 0.2), "0.4");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(123456789012.0), "123456789000");
        assert_eq!(sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn export_rejects_inconsistent_records() {
        let a = r#"{"format_version":1,"model_id":"m","omega_size":4,"category":"a","total_observations":3,"counts":[[0,1],[2,2]]}"#;
        assert_eq!(
            DistributionExport::read(a.as_bytes()).unwrap().bags[0].counts,
            vec![1, 0, 2, 0]
        );
        let bad_total = a.replace("\"total_observations\":3", "\"total_observations\":4");
        assert!(DistributionExport::read(bad_total.as_bytes()).is_err());
        let bad_unit = a.replace("[2,2]", "[4,2]");
        assert!(DistributionExport::read(bad_unit.as_bytes()).is_err());
        let unsorted = a.replace("[[0,1],[2,2]]", "[[2,2],[0,1]]");
        assert!(DistributionExport::read(unsorted.as_bytes()).is_err());
        let dup = format!("{a}\n{a}\n");
        assert!(DistributionExport::read(dup.as_bytes()).is_err());
        let other_model = a.replace("\"a\"", "\"b\"").replace("\"m\"", "\"n\"");
        assert!(DistributionExport::read(format!("{a}\n{other_model}").as_bytes()).is_err());
        assert!(matches!(
            DistributionExport::read("".as_bytes()),
            Err(ExportError::Empty)
        ));
    }

    #[test]
    fn matrix_csv_round_trips_at_nine_digits() {
        let m = DistanceMatrix::from_upper(
            vec!["a".into(), "b,c".into(), "d".into()],
            &[0.1, 1.0 / 3.0, 0.75],
        );
        let text = matrix_csv(&m).unwrap();
        assert!(text.starts_with(",a,\"b,c\",d\n"));
        let back = read_matrix_csv(&text).unwrap();
        assert_eq!(back.labels(), m.labels());
        assert_eq!(back.get(0, 2), 0.333333333);
    }

    proptest! {
        #[test]
        fn export_write_read_identity(
            bags in proptest::collection::btree_map("[a-z]{1,3}", proptest::collection::vec(0u64..5, 16), 1..6)
        ) {
            let export = DistributionExport {
                model_id: "m".into(),
                omega_size: 16,
                bags: bags.into_iter().map(|(c, counts)| UnitObservationBag::from_counts(c, counts)).collect(),
            };
            let mut buf = Vec::new();
            export.write(&mut buf).unwrap();
            prop_assert_eq!(DistributionExport::read(buf.as_slice()).unwrap(), export);
        }

        #[test]
        fn round9_is_idempotent(x in -1e6f64..1e6) {
            prop_assert_eq!(round9(round9(x)), round9(x));
            prop_assert!((round9(x) - x).abs() <= x.abs() * 1e-8);
        }
    }
}
