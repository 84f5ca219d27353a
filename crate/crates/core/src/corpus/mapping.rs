//! Phone-label reduction tables.
//!
//! File format: two tab-separated columns (source label, reduced label). The
//! literal `DROP` in the second column excludes the segment; lines starting
//! with `#` are comments.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::phn::PhoneAlignment;

const SHIPPED_TIMIT_TABLE: &str = include_str!("../../data/timit_61_to_40.tsv");

/// The 61 phone labels of the TIMIT transcription inventory.
pub const TIMIT_LABELS: [&str; 61] = [
    "b", "d", "g", "p", "t", "k", "dx", "q", "jh", "ch", "s", "sh", "z", "zh", "f", "th", "v",
    "dh", "m", "n", "ng", "em", "en", "eng", "nx", "l", "r", "w", "y", "hh", "hv", "el", "iy",
    "ih", "eh", "ey", "ae", "aa", "aw", "ay", "ah", "ao", "oy", "ow", "uh", "uw", "ux", "er", "ax",
    "ix", "axr", "ax-h", "pau", "epi", "h#", "bcl", "dcl", "gcl", "pcl", "tcl", "kcl",
];

pub const DROP_TOKEN: &str = "DROP";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error("mapping line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("mapping line {line}: duplicate rule for {label:?}")]
    DuplicateRule { line: usize, label: String },
    #[error("label {0:?} has no rule in the phone mapping")]
    UnknownLabel(String),
    #[error("phone mapping is missing rules for: {}", .0.join(", "))]
    Incomplete(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappedLabel {
    Keep(String),
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhoneMapping {
    rules: BTreeMap<String, MappedLabel>,
}

impl PhoneMapping {
    pub fn from_rules<I, S, T>(rules: I) -> Self
    where
        I: IntoIterator<Item = (S, Option<T>)>,
        S: Into<String>,
        T: Into<String>,
    {
        let rules = rules
            .into_iter()
            .map(|(src, dst)| {
                let mapped = dst.map_or(MappedLabel::Drop, |d| MappedLabel::Keep(d.into()));
                (src.into(), mapped)
            })
            .collect();
        Self { rules }
    }

    /// Maps every label in `labels` onto itself.
    pub fn identity<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        Self::from_rules(labels.into_iter().map(|l| (l, Some(l))))
    }

    pub fn parse(text: &str) -> Result<Self, MappingError> {
        let mut rules = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            if cols.len() != 2 || cols.iter().any(|c| c.is_empty()) {
                return Err(MappingError::MalformedLine {
                    line,
                    reason: format!("expected two tab-separated columns, got {trimmed:?}"),
                });
            }
            let mapped = if cols[1] == DROP_TOKEN {
                MappedLabel::Drop
            } else {
                MappedLabel::Keep(cols[1].to_string())
            };
            if rules.insert(cols[0].to_string(), mapped).is_some() {
                return Err(MappingError::DuplicateRule {
                    line,
                    label: cols[0].to_string(),
                });
            }
        }
        Ok(Self { rules })
    }

    /// The shipped 61 → 40 TIMIT reduction table.
    pub fn timit_default() -> Self {
        Self::parse(SHIPPED_TIMIT_TABLE).expect("shipped mapping table parses")
    }

    pub fn get(&self, label: &str) -> Option<&MappedLabel> {
        self.rules.get(label)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Distinct reduced labels, excluding dropped ones.
    pub fn reduced_inventory(&self) -> BTreeSet<&str> {
        self.rules
            .values()
            .filter_map(|m| match m {
                MappedLabel::Keep(l) => Some(l.as_str()),
                MappedLabel::Drop => None,
            })
            .collect()
    }

    /// Checks that every label in `labels` has a rule.
    pub fn check_complete<'a>(
        &self,
        labels: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), MappingError> {
        let missing: Vec<String> = labels
            .into_iter()
            .filter(|l| !self.rules.contains_key(*l))
            .map(str::to_string)
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(MappingError::Incomplete(missing))
        }
    }
}

/// Relabels segments through `mapping`, removing those mapped to `DROP`.
pub fn apply_mapping(
    alignment: &PhoneAlignment,
    mapping: &PhoneMapping,
) -> Result<PhoneAlignment, MappingError> {
    let mut segments = Vec::with_capacity(alignment.segments.len());
    for seg in &alignment.segments {
        match mapping.get(&seg.label) {
            None => return Err(MappingError::UnknownLabel(seg.label.clone())),
            Some(MappedLabel::Drop) => {}
            Some(MappedLabel::Keep(label)) => {
                let mut kept = seg.clone();
                kept.label.clone_from(label);
                segments.push(kept);
            }
        }
    }
    Ok(PhoneAlignment {
        utterance_id: alignment.utterance_id.clone(),
        sample_rate: alignment.sample_rate,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::phn::{parse_phn, PhoneSegment};

    #[test]
    fn shipped_table_is_complete_and_reduces_to_40() {
        let m = PhoneMapping::timit_default();
        m.check_complete(TIMIT_LABELS).unwrap();
        assert_eq!(m.len(), 61);
        assert_eq!(m.reduced_inventory().len(), 40);
    }

    #[test]
    fn silence_dropped_and_ix_folded() {
        let m = PhoneMapping::timit_default();
        let a = parse_phn(
            "0 2000 h#\n2000 2600 ix\n2600 3000 tcl\n3000 3500 t\n",
            16_000,
        )
        .unwrap();
        let reduced = apply_mapping(&a, &m).unwrap();
        assert_eq!(
            reduced.segments,
            vec![
                PhoneSegment::new("ih", 2000, 2600),
                PhoneSegment::new("t", 3000, 3500)
            ]
        );
    }

    #[test]
    fn identity_mapping_leaves_alignment_unchanged() {
        let a = parse_phn("0 10 a\n10 20 b\n", 16_000).unwrap();
        let m = PhoneMapping::identity(["a", "b"]);
        assert_eq!(apply_mapping(&a, &m).unwrap(), a);
    }

    #[test]
    fn unknown_label_reported() {
        let a = parse_phn("0 10 zz\n", 16_000).unwrap();
        assert_eq!(
            apply_mapping(&a, &PhoneMapping::timit_default()),
            Err(MappingError::UnknownLabel("zz".into()))
        );
    }

    #[test]
    fn parse_rejects_bad_lines() {
        assert!(matches!(
            PhoneMapping::parse("# c\nab\n"),
            Err(MappingError::MalformedLine { line: 2, .. })
        ));
        assert!(matches!(
            PhoneMapping::parse("a\tb\na\tc\n"),
            Err(MappingError::DuplicateRule { line: 2, .. })
        ));
        let incomplete = PhoneMapping::parse("a\tb\n").unwrap();
        assert_eq!(
            incomplete.check_complete(["a", "x"]),
            Err(MappingError::Incomplete(vec!["x".into()]))
        );
    }
}
