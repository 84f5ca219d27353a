//! TIMIT-style `.phn` alignment files: one `begin end label` triple per line,
//! bounds in samples.

use std::fmt::Write as _;

use thiserror::Error;

/// Sample rate assumed for `.phn` files unless overridden.
pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhnError {
    #[error("line {line}: malformed segment: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: non-monotonic segment: {reason}")]
    NonMonotonic { line: usize, reason: String },
}

/// One labelled span `[begin, end)` in samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneSegment {
    pub label: String,
    pub begin: u64,
    pub end: u64,
}

impl PhoneSegment {
    pub fn new(label: impl Into<String>, begin: u64, end: u64) -> Self {
        Self {
            label: label.into(),
            begin,
            end,
        }
    }

    #[inline]
    pub fn contains(&self, sample: u64) -> bool {
        self.begin <= sample && sample < self.end
    }
}

/// Time-stamped phone segments of one utterance, sorted and non-overlapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneAlignment {
    pub utterance_id: String,
    pub sample_rate: u32,
    pub segments: Vec<PhoneSegment>,
}

impl PhoneAlignment {
    pub fn empty(utterance_id: impl Into<String>, sample_rate: u32) -> Self {
        Self {
            utterance_id: utterance_id.into(),
            sample_rate,
            segments: Vec::new(),
        }
    }

    /// Serializes back to `.phn` text, one segment per line.
    pub fn to_phn(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            let _ = writeln!(out, "{} {} {}", seg.begin, seg.end, seg.label);
        }
        out
    }
}

/// Parses `.phn` content. Blank lines are ignored; line numbers in errors are
/// 1-based and refer to the original text.
pub fn parse_phn(text: &str, sample_rate: u32) -> Result<PhoneAlignment, PhnError> {
    let mut segments: Vec<PhoneSegment> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(PhnError::MalformedLine {
                line,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let bound = |s: &str, what: &str| {
            s.parse::<u64>().map_err(|_| PhnError::MalformedLine {
                line,
                reason: format!("{what} bound {s:?} is not a non-negative integer"),
            })
        };
        let begin = bound(fields[0], "begin")?;
        let end = bound(fields[1], "end")?;
        if begin >= end {
            return Err(PhnError::NonMonotonic {
                line,
                reason: format!("begin {begin} is not before end {end}"),
            });
        }
        if let Some(prev) = segments.last() {
            if prev.end > begin {
                return Err(PhnError::NonMonotonic {
                    line,
                    reason: format!(
                        "begin {begin} overlaps previous segment ending at {}",
                        prev.end
                    ),
                });
            }
        }
        segments.push(PhoneSegment::new(fields[2], begin, end));
    }
    Ok(PhoneAlignment {
        utterance_id: String::new(),
        sample_rate,
        segments,
    })
}
