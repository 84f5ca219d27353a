//! Quantizer unit sequences and their line-delimited JSON interchange format.
//!
//! Each line of an interchange file is one utterance:
//!
//! ```text
//! {"format_version":1,"utterance_id":"dr1/fcjf0/sa1","model_id":"w2v2",
//!  "num_groups":2,"group_size":320,"stride_samples":320,"offset_samples":200,
//!  "frames":[[5,17],[5,301]]}
//! ```
//!
//! `frames[t]` holds the `num_groups` group-local codebook indices of frame `t`,
//! whose center sits at sample `offset_samples + t * stride_samples`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

/// Frame stride of wav2vec 2.0-style convolutional encoders at 16 kHz.
pub const DEFAULT_STRIDE_SAMPLES: u64 = 320;
/// Center of the first frame: half of the 400-sample receptive field.
pub const DEFAULT_OFFSET_SAMPLES: u64 = 200;

#[derive(Debug, Error)]
pub enum UnitsError {
    #[error("line {line}: invalid unit record: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("utterance {utterance_id:?}: unsupported format_version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { utterance_id: String, found: u32 },
    #[error("utterance {utterance_id:?}: {reason}")]
    Invalid {
        utterance_id: String,
        reason: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSequence {
    pub utterance_id: String,
    pub model_id: String,
    pub num_groups: usize,
    pub group_size: usize,
    pub stride_samples: u64,
    pub offset_samples: u64,
    pub frames: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct UnitRecord {
    format_version: u32,
    #[serde(flatten)]
    seq: UnitSequence,
}

impl UnitSequence {
    /// Size of the concatenated unit inventory, `num_groups * group_size`.
    pub fn omega_size(&self) -> usize {
        self.num_groups * self.group_size
    }

    #[inline]
    pub fn frame_center(&self, t: usize) -> u64 {
        self.offset_samples + t as u64 * self.stride_samples
    }

    /// Global unit id of group `g`'s local index: `g * group_size + local`.
    #[inline]
    pub fn global_unit(&self, group: usize, local: u32) -> usize {
        group * self.group_size + local as usize
    }

    pub fn validate(&self) -> Result<(), UnitsError> {
        let invalid = |reason: String| UnitsError::Invalid {
            utterance_id: self.utterance_id.clone(),
            reason,
        };
        if self.num_groups == 0 || self.group_size == 0 || self.stride_samples == 0 {
            return Err(invalid(
                "num_groups, group_size and stride_samples must be positive".into(),
            ));
        }
        for (t, frame) in self.frames.iter().enumerate() {
            if frame.len() != self.num_groups {
                return Err(invalid(format!(
                    "frame {t} has {} entries, expected {}",
                    frame.len(),
                    self.num_groups
                )));
            }
            if let Some(&bad) = frame.iter().find(|&&i| i as usize >= self.group_size) {
                return Err(invalid(format!(
                    "frame {t} index {bad} outside [0, {})",
                    self.group_size
                )));
            }
        }
        Ok(())
    }
}

/// Reads every record of an interchange stream, validating each one.
pub fn read_units<R: BufRead>(reader: R) -> Result<Vec<UnitSequence>, UnitsError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_text = line?;
        if line_text.trim().is_empty() {
            continue;
        }
        let record: UnitRecord =
            serde_json::from_str(&line_text).map_err(|source| UnitsError::Json {
                line: idx + 1,
                source,
            })?;
        if record.format_version != FORMAT_VERSION {
            return Err(UnitsError::UnsupportedVersion {
                utterance_id: record.seq.utterance_id,
                found: record.format_version,
            });
        }
        record.seq.validate()?;
        out.push(record.seq);
    }
    Ok(out)
}

pub fn write_units<W: Write>(mut writer: W, seqs: &[UnitSequence]) -> Result<(), UnitsError> {
    for seq in seqs {
        seq.validate()?;
        let record = UnitRecord {
            format_version: FORMAT_VERSION,
            seq: seq.clone(),
        };
        serde_json::to_writer(&mut writer, &record).map_err(|e| UnitsError::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
