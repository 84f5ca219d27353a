//! Assignment of quantizer frames to phone segments by frame-center
//! containment in the half-open segment interval.

use thiserror::Error;

use super::phn::{PhoneAlignment, PhoneSegment};
use super::units::UnitSequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignError {
    #[error("alignment is for utterance {alignment:?} but units are for {units:?}")]
    UtteranceMismatch { alignment: String, units: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameAssignment<'a> {
    pub category: &'a str,
    pub frame: usize,
}

#[derive(Debug, Clone, Default)]
pub struct FrameAlignment<'a> {
    /// Assigned frames in increasing frame order.
    pub assignments: Vec<FrameAssignment<'a>>,
    /// Segments that contain no frame center.
    pub skipped: Vec<&'a PhoneSegment>,
}

/// Index of the first frame whose center is `>= sample`.
#[inline]
fn first_frame_at_or_after(sample: u64, offset: u64, stride: u64) -> u64 {
    if sample <= offset {
        0
    } else {
        (sample - offset).div_ceil(stride)
    }
}

pub fn align_frames<'a>(
    alignment: &'a PhoneAlignment,
    units: &UnitSequence,
) -> Result<FrameAlignment<'a>, AlignError> {
    if alignment.utterance_id != units.utterance_id {
        return Err(AlignError::UtteranceMismatch {
            alignment: alignment.utterance_id.clone(),
            units: units.utterance_id.clone(),
        });
    }
    let n_frames = units.frames.len() as u64;
    let mut out = FrameAlignment::default();
    for seg in &alignment.segments {
        let lo = first_frame_at_or_after(seg.begin, units.offset_samples, units.stride_samples)
            .min(n_frames);
        let hi = first_frame_at_or_after(seg.end, units.offset_samples, units.stride_samples)
            .min(n_frames);
        if lo >= hi {
            out.skipped.push(seg);
            continue;
        }
        out.assignments.extend((lo..hi).map(|t| FrameAssignment {
            category: &seg.label,
            frame: t as usize,
        }));
    }
    Ok(out)
}
