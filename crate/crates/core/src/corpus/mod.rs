//! Corpus ingestion: alignment and unit-sequence parsing, label reduction,
//! frame-to-phone assignment and bag accumulation.

pub mod align;
pub mod bag;
pub mod mapping;
pub mod phn;
pub mod units;

pub use align::{align_frames, AlignError, FrameAlignment, FrameAssignment};
pub use bag::{accumulate_bags, BagSet, UnitObservationBag};
pub use mapping::{apply_mapping, MappedLabel, MappingError, PhoneMapping, TIMIT_LABELS};
pub use phn::{parse_phn, PhnError, PhoneAlignment, PhoneSegment, DEFAULT_SAMPLE_RATE};
pub use units::{read_units, write_units, UnitSequence, UnitsError, FORMAT_VERSION};
