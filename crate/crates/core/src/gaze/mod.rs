//! Gaze traces, fixation detection, AOI statistics and CSV outputs.

pub mod aoi;
pub mod csv_out;
pub mod fixation;
pub mod trace;

pub use aoi::{accumulate_aoi, AoiRow};
pub use csv_out::{write_aoi, write_events, write_fixations, write_saccades, write_samples, RunHeader};
pub use fixation::{detect_fixations, saccades_between, Fixation, IdtParams, Saccade};
pub use trace::{parse_trace, read_trace, GazeSample, Trace, TraceError};
