//! Virtual sound playback: only durations matter.

use std::path::Path;

/// Length of an uncompressed WAV file in milliseconds, read from its header.
pub fn probe_wav_ms(path: &Path) -> Option<u64> {
    let reader = hound::WavReader::open(path).ok()?;
    let spec = reader.spec();
    if spec.sample_rate == 0 {
        return None;
    }
    Some(u64::from(reader.duration()) * 1000 / u64::from(spec.sample_rate))
}

/// Where a sound's duration came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DurationSource {
    Probe,
    Manifest,
    Default,
}
