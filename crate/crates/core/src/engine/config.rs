use std::collections::HashMap;
use std::path::PathBuf;

/// Runtime settings that are not part of the document.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Continuous dwell needed to start a reaction.
    pub dwell_ms: u64,
    pub tick_ms: u64,
    pub seed: u64,
    /// Validation errors and missing resources become fatal at init.
    pub strict: bool,
    /// Where resource files live; replaces the settings folder.
    pub asset_root: Option<PathBuf>,
    /// Sound durations by resource name, used when a file cannot be probed.
    pub sound_durations_ms: HashMap<String, u64>,
    /// Duration assumed for a sound with no probe and no manifest entry.
    pub default_sound_ms: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            dwell_ms: 1000,
            tick_ms: 10,
            seed: 0,
            strict: false,
            asset_root: None,
            sound_durations_ms: HashMap::new(),
            default_sound_ms: 2000,
        }
    }
}

impl EngineConfig {
    pub fn with_seed(seed: u64) -> Self {
        EngineConfig { seed, ..Default::default() }
    }
}
