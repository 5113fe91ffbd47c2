//! Inputs shared by the benchmarks.

use giml_core::corpus::fixture;
use giml_core::engine::{GazePoint, InputTick};
use giml_core::{parse, GazeSample, GimlDocument};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn navigation_text() -> &'static str {
    fixture("navigation.giml").expect("corpus has the navigation document")
}

pub fn navigation() -> GimlDocument {
    parse(navigation_text(), None).expect("navigation parses").0
}

/// Gaze that alternates between the first region and empty space every
/// 1.6 s, one tick per 10 ms.
pub fn dwell_ticks(count: usize) -> Vec<InputTick> {
    (0..count)
        .map(|i| {
            let t = i as u64 * 10;
            let inside = (t / 1600) % 2 == 0;
            let p = if inside { GazePoint::new(300.0, 200.0) } else { GazePoint::new(800.0, 700.0) };
            InputTick { t_ms: t, gaze: Some(p), keys: Vec::new() }
        })
        .collect()
}

/// A noisy trace of fixations joined by jumps, sampled at 60 Hz.
pub fn trace(len: usize, seed: u64) -> Vec<GazeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centre = (500.0, 400.0);
    (0..len)
        .map(|i| {
            if rng.random_range(0..30) == 0 {
                centre = (rng.random_range(0.0..1024.0), rng.random_range(0.0..768.0));
            }
            let x = centre.0 + rng.random_range(-15.0..15.0);
            let y = centre.1 + rng.random_range(-15.0..15.0);
            GazeSample::new(i as f64 * 1000.0 / 60.0, x, y)
        })
        .collect()
}
