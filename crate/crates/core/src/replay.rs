//! Offline replay of a gaze trace through the engine.

use serde::Serialize;

use crate::engine::{CallbackRegistry, Engine, EngineConfig, EngineError, EngineEvent, GazePoint, InputTick};
use crate::gaze::GazeSample;
use crate::model::GimlDocument;

/// A trace sample with the scene that was live and the regions it hit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub sample: GazeSample,
    pub scene: String,
    pub hits: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub events: Vec<EngineEvent>,
    pub records: Vec<SampleRecord>,
    /// The document after template merging, for AOI rows.
    pub document: GimlDocument,
    /// The run ended on `EngineStopped` before the trace did.
    pub stopped_early: bool,
    /// An engine error that cut the run short; events up to it are kept.
    pub failure: Option<String>,
}

/// Start of the tick containing `t_ms`.
pub fn snap(t_ms: f64, tick_ms: u64) -> u64 {
    let tick = tick_ms.max(1);
    (t_ms.max(0.0) as u64) / tick * tick
}

/// Steps the engine at every tick from the first to the last sample. The last
/// sample of a tick drives it; ticks without samples hold the previous gaze.
/// Invalid samples count as gaze outside every region.
pub fn replay(
    doc: &GimlDocument,
    config: EngineConfig,
    callbacks: CallbackRegistry,
    samples: &[GazeSample],
) -> Result<ReplayOutput, EngineError> {
    let tick_ms = config.tick_ms.max(1);
    let (mut engine, start_events) = Engine::start(doc, config, callbacks)?;
    let document = engine.document().clone();
    if samples.is_empty() {
        return Ok(ReplayOutput { events: Vec::new(), records: Vec::new(), document, stopped_early: false, failure: None });
    }
    let mut events = start_events;
    let mut records = Vec::with_capacity(samples.len());
    let last_tick = snap(samples[samples.len() - 1].t_ms, tick_ms);
    let mut tick = snap(samples[0].t_ms, tick_ms);
    let mut held: Option<GazePoint> = None;
    let mut idx = 0;
    let mut stopped_early = false;
    while tick <= last_tick {
        let mut keys = Vec::new();
        while idx < samples.len() && snap(samples[idx].t_ms, tick_ms) <= tick {
            let s = &samples[idx];
            let hits = if s.valid { engine.hits_at((s.x, s.y)) } else { Vec::new() };
            records.push(SampleRecord { sample: s.clone(), scene: engine.current_scene().to_string(), hits });
            held = s.valid.then(|| GazePoint::new(s.x, s.y));
            keys.extend(s.key.clone());
            idx += 1;
        }
        match engine.step(&InputTick { t_ms: tick, gaze: held, keys }) {
            Ok(ev) => events.extend(ev),
            Err(e) => return Ok(ReplayOutput { events, records, document, stopped_early: false, failure: Some(e.to_string()) }),
        }
        if engine.is_stopped() {
            stopped_early = true;
            break;
        }
        tick += tick_ms;
    }
    if !stopped_early {
        events.extend(engine.stop(last_tick));
    }
    Ok(ReplayOutput { events, records, document, stopped_early, failure: None })
}
