#![allow(dead_code)]

use giml_core::corpus::fixture;
use giml_core::engine::{CallbackRegistry, Engine, EngineConfig, EngineEvent, EventKind, GazePoint, InputTick};
use giml_core::{parse, GimlDocument};

pub const TICK: u64 = 10;

pub fn doc_from(text: &str) -> GimlDocument {
    let (doc, diags) = parse(text, None).unwrap_or_else(|e| panic!("{e}"));
    assert!(diags.iter().all(|d| !d.is_error()), "{diags:?}");
    doc
}

pub fn fixture_doc(name: &str) -> GimlDocument {
    doc_from(fixture(name).unwrap_or_else(|| panic!("no fixture {name}")))
}

/// Gaze over time: `(until_ms, point)` segments, each running from the end
/// of the previous one.
pub type Script<'a> = &'a [(u64, Option<(f64, f64)>)];

pub fn gaze_at(script: Script<'_>, t: u64) -> Option<(f64, f64)> {
    script.iter().find(|(until, _)| t < *until).and_then(|(_, p)| *p)
}

/// Runs a script every tick from 0 up to the last segment's end.
pub fn drive(doc: &GimlDocument, config: EngineConfig, script: Script<'_>) -> (Engine, Vec<EngineEvent>) {
    let end = script.last().map_or(0, |s| s.0);
    let (mut engine, mut events) = Engine::start(doc, config, CallbackRegistry::new()).expect("engine starts");
    let mut t = 0;
    while t < end {
        let gaze = gaze_at(script, t).map(|(x, y)| GazePoint::new(x, y));
        events.extend(engine.step(&InputTick { t_ms: t, gaze, keys: Vec::new() }).unwrap());
        t += TICK;
    }
    (engine, events)
}

pub fn of_kind(events: &[EngineEvent], kind: EventKind) -> Vec<&EngineEvent> {
    events.iter().filter(|e| e.kind == kind).collect()
}

/// `Kind(scene)` or `Kind(scene/region)` labels, skipping callbacks and
/// warnings.
pub fn labels(events: &[EngineEvent]) -> Vec<String> {
    events
        .iter()
        .filter(|e| !matches!(e.kind, EventKind::CallbackInvoked | EventKind::Warning))
        .map(|e| match &e.region {
            Some(r) => format!("{}({}/{})", e.kind, e.scene, r),
            None => format!("{}({})", e.kind, e.scene),
        })
        .collect()
}

pub const INSIDE: Option<(f64, f64)> = Some((300.0, 200.0));
pub const OUTSIDE: Option<(f64, f64)> = Some((800.0, 700.0));

/// One gaze segment: duration and point; `None` is an invalid sample.
pub type Segment = (u64, Option<(f64, f64)>);

/// Runs `segments` tick by tick and checks the state-machine invariants after
/// every tick. Returns the full event log.
pub fn checked_run(doc: &GimlDocument, seed: u64, segments: &[Segment]) -> Result<Vec<EngineEvent>, String> {
    use giml_core::engine::RegionState;
    use std::collections::HashMap;

    let config = EngineConfig::with_seed(seed);
    let dwell = config.dwell_ms;
    let (mut engine, mut log) = Engine::start(doc, config, CallbackRegistry::new()).map_err(|e| e.to_string())?;
    let merged = engine.document().clone();
    let names: Vec<(String, String, u64)> = merged
        .scenes
        .iter()
        .flat_map(|s| s.regions.iter().map(|r| (s.name.clone(), r.name.clone(), r.dwell_time_ms.unwrap_or(dwell))))
        .collect();
    // (scene, region) -> tick of ReactionStarted, cleared once gaze is seen outside.
    let mut awaiting_leave: HashMap<(String, String), u64> = HashMap::new();
    let mut t = 0;
    for &(duration, point) in segments {
        let end = t + duration;
        while t < end {
            let scene = engine.current_scene().to_string();
            let hits = point.map(|p| engine.hits_at(p)).unwrap_or_default();
            awaiting_leave.retain(|(s, r), _| !(*s == scene && !hits.contains(r)));
            let gaze = point.map(|(x, y)| GazePoint::new(x, y));
            let events = engine.step(&InputTick { t_ms: t, gaze, keys: Vec::new() }).map_err(|e| e.to_string())?;
            for e in &events {
                if e.t_ms != t {
                    return Err(format!("event {e} stamped outside tick {t}"));
                }
                let key = (e.scene.clone(), e.region.clone().unwrap_or_default());
                match e.kind {
                    EventKind::ReactionStarted => {
                        awaiting_leave.insert(key, t);
                    }
                    EventKind::ReactionFinished => {
                        let disabled_now = events.iter().any(|d| {
                            d.kind == EventKind::RegionDisabled && d.region == e.region && d.scene == e.scene
                        });
                        if awaiting_leave.contains_key(&key) && !disabled_now {
                            return Err(format!("{e} before gaze left the region"));
                        }
                        awaiting_leave.remove(&key);
                    }
                    _ => {}
                }
            }
            log.extend(events);
            for (s, r, threshold) in &names {
                let (state, dwell_ms, enabled) = engine.region_status(s, r).expect("declared region");
                if dwell_ms > *threshold {
                    return Err(format!("{s}/{r} dwell {dwell_ms} above {threshold} at {t}"));
                }
                if !enabled && (state != RegionState::Normal || dwell_ms != 0) {
                    return Err(format!("{s}/{r} disabled but {state:?} dwell {dwell_ms} at {t}"));
                }
            }
            t += TICK;
        }
    }
    log.extend(engine.stop(t));
    check_log(&log)?;
    Ok(log)
}

/// Whole-log invariants: legal region transitions, monotone time, scene
/// bracketing, transition atomicity and reaction pairing.
pub fn check_log(log: &[EngineEvent]) -> Result<(), String> {
    use std::collections::HashSet;

    if log.windows(2).any(|w| w[1].t_ms < w[0].t_ms) {
        return Err("timestamps go backwards".into());
    }
    #[derive(Clone, Copy, PartialEq, Debug)]
    enum S {
        Normal,
        Activated,
        Reacting,
        Finishing,
    }
    let mut states: std::collections::HashMap<(String, String), S> = std::collections::HashMap::new();
    for e in log {
        let key = (e.scene.clone(), e.region.clone().unwrap_or_default());
        let from = *states.get(&key).unwrap_or(&S::Normal);
        let to = match (e.kind, from) {
            (EventKind::RegionActivated, S::Normal) => S::Activated,
            (EventKind::ReactionStarted, S::Activated) => S::Reacting,
            (EventKind::ReactionFinished, S::Reacting) => S::Finishing,
            (EventKind::ReturnedToNormal, S::Activated | S::Finishing) => S::Normal,
            (
                EventKind::RegionActivated
                | EventKind::ReactionStarted
                | EventKind::ReactionFinished
                | EventKind::ReturnedToNormal,
                _,
            ) => return Err(format!("illegal transition {e} from {from:?}")),
            _ => {
                if from == S::Finishing {
                    return Err(format!("{e} between ReactionFinished and ReturnedToNormal"));
                }
                continue;
            }
        };
        states.insert(key, to);
    }

    let mut current: Option<&str> = None;
    let mut reacting: HashSet<(String, String)> = HashSet::new();
    let mut in_transition = false;
    for e in log {
        if in_transition && e.kind != EventKind::SceneEntered {
            return Err(format!("{e} between SceneLeft and SceneEntered"));
        }
        match e.kind {
            EventKind::SceneEntered => {
                if current.is_some() && !in_transition {
                    return Err(format!("{e} without SceneLeft"));
                }
                current = Some(&e.scene);
                in_transition = false;
            }
            EventKind::SceneLeft => {
                if current != Some(e.scene.as_str()) {
                    return Err(format!("{e} does not match entered scene {current:?}"));
                }
                in_transition = true;
            }
            EventKind::ReactionStarted => {
                if !reacting.insert((e.scene.clone(), e.region.clone().unwrap_or_default())) {
                    return Err(format!("{e} while already reacting"));
                }
            }
            EventKind::ReactionFinished => {
                if !reacting.remove(&(e.scene.clone(), e.region.clone().unwrap_or_default())) {
                    return Err(format!("{e} without ReactionStarted"));
                }
            }
            _ => {}
        }
    }
    match log.last() {
        Some(last) if last.kind == EventKind::EngineStopped => Ok(()),
        _ if reacting.is_empty() => Ok(()),
        _ => Err(format!("unpaired reactions {reacting:?}")),
    }
}

/// Candidate gaze points: every region centre of the document plus misses.
pub fn probe_points(doc: &GimlDocument) -> Vec<Option<(f64, f64)>> {
    let mut pts = vec![None, Some((-50.0, -50.0)), Some((1023.0, 767.0))];
    for s in &doc.scenes {
        for r in &s.regions {
            if let (Ok(x), Ok(y)) = (r.location_of_center_x.raw.parse::<f64>(), r.location_of_center_y.raw.parse::<f64>()) {
                pts.push(Some((x, y)));
            }
        }
    }
    pts
}

/// A reproducible random gaze script of about `ticks` ticks.
pub fn random_segments(doc: &GimlDocument, seed: u64, ticks: u64) -> Vec<Segment> {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts = probe_points(doc);
    let mut out = Vec::new();
    let mut total = 0;
    while total < ticks * TICK {
        let d = rng.random_range(1..=180u64) * TICK;
        let p = if rng.random_range(0..6) == 0 {
            Some((rng.random_range(0.0..1024.0), rng.random_range(0.0..768.0)))
        } else {
            pts[rng.random_range(0..pts.len())]
        };
        out.push((d, p));
        total += d;
    }
    out
}

/// A 100 Hz trace: `(until_ms, point)` segments as in [`Script`].
pub fn trace_from(script: Script<'_>) -> Vec<giml_core::GazeSample> {
    let end = script.last().map_or(0, |s| s.0);
    (0..end)
        .step_by(TICK as usize)
        .map(|t| match gaze_at(script, t) {
            Some((x, y)) => giml_core::GazeSample::new(t as f64, x, y),
            None => giml_core::GazeSample::invalid(t as f64),
        })
        .collect()
}

/// Reference I-DT: for each start, grow the window sample by sample while the
/// dispersion stays under the threshold, recomputing it from scratch.
pub fn idt_oracle(samples: &[giml_core::GazeSample], p: giml_core::IdtParams) -> Vec<giml_core::Fixation> {
    fn dispersion(w: &[giml_core::GazeSample]) -> f64 {
        let fold = |f: fn(&giml_core::GazeSample) -> f64| {
            w.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (x0, x1) = fold(|s| s.x);
        let (y0, y1) = fold(|s| s.y);
        (x1 - x0) + (y1 - y0)
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        if !samples[i].valid {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < samples.len() && samples[j + 1].valid && dispersion(&samples[i..=j + 1]) <= p.dispersion_px {
            j += 1;
        }
        if samples[j].t_ms - samples[i].t_ms >= p.min_duration_ms {
            let w = &samples[i..=j];
            let n = w.len() as f64;
            out.push(giml_core::Fixation {
                start_ms: samples[i].t_ms,
                end_ms: samples[j].t_ms,
                x: w.iter().map(|s| s.x).sum::<f64>() / n,
                y: w.iter().map(|s| s.y).sum::<f64>() / n,
                dispersion: dispersion(w),
                sample_count: w.len(),
            });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Clustered noisy gaze with blinks, for fixation tests.
pub fn synthetic_trace(seed: u64, len: usize) -> Vec<giml_core::GazeSample> {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len);
    let mut t = 0.0;
    let (mut cx, mut cy) = (500.0, 400.0);
    while out.len() < len {
        let stay = rng.random_range(1..60);
        let spread = rng.random_range(2.0..40.0);
        for _ in 0..stay {
            t += rng.random_range(4.0..20.0);
            if rng.random_range(0..40) == 0 {
                out.push(giml_core::GazeSample::invalid(t));
            } else {
                out.push(giml_core::GazeSample::new(
                    t,
                    cx + rng.random_range(-spread..spread),
                    cy + rng.random_range(-spread..spread),
                ));
            }
        }
        cx = rng.random_range(0.0..1024.0);
        cy = rng.random_range(0.0..768.0);
    }
    out.truncate(len);
    out
}

pub fn fixations_match(a: &[giml_core::Fixation], b: &[giml_core::Fixation]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(f, g)| {
            f.start_ms == g.start_ms
                && f.end_ms == g.end_ms
                && f.sample_count == g.sample_count
                && (f.x - g.x).abs() < 1e-6
                && (f.y - g.y).abs() < 1e-6
                && (f.dispersion - g.dispersion).abs() < 1e-9
        })
}

/// Navigation run: 1.6 s on region1, away, 1.6 s on the return region, away.
pub const NAVIGATION_SCRIPT: Script<'static> =
    &[(1600, INSIDE), (2000, OUTSIDE), (3600, INSIDE), (4000, OUTSIDE)];
