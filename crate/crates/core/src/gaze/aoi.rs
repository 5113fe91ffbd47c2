use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::engine::{EngineEvent, EventKind};
use crate::model::GimlDocument;
use crate::replay::SampleRecord;

/// Gaze statistics of one region over a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AoiRow {
    pub scene: String,
    pub region: String,
    pub dwell_ms: f64,
    pub entry_count: u32,
    pub first_entry_ms: Option<f64>,
    pub reaction_count: u32,
}

/// One row per region of every scene the run entered, in declaration order.
/// Each sample's hits hold until the next sample.
pub fn accumulate_aoi(doc: &GimlDocument, records: &[SampleRecord], events: &[EngineEvent]) -> Vec<AoiRow> {
    let shown: HashSet<&str> =
        events.iter().filter(|e| e.kind == EventKind::SceneEntered).map(|e| e.scene.as_str()).collect();
    let mut rows: Vec<AoiRow> = doc
        .scenes
        .iter()
        .filter(|s| shown.contains(s.name.as_str()))
        .flat_map(|s| {
            s.regions.iter().map(|r| AoiRow {
                scene: s.name.clone(),
                region: r.name.clone(),
                dwell_ms: 0.0,
                entry_count: 0,
                first_entry_ms: None,
                reaction_count: 0,
            })
        })
        .collect();
    let index: HashMap<(String, String), usize> =
        rows.iter().enumerate().map(|(i, r)| ((r.scene.clone(), r.region.clone()), i)).collect();
    let lookup = |scene: &str, region: &str| index.get(&(scene.to_string(), region.to_string())).copied();

    let mut inside: HashSet<usize> = HashSet::new();
    for (k, rec) in records.iter().enumerate() {
        let now: HashSet<usize> = rec.hits.iter().filter_map(|h| lookup(&rec.scene, h)).collect();
        let span = records.get(k + 1).map_or(0.0, |next| next.sample.t_ms - rec.sample.t_ms);
        for &i in &now {
            rows[i].dwell_ms += span;
            if !inside.contains(&i) {
                rows[i].entry_count += 1;
                rows[i].first_entry_ms.get_or_insert(rec.sample.t_ms);
            }
        }
        inside = now;
    }
    for ev in events.iter().filter(|e| e.kind == EventKind::ReactionStarted) {
        if let Some(i) = ev.region.as_deref().and_then(|r| lookup(&ev.scene, r)) {
            rows[i].reaction_count += 1;
        }
    }
    rows
}
