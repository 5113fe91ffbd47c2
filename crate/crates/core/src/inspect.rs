//! Stable textual dump of a canonical document.

use crate::model::GimlDocument;

/// A language line, structure counts, then the canonical JSON. Everything
/// after the first line is language independent.
pub fn inspect(doc: &GimlDocument) -> String {
    let resources = doc.images.len() + doc.sounds.len() + doc.movies.len();
    format!(
        "language: {}\nscenes: {}\nregions: {}\nstate overlays: {}\nresources: {}\nlists: {}\n{}\n",
        doc.language(),
        doc.scenes.len(),
        doc.region_count(),
        doc.overlay_count(),
        resources,
        doc.lists.len(),
        doc.canonical_json()
    )
}

/// `inspect` without its language line.
pub fn inspect_body(doc: &GimlDocument) -> String {
    let full = inspect(doc);
    full.split_once('\n').map(|(_, rest)| rest.to_string()).unwrap_or_default()
}
