//! Resource path resolution. No filesystem access happens here.

use std::path::{Path, PathBuf};

use crate::model::GimlDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResourceKind {
    Image,
    Sound,
    Movie,
}

fn is_windows_absolute(p: &str) -> bool {
    let b = p.as_bytes();
    (b.len() >= 3 && b[0].is_ascii_alphabetic() && b[1] == b':' && (b[2] == b'\\' || b[2] == b'/'))
        || p.starts_with("\\\\")
}

/// Absolute in either Windows or POSIX form.
pub fn is_absolute(p: &str) -> bool {
    is_windows_absolute(p) || p.starts_with('/') || p.starts_with('\\')
}

fn join(parts: &[&str]) -> String {
    let windows = parts.first().is_some_and(|p| is_windows_absolute(p) || (p.contains('\\') && !p.contains('/')));
    let sep = if windows { '\\' } else { '/' };
    let mut out = String::new();
    for part in parts.iter().filter(|p| !p.is_empty()) {
        let part: String = part.chars().map(|c| if c == '\\' || c == '/' { sep } else { c }).collect();
        if !out.is_empty() && !out.ends_with(sep) {
            out.push(sep);
        }
        out.push_str(if out.is_empty() { &part } else { part.trim_start_matches(sep) });
    }
    out
}

fn container_folder(doc: &GimlDocument, kind: ResourceKind) -> Option<&str> {
    match kind {
        ResourceKind::Image => doc.images_container.folder.as_deref(),
        ResourceKind::Sound => doc.sounds_container.folder.as_deref(),
        ResourceKind::Movie => doc.movies_container.folder.as_deref(),
    }
    .map(str::trim)
    .filter(|f| !f.is_empty())
}

/// Joins a declared path under the container folder, then the settings
/// folder. Absolute paths are returned unchanged; with no folders at all the
/// result stays relative to the working directory. The separator follows the
/// base folder's style.
pub fn resolve_resource_path(doc: &GimlDocument, kind: ResourceKind, path: &str) -> String {
    if is_absolute(path) {
        return path.to_string();
    }
    let mut parts: Vec<&str> = Vec::new();
    match container_folder(doc, kind) {
        Some(c) if is_absolute(c) => parts.push(c),
        c => {
            if let Some(s) = doc.settings.folder.as_deref().map(str::trim).filter(|f| !f.is_empty()) {
                parts.push(s);
            }
            parts.extend(c);
        }
    }
    parts.push(path);
    join(&parts)
}

/// Host filesystem location of a resource. `asset_root`, when given, takes
/// the place of the settings folder.
pub fn host_resource_path(doc: &GimlDocument, kind: ResourceKind, path: &str, asset_root: Option<&Path>) -> PathBuf {
    let native = |s: &str| -> PathBuf { s.split(['\\', '/']).filter(|p| !p.is_empty()).collect() };
    match asset_root {
        Some(root) if !is_absolute(path) => {
            let mut out = root.to_path_buf();
            if let Some(c) = container_folder(doc, kind).filter(|c| !is_absolute(c)) {
                out.push(native(c));
            }
            out.push(native(path));
            out
        }
        _ => {
            let resolved = resolve_resource_path(doc, kind, path);
            if resolved.starts_with('/') {
                PathBuf::from("/").join(native(&resolved))
            } else {
                PathBuf::from(resolved.replace('\\', std::path::MAIN_SEPARATOR_STR))
            }
        }
    }
}
