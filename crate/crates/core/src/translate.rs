//! Keyword translation between the four languages. Only registry tokens are
//! rewritten; everything else (names, paths, texts, numbers, layout,
//! comments) is copied byte for byte.

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::diagnostics::{count_errors, Diagnostic};
use crate::parse::{parse, ParseError};
use crate::registry::{registry, KeywordKind, Language, BOOLEAN, BOOLEAN_ATTRIBUTES, REGION_STATE, ROOT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("source has {} error(s); translation refused", count_errors(.0))]
    Invalid(Vec<Diagnostic>),
}

fn owners(element: &str) -> &'static [&'static str] {
    match element {
        "SETTINGS" => &["SETTINGS"],
        "IMAGES" => &["IMAGES"],
        "SOUNDS" => &["SOUNDS"],
        "MOVIES" => &["MOVIES"],
        "IMAGE" => &["IMAGE"],
        "SOUND" => &["SOUND"],
        "MOVIE" => &["MOVIE"],
        "LIST" => &["LIST"],
        "SCENES" => &["SCENES"],
        "SCENE" => &["SCENE"],
        "REGION" => &["REGION", REGION_STATE],
        "ACTIVATION" | "REACTION" => &[REGION_STATE],
        _ => &[],
    }
}

/// Rewrites `text` into `target`. The source must parse without errors
/// (warnings are fine).
pub fn translate(text: &str, target: Language, hint: Option<Language>) -> Result<String, TranslateError> {
    let (doc, diags) = parse(text, hint)?;
    if count_errors(&diags) > 0 {
        return Err(TranslateError::Invalid(diags));
    }
    let source = doc.language();
    let body_start = text.len() - text.strip_prefix('\u{FEFF}').unwrap_or(text).len();
    let body = &text[body_start..];
    let xml = Document::parse(body).expect("already parsed once");
    let mut edits: Vec<(std::ops::Range<usize>, String)> = Vec::new();
    collect(xml.root_element(), body, source, target, &mut edits);
    edits.sort_by_key(|(r, _)| std::cmp::Reverse(r.start));
    let mut out = body.to_string();
    for (range, replacement) in edits {
        out.replace_range(range, &replacement);
    }
    Ok(format!("{}{}", &text[..body_start], out))
}

fn collect(node: Node<'_, '_>, src: &str, from: Language, to: Language, edits: &mut Vec<(std::ops::Range<usize>, String)>) {
    let reg = registry();
    let name = node.tag_name().name();
    let element = reg.lookup(name, from, KeywordKind::Element, ROOT);
    if let Some(id) = element {
        let spelled = reg.render(id, to).expect("registry id").to_string();
        let range = node.range();
        let start = range.start + 1;
        if src[start..].starts_with(name) {
            edits.push((start..start + name.len(), spelled.clone()));
        }
        let raw = &src[range.clone()];
        if !raw.ends_with("/>") {
            if let Some(close) = raw.rfind("</") {
                let s = range.start + close + 2;
                if src[s..].starts_with(name) {
                    edits.push((s..s + name.len(), spelled));
                }
            }
        }
        for a in node.attributes() {
            let Some(attr) = owners(id).iter().find_map(|o| reg.lookup(a.name(), from, KeywordKind::Attribute, o)) else {
                continue;
            };
            let q = a.range_qname();
            if a.namespace().is_none() {
                edits.push((q, reg.render(attr, to).expect("registry id").to_string()));
            }
            let vr = a.range_value();
            let raw_value = &src[vr.clone()];
            let token = raw_value.trim();
            let offset = vr.start + (raw_value.len() - raw_value.trim_start().len());
            let replacement = if attr == "LANGUAGE" {
                Some(to.code().to_string())
            } else {
                reg.lookup(token, from, KeywordKind::EnumValue, attr)
                    .or_else(|| {
                        BOOLEAN_ATTRIBUTES
                            .contains(&attr)
                            .then(|| reg.lookup(token, from, KeywordKind::EnumValue, BOOLEAN))
                            .flatten()
                    })
                    .map(|v| reg.render(v, to).expect("registry id").to_string())
            };
            if let Some(r) = replacement {
                edits.push((offset..offset + token.len(), r));
            }
        }
    }
    for child in node.children().filter(|n| n.is_element()) {
        collect(child, src, from, to, edits);
    }
}
