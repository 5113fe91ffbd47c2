//! Scene templates: a scene inherits regions and attributes from another.

use std::collections::HashSet;

use crate::diagnostics::{Code, Diagnostic};
use crate::model::{GimlDocument, SceneDecl};

/// Merges one level: template regions first (a same-named child region
/// replaces the template's in place), then the child's own regions; child
/// scene attributes override the template's.
pub fn merge_template(scene: &SceneDecl, template: &SceneDecl) -> SceneDecl {
    let mut regions: Vec<_> = template
        .regions
        .iter()
        .map(|r| scene.region(&r.name).unwrap_or(r).clone())
        .collect();
    regions.extend(scene.regions.iter().filter(|r| template.region(&r.name).is_none()).cloned());
    macro_rules! pick {
        ($f:ident) => {
            scene.$f.clone().or_else(|| template.$f.clone())
        };
    }
    SceneDecl {
        name: scene.name.clone(),
        background_color: pick!(background_color),
        name_of_background_image: pick!(name_of_background_image),
        name_of_background_sound: pick!(name_of_background_sound),
        blackout_degree: pick!(blackout_degree),
        blackout_color: pick!(blackout_color),
        blocking_regions_during_blackout: pick!(blocking_regions_during_blackout),
        list_of_regions_to_disable: pick!(list_of_regions_to_disable),
        name_of_region_enabled_after_all_regions_are_disabled: pick!(
            name_of_region_enabled_after_all_regions_are_disabled
        ),
        reset_after_enter: pick!(reset_after_enter),
        spotlight: pick!(spotlight),
        spotlight_radius: pick!(spotlight_radius),
        name_of_lists_switched_over_after_enter: pick!(name_of_lists_switched_over_after_enter),
        name_of_region_enabled_after_list_finished: pick!(name_of_region_enabled_after_list_finished),
        on_scene_changed: pick!(on_scene_changed),
        template_ref: scene.template_ref.clone(),
        regions,
        unknown: scene.unknown.clone(),
        spans: scene.spans.clone(),
    }
}

/// Resolves a scene's whole template chain. A missing template or a cycle
/// yields a diagnostic and the scene merged as far as the chain allows.
pub fn resolve_scene(doc: &GimlDocument, scene: &SceneDecl) -> (SceneDecl, Option<Diagnostic>) {
    let path = format!("settings/scenes/scene[{}]", scene.name);
    let pos = scene.spans.attr("TEMPLATE");
    let mut chain = vec![scene];
    let mut seen: HashSet<&str> = HashSet::from([scene.name.as_str()]);
    let mut problem = None;
    let mut cur = scene;
    while let Some(t) = cur.template_ref.as_deref() {
        match doc.scene(t) {
            None => {
                problem = Some(Diagnostic::error(
                    Code::TemplateMissing,
                    &path,
                    pos,
                    format!("template scene `{t}` does not exist"),
                ));
                break;
            }
            Some(next) if !seen.insert(next.name.as_str()) => {
                problem = Some(Diagnostic::error(
                    Code::TemplateCycle,
                    &path,
                    pos,
                    format!("template chain of `{}` loops back to `{}`", scene.name, next.name),
                ));
                break;
            }
            Some(next) => {
                chain.push(next);
                cur = next;
            }
        }
    }
    let mut merged = chain.pop().expect("chain has the scene itself").clone();
    while let Some(child) = chain.pop() {
        merged = merge_template(child, &merged);
    }
    (merged, problem)
}

/// The document with every scene's template chain merged in.
pub fn apply_templates(doc: &GimlDocument) -> (GimlDocument, Vec<Diagnostic>) {
    let mut out = doc.clone();
    let mut diags = Vec::new();
    for (i, scene) in doc.scenes.iter().enumerate() {
        if scene.template_ref.is_none() {
            continue;
        }
        let (merged, d) = resolve_scene(doc, scene);
        out.scenes[i] = merged;
        diags.extend(d);
    }
    (out, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RegionDecl;

    fn scene(name: &str, regions: &[&str], template: Option<&str>) -> SceneDecl {
        SceneDecl {
            name: name.into(),
            template_ref: template.map(Into::into),
            regions: regions.iter().map(|r| RegionDecl::new(*r)).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn template_regions_come_first() {
        let merged = merge_template(&scene("c", &["x"], Some("t")), &scene("t", &["a", "b"], None));
        let names: Vec<_> = merged.regions.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "x"]);
    }

    #[test]
    fn child_region_replaces_template_region() {
        let mut child = scene("c", &["b"], Some("t"));
        child.regions[0].enabled = false;
        let merged = merge_template(&child, &scene("t", &["a", "b"], None));
        assert_eq!(merged.regions.len(), 2);
        assert!(!merged.region("b").unwrap().enabled);
    }

    #[test]
    fn child_attributes_override() {
        let mut child = scene("c", &[], Some("t"));
        child.reset_after_enter = Some(true);
        let mut t = scene("t", &[], None);
        t.reset_after_enter = Some(false);
        t.blackout_degree = Some(128);
        let merged = merge_template(&child, &t);
        assert_eq!(merged.reset_after_enter, Some(true));
        assert_eq!(merged.blackout_degree, Some(128));
    }

    #[test]
    fn missing_and_cyclic_templates() {
        let mut doc = GimlDocument::default();
        doc.scenes = vec![scene("a", &[], Some("b")), scene("b", &[], Some("a")), scene("c", &[], Some("zzz"))];
        let (_, diags) = apply_templates(&doc);
        let codes: Vec<_> = diags.iter().map(|d| d.code).collect();
        assert_eq!(codes, [Code::TemplateCycle, Code::TemplateCycle, Code::TemplateMissing]);
    }

    #[test]
    fn chains_merge_transitively() {
        let mut doc = GimlDocument::default();
        doc.scenes = vec![scene("base", &["a"], None), scene("mid", &["b"], Some("base")), scene("leaf", &["c"], Some("mid"))];
        let (merged, diags) = apply_templates(&doc);
        assert!(diags.is_empty());
        let names: Vec<_> = merged.scenes[2].regions.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "c"]);
    }
}
