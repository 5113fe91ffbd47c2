//! Semantic checks over a parsed document.

use std::collections::BTreeMap;
use std::path::Path;

use crate::color::ColorValue;
use crate::diagnostics::{Code, Diagnostic, Severity, SourcePos};
use crate::expr::ValueExpr;
use crate::model::{ActionType, CompletionCondition, ElementType, GimlDocument, RegionDecl, SceneDecl, StateOverlay};
use crate::paths::{host_resource_path, ResourceKind};
use crate::template::apply_templates;

/// Parses and validates in one go: parse diagnostics followed by semantic
/// ones.
pub fn check_text(
    text: &str,
    hint: Option<crate::registry::Language>,
    asset_root: Option<&Path>,
) -> Result<(GimlDocument, Vec<Diagnostic>), crate::parse::ParseError> {
    let (doc, mut diags) = crate::parse::parse(text, hint)?;
    diags.extend(validate(&doc, asset_root));
    Ok((doc, diags))
}

/// Checks references, groups, templates and (when `asset_root` is given)
/// resource files. Deterministic: the same document yields the same list.
pub fn validate(doc: &GimlDocument, asset_root: Option<&Path>) -> Vec<Diagnostic> {
    let mut v = Validator { doc, out: Vec::new() };
    v.header();
    v.lists();
    let (merged, template_diags) = apply_templates(doc);
    v.out.extend(template_diags);
    for scene in &merged.scenes {
        v.scene(scene);
    }
    v.resources(asset_root);
    v.out
}

struct Validator<'a> {
    doc: &'a GimlDocument,
    out: Vec<Diagnostic>,
}

#[derive(Clone, Copy)]
enum RefKind {
    Image,
    Sound,
}

impl Validator<'_> {
    fn error(&mut self, code: Code, path: &str, pos: SourcePos, message: String) {
        self.out.push(Diagnostic::error(code, path, pos, message));
    }

    fn header(&mut self) {
        let h = &self.doc.scenes_header;
        let name = &h.name_of_default_scene;
        if !name.is_empty() && self.doc.scene(name).is_none() {
            self.error(
                Code::DanglingDefaultScene,
                "settings/scenes",
                h.spans.attr("NAME_OF_DEFAULT_SCENE"),
                format!("default scene `{name}` does not exist"),
            );
        }
        if let Some(p) = &h.name_of_pause_scene {
            if self.doc.scene(p).is_none() {
                self.error(
                    Code::DanglingSceneRef,
                    "settings/scenes",
                    h.spans.attr("NAME_OF_PAUSE_SCENE"),
                    format!("pause scene `{p}` does not exist"),
                );
            }
        }
    }

    fn lists(&mut self) {
        for list in &self.doc.lists {
            if list.element_type == ElementType::Colors {
                for value in &list.values {
                    if value.parse::<ColorValue>().is_err() {
                        self.error(
                            Code::InvalidValue,
                            &format!("settings/lists/list[{}]", list.name),
                            list.spans.attr("VALUES"),
                            format!("list value `{value}` is not a color"),
                        );
                    }
                }
            }
        }
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        let mut order = Vec::new();
        for (i, list) in self.doc.lists.iter().enumerate() {
            if let Some(g) = list.group.as_deref() {
                if !groups.contains_key(g) {
                    order.push(g);
                }
                groups.entry(g).or_default().push(i);
            }
        }
        for label in order {
            let members = &groups[label];
            let first = &self.doc.lists[members[0]];
            let path = format!("settings/lists/list[{}]", first.name);
            let lens: Vec<String> = members
                .iter()
                .map(|&m| format!("{} has {}", self.doc.lists[m].name, self.doc.lists[m].values.len()))
                .collect();
            if members.iter().any(|&m| self.doc.lists[m].values.len() != first.values.len()) {
                self.error(
                    Code::GroupLengthMismatch,
                    &path,
                    first.spans.attr("GROUP"),
                    format!("lists in group `{label}` differ in length ({})", lens.join(", ")),
                );
            }
            if let Some(&m) = members.iter().find(|&&m| self.doc.lists[m].drawing != first.drawing) {
                let other = &self.doc.lists[m];
                self.out.push(Diagnostic::warning(
                    Code::GroupDrawingConflict,
                    format!("settings/lists/list[{}]", other.name),
                    other.spans.attr("DRAWING"),
                    format!("list `{}` draws differently from `{}`; the group follows `{}`", other.name, first.name, first.name),
                ));
            }
        }
    }

    fn scene(&mut self, scene: &SceneDecl) {
        let path = format!("settings/scenes/scene[{}]", scene.name);
        let sp = &scene.spans;
        if let Some(img) = &scene.name_of_background_image {
            self.resource_name(RefKind::Image, img, &path, sp.attr("NAME_OF_BACKGROUND_IMAGE"));
        }
        if let Some(snd) = &scene.name_of_background_sound {
            self.resource_name(RefKind::Sound, snd, &path, sp.attr("NAME_OF_BACKGROUND_SOUND"));
        }
        for r in scene.list_of_regions_to_disable.iter().flatten() {
            self.region_ref(scene, r, &path, sp.attr("LIST_OF_REGIONS_TO_DISABLE"));
        }
        if let Some(r) = &scene.name_of_region_enabled_after_all_regions_are_disabled {
            self.region_ref(scene, r, &path, sp.attr("NAME_OF_REGION_ENABLED_AFTER_ALL_REGIONS_ARE_DISABLED"));
        }
        if let Some(r) = &scene.name_of_region_enabled_after_list_finished {
            self.region_ref(scene, r, &path, sp.attr("NAME_OF_REGION_ENABLED_AFTER_LIST_FINISHED"));
        }
        for l in scene.name_of_lists_switched_over_after_enter.iter().flatten() {
            if self.doc.list(l).is_none() {
                self.error(
                    Code::DanglingListRef,
                    &path,
                    sp.attr("NAME_OF_LISTS_SWITCHED_OVER_AFTER_ENTER"),
                    format!("list `{l}` does not exist"),
                );
            }
        }
        for region in &scene.regions {
            self.region(scene, region, &path);
        }
    }

    fn region_ref(&mut self, scene: &SceneDecl, name: &str, path: &str, pos: SourcePos) {
        if scene.region(name).is_none() {
            self.error(
                Code::DanglingRegionRef,
                path,
                pos,
                format!("region `{name}` does not exist in scene `{}`", scene.name),
            );
        }
    }

    fn resource_name(&mut self, kind: RefKind, name: &str, path: &str, pos: SourcePos) {
        let key = crate::registry::fold(name.trim());
        let (found, code, what) = match kind {
            RefKind::Image => (
                self.doc.image(&key).is_some() || self.doc.movie(&key).is_some(),
                Code::DanglingImageRef,
                "image",
            ),
            RefKind::Sound => (
                self.doc.sound(&key).is_some() || self.doc.movie(&key).is_some(),
                Code::DanglingSoundRef,
                "sound",
            ),
        };
        if !found {
            self.error(code, path, pos, format!("{what} `{}` is not declared", name.trim()));
        }
    }

    fn list_exists(&mut self, list: &str, path: &str, pos: SourcePos) -> bool {
        if self.doc.list(list).is_some() {
            return true;
        }
        self.error(Code::DanglingListRef, path, pos, format!("list `{list}` does not exist"));
        false
    }

    fn resource_value(&mut self, kind: RefKind, expr: &ValueExpr, path: &str, pos: SourcePos) {
        match expr {
            ValueExpr::Literal { value } => self.resource_name(kind, value, path, pos),
            ValueExpr::RandomChoice { alternatives } => {
                for a in alternatives {
                    self.resource_name(kind, a, path, pos);
                }
            }
            ValueExpr::ListRef { list } => {
                if self.list_exists(list, path, pos) {
                    let decl = self.doc.list(list).expect("checked above");
                    if decl.element_type == ElementType::Strings {
                        for value in decl.values.clone() {
                            self.resource_name(kind, &value, path, pos);
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn region(&mut self, scene: &SceneDecl, region: &RegionDecl, scene_path: &str) {
        let path = format!("{scene_path}/region[{}]", region.name);
        for (id, value) in region.geometry() {
            if let ValueExpr::ListRef { list } = &value.expr {
                self.list_exists(list, &path, region.spans.attr(id));
            }
        }
        if region.condition_of_reaction_completion == CompletionCondition::TimeElapsed
            && region.reaction_duration_ms.is_none()
        {
            self.error(
                Code::MissingReactionDuration,
                &path,
                region.spans.attr("CONDITION_OF_REACTION_COMPLETION"),
                "reaction completes on elapsed time but no reaction duration is set".into(),
            );
        }
        let slots = [("", Some(&region.base)), ("/activation", region.activation.as_ref()), ("/reaction", region.reaction.as_ref())];
        for (suffix, overlay) in slots {
            if let Some(o) = overlay {
                let opath = format!("{path}{suffix}");
                self.overlay(scene, o, &opath);
            }
        }
    }

    fn overlay(&mut self, scene: &SceneDecl, o: &StateOverlay, path: &str) {
        let sp = &o.spans;
        for (id, value) in o.values() {
            let pos = sp.attr(id);
            match id {
                "NAME_OF_IMAGE" => self.resource_value(RefKind::Image, &value.expr, path, pos),
                "NAME_OF_SOUND" => self.resource_value(RefKind::Sound, &value.expr, path, pos),
                _ => {
                    if let ValueExpr::ListRef { list } = &value.expr {
                        if self.list_exists(list, path, pos) && matches!(id, "BORDER_COLOR" | "FONT_COLOR") {
                            let decl = self.doc.list(list).expect("checked above");
                            if decl.element_type != ElementType::Colors
                                && decl.values.iter().any(|v| v.parse::<ColorValue>().is_err())
                            {
                                self.error(
                                    Code::InvalidValue,
                                    path,
                                    pos,
                                    format!("list `{list}` used as a color holds values that are not colors"),
                                );
                            }
                        }
                    }
                }
            }
        }
        if let Some(target) = &o.name_of_target_scene {
            if self.doc.scene(target).is_none() {
                self.error(
                    Code::DanglingSceneRef,
                    path,
                    sp.attr("NAME_OF_TARGET_SCENE"),
                    format!("target scene `{target}` does not exist"),
                );
            }
        } else if o.action_type == Some(ActionType::TransitionToScene) {
            self.error(
                Code::MissingAttribute,
                path,
                sp.attr("ACTION_TYPE"),
                "scene transition without a target scene name".into(),
            );
        }
        let lists: [(&str, &Option<Vec<String>>); 4] = [
            ("NAME_OF_REGION_ENABLED_WHEN_STARTED", &o.name_of_region_enabled_when_started),
            ("NAME_OF_REGION_DISABLED_WHEN_STARTED", &o.name_of_region_disabled_when_started),
            ("NAME_OF_REGION_ENABLED_WHEN_FINISHED", &o.name_of_region_enabled_when_finished),
            ("NAME_OF_REGION_DISABLED_WHEN_FINISHED", &o.name_of_region_disabled_when_finished),
        ];
        for (id, names) in lists {
            for n in names.iter().flatten() {
                self.region_ref(scene, n, path, sp.attr(id));
            }
        }
        match (o.action_type, &o.move_path) {
            (Some(ActionType::Move), None) => self.out.push(Diagnostic::warning(
                Code::MoveWithoutPath,
                path,
                sp.attr("ACTION_TYPE"),
                "move action without a path; the region will not move",
            )),
            (a, Some(_)) if a != Some(ActionType::Move) => self.out.push(Diagnostic::warning(
                Code::MovePathUnused,
                path,
                sp.attr("MOVE_PATH"),
                "path is only used by the move action",
            )),
            _ => {}
        }
    }

    fn resources(&mut self, asset_root: Option<&Path>) {
        let Some(root) = asset_root else {
            self.out.push(Diagnostic::new(
                Severity::Info,
                Code::ResourcesUnchecked,
                "settings",
                SourcePos::default(),
                "resource files were not checked (no asset root given)",
            ));
            return;
        };
        let doc = self.doc;
        let items = doc
            .images
            .iter()
            .map(|d| (ResourceKind::Image, "images/image", &d.name, &d.path, &d.spans))
            .chain(doc.sounds.iter().map(|d| (ResourceKind::Sound, "sounds/sound", &d.name, &d.path, &d.spans)))
            .chain(doc.movies.iter().map(|d| (ResourceKind::Movie, "movies/movie", &d.name, &d.path, &d.spans)));
        for (kind, elem, name, rel, spans) in items {
            let file = host_resource_path(doc, kind, rel, Some(root));
            if !file.is_file() {
                self.error(
                    Code::ResourceNotFound,
                    &format!("settings/{elem}[{name}]"),
                    spans.attr("PATH"),
                    format!("resource file `{}` not found", file.display()),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::count_errors;
    use crate::parse::parse;

    const DOC: &str = r#"<settings>
  <images><image name="a" path="a.png"/></images>
  <lists>
    <list name="l1" values="a;a" group="g"/>
    <list name="l2" values="x;y;z" group="g" drawing="sequentially"/>
  </lists>
  <scenes nameOfDefaultScene="s" originalScreenSizeX="100" originalScreenSizeY="100">
    <scene name="s">
      <region name="r" locationOfCenterX="1" locationOfCenterY="1" sizeX="2" sizeY="2" nameOfImage="@l1"
              conditionOfReactionCompletion="timeElapsed">
        <reaction actionType="move" nameOfRegionEnabledWhenStarted="nope"/>
      </region>
    </scene>
  </scenes>
</settings>"#;

    #[test]
    fn reports_each_problem() {
        let (doc, parse_diags) = parse(DOC, None).unwrap();
        assert!(parse_diags.is_empty(), "{parse_diags:?}");
        let diags = validate(&doc, None);
        let codes: Vec<Code> = diags.iter().map(|d| d.code).collect();
        assert_eq!(
            codes,
            [
                Code::GroupLengthMismatch,
                Code::GroupDrawingConflict,
                Code::MissingReactionDuration,
                Code::DanglingRegionRef,
                Code::MoveWithoutPath,
                Code::ResourcesUnchecked
            ]
        );
        assert_eq!(count_errors(&diags), 3);
        assert!(diags[0].message.contains("l1 has 2") && diags[0].message.contains("l2 has 3"));
    }

    #[test]
    fn validation_is_pure() {
        let (doc, _) = parse(DOC, None).unwrap();
        assert_eq!(validate(&doc, None), validate(&doc, None));
    }

    #[test]
    fn missing_resource_file() {
        let dir = tempfile::tempdir().unwrap();
        let (doc, _) = parse(DOC, None).unwrap();
        let diags = validate(&doc, Some(dir.path()));
        assert!(diags.iter().any(|d| d.code == Code::ResourceNotFound));
        std::fs::write(dir.path().join("a.png"), b"x").unwrap();
        let diags = validate(&doc, Some(dir.path()));
        assert!(!diags.iter().any(|d| d.code == Code::ResourceNotFound || d.code == Code::ResourcesUnchecked));
    }
}
