//! Parser from markup text in any of the four languages to [`GimlDocument`].

use std::collections::HashSet;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::color::ColorValue;
use crate::diagnostics::{Code, Diagnostic, SourcePos};
use crate::expr::{Axis, ExprError, ValueKind};
use crate::model::*;
use crate::registry::{fold, registry, KeywordKind, Language, Registry, BOOLEAN, REGION_STATE, ROOT};

/// A failure that prevents building any document at all.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", diagnostic.message)]
pub struct ParseError {
    pub diagnostic: Diagnostic,
}

impl ParseError {
    fn new(code: Code, pos: SourcePos, message: impl Into<String>) -> ParseError {
        ParseError { diagnostic: Diagnostic::error(code, "", pos, message) }
    }
}

pub type ParseResult = Result<(GimlDocument, Vec<Diagnostic>), ParseError>;

/// Parses raw bytes; a UTF-8 byte-order mark is tolerated.
pub fn parse_bytes(bytes: &[u8], language_hint: Option<Language>) -> ParseResult {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let text = std::str::from_utf8(bytes).map_err(|e| {
        ParseError::new(Code::XmlMalformed, SourcePos::default(), format!("input is not valid UTF-8: {e}"))
    })?;
    parse(text, language_hint)
}

/// Parses one document. Unknown names and bad values become diagnostics; only
/// malformed XML, a wrong root element or an unknown language code fail.
pub fn parse(text: &str, language_hint: Option<Language>) -> ParseResult {
    let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
    let xml = Document::parse(text).map_err(|e| {
        let p = e.pos();
        ParseError::new(Code::XmlMalformed, SourcePos { line: p.row, column: p.col }, format!("malformed XML: {e}"))
    })?;
    let root = xml.root_element();
    let reg = registry();
    let root_pos = pos_of(&xml, root.range().start);
    let root_name = root.tag_name().name();
    let root_langs: Vec<Language> = Language::ALL
        .into_iter()
        .filter(|&l| reg.lookup(root_name, l, KeywordKind::Element, ROOT) == Some("SETTINGS"))
        .collect();
    if root_langs.is_empty() {
        return Err(ParseError::new(
            Code::WrongRoot,
            root_pos,
            format!("root element `{root_name}` is not a settings element in any supported language"),
        ));
    }

    let mut declared = None;
    for a in root.attributes() {
        if Language::ALL.into_iter().any(|l| reg.lookup(a.name(), l, KeywordKind::Attribute, "SETTINGS") == Some("LANGUAGE")) {
            let lang: Language = a.value().parse().map_err(|_| {
                ParseError::new(
                    Code::UnknownLanguage,
                    pos_of(&xml, a.range_value().start),
                    format!("unknown language code `{}` (expected one of en, fr, de, pl)", a.value()),
                )
            })?;
            declared = Some((lang, pos_of(&xml, a.range_value().start)));
        }
    }

    let mut diags = Vec::new();
    let language = match language_hint {
        Some(h) if !root_langs.contains(&h) => {
            return Err(ParseError::new(
                Code::WrongRoot,
                root_pos,
                format!("root element `{root_name}` is not `{}` in language {h}", reg.render("SETTINGS", h).unwrap_or("settings")),
            ));
        }
        Some(h) => h,
        None => match declared {
            Some((d, _)) if root_langs.contains(&d) => d,
            _ => root_langs[0],
        },
    };
    if let Some((d, p)) = declared {
        if d != language {
            diags.push(Diagnostic::warning(
                Code::LanguageMismatch,
                "settings",
                p,
                format!("document declares language `{d}` but is written in `{language}`"),
            ));
        }
    }

    let mut p = Parser { xml: &xml, reg, lang: language, diags };
    let doc = p.document(root);
    Ok((doc, p.diags))
}

fn pos_of(xml: &Document<'_>, offset: usize) -> SourcePos {
    let p = xml.text_pos_at(offset);
    SourcePos { line: p.row, column: p.col }
}

struct Attr<'a> {
    id: &'static str,
    token: &'a str,
    value: &'a str,
    pos: SourcePos,
}

/// Recognised attributes of one element, consumed by the typed getters.
struct Attrs<'a> {
    items: Vec<Attr<'a>>,
    path: String,
    element: SourcePos,
    unknown: Vec<RawAttr>,
}

struct Parser<'x, 'i> {
    xml: &'x Document<'i>,
    reg: &'static Registry,
    lang: Language,
    diags: Vec<Diagnostic>,
}

fn element_label(id: &str) -> &'static str {
    match id {
        "SETTINGS" => "settings",
        "IMAGES" => "images",
        "IMAGE" => "image",
        "SOUNDS" => "sounds",
        "SOUND" => "sound",
        "MOVIES" => "movies",
        "MOVIE" => "movie",
        "LISTS" => "lists",
        "LIST" => "list",
        "SCENES" => "scenes",
        "SCENE" => "scene",
        "REGION" => "region",
        "ACTIVATION" => "activation",
        "REACTION" => "reaction",
        _ => "?",
    }
}

impl<'x, 'i> Parser<'x, 'i> {
    fn pos(&self, offset: usize) -> SourcePos {
        pos_of(self.xml, offset)
    }

    fn spell(&self, id: &str) -> &'static str {
        self.reg.render(id, self.lang).unwrap_or("?")
    }

    fn element_id(&self, node: Node<'_, '_>) -> Option<&'static str> {
        self.reg.lookup(node.tag_name().name(), self.lang, KeywordKind::Element, ROOT)
    }

    fn error(&mut self, code: Code, path: &str, pos: SourcePos, msg: String) {
        self.diags.push(Diagnostic::error(code, path, pos, msg));
    }

    /// Element children, reporting unknown and misplaced ones.
    fn children<'a>(
        &mut self,
        node: Node<'a, 'i>,
        path: &str,
        allowed: &[&str],
        doc: &mut GimlDocument,
    ) -> Vec<(&'static str, Node<'a, 'i>)> {
        let mut out = Vec::new();
        for child in node.children().filter(|n| n.is_element()) {
            let name = child.tag_name().name();
            let pos = self.pos(child.range().start);
            match self.element_id(child) {
                Some(id) if allowed.contains(&id) => out.push((id, child)),
                Some(id) => self.error(
                    Code::MisplacedElement,
                    path,
                    pos,
                    format!("element `{name}` ({}) is not allowed here", element_label(id)),
                ),
                None => {
                    let other = Language::ALL
                        .into_iter()
                        .filter(|&l| l != self.lang)
                        .find(|&l| self.reg.lookup(name, l, KeywordKind::Element, ROOT).is_some());
                    let d = match other {
                        Some(l) => Diagnostic::warning(
                            Code::LanguageMismatch,
                            path,
                            pos,
                            format!("element `{name}` belongs to language {l}, not {}", self.lang),
                        ),
                        None => Diagnostic::warning(Code::UnknownElement, path, pos, format!("unknown element `{name}`"))
                            .with_suggestion(self.reg.suggest(name, self.lang, KeywordKind::Element, &[ROOT])),
                    };
                    self.diags.push(d);
                    doc.unknown_elements.push((path.to_string(), name.to_string()));
                }
            }
        }
        out
    }

    fn attrs<'a>(&mut self, node: Node<'a, 'i>, owners: &[&str], path: String) -> Attrs<'a> {
        let element = self.pos(node.range().start);
        let mut items: Vec<Attr<'a>> = Vec::new();
        let mut unknown = Vec::new();
        for a in node.attributes() {
            let name = a.name();
            let pos = self.pos(a.range_qname().start);
            let found = owners
                .iter()
                .find_map(|o| self.reg.lookup(name, self.lang, KeywordKind::Attribute, o));
            match found {
                Some(id) => {
                    if let Some(prev) = items.iter().find(|i| i.id == id) {
                        let msg = format!("attribute `{name}` repeats `{}`", prev.token);
                        self.error(Code::DuplicateAttribute, &path, pos, msg);
                        continue;
                    }
                    items.push(Attr { id, token: name, value: a.value(), pos });
                }
                None => {
                    let region_only = owners.contains(&REGION_STATE)
                        && !owners.contains(&"REGION")
                        && self.reg.lookup(name, self.lang, KeywordKind::Attribute, "REGION").is_some();
                    if region_only {
                        self.error(
                            Code::AttributeNotAllowed,
                            &path,
                            pos,
                            format!("`{name}` can only be set on the region element itself"),
                        );
                    } else if let Some(l) = Language::ALL.into_iter().filter(|&l| l != self.lang).find(|&l| {
                        owners.iter().any(|o| self.reg.lookup(name, l, KeywordKind::Attribute, o).is_some())
                    }) {
                        self.diags.push(Diagnostic::warning(
                            Code::LanguageMismatch,
                            &path,
                            pos,
                            format!("attribute `{name}` belongs to language {l}, not {}", self.lang),
                        ));
                    } else {
                        self.diags.push(
                            Diagnostic::warning(Code::UnknownAttribute, &path, pos, format!("unknown attribute `{name}`"))
                                .with_suggestion(self.reg.suggest(name, self.lang, KeywordKind::Attribute, owners)),
                        );
                    }
                    unknown.push(RawAttr { name: name.to_string(), value: a.value().to_string() });
                }
            }
        }
        Attrs { items, path, element, unknown }
    }

    fn spans(&self, attrs: &Attrs<'_>) -> Spans {
        Spans { element: attrs.element, attrs: attrs.items.iter().map(|a| (a.id, a.pos)).collect() }
    }

    fn get<'a>(&self, attrs: &Attrs<'a>, id: &str) -> Option<(&'a str, SourcePos)> {
        attrs.items.iter().find(|a| a.id == id).map(|a| (a.value, a.pos))
    }

    fn invalid(&mut self, attrs: &Attrs<'_>, id: &str, pos: SourcePos, why: impl std::fmt::Display) {
        let msg = format!("invalid value for `{}`: {why}", self.spell(id));
        self.error(Code::InvalidValue, &attrs.path.clone(), pos, msg);
    }

    fn required<T>(&mut self, attrs: &Attrs<'_>, id: &str, v: Option<T>) -> Option<T> {
        if v.is_none() && self.get(attrs, id).is_none() {
            let msg = format!("missing obligatory attribute `{}`", self.spell(id));
            self.error(Code::MissingAttribute, &attrs.path.clone(), attrs.element, msg);
        }
        v
    }

    fn string(&mut self, attrs: &Attrs<'_>, id: &str) -> Option<String> {
        self.get(attrs, id).map(|(v, _)| v.to_string())
    }

    fn name(&mut self, attrs: &Attrs<'_>, id: &str) -> Option<String> {
        let (v, pos) = self.get(attrs, id)?;
        let v = v.trim();
        if v.is_empty() {
            self.invalid(attrs, id, pos, "empty name");
            return None;
        }
        Some(fold(v))
    }

    fn names(&mut self, attrs: &Attrs<'_>, id: &str) -> Option<Vec<String>> {
        let (v, _) = self.get(attrs, id)?;
        Some(v.split(';').map(str::trim).filter(|s| !s.is_empty()).map(fold).collect())
    }

    fn keyword(&mut self, attrs: &Attrs<'_>, id: &str, owner: &str) -> Option<&'static str> {
        let (v, pos) = self.get(attrs, id)?;
        match self.reg.lookup(v.trim(), self.lang, KeywordKind::EnumValue, owner) {
            Some(k) => Some(k),
            None => {
                let suggestion = self.reg.suggest(v.trim(), self.lang, KeywordKind::EnumValue, &[owner]);
                let msg = format!("invalid value for `{}`: `{v}` is not a recognised keyword", self.spell(id));
                self.diags
                    .push(Diagnostic::error(Code::InvalidValue, &attrs.path, pos, msg).with_suggestion(suggestion));
                None
            }
        }
    }

    fn boolean(&mut self, attrs: &Attrs<'_>, id: &str) -> Option<bool> {
        self.keyword(attrs, id, BOOLEAN).map(|k| k == "YES")
    }

    fn integer(&mut self, attrs: &Attrs<'_>, id: &str) -> Option<i64> {
        let (v, pos) = self.get(attrs, id)?;
        match v.trim().parse::<i64>() {
            Ok(n) => Some(n),
            Err(_) => {
                self.invalid(attrs, id, pos, format!("`{v}` is not an integer"));
                None
            }
        }
    }

    fn real(&mut self, attrs: &Attrs<'_>, id: &str) -> Option<f64> {
        let (v, pos) = self.get(attrs, id)?;
        match v.trim().parse::<f64>() {
            Ok(n) if n.is_finite() => Some(n),
            _ => {
                self.invalid(attrs, id, pos, format!("`{v}` is not a number"));
                None
            }
        }
    }

    fn color(&mut self, attrs: &Attrs<'_>, id: &str) -> Option<ColorValue> {
        let (v, pos) = self.get(attrs, id)?;
        match v.parse::<ColorValue>() {
            Ok(c) => Some(c),
            Err(e) => {
                self.invalid(attrs, id, pos, e);
                None
            }
        }
    }

    fn value(&mut self, attrs: &Attrs<'_>, id: &str, kind: ValueKind) -> Option<Value> {
        let (v, pos) = self.get(attrs, id)?;
        match Value::parse(v, kind) {
            Ok(value) => Some(value),
            Err(e) => {
                let code = match e {
                    ExprError::NotNumeric(_) | ExprError::NotColor(_) | ExprError::Empty => Code::InvalidValue,
                    _ => Code::InvalidExpression,
                };
                let msg = format!("invalid value for `{}`: {e}", self.spell(id));
                self.error(code, &attrs.path.clone(), pos, msg);
                None
            }
        }
    }

    fn document(&mut self, root: Node<'_, 'i>) -> GimlDocument {
        let mut doc = GimlDocument { source_language: Some(self.lang), ..Default::default() };
        let attrs = self.attrs(root, &["SETTINGS"], "settings".into());
        doc.settings = SettingsInfo {
            folder: self.string(&attrs, "FOLDER"),
            language: Some(self.lang),
            library: self.string(&attrs, "LIBRARY"),
            spans: self.spans(&attrs),
            unknown: attrs.unknown,
        };
        let mut seen_scenes = false;
        let children = self.children(root, "settings", &["IMAGES", "SOUNDS", "MOVIES", "LISTS", "SCENES"], &mut doc);
        for (id, node) in children {
            match id {
                "IMAGES" => self.images(node, &mut doc),
                "SOUNDS" => self.sounds(node, &mut doc),
                "MOVIES" => self.movies(node, &mut doc),
                "LISTS" => self.lists(node, &mut doc),
                _ => {
                    if seen_scenes {
                        let pos = self.pos(node.range().start);
                        self.error(Code::MisplacedElement, "settings", pos, "more than one scenes element".into());
                        continue;
                    }
                    seen_scenes = true;
                    self.scenes(node, &mut doc);
                }
            }
        }
        if !seen_scenes {
            let pos = self.pos(root.range().start);
            let msg = format!("missing `{}` element", self.spell("SCENES"));
            self.error(Code::MissingElement, "settings", pos, msg);
        }
        doc
    }

    fn container(&mut self, node: Node<'_, 'i>, id: &str, target: &mut ContainerInfo) {
        let path = format!("settings/{}", element_label(id));
        let attrs = self.attrs(node, &[id], path);
        if let Some(f) = self.string(&attrs, "FOLDER") {
            target.folder = Some(f);
        }
        target.unknown.extend(attrs.unknown);
    }

    fn check_unique(&mut self, seen: &mut HashSet<String>, name: &str, path: &str, pos: SourcePos, what: &str) {
        if !seen.insert(name.to_string()) {
            self.error(Code::DuplicateName, path, pos, format!("duplicate {what} name `{name}`"));
        }
    }

    fn images(&mut self, node: Node<'_, 'i>, doc: &mut GimlDocument) {
        let mut info = std::mem::take(&mut doc.images_container);
        self.container(node, "IMAGES", &mut info);
        doc.images_container = info;
        let mut seen: HashSet<String> = doc.images.iter().map(|i| i.name.clone()).collect();
        for (_, child) in self.children(node, "settings/images", &["IMAGE"], doc) {
            let label = child.attributes().next().map(|a| a.value().to_string()).unwrap_or_default();
            let attrs = self.attrs(child, &["IMAGE"], format!("settings/images/image[{label}]"));
            let name = self.name(&attrs, "NAME");
            let name = self.required(&attrs, "NAME", name).unwrap_or_default();
            let path = self.string(&attrs, "PATH");
            let path = self.required(&attrs, "PATH", path).unwrap_or_default();
            let running_period_ms = match self.integer(&attrs, "RUNNING_PERIOD") {
                Some(n) if n > 0 && n <= i64::from(u32::MAX) => Some(n as u32),
                Some(n) => {
                    let p = self.get(&attrs, "RUNNING_PERIOD").map(|g| g.1).unwrap_or_default();
                    self.invalid(&attrs, "RUNNING_PERIOD", p, format!("`{n}` must be positive"));
                    None
                }
                None => None,
            };
            let run_from_frame = self.integer(&attrs, "RUN_FROM_FRAME");
            let run_to_frame = self.integer(&attrs, "RUN_TO_FRAME");
            if let Some(to) = run_to_frame {
                if to != -1 && to < run_from_frame.unwrap_or(0) {
                    let p = self.get(&attrs, "RUN_TO_FRAME").map(|g| g.1).unwrap_or_default();
                    self.invalid(&attrs, "RUN_TO_FRAME", p, "must be -1 or not below the starting frame");
                }
            }
            let decl = ImageDecl {
                transparency_key: self.color(&attrs, "TRANSPARENCY_KEY"),
                running_period_ms,
                run_from_frame,
                run_to_frame,
                keep_in_memory: self.boolean(&attrs, "KEEP_IN_MEMORY").unwrap_or(false),
                spans: self.spans(&attrs),
                unknown: attrs.unknown,
                name,
                path,
            };
            if !decl.name.is_empty() {
                self.check_unique(&mut seen, &decl.name, &attrs.path, attrs.element, "image");
            }
            doc.images.push(decl);
        }
    }

    fn repetitions(&mut self, attrs: &Attrs<'_>) -> u32 {
        match self.integer(attrs, "REPETITION_NUMBER") {
            Some(n) if n >= 1 && n <= i64::from(u32::MAX) => n as u32,
            Some(n) => {
                let p = self.get(attrs, "REPETITION_NUMBER").map(|g| g.1).unwrap_or_default();
                self.invalid(attrs, "REPETITION_NUMBER", p, format!("`{n}` must be at least 1"));
                1
            }
            None => 1,
        }
    }

    fn volume(&mut self, attrs: &Attrs<'_>) -> f64 {
        match self.real(attrs, "VOLUME") {
            Some(v) if v >= 0.0 => v,
            Some(v) => {
                let p = self.get(attrs, "VOLUME").map(|g| g.1).unwrap_or_default();
                self.invalid(attrs, "VOLUME", p, format!("`{v}` is negative"));
                1.0
            }
            None => 1.0,
        }
    }

    fn sounds(&mut self, node: Node<'_, 'i>, doc: &mut GimlDocument) {
        let mut info = std::mem::take(&mut doc.sounds_container);
        self.container(node, "SOUNDS", &mut info);
        doc.sounds_container = info;
        let mut seen: HashSet<String> = doc.sounds.iter().map(|i| i.name.clone()).collect();
        for (_, child) in self.children(node, "settings/sounds", &["SOUND"], doc) {
            let label = child.attributes().next().map(|a| a.value().to_string()).unwrap_or_default();
            let attrs = self.attrs(child, &["SOUND"], format!("settings/sounds/sound[{label}]"));
            let name = self.name(&attrs, "NAME");
            let name = self.required(&attrs, "NAME", name).unwrap_or_default();
            let path = self.string(&attrs, "PATH");
            let path = self.required(&attrs, "PATH", path).unwrap_or_default();
            let decl = SoundDecl {
                repetition_number: self.repetitions(&attrs),
                in_background: self.boolean(&attrs, "IN_BACKGROUND").unwrap_or(false),
                volume: self.volume(&attrs),
                spans: self.spans(&attrs),
                unknown: attrs.unknown,
                name,
                path,
            };
            if !decl.name.is_empty() {
                self.check_unique(&mut seen, &decl.name, &attrs.path, attrs.element, "sound");
            }
            doc.sounds.push(decl);
        }
    }

    fn movies(&mut self, node: Node<'_, 'i>, doc: &mut GimlDocument) {
        let mut info = std::mem::take(&mut doc.movies_container);
        self.container(node, "MOVIES", &mut info);
        doc.movies_container = info;
        let mut seen: HashSet<String> = doc.movies.iter().map(|i| i.name.clone()).collect();
        for (_, child) in self.children(node, "settings/movies", &["MOVIE"], doc) {
            let label = child.attributes().next().map(|a| a.value().to_string()).unwrap_or_default();
            let attrs = self.attrs(child, &["MOVIE"], format!("settings/movies/movie[{label}]"));
            let name = self.name(&attrs, "NAME");
            let name = self.required(&attrs, "NAME", name).unwrap_or_default();
            let path = self.string(&attrs, "PATH");
            let path = self.required(&attrs, "PATH", path).unwrap_or_default();
            let decl = MovieDecl {
                transparency_key: self.color(&attrs, "TRANSPARENCY_KEY"),
                repetition_number: self.repetitions(&attrs),
                in_background: self.boolean(&attrs, "IN_BACKGROUND").unwrap_or(false),
                volume: self.volume(&attrs),
                spans: self.spans(&attrs),
                unknown: attrs.unknown,
                name,
                path,
            };
            if !decl.name.is_empty() {
                self.check_unique(&mut seen, &decl.name, &attrs.path, attrs.element, "movie");
            }
            doc.movies.push(decl);
        }
    }

    fn lists(&mut self, node: Node<'_, 'i>, doc: &mut GimlDocument) {
        let outer = self.attrs(node, &[], "settings/lists".into());
        doc.unknown_elements.extend(outer.unknown.iter().map(|a| ("settings/lists".to_string(), format!("@{}", a.name))));
        let mut seen: HashSet<String> = doc.lists.iter().map(|i| i.name.clone()).collect();
        for (_, child) in self.children(node, "settings/lists", &["LIST"], doc) {
            let label = child.attributes().next().map(|a| a.value().to_string()).unwrap_or_default();
            let attrs = self.attrs(child, &["LIST"], format!("settings/lists/list[{label}]"));
            let name = self.name(&attrs, "NAME");
            let name = self.required(&attrs, "NAME", name).unwrap_or_default();
            let values = self.string(&attrs, "VALUES");
            let values: Vec<String> = self
                .required(&attrs, "VALUES", values)
                .map(|v| v.split(';').filter(|s| !s.trim().is_empty()).map(str::to_string).collect())
                .unwrap_or_default();
            if values.is_empty() {
                if let Some((_, p)) = self.get(&attrs, "VALUES") {
                    self.invalid(&attrs, "VALUES", p, "a list needs at least one value");
                }
            }
            let element_type =
                self.keyword(&attrs, "ELEMENT_TYPE", "ELEMENT_TYPE").and_then(ElementType::from_id).unwrap_or_default();
            let decl = ListDecl {
                element_type,
                values,
                drawing: self.keyword(&attrs, "DRAWING", "DRAWING").and_then(DrawMode::from_id).unwrap_or_default(),
                group: self.string(&attrs, "GROUP").map(|g| g.trim().to_string()),
                spans: self.spans(&attrs),
                unknown: attrs.unknown,
                name,
            };
            if !decl.name.is_empty() {
                self.check_unique(&mut seen, &decl.name, &attrs.path, attrs.element, "list");
            }
            doc.lists.push(decl);
        }
    }

    fn scenes(&mut self, node: Node<'_, 'i>, doc: &mut GimlDocument) {
        let attrs = self.attrs(node, &["SCENES"], "settings/scenes".into());
        let default = self.name(&attrs, "NAME_OF_DEFAULT_SCENE");
        let default = self.required(&attrs, "NAME_OF_DEFAULT_SCENE", default).unwrap_or_default();
        let sx = self.screen_size(&attrs, "ORIGINAL_SCREEN_SIZE_X");
        let sy = self.screen_size(&attrs, "ORIGINAL_SCREEN_SIZE_Y");
        doc.scenes_header = ScenesHeader {
            name_of_default_scene: default,
            original_screen_size_x: sx,
            original_screen_size_y: sy,
            name_of_pause_scene: self.name(&attrs, "NAME_OF_PAUSE_SCENE"),
            spotlight: self.boolean(&attrs, "SPOTLIGHT"),
            spotlight_radius: self.radius(&attrs),
            spans: self.spans(&attrs),
            unknown: attrs.unknown,
        };
        let mut seen = HashSet::new();
        for (_, child) in self.children(node, "settings/scenes", &["SCENE"], doc) {
            let scene = self.scene(child, doc);
            if !scene.name.is_empty() {
                let path = format!("settings/scenes/scene[{}]", scene.name);
                self.check_unique(&mut seen, &scene.name, &path, scene.spans.element, "scene");
            }
            doc.scenes.push(scene);
        }
    }

    fn screen_size(&mut self, attrs: &Attrs<'_>, id: &str) -> u32 {
        let v = self.integer(attrs, id);
        match self.required(attrs, id, v) {
            Some(n) if n > 0 && n <= i64::from(u32::MAX) => n as u32,
            Some(n) => {
                let p = self.get(attrs, id).map(|g| g.1).unwrap_or_default();
                self.invalid(attrs, id, p, format!("`{n}` must be positive"));
                0
            }
            None => 0,
        }
    }

    fn radius(&mut self, attrs: &Attrs<'_>) -> Option<f64> {
        match self.real(attrs, "SPOTLIGHT_RADIUS") {
            Some(r) if r < 0.0 => {
                let p = self.get(attrs, "SPOTLIGHT_RADIUS").map(|g| g.1).unwrap_or_default();
                self.invalid(attrs, "SPOTLIGHT_RADIUS", p, "radius is negative");
                None
            }
            other => other,
        }
    }

    fn scene(&mut self, node: Node<'_, 'i>, doc: &mut GimlDocument) -> SceneDecl {
        let label = node.attributes().next().map(|a| fold(a.value())).unwrap_or_default();
        let attrs = self.attrs(node, &["SCENE"], format!("settings/scenes/scene[{label}]"));
        let name = self.name(&attrs, "NAME");
        let name = self.required(&attrs, "NAME", name).unwrap_or_default();
        let blackout_degree = match self.integer(&attrs, "BLACKOUT_DEGREE") {
            Some(n) if (0..=255).contains(&n) => Some(n as u8),
            Some(n) => {
                let p = self.get(&attrs, "BLACKOUT_DEGREE").map(|g| g.1).unwrap_or_default();
                self.invalid(&attrs, "BLACKOUT_DEGREE", p, format!("`{n}` is outside 0..255"));
                None
            }
            None => None,
        };
        let mut scene = SceneDecl {
            background_color: self.color(&attrs, "BACKGROUND_COLOR"),
            name_of_background_image: self.name(&attrs, "NAME_OF_BACKGROUND_IMAGE"),
            name_of_background_sound: self.name(&attrs, "NAME_OF_BACKGROUND_SOUND"),
            blackout_degree,
            blackout_color: self.color(&attrs, "BLACKOUT_COLOR"),
            blocking_regions_during_blackout: self.boolean(&attrs, "BLOCKING_REGIONS_DURING_BLACKOUT"),
            list_of_regions_to_disable: self.names(&attrs, "LIST_OF_REGIONS_TO_DISABLE"),
            name_of_region_enabled_after_all_regions_are_disabled: self
                .name(&attrs, "NAME_OF_REGION_ENABLED_AFTER_ALL_REGIONS_ARE_DISABLED"),
            reset_after_enter: self.boolean(&attrs, "RESET_AFTER_ENTER"),
            spotlight: self.boolean(&attrs, "SPOTLIGHT"),
            spotlight_radius: self.radius(&attrs),
            name_of_lists_switched_over_after_enter: self.names(&attrs, "NAME_OF_LISTS_SWITCHED_OVER_AFTER_ENTER"),
            name_of_region_enabled_after_list_finished: self.name(&attrs, "NAME_OF_REGION_ENABLED_AFTER_LIST_FINISHED"),
            on_scene_changed: self.string(&attrs, "ON_SCENE_CHANGED"),
            template_ref: self.name(&attrs, "TEMPLATE"),
            regions: Vec::new(),
            spans: self.spans(&attrs),
            unknown: Vec::new(),
            name,
        };
        let path = attrs.path.clone();
        scene.unknown = attrs.unknown;
        let mut seen = HashSet::new();
        for (_, child) in self.children(node, &path, &["REGION"], doc) {
            let region = self.region(child, &path, doc);
            if !region.name.is_empty() {
                let rpath = format!("{path}/region[{}]", region.name);
                self.check_unique(&mut seen, &region.name, &rpath, region.spans.element, "region");
            }
            scene.regions.push(region);
        }
        scene
    }

    fn int_value(&mut self, attrs: &Attrs<'_>, id: &str, axis: Axis) -> Option<Value> {
        self.value(attrs, id, ValueKind::Int(axis))
    }

    fn region(&mut self, node: Node<'_, 'i>, scene_path: &str, doc: &mut GimlDocument) -> RegionDecl {
        let label = node.attributes().next().map(|a| fold(a.value())).unwrap_or_default();
        let path = format!("{scene_path}/region[{label}]");
        let attrs = self.attrs(node, &["REGION", REGION_STATE], path.clone());
        let name = self.name(&attrs, "NAME");
        let name = self.required(&attrs, "NAME", name).unwrap_or_default();
        let mut r = RegionDecl::new(name);

        let geometry = |p: &mut Self, id: &str, axis: Axis| -> Value {
            let v = p.int_value(&attrs, id, axis);
            let v = p.required(&attrs, id, v).unwrap_or_else(|| Value::literal("0"));
            if id.starts_with("SIZE") {
                if let crate::expr::ValueExpr::Literal { value } = &v.expr {
                    if value.trim().parse::<f64>().is_ok_and(|n| n <= 0.0) {
                        let pos = p.get(&attrs, id).map(|g| g.1).unwrap_or_default();
                        p.invalid(&attrs, id, pos, "size must be positive");
                    }
                }
            }
            v
        };
        r.location_of_center_x = geometry(self, "LOCATION_OF_CENTER_X", Axis::X);
        r.location_of_center_y = geometry(self, "LOCATION_OF_CENTER_Y", Axis::Y);
        r.size_x = geometry(self, "SIZE_X", Axis::X);
        r.size_y = geometry(self, "SIZE_Y", Axis::Y);
        r.shape = self.keyword(&attrs, "SHAPE", "SHAPE").and_then(Shape::from_id).unwrap_or_default();
        r.enabled = self.boolean(&attrs, "ENABLED").unwrap_or(true);
        r.offset_of_image_center_x = self.int_value(&attrs, "OFFSET_OF_IMAGE_CENTER_X", Axis::X);
        r.offset_of_image_center_y = self.int_value(&attrs, "OFFSET_OF_IMAGE_CENTER_Y", Axis::Y);
        r.image_size_x = self.int_value(&attrs, "IMAGE_SIZE_X", Axis::X);
        r.image_size_y = self.int_value(&attrs, "IMAGE_SIZE_Y", Axis::Y);
        r.offset_of_text_x = self.int_value(&attrs, "OFFSET_OF_TEXT_X", Axis::X);
        r.offset_of_text_y = self.int_value(&attrs, "OFFSET_OF_TEXT_Y", Axis::Y);
        r.offset_of_activation_bar_x = self.int_value(&attrs, "OFFSET_OF_ACTIVATION_BAR_X", Axis::X);
        r.offset_of_activation_bar_y = self.int_value(&attrs, "OFFSET_OF_ACTIVATION_BAR_Y", Axis::Y);
        r.region_animation_enabled = self.boolean(&attrs, "REGION_ANIMATION_ENABLED").unwrap_or(true);
        r.image_animation_enabled = self.boolean(&attrs, "IMAGE_ANIMATION_ENABLED").unwrap_or(true);
        r.condition_of_reaction_completion = self
            .keyword(&attrs, "CONDITION_OF_REACTION_COMPLETION", "CONDITION_OF_REACTION_COMPLETION")
            .and_then(CompletionCondition::from_id)
            .unwrap_or_default();
        r.reaction_duration_ms = self.integer(&attrs, "REACTION_DURATION");
        r.hold_scene_transition = self.boolean(&attrs, "HOLD_SCENE_TRANSITION").unwrap_or(false);
        r.automatic_reaction_after_time_ms = self.integer(&attrs, "AUTOMATIC_REACTION_AFTER_TIME").unwrap_or(-1);
        r.able_to_activate_blackout = self.boolean(&attrs, "ABLE_TO_ACTIVATE_BLACKOUT").unwrap_or(false);
        r.reset_after_enabled = self.boolean(&attrs, "RESET_AFTER_ENABLED").unwrap_or(false);
        r.ignore_gaze = self.boolean(&attrs, "IGNORE_GAZE").unwrap_or(false);
        r.enabling_delay_ms = self.integer(&attrs, "ENABLING_DELAY").unwrap_or(0);
        r.disabling_delay_ms = self.integer(&attrs, "DISABLING_DELAY").unwrap_or(0);
        r.reaction_key = self.string(&attrs, "REACTION_KEY").map(|k| k.trim().to_string());
        r.on_activation_completed = self.string(&attrs, "ON_ACTIVATION_COMPLETED");
        r.on_reaction_started = self.string(&attrs, "ON_REACTION_STARTED");
        r.on_reaction_finished = self.string(&attrs, "ON_REACTION_FINISHED");
        r.on_normal_state_return = self.string(&attrs, "ON_NORMAL_STATE_RETURN");
        r.on_state_changed = self.string(&attrs, "ON_STATE_CHANGED");
        r.dwell_time_ms = match self.integer(&attrs, "DWELL_TIME") {
            Some(n) if n > 0 => Some(n as u64),
            Some(n) => {
                let p = self.get(&attrs, "DWELL_TIME").map(|g| g.1).unwrap_or_default();
                self.invalid(&attrs, "DWELL_TIME", p, format!("`{n}` must be positive"));
                None
            }
            None => None,
        };
        r.base = self.overlay(&attrs);
        r.spans = self.spans(&attrs);
        r.unknown = attrs.unknown;

        for (id, child) in self.children(node, &path, &["ACTIVATION", "REACTION"], doc) {
            let sub = format!("{path}/{}", element_label(id));
            let sub_attrs = self.attrs(child, &[REGION_STATE], sub.clone());
            let mut overlay = self.overlay(&sub_attrs);
            overlay.spans = self.spans(&sub_attrs);
            overlay.unknown = sub_attrs.unknown;
            let slot = if id == "ACTIVATION" { &mut r.activation } else { &mut r.reaction };
            if slot.is_some() {
                let pos = self.pos(child.range().start);
                self.error(Code::MisplacedElement, &sub, pos, format!("second `{}` element", element_label(id)));
                continue;
            }
            *slot = Some(overlay);
            self.children(child, &sub, &[], doc);
        }
        r
    }

    fn overlay(&mut self, attrs: &Attrs<'_>) -> StateOverlay {
        let move_path = match self.get(attrs, "MOVE_PATH") {
            Some((v, pos)) => match parse_move_path(v) {
                Some(p) => Some(p),
                None => {
                    self.invalid(attrs, "MOVE_PATH", pos, format!("`{v}` is not a list of x,y pairs"));
                    None
                }
            },
            None => None,
        };
        let font_style = match self.get(attrs, "FONT_STYLE") {
            Some((v, pos)) => match FontStyle::parse(v) {
                Some(s) => Some(s),
                None => {
                    self.invalid(attrs, "FONT_STYLE", pos, format!("`{v}` may only contain the letters i, b, u, s"));
                    None
                }
            },
            None => None,
        };
        StateOverlay {
            action_type: self.keyword(attrs, "ACTION_TYPE", "ACTION_TYPE").and_then(ActionType::from_id),
            border_width: self.value(attrs, "BORDER_WIDTH", ValueKind::Real(Axis::Scalar)),
            border_color: self.value(attrs, "BORDER_COLOR", ValueKind::Color),
            name_of_target_scene: self.name(attrs, "NAME_OF_TARGET_SCENE"),
            name_of_image: self.value(attrs, "NAME_OF_IMAGE", ValueKind::Text),
            name_of_sound: self.value(attrs, "NAME_OF_SOUND", ValueKind::Text),
            move_path,
            speed: self.value(attrs, "SPEED", ValueKind::Real(Axis::Scalar)),
            animation_type: self.keyword(attrs, "ANIMATION_TYPE", "ANIMATION_TYPE").and_then(AnimationType::from_id),
            animation_amplitude: self.value(attrs, "ANIMATION_AMPLITUDE", ValueKind::Real(Axis::Relative)),
            animation_period_ms: self.value(attrs, "ANIMATION_PERIOD", ValueKind::Real(Axis::Scalar)),
            tag: self.string(attrs, "TAG"),
            delayed_tag: self.string(attrs, "DELAYED_TAG"),
            delay_of_delayed_tag_ms: self.integer(attrs, "DELAY_OF_DELAYED_TAG"),
            text: self.value(attrs, "TEXT", ValueKind::Text),
            font: self.value(attrs, "FONT", ValueKind::Text),
            font_size: self.value(attrs, "FONT_SIZE", ValueKind::Real(Axis::Scalar)),
            font_style,
            font_color: self.value(attrs, "FONT_COLOR", ValueKind::Color),
            turn_off_when_finished: self.boolean(attrs, "TURN_OFF_WHEN_FINISHED"),
            name_of_region_enabled_when_started: self.names(attrs, "NAME_OF_REGION_ENABLED_WHEN_STARTED"),
            name_of_region_disabled_when_started: self.names(attrs, "NAME_OF_REGION_DISABLED_WHEN_STARTED"),
            name_of_region_enabled_when_finished: self.names(attrs, "NAME_OF_REGION_ENABLED_WHEN_FINISHED"),
            name_of_region_disabled_when_finished: self.names(attrs, "NAME_OF_REGION_DISABLED_WHEN_FINISHED"),
            unknown: Vec::new(),
            spans: Spans::default(),
        }
    }
}

/// Parses `"0,-400;500,0"` into relative translation steps.
pub fn parse_move_path(s: &str) -> Option<Vec<(i32, i32)>> {
    let mut out = Vec::new();
    for pair in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (x, y) = pair.split_once(',')?;
        out.push((x.trim().parse().ok()?, y.trim().parse().ok()?));
    }
    (!out.is_empty()).then_some(out)
}
