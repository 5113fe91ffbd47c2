//! Canonical, language-independent document model.
//!
//! Optional attributes are `Option` so that template merging can tell "not
//! given" from "given with the default value". Accessors supply defaults.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::color::ColorValue;
use crate::diagnostics::SourcePos;
use crate::expr::{ValueExpr, ValueKind};
use crate::registry::Language;

/// Source positions of an element and its attributes. Always compares equal
/// and is never serialized, so it does not take part in canonical equality.
#[derive(Debug, Clone, Default)]
pub struct Spans {
    pub element: SourcePos,
    pub attrs: BTreeMap<&'static str, SourcePos>,
}

impl Spans {
    pub fn attr(&self, id: &str) -> SourcePos {
        self.attrs.get(id).copied().unwrap_or(self.element)
    }
}

impl PartialEq for Spans {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// An attribute that was not recognised, kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawAttr {
    pub name: String,
    pub value: String,
}

/// Raw attribute text plus its parsed expression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Value {
    pub raw: String,
    pub expr: ValueExpr,
}

impl Value {
    pub fn literal(raw: impl Into<String>) -> Value {
        let raw = raw.into();
        Value { expr: ValueExpr::Literal { value: raw.clone() }, raw }
    }

    pub fn parse(raw: &str, kind: ValueKind) -> Result<Value, crate::expr::ExprError> {
        Ok(Value { raw: raw.to_string(), expr: crate::expr::parse_value_expr(raw, kind)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionType {
    None,
    Border,
    TransitionToScene,
    Move,
    ResetRegion,
    ResetScene,
}

impl ActionType {
    pub fn from_id(id: &str) -> Option<Self> {
        Some(match id {
            "ACTION_NONE" => ActionType::None,
            "ACTION_BORDER" => ActionType::Border,
            "ACTION_TRANSITION_TO_SCENE" => ActionType::TransitionToScene,
            "ACTION_MOVE" => ActionType::Move,
            "ACTION_RESET_REGION" => ActionType::ResetRegion,
            "ACTION_RESET_SCENE" => ActionType::ResetScene,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnimationType {
    None,
    SizeChanging,
    RotationCcw,
    RotationCw,
    SwingingHorizontal,
    SwingingVertical,
}

impl AnimationType {
    pub fn from_id(id: &str) -> Option<Self> {
        Some(match id {
            "ANIMATION_NONE" => AnimationType::None,
            "ANIMATION_SIZE_CHANGING" => AnimationType::SizeChanging,
            "ANIMATION_ROTATION_CCW" => AnimationType::RotationCcw,
            "ANIMATION_ROTATION_CW" => AnimationType::RotationCw,
            "ANIMATION_SWINGING_HORIZONTAL" => AnimationType::SwingingHorizontal,
            "ANIMATION_SWINGING_VERTICAL" => AnimationType::SwingingVertical,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionCondition {
    #[default]
    RegionLeave,
    SoundEnding,
    TimeElapsed,
}

impl CompletionCondition {
    pub fn from_id(id: &str) -> Option<Self> {
        Some(match id {
            "COMPLETION_REGION_LEAVE" => CompletionCondition::RegionLeave,
            "COMPLETION_SOUND_ENDING" => CompletionCondition::SoundEnding,
            "COMPLETION_TIME_ELAPSED" => CompletionCondition::TimeElapsed,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Rectangle,
    Circle,
    Ellipse,
}

impl Shape {
    pub fn from_id(id: &str) -> Option<Self> {
        Some(match id {
            "SHAPE_RECTANGLE" => Shape::Rectangle,
            "SHAPE_CIRCLE" => Shape::Circle,
            "SHAPE_ELLIPSE" => Shape::Ellipse,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawMode {
    #[default]
    NoReturns,
    WithReturns,
    Sequentially,
}

impl DrawMode {
    pub fn from_id(id: &str) -> Option<Self> {
        Some(match id {
            "DRAWING_NO_RETURNS" => DrawMode::NoReturns,
            "DRAWING_WITH_RETURNS" => DrawMode::WithReturns,
            "DRAWING_SEQUENTIALLY" => DrawMode::Sequentially,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementType {
    #[default]
    Strings,
    Colors,
}

impl ElementType {
    pub fn from_id(id: &str) -> Option<Self> {
        Some(match id {
            "ELEMENT_TYPE_STRINGS" => ElementType::Strings,
            "ELEMENT_TYPE_COLORS" => ElementType::Colors,
            _ => return None,
        })
    }
}

/// Letters `i`, `b`, `u`, `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct FontStyle {
    pub italic: bool,
    pub bold: bool,
    pub underline: bool,
    pub strikeout: bool,
}

impl FontStyle {
    pub fn parse(s: &str) -> Option<FontStyle> {
        let mut style = FontStyle::default();
        for c in s.trim().chars() {
            match c.to_ascii_lowercase() {
                'i' => style.italic = true,
                'b' => style.bold = true,
                'u' => style.underline = true,
                's' => style.strikeout = true,
                _ => return None,
            }
        }
        Some(style)
    }

    pub fn letters(&self) -> String {
        let mut s = String::new();
        for (on, c) in [(self.italic, 'i'), (self.bold, 'b'), (self.underline, 'u'), (self.strikeout, 's')] {
            if on {
                s.push(c);
            }
        }
        s
    }
}

fn ser_color<S: Serializer>(c: &Option<ColorValue>, s: S) -> Result<S::Ok, S::Error> {
    match c {
        Some(c) => s.serialize_str(&c.to_hex()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SettingsInfo {
    pub folder: Option<String>,
    /// The document language; excluded from canonical comparison.
    #[serde(skip)]
    pub language: Option<Language>,
    pub library: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ContainerInfo {
    pub folder: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageDecl {
    pub name: String,
    pub path: String,
    #[serde(serialize_with = "ser_color")]
    pub transparency_key: Option<ColorValue>,
    pub running_period_ms: Option<u32>,
    pub run_from_frame: Option<i64>,
    pub run_to_frame: Option<i64>,
    pub keep_in_memory: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoundDecl {
    pub name: String,
    pub path: String,
    pub repetition_number: u32,
    pub in_background: bool,
    pub volume: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovieDecl {
    pub name: String,
    pub path: String,
    #[serde(serialize_with = "ser_color")]
    pub transparency_key: Option<ColorValue>,
    pub repetition_number: u32,
    pub in_background: bool,
    pub volume: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ListDecl {
    pub name: String,
    pub element_type: ElementType,
    /// Verbatim, in declaration order.
    pub values: Vec<String>,
    pub drawing: DrawMode,
    pub group: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ScenesHeader {
    pub name_of_default_scene: String,
    pub original_screen_size_x: u32,
    pub original_screen_size_y: u32,
    pub name_of_pause_scene: Option<String>,
    pub spotlight: Option<bool>,
    pub spotlight_radius: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SceneDecl {
    pub name: String,
    #[serde(serialize_with = "ser_color")]
    pub background_color: Option<ColorValue>,
    pub name_of_background_image: Option<String>,
    pub name_of_background_sound: Option<String>,
    pub blackout_degree: Option<u8>,
    #[serde(serialize_with = "ser_color")]
    pub blackout_color: Option<ColorValue>,
    pub blocking_regions_during_blackout: Option<bool>,
    pub list_of_regions_to_disable: Option<Vec<String>>,
    pub name_of_region_enabled_after_all_regions_are_disabled: Option<String>,
    pub reset_after_enter: Option<bool>,
    pub spotlight: Option<bool>,
    pub spotlight_radius: Option<f64>,
    pub name_of_lists_switched_over_after_enter: Option<Vec<String>>,
    pub name_of_region_enabled_after_list_finished: Option<String>,
    pub on_scene_changed: Option<String>,
    pub template_ref: Option<String>,
    pub regions: Vec<RegionDecl>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

impl SceneDecl {
    pub fn blackout_degree(&self) -> u8 {
        self.blackout_degree.unwrap_or(0)
    }

    pub fn blackout_color(&self) -> ColorValue {
        self.blackout_color.unwrap_or(ColorValue::BLACK)
    }

    pub fn reset_after_enter(&self) -> bool {
        self.reset_after_enter.unwrap_or(false)
    }

    pub fn blocking_regions_during_blackout(&self) -> bool {
        self.blocking_regions_during_blackout.unwrap_or(false)
    }

    pub fn region(&self, name: &str) -> Option<&RegionDecl> {
        self.regions.iter().find(|r| r.name == name)
    }
}

/// Attributes shared by a region's base state and its activation and
/// reaction sub-elements.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StateOverlay {
    pub action_type: Option<ActionType>,
    pub border_width: Option<Value>,
    pub border_color: Option<Value>,
    pub name_of_target_scene: Option<String>,
    pub name_of_image: Option<Value>,
    pub name_of_sound: Option<Value>,
    pub move_path: Option<Vec<(i32, i32)>>,
    pub speed: Option<Value>,
    pub animation_type: Option<AnimationType>,
    pub animation_amplitude: Option<Value>,
    pub animation_period_ms: Option<Value>,
    pub tag: Option<String>,
    pub delayed_tag: Option<String>,
    pub delay_of_delayed_tag_ms: Option<i64>,
    pub text: Option<Value>,
    pub font: Option<Value>,
    pub font_size: Option<Value>,
    pub font_style: Option<FontStyle>,
    pub font_color: Option<Value>,
    pub turn_off_when_finished: Option<bool>,
    pub name_of_region_enabled_when_started: Option<Vec<String>>,
    pub name_of_region_disabled_when_started: Option<Vec<String>>,
    pub name_of_region_enabled_when_finished: Option<Vec<String>>,
    pub name_of_region_disabled_when_finished: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

impl StateOverlay {
    /// Expression-valued attributes in a fixed order, keyed by canonical id.
    pub fn values(&self) -> Vec<(&'static str, &Value)> {
        let fields: [(&'static str, &Option<Value>); 10] = [
            ("BORDER_WIDTH", &self.border_width),
            ("BORDER_COLOR", &self.border_color),
            ("NAME_OF_IMAGE", &self.name_of_image),
            ("NAME_OF_SOUND", &self.name_of_sound),
            ("SPEED", &self.speed),
            ("ANIMATION_AMPLITUDE", &self.animation_amplitude),
            ("ANIMATION_PERIOD", &self.animation_period_ms),
            ("TEXT", &self.text),
            ("FONT", &self.font),
            ("FONT_SIZE", &self.font_size),
        ];
        let mut out: Vec<(&'static str, &Value)> =
            fields.into_iter().filter_map(|(id, v)| v.as_ref().map(|v| (id, v))).collect();
        if let Some(v) = &self.font_color {
            out.push(("FONT_COLOR", v));
        }
        out
    }

    pub fn value(&self, id: &str) -> Option<&Value> {
        self.values().into_iter().find(|(k, _)| *k == id).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionDecl {
    pub name: String,
    pub shape: Shape,
    pub enabled: bool,
    pub location_of_center_x: Value,
    pub location_of_center_y: Value,
    pub size_x: Value,
    pub size_y: Value,
    pub offset_of_image_center_x: Option<Value>,
    pub offset_of_image_center_y: Option<Value>,
    pub image_size_x: Option<Value>,
    pub image_size_y: Option<Value>,
    pub offset_of_text_x: Option<Value>,
    pub offset_of_text_y: Option<Value>,
    pub offset_of_activation_bar_x: Option<Value>,
    pub offset_of_activation_bar_y: Option<Value>,
    pub region_animation_enabled: bool,
    pub image_animation_enabled: bool,
    pub condition_of_reaction_completion: CompletionCondition,
    pub reaction_duration_ms: Option<i64>,
    pub hold_scene_transition: bool,
    pub automatic_reaction_after_time_ms: i64,
    pub able_to_activate_blackout: bool,
    pub reset_after_enabled: bool,
    pub ignore_gaze: bool,
    pub enabling_delay_ms: i64,
    pub disabling_delay_ms: i64,
    pub reaction_key: Option<String>,
    pub on_activation_completed: Option<String>,
    pub on_reaction_started: Option<String>,
    pub on_reaction_finished: Option<String>,
    pub on_normal_state_return: Option<String>,
    pub on_state_changed: Option<String>,
    pub dwell_time_ms: Option<u64>,
    pub base: StateOverlay,
    pub activation: Option<StateOverlay>,
    pub reaction: Option<StateOverlay>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<RawAttr>,
    #[serde(skip)]
    pub spans: Spans,
}

impl RegionDecl {
    pub fn new(name: impl Into<String>) -> RegionDecl {
        RegionDecl {
            name: name.into(),
            shape: Shape::Rectangle,
            enabled: true,
            location_of_center_x: Value::literal("0"),
            location_of_center_y: Value::literal("0"),
            size_x: Value::literal("0"),
            size_y: Value::literal("0"),
            offset_of_image_center_x: None,
            offset_of_image_center_y: None,
            image_size_x: None,
            image_size_y: None,
            offset_of_text_x: None,
            offset_of_text_y: None,
            offset_of_activation_bar_x: None,
            offset_of_activation_bar_y: None,
            region_animation_enabled: true,
            image_animation_enabled: true,
            condition_of_reaction_completion: CompletionCondition::RegionLeave,
            reaction_duration_ms: None,
            hold_scene_transition: false,
            automatic_reaction_after_time_ms: -1,
            able_to_activate_blackout: false,
            reset_after_enabled: false,
            ignore_gaze: false,
            enabling_delay_ms: 0,
            disabling_delay_ms: 0,
            reaction_key: None,
            on_activation_completed: None,
            on_reaction_started: None,
            on_reaction_finished: None,
            on_normal_state_return: None,
            on_state_changed: None,
            dwell_time_ms: None,
            base: StateOverlay::default(),
            activation: None,
            reaction: None,
            unknown: Vec::new(),
            spans: Spans::default(),
        }
    }

    /// Geometry attributes in a fixed order, keyed by canonical id.
    pub fn geometry(&self) -> Vec<(&'static str, &Value)> {
        let mut out = vec![
            ("LOCATION_OF_CENTER_X", &self.location_of_center_x),
            ("LOCATION_OF_CENTER_Y", &self.location_of_center_y),
            ("SIZE_X", &self.size_x),
            ("SIZE_Y", &self.size_y),
        ];
        let optional: [(&'static str, &Option<Value>); 8] = [
            ("OFFSET_OF_IMAGE_CENTER_X", &self.offset_of_image_center_x),
            ("OFFSET_OF_IMAGE_CENTER_Y", &self.offset_of_image_center_y),
            ("IMAGE_SIZE_X", &self.image_size_x),
            ("IMAGE_SIZE_Y", &self.image_size_y),
            ("OFFSET_OF_TEXT_X", &self.offset_of_text_x),
            ("OFFSET_OF_TEXT_Y", &self.offset_of_text_y),
            ("OFFSET_OF_ACTIVATION_BAR_X", &self.offset_of_activation_bar_x),
            ("OFFSET_OF_ACTIVATION_BAR_Y", &self.offset_of_activation_bar_y),
        ];
        out.extend(optional.into_iter().filter_map(|(id, v)| v.as_ref().map(|v| (id, v))));
        out
    }

    pub fn overlays(&self) -> impl Iterator<Item = &StateOverlay> {
        std::iter::once(&self.base).chain(self.activation.iter()).chain(self.reaction.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GimlDocument {
    pub settings: SettingsInfo,
    pub images_container: ContainerInfo,
    pub images: Vec<ImageDecl>,
    pub sounds_container: ContainerInfo,
    pub sounds: Vec<SoundDecl>,
    pub movies_container: ContainerInfo,
    pub movies: Vec<MovieDecl>,
    pub lists: Vec<ListDecl>,
    pub scenes_header: ScenesHeader,
    pub scenes: Vec<SceneDecl>,
    /// Elements that were not recognised, as `(element path, name)` pairs.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown_elements: Vec<(String, String)>,
    #[serde(skip)]
    pub source_language: Option<Language>,
}

impl GimlDocument {
    pub fn language(&self) -> Language {
        self.source_language.unwrap_or(Language::En)
    }

    pub fn scene(&self, name: &str) -> Option<&SceneDecl> {
        self.scenes.iter().find(|s| s.name == name)
    }

    pub fn image(&self, name: &str) -> Option<&ImageDecl> {
        self.images.iter().find(|i| i.name == name)
    }

    pub fn sound(&self, name: &str) -> Option<&SoundDecl> {
        self.sounds.iter().find(|s| s.name == name)
    }

    pub fn movie(&self, name: &str) -> Option<&MovieDecl> {
        self.movies.iter().find(|s| s.name == name)
    }

    pub fn list(&self, name: &str) -> Option<&ListDecl> {
        self.lists.iter().find(|l| l.name == name)
    }

    pub fn screen(&self) -> (f64, f64) {
        (
            f64::from(self.scenes_header.original_screen_size_x),
            f64::from(self.scenes_header.original_screen_size_y),
        )
    }

    /// Equality ignoring the source language and source positions.
    pub fn canonical_eq(&self, other: &GimlDocument) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.source_language = None;
        b.source_language = None;
        a.settings.language = None;
        b.settings.language = None;
        a == b
    }

    /// Stable JSON rendering of the canonical document.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn region_count(&self) -> usize {
        self.scenes.iter().map(|s| s.regions.len()).sum()
    }

    pub fn overlay_count(&self) -> usize {
        self.scenes.iter().flat_map(|s| &s.regions).map(|r| r.overlays().count()).sum()
    }
}
