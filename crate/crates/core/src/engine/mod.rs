//! Deterministic, tick-driven scene and region state machine.
//!
//! The engine owns no clock. Callers feed [`InputTick`]s with strictly
//! increasing timestamps and receive the events each tick produced.

pub mod animation;
pub mod audio;
pub mod callbacks;
pub mod config;
pub mod events;
pub mod frame;
pub mod geometry;
pub mod motion;

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analyzer::validate;
use crate::color::ColorValue;
use crate::diagnostics::Diagnostic;
use crate::expr::{materialize, Axis, MaterializeCtx, Resolved, ValueExpr, ValueKind};
use crate::lists::{ListBank, ListEvent};
use crate::model::{ActionType, AnimationType, CompletionCondition, FontStyle, GimlDocument, RegionDecl, StateOverlay};
use crate::paths::{host_resource_path, resolve_resource_path, ResourceKind};
use crate::template::apply_templates;

pub use animation::{animation_transform, Amplitude, Transform};
pub use callbacks::{CallbackContext, CallbackRegistry};
pub use config::EngineConfig;
pub use events::{EngineEvent, EventKind};
pub use frame::{BlackoutFrame, BorderFrame, FontFrame, RegionFrame, RegionState, RenderFrame, SpotlightFrame};
pub use geometry::hit_test;
pub use motion::MovePlan;

pub const DEFAULT_FONT: &str = "Times New Roman";
pub const DEFAULT_FONT_SIZE: f64 = 15.0;
pub const DEFAULT_BORDER_WIDTH: f64 = 20.0;
pub const DEFAULT_SPOTLIGHT_RADIUS: f64 = 200.0;
pub const DEFAULT_ANIMATION_PERIOD_MS: f64 = 1000.0;

/// Attributes that describe a state's text; a state overlay that exists but
/// leaves them out shows no text rather than the base text.
const TEXT_IDS: [&str; 4] = ["TEXT", "FONT", "FONT_SIZE", "FONT_COLOR"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazePoint {
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

impl GazePoint {
    pub fn new(x: f64, y: f64) -> GazePoint {
        GazePoint { x, y, valid: true }
    }
}

/// One engine step's input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InputTick {
    pub t_ms: u64,
    pub gaze: Option<GazePoint>,
    pub keys: Vec<String>,
}

impl InputTick {
    pub fn at(t_ms: u64, x: f64, y: f64) -> InputTick {
        InputTick { t_ms, gaze: Some(GazePoint::new(x, y)), keys: Vec::new() }
    }

    pub fn no_gaze(t_ms: u64) -> InputTick {
        InputTick { t_ms, gaze: None, keys: Vec::new() }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("tick at {got} ms does not follow tick at {prev} ms")]
    OutOfOrder { prev: u64, got: u64 },
    #[error("default scene `{0}` is not declared")]
    NoDefaultScene(String),
    #[error("document has {} error(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error("engine has stopped")]
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Slot {
    Geometry,
    Base,
    Activation,
    Reaction,
}

/// A materialized attribute: fixed at init, or re-read from a list.
#[derive(Debug, Clone)]
enum Site {
    Fixed(Resolved),
    Dynamic(ValueExpr),
    Broken,
}

#[derive(Debug, Clone)]
struct ActiveMove {
    plan: MovePlan,
    started_at: u64,
    from: (f64, f64),
}

#[derive(Debug, Clone)]
struct RegionRt {
    state: RegionState,
    dwell_ms: u64,
    enabled: bool,
    pending_enable: Option<u64>,
    pending_disable: Option<u64>,
    state_since: u64,
    reaction_started_at: u64,
    left_since_reaction: bool,
    sound_end: Option<u64>,
    active_move: Option<ActiveMove>,
    offset: (f64, f64),
    automatic_done: bool,
}

impl RegionRt {
    fn new(decl: &RegionDecl) -> RegionRt {
        RegionRt {
            state: RegionState::Normal,
            dwell_ms: 0,
            enabled: decl.enabled,
            pending_enable: None,
            pending_disable: None,
            state_since: 0,
            reaction_started_at: 0,
            left_since_reaction: false,
            sound_end: None,
            active_move: None,
            offset: (0.0, 0.0),
            automatic_done: false,
        }
    }
}

#[derive(Debug, Clone)]
struct SceneRt {
    regions: Vec<RegionRt>,
    visited: bool,
    entered_at: u64,
    blackout_by: Option<usize>,
}

/// Canonical value kind of an expression-valued attribute.
fn kind_of(id: &str) -> ValueKind {
    match id {
        "LOCATION_OF_CENTER_X" | "SIZE_X" | "OFFSET_OF_IMAGE_CENTER_X" | "IMAGE_SIZE_X" | "OFFSET_OF_TEXT_X"
        | "OFFSET_OF_ACTIVATION_BAR_X" => ValueKind::Int(Axis::X),
        "LOCATION_OF_CENTER_Y" | "SIZE_Y" | "OFFSET_OF_IMAGE_CENTER_Y" | "IMAGE_SIZE_Y" | "OFFSET_OF_TEXT_Y"
        | "OFFSET_OF_ACTIVATION_BAR_Y" => ValueKind::Int(Axis::Y),
        "BORDER_COLOR" | "FONT_COLOR" => ValueKind::Color,
        "ANIMATION_AMPLITUDE" => ValueKind::Real(Axis::Relative),
        "BORDER_WIDTH" | "SPEED" | "ANIMATION_PERIOD" | "FONT_SIZE" => ValueKind::Real(Axis::Scalar),
        _ => ValueKind::Text,
    }
}

fn overlay_of(decl: &RegionDecl, slot: Slot) -> Option<&StateOverlay> {
    match slot {
        Slot::Base => Some(&decl.base),
        Slot::Activation => decl.activation.as_ref(),
        Slot::Reaction => decl.reaction.as_ref(),
        Slot::Geometry => None,
    }
}

/// The overlay describing a state; a state without its own element looks
/// like the base state.
fn state_slot(decl: &RegionDecl, state: RegionState) -> Slot {
    match state {
        RegionState::Activated if decl.activation.is_some() => Slot::Activation,
        RegionState::Reacting if decl.reaction.is_some() => Slot::Reaction,
        _ => Slot::Base,
    }
}

fn no_lists(_: &str) -> Option<String> {
    None
}

pub struct Engine {
    doc: GimlDocument,
    config: EngineConfig,
    callbacks: CallbackRegistry,
    scenes: Vec<SceneRt>,
    current: usize,
    sites: HashMap<(usize, usize, Slot, &'static str), Site>,
    lists: ListBank,
    sound_ms: HashMap<String, (u64, bool)>,
    warned: HashSet<String>,
    t_ms: u64,
    stepped: bool,
    stopped: bool,
    pending_transition: Option<String>,
    held: Vec<(usize, String)>,
    delayed_tags: Vec<(u64, String, String, String)>,
    gaze: Option<(f64, f64)>,
    frame: RenderFrame,
    out: Vec<EngineEvent>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("t_ms", &self.t_ms)
            .field("scene", &self.current_scene())
            .field("stopped", &self.stopped)
            .finish_non_exhaustive()
    }
}

impl Engine {
    /// Builds the run state and enters the default scene at t = 0.
    pub fn start(
        doc: &GimlDocument,
        config: EngineConfig,
        callbacks: CallbackRegistry,
    ) -> Result<(Engine, Vec<EngineEvent>), EngineError> {
        if config.strict {
            let errors: Vec<Diagnostic> =
                validate(doc, config.asset_root.as_deref()).into_iter().filter(Diagnostic::is_error).collect();
            if !errors.is_empty() {
                return Err(EngineError::Invalid(errors));
            }
        }
        let (doc, _) = apply_templates(doc);
        let default = doc.scenes_header.name_of_default_scene.clone();
        let current =
            doc.scenes.iter().position(|s| s.name == default).ok_or(EngineError::NoDefaultScene(default))?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let screen = doc.screen();
        let mut sites = HashMap::new();
        for (si, scene) in doc.scenes.iter().enumerate() {
            for (ri, region) in scene.regions.iter().enumerate() {
                let mut size = (0.0, 0.0);
                for (id, value) in region.geometry() {
                    let site = Self::materialize_site(&value.expr, kind_of(id), &mut rng, screen, size);
                    if let Site::Fixed(r) = &site {
                        match id {
                            "SIZE_X" => size.0 = r.as_f64().unwrap_or(0.0),
                            "SIZE_Y" => size.1 = r.as_f64().unwrap_or(0.0),
                            _ => {}
                        }
                    }
                    sites.insert((si, ri, Slot::Geometry, id), site);
                }
                for slot in [Slot::Base, Slot::Activation, Slot::Reaction] {
                    let Some(overlay) = overlay_of(region, slot) else { continue };
                    for (id, value) in overlay.values() {
                        let site = Self::materialize_site(&value.expr, kind_of(id), &mut rng, screen, size);
                        sites.insert((si, ri, slot, id), site);
                    }
                }
            }
        }

        let mut sound_ms = HashMap::new();
        for s in &doc.sounds {
            let file = host_resource_path(&doc, ResourceKind::Sound, &s.path, config.asset_root.as_deref());
            let (ms, defaulted) = match audio::probe_wav_ms(&file) {
                Some(ms) => (ms, false),
                None => match config.sound_durations_ms.get(&s.name) {
                    Some(&ms) => (ms, false),
                    None => (config.default_sound_ms, true),
                },
            };
            sound_ms.insert(s.name.clone(), (ms * u64::from(s.repetition_number.max(1)), defaulted));
        }
        for m in &doc.movies {
            let (ms, defaulted) = match config.sound_durations_ms.get(&m.name) {
                Some(&ms) => (ms, false),
                None => (config.default_sound_ms, true),
            };
            sound_ms.entry(m.name.clone()).or_insert((ms * u64::from(m.repetition_number.max(1)), defaulted));
        }

        let scenes = doc
            .scenes
            .iter()
            .map(|s| SceneRt {
                regions: s.regions.iter().map(RegionRt::new).collect(),
                visited: false,
                entered_at: 0,
                blackout_by: None,
            })
            .collect();
        let lists = ListBank::new(&doc.lists, config.seed);
        let frame = RenderFrame {
            frame_seq: 0,
            t_ms: 0,
            scene: String::new(),
            screen,
            background_color: None,
            background_image: None,
            regions: Vec::new(),
            blackout: None,
            spotlight: None,
            stopped: false,
        };
        let mut engine = Engine {
            doc,
            config,
            callbacks,
            scenes,
            current,
            sites,
            lists,
            sound_ms,
            warned: HashSet::new(),
            t_ms: 0,
            stepped: false,
            stopped: false,
            pending_transition: None,
            held: Vec::new(),
            delayed_tags: Vec::new(),
            gaze: None,
            frame,
            out: Vec::new(),
        };
        engine.enter_scene(current);
        engine.refresh_frame();
        let events = std::mem::take(&mut engine.out);
        Ok((engine, events))
    }

    fn materialize_site(
        expr: &ValueExpr,
        kind: ValueKind,
        rng: &mut ChaCha8Rng,
        screen: (f64, f64),
        size: (f64, f64),
    ) -> Site {
        if matches!(expr, ValueExpr::ListRef { .. }) {
            return Site::Dynamic(expr.clone());
        }
        let mut ctx = MaterializeCtx { rng: Some(rng), screen, region_size: size, list_value: &no_lists };
        match materialize(expr, kind, &mut ctx) {
            Ok(r) => Site::Fixed(r),
            Err(_) => Site::Broken,
        }
    }

    pub fn document(&self) -> &GimlDocument {
        &self.doc
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn t_ms(&self) -> u64 {
        self.t_ms
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn current_scene(&self) -> &str {
        &self.doc.scenes[self.current].name
    }

    pub fn lists(&self) -> &ListBank {
        &self.lists
    }

    /// State, dwell and enabled flag of a region in any scene.
    pub fn region_status(&self, scene: &str, region: &str) -> Option<(RegionState, u64, bool)> {
        let si = self.doc.scenes.iter().position(|s| s.name == scene)?;
        let ri = self.doc.scenes[si].regions.iter().position(|r| r.name == region)?;
        let rt = &self.scenes[si].regions[ri];
        Some((rt.state, rt.dwell_ms, rt.enabled))
    }

    /// Dwell needed by a region before its reaction starts.
    fn threshold(&self, si: usize, ri: usize) -> u64 {
        self.doc.scenes[si].regions[ri].dwell_time_ms.unwrap_or(self.config.dwell_ms)
    }

    // ----- value access -----

    fn resolve(&self, si: usize, ri: usize, slot: Slot, id: &'static str) -> Option<Resolved> {
        match self.sites.get(&(si, ri, slot, id))? {
            Site::Fixed(r) => Some(r.clone()),
            Site::Broken => None,
            Site::Dynamic(expr) => {
                let lookup = |name: &str| self.lists.current_value(name);
                let mut ctx = MaterializeCtx {
                    rng: None,
                    screen: self.doc.screen(),
                    region_size: (0.0, 0.0),
                    list_value: &lookup,
                };
                materialize(expr, kind_of(id), &mut ctx).ok()
            }
        }
    }

    fn has_site(&self, si: usize, ri: usize, slot: Slot, id: &'static str) -> bool {
        self.sites.contains_key(&(si, ri, slot, id))
    }

    fn geometry_num(&self, si: usize, ri: usize, id: &'static str) -> Option<f64> {
        self.resolve(si, ri, Slot::Geometry, id).and_then(|r| r.as_f64())
    }

    /// An overlay value as seen in `state`, following inheritance from the
    /// base state.
    fn visual(&self, si: usize, ri: usize, state: RegionState, id: &'static str) -> Option<Resolved> {
        let decl = &self.doc.scenes[si].regions[ri];
        let slot = state_slot(decl, state);
        if slot == Slot::Base || self.has_site(si, ri, slot, id) {
            return self.resolve(si, ri, slot, id);
        }
        if TEXT_IDS.contains(&id) {
            None
        } else {
            self.resolve(si, ri, Slot::Base, id)
        }
    }

    fn visual_overlay<T>(&self, si: usize, ri: usize, state: RegionState, f: impl Fn(&StateOverlay) -> Option<T>) -> Option<T> {
        let decl = &self.doc.scenes[si].regions[ri];
        let own = overlay_of(decl, state_slot(decl, state)).and_then(&f);
        own.or_else(|| f(&decl.base))
    }

    fn center_and_size(&self, si: usize, ri: usize) -> ((f64, f64), (f64, f64)) {
        let rt = &self.scenes[si].regions[ri];
        let x = self.geometry_num(si, ri, "LOCATION_OF_CENTER_X").unwrap_or(0.0);
        let y = self.geometry_num(si, ri, "LOCATION_OF_CENTER_Y").unwrap_or(0.0);
        let w = self.geometry_num(si, ri, "SIZE_X").unwrap_or(0.0);
        let h = self.geometry_num(si, ri, "SIZE_Y").unwrap_or(0.0);
        ((x + rt.offset.0, y + rt.offset.1), (w, h))
    }

    fn hit(&self, si: usize, ri: usize, p: (f64, f64)) -> bool {
        let (c, s) = self.center_and_size(si, ri);
        hit_test(self.doc.scenes[si].regions[ri].shape, c, s, p)
    }

    /// Names of the enabled regions of the current scene containing `p`.
    pub fn hits_at(&self, p: (f64, f64)) -> Vec<String> {
        let si = self.current;
        (0..self.scenes[si].regions.len())
            .filter(|&ri| self.scenes[si].regions[ri].enabled && self.hit(si, ri, p))
            .map(|ri| self.doc.scenes[si].regions[ri].name.clone())
            .collect()
    }

    // ----- event plumbing -----

    fn emit(&mut self, kind: EventKind, region: Option<usize>, payload: Option<String>) {
        let scene = self.doc.scenes[self.current].name.clone();
        let mut ev = EngineEvent::new(self.t_ms, kind, scene);
        ev.region = region.map(|ri| self.doc.scenes[self.current].regions[ri].name.clone());
        ev.payload = payload;
        self.out.push(ev);
    }

    fn warn_once(&mut self, key: String, region: Option<usize>, message: String) {
        if self.warned.insert(key) {
            self.emit(EventKind::Warning, region, Some(message));
        }
    }

    fn callback(&mut self, name: Option<String>, region: Option<usize>) {
        let Some(name) = name else { return };
        self.emit(EventKind::CallbackInvoked, region, Some(name.clone()));
        let scene = &self.doc.scenes[self.current];
        let ctx = CallbackContext {
            name: &name,
            t_ms: self.t_ms,
            scene: &scene.name,
            region: region.map(|ri| scene.regions[ri].name.as_str()),
            library: self.doc.settings.library.as_deref(),
        };
        self.callbacks.invoke(&ctx);
    }

    fn region_decl(&self, ri: usize) -> &RegionDecl {
        &self.doc.scenes[self.current].regions[ri]
    }

    fn region_index(&self, name: &str) -> Option<usize> {
        self.doc.scenes[self.current].regions.iter().position(|r| r.name == name)
    }

    fn rt(&mut self, ri: usize) -> &mut RegionRt {
        &mut self.scenes[self.current].regions[ri]
    }

    // ----- stepping -----

    /// Advances the run to `input.t_ms` and returns the events of that tick.
    pub fn step(&mut self, input: &InputTick) -> Result<Vec<EngineEvent>, EngineError> {
        if self.stopped {
            return Err(EngineError::Stopped);
        }
        if self.stepped && input.t_ms <= self.t_ms || input.t_ms < self.t_ms {
            return Err(EngineError::OutOfOrder { prev: self.t_ms, got: input.t_ms });
        }
        let dt = input.t_ms - self.t_ms;
        self.t_ms = input.t_ms;
        self.stepped = true;
        let gaze = input.gaze.filter(|g| g.valid && g.x.is_finite() && g.y.is_finite()).map(|g| (g.x, g.y));
        if gaze.is_some() {
            self.gaze = gaze;
        }

        self.run_timers();

        for key in &input.keys {
            let k = key.trim();
            if k.eq_ignore_ascii_case("escape") || k.eq_ignore_ascii_case("esc") {
                self.emit(EventKind::EngineStopped, None, None);
                self.stopped = true;
                self.refresh_frame();
                return Ok(std::mem::take(&mut self.out));
            }
            if k.eq_ignore_ascii_case("pause") {
                match self.doc.scenes_header.name_of_pause_scene.clone() {
                    Some(p) => self.queue_transition(p, None),
                    None => self.warn_once("pause".into(), None, "no pause scene is declared".into()),
                }
                continue;
            }
            for ri in 0..self.scenes[self.current].regions.len() {
                let matches = self.region_decl(ri).reaction_key.as_deref().is_some_and(|rk| rk.eq_ignore_ascii_case(k));
                if matches && self.scenes[self.current].regions[ri].enabled {
                    self.force_reaction(ri);
                }
            }
        }

        let si = self.current;
        for ri in 0..self.scenes[si].regions.len() {
            let after = self.region_decl(ri).automatic_reaction_after_time_ms;
            let rt = &self.scenes[si].regions[ri];
            if after >= 0 && !rt.automatic_done && rt.enabled && self.t_ms - self.scenes[si].entered_at >= after as u64 {
                self.rt(ri).automatic_done = true;
                self.force_reaction(ri);
            }
        }

        for ri in 0..self.scenes[si].regions.len() {
            self.fsm(ri, gaze, dt);
        }

        self.advance_moves();

        if let Some(target) = self.pending_transition.take() {
            if let Some(ti) = self.doc.scenes.iter().position(|s| s.name == target) {
                self.emit(EventKind::SceneLeft, None, None);
                self.held.clear();
                self.enter_scene(ti);
            }
        }
        self.refresh_frame();
        Ok(std::mem::take(&mut self.out))
    }

    /// Ends the run; emits `EngineStopped` once.
    pub fn stop(&mut self, t_ms: u64) -> Vec<EngineEvent> {
        if self.stopped {
            return Vec::new();
        }
        self.t_ms = self.t_ms.max(t_ms);
        self.stopped = true;
        self.emit(EventKind::EngineStopped, None, None);
        self.refresh_frame();
        std::mem::take(&mut self.out)
    }

    fn run_timers(&mut self) {
        let t = self.t_ms;
        for ri in 0..self.scenes[self.current].regions.len() {
            if self.scenes[self.current].regions[ri].pending_enable.is_some_and(|due| due <= t) {
                self.enable_now(ri);
            }
            if self.scenes[self.current].regions[ri].pending_disable.is_some_and(|due| due <= t) {
                self.disable_now(ri);
            }
        }
        let mut due: Vec<_> = Vec::new();
        self.delayed_tags.retain(|d| {
            if d.0 <= t {
                due.push(d.clone());
                false
            } else {
                true
            }
        });
        for (_, scene, region, tag) in due {
            self.out.push(EngineEvent::new(t, EventKind::DelayedTagEmitted, scene).region(region).payload(tag));
        }
    }

    fn fsm(&mut self, ri: usize, gaze: Option<(f64, f64)>, dt: u64) {
        let si = self.current;
        if !self.scenes[si].regions[ri].enabled {
            return;
        }
        let blocked = self.doc.scenes[si].blocking_regions_during_blackout()
            && self.scenes[si].blackout_by.is_some_and(|b| b != ri);
        let hit = !self.region_decl(ri).ignore_gaze && gaze.is_some_and(|p| self.hit(si, ri, p));
        match self.scenes[si].regions[ri].state {
            RegionState::Normal => {
                if hit && !blocked {
                    self.start_activation(ri);
                    let active = self.scenes[si].regions[ri].state == RegionState::Activated;
                    if active && self.threshold(si, ri) == 0 {
                        self.start_reaction(ri);
                    }
                }
            }
            RegionState::Activated => {
                if hit && !blocked {
                    let threshold = self.threshold(si, ri);
                    let rt = self.rt(ri);
                    rt.dwell_ms = (rt.dwell_ms + dt).min(threshold);
                    if rt.dwell_ms >= threshold {
                        self.start_reaction(ri);
                    }
                } else {
                    self.leave_activation(ri);
                }
            }
            RegionState::Reacting => {
                if !hit {
                    self.rt(ri).left_since_reaction = true;
                }
                let rt = &self.scenes[si].regions[ri];
                if rt.left_since_reaction && self.t_ms > rt.reaction_started_at && self.completion_holds(ri) {
                    self.finish_reaction(ri);
                }
            }
        }
    }

    fn completion_holds(&self, ri: usize) -> bool {
        let decl = self.region_decl(ri);
        let rt = &self.scenes[self.current].regions[ri];
        match decl.condition_of_reaction_completion {
            CompletionCondition::RegionLeave => true,
            CompletionCondition::SoundEnding => rt.sound_end.is_none_or(|end| end <= self.t_ms),
            CompletionCondition::TimeElapsed => {
                let need = decl.reaction_duration_ms.unwrap_or(0).max(0) as u64;
                self.t_ms - rt.reaction_started_at >= need
            }
        }
    }

    fn set_state(&mut self, ri: usize, state: RegionState) {
        let t = self.t_ms;
        let rt = self.rt(ri);
        rt.state = state;
        rt.state_since = t;
    }

    fn start_activation(&mut self, ri: usize) {
        self.set_state(ri, RegionState::Activated);
        self.rt(ri).dwell_ms = 0;
        self.emit(EventKind::RegionActivated, Some(ri), None);
        self.callback(self.region_decl(ri).on_state_changed.clone(), Some(ri));
        self.enter_overlay(ri, Slot::Activation);
    }

    fn leave_activation(&mut self, ri: usize) {
        self.return_normal(ri);
        self.finish_overlay(ri, Slot::Activation);
    }

    fn force_reaction(&mut self, ri: usize) {
        match self.scenes[self.current].regions[ri].state {
            RegionState::Reacting => {}
            RegionState::Normal => {
                self.start_activation(ri);
                self.start_reaction(ri);
            }
            RegionState::Activated => self.start_reaction(ri),
        }
    }

    fn start_reaction(&mut self, ri: usize) {
        let threshold = self.threshold(self.current, ri);
        self.callback(self.region_decl(ri).on_activation_completed.clone(), Some(ri));
        self.finish_overlay(ri, Slot::Activation);
        if !self.scenes[self.current].regions[ri].enabled {
            return;
        }
        let t = self.t_ms;
        self.set_state(ri, RegionState::Reacting);
        let rt = self.rt(ri);
        rt.dwell_ms = threshold;
        rt.reaction_started_at = t;
        rt.left_since_reaction = false;
        rt.sound_end = None;
        self.emit(EventKind::ReactionStarted, Some(ri), None);
        self.callback(self.region_decl(ri).on_reaction_started.clone(), Some(ri));
        self.callback(self.region_decl(ri).on_state_changed.clone(), Some(ri));
        if self.region_decl(ri).able_to_activate_blackout && self.scenes[self.current].blackout_by.is_none() {
            self.scenes[self.current].blackout_by = Some(ri);
            self.emit(EventKind::BlackoutOn, Some(ri), None);
        }
        self.enter_overlay(ri, Slot::Reaction);
    }

    fn end_blackout(&mut self, ri: usize) {
        if self.scenes[self.current].blackout_by == Some(ri) {
            self.scenes[self.current].blackout_by = None;
            self.emit(EventKind::BlackoutOff, Some(ri), None);
        }
    }

    fn finish_reaction(&mut self, ri: usize) {
        self.emit(EventKind::ReactionFinished, Some(ri), None);
        self.callback(self.region_decl(ri).on_reaction_finished.clone(), Some(ri));
        self.end_blackout(ri);
        self.return_normal(ri);
        self.finish_overlay(ri, Slot::Reaction);
        let mut released = None;
        self.held.retain(|(r, target)| {
            if *r == ri && released.is_none() {
                released = Some(target.clone());
                false
            } else {
                true
            }
        });
        if let Some(target) = released {
            self.queue_transition(target, Some(ri));
        }
    }

    fn return_normal(&mut self, ri: usize) {
        self.set_state(ri, RegionState::Normal);
        let rt = self.rt(ri);
        rt.dwell_ms = 0;
        rt.sound_end = None;
        self.emit(EventKind::ReturnedToNormal, Some(ri), None);
        self.callback(self.region_decl(ri).on_normal_state_return.clone(), Some(ri));
        self.callback(self.region_decl(ri).on_state_changed.clone(), Some(ri));
        if let Some(action) = self.region_decl(ri).base.action_type {
            self.apply_action(ri, Slot::Base, action);
        }
    }

    /// Ends whatever a region is doing without running finish hooks.
    fn interrupt(&mut self, ri: usize) {
        match self.scenes[self.current].regions[ri].state {
            RegionState::Normal => {}
            RegionState::Activated => {
                self.set_state(ri, RegionState::Normal);
                self.rt(ri).dwell_ms = 0;
                self.emit(EventKind::ReturnedToNormal, Some(ri), None);
            }
            RegionState::Reacting => {
                self.emit(EventKind::ReactionFinished, Some(ri), None);
                self.end_blackout(ri);
                self.set_state(ri, RegionState::Normal);
                self.rt(ri).dwell_ms = 0;
                self.rt(ri).sound_end = None;
                self.emit(EventKind::ReturnedToNormal, Some(ri), None);
                self.held.retain(|(r, _)| *r != ri);
            }
        }
    }

    fn enter_overlay(&mut self, ri: usize, slot: Slot) {
        let Some(overlay) = overlay_of(self.region_decl(ri), slot).cloned() else { return };
        if let Some(tag) = &overlay.tag {
            self.emit(EventKind::TagEmitted, Some(ri), Some(tag.clone()));
        }
        if let Some(tag) = &overlay.delayed_tag {
            let delay = overlay.delay_of_delayed_tag_ms.unwrap_or(0).max(0) as u64;
            if delay == 0 {
                self.emit(EventKind::DelayedTagEmitted, Some(ri), Some(tag.clone()));
            } else {
                let scene = self.doc.scenes[self.current].name.clone();
                let region = self.region_decl(ri).name.clone();
                self.delayed_tags.push((self.t_ms + delay, scene, region, tag.clone()));
            }
        }
        if let Some(sound) = self.resolve(self.current, ri, slot, "NAME_OF_SOUND").map(|r| r.as_text()) {
            match self.sound_ms.get(&sound).copied() {
                Some((ms, defaulted)) => {
                    if defaulted {
                        self.warn_once(
                            format!("duration:{sound}"),
                            Some(ri),
                            format!("duration of `{sound}` is unknown; assuming {ms} ms"),
                        );
                    }
                    let end = self.t_ms + ms;
                    self.rt(ri).sound_end = Some(end);
                }
                None => self.warn_once(format!("sound:{sound}"), Some(ri), format!("sound `{sound}` is not declared")),
            }
        }
        if let Some(action) = overlay.action_type {
            self.apply_action(ri, slot, action);
        }
        for name in overlay.name_of_region_enabled_when_started.iter().flatten() {
            self.request_by_name(name, true);
        }
        for name in overlay.name_of_region_disabled_when_started.iter().flatten() {
            self.request_by_name(name, false);
        }
    }

    fn finish_overlay(&mut self, ri: usize, slot: Slot) {
        let Some(overlay) = overlay_of(self.region_decl(ri), slot).cloned() else { return };
        for name in overlay.name_of_region_enabled_when_finished.iter().flatten() {
            self.request_by_name(name, true);
        }
        for name in overlay.name_of_region_disabled_when_finished.iter().flatten() {
            self.request_by_name(name, false);
        }
        if overlay.turn_off_when_finished == Some(true) {
            self.request_disable(ri);
        }
    }

    fn apply_action(&mut self, ri: usize, slot: Slot, action: ActionType) {
        match action {
            ActionType::None | ActionType::Border => {}
            ActionType::TransitionToScene => {
                let target = overlay_of(self.region_decl(ri), slot).and_then(|o| o.name_of_target_scene.clone());
                match target {
                    Some(target) if self.region_decl(ri).hold_scene_transition && slot == Slot::Reaction => {
                        self.held.push((ri, target));
                    }
                    Some(target) => self.queue_transition(target, Some(ri)),
                    None => self.warn_once(
                        format!("target:{}:{}", self.current, ri),
                        Some(ri),
                        "transition without a target scene".into(),
                    ),
                }
            }
            ActionType::Move => {
                let path = overlay_of(self.region_decl(ri), slot).and_then(|o| o.move_path.clone());
                let Some(path) = path else {
                    self.warn_once(format!("path:{}:{}", self.current, ri), Some(ri), "move without a path".into());
                    return;
                };
                let speed = self
                    .resolve(self.current, ri, slot, "SPEED")
                    .or_else(|| self.resolve(self.current, ri, Slot::Base, "SPEED"))
                    .and_then(|r| r.as_f64())
                    .unwrap_or(0.0);
                let t = self.t_ms;
                let rt = self.rt(ri);
                rt.active_move = Some(ActiveMove { plan: MovePlan::new(&path, speed), started_at: t, from: rt.offset });
            }
            ActionType::ResetRegion => self.reset_soft(ri),
            ActionType::ResetScene => {
                for other in 0..self.scenes[self.current].regions.len() {
                    if other == ri {
                        self.reset_soft(ri);
                    } else {
                        self.reset_full(other);
                    }
                }
            }
        }
    }

    fn queue_transition(&mut self, target: String, region: Option<usize>) {
        if self.doc.scene(&target).is_none() {
            self.emit(EventKind::Warning, region, Some(format!("scene `{target}` is not declared")));
        } else if let Some(first) = &self.pending_transition {
            let msg = format!("transition to `{target}` dropped; `{first}` was queued first");
            self.emit(EventKind::Warning, region, Some(msg));
        } else {
            self.pending_transition = Some(target);
        }
    }

    fn reset_soft(&mut self, ri: usize) {
        let rt = self.rt(ri);
        rt.offset = (0.0, 0.0);
        rt.active_move = None;
    }

    fn reset_full(&mut self, ri: usize) {
        self.interrupt(ri);
        let declared = self.region_decl(ri).enabled;
        let rt = self.rt(ri);
        rt.pending_enable = None;
        rt.pending_disable = None;
        rt.offset = (0.0, 0.0);
        rt.active_move = None;
        rt.automatic_done = false;
        let was = rt.enabled;
        if was != declared {
            self.rt(ri).enabled = declared;
            let kind = if declared { EventKind::RegionEnabled } else { EventKind::RegionDisabled };
            self.emit(kind, Some(ri), None);
        }
    }

    fn request_by_name(&mut self, name: &str, enable: bool) {
        match self.region_index(name) {
            Some(ri) if enable => self.request_enable(ri),
            Some(ri) => self.request_disable(ri),
            None => self.warn_once(
                format!("region:{}:{name}", self.current),
                None,
                format!("region `{name}` is not in this scene"),
            ),
        }
    }

    fn request_enable(&mut self, ri: usize) {
        let delay = self.region_decl(ri).enabling_delay_ms;
        self.rt(ri).pending_disable = None;
        if delay > 0 {
            let due = self.t_ms + delay as u64;
            self.rt(ri).pending_enable = Some(due);
        } else {
            self.enable_now(ri);
        }
    }

    fn request_disable(&mut self, ri: usize) {
        let delay = self.region_decl(ri).disabling_delay_ms;
        self.rt(ri).pending_enable = None;
        if delay > 0 {
            let due = self.t_ms + delay as u64;
            self.rt(ri).pending_disable = Some(due);
        } else {
            self.disable_now(ri);
        }
    }

    fn enable_now(&mut self, ri: usize) {
        self.rt(ri).pending_enable = None;
        if self.scenes[self.current].regions[ri].enabled {
            return;
        }
        if self.region_decl(ri).reset_after_enabled {
            let rt = self.rt(ri);
            rt.offset = (0.0, 0.0);
            rt.active_move = None;
        }
        self.rt(ri).enabled = true;
        self.emit(EventKind::RegionEnabled, Some(ri), None);
    }

    fn disable_now(&mut self, ri: usize) {
        self.rt(ri).pending_disable = None;
        if !self.scenes[self.current].regions[ri].enabled {
            return;
        }
        self.interrupt(ri);
        self.rt(ri).enabled = false;
        self.emit(EventKind::RegionDisabled, Some(ri), None);
        if self.scenes[self.current].regions.iter().all(|r| !r.enabled) {
            let fallback = self.doc.scenes[self.current].name_of_region_enabled_after_all_regions_are_disabled.clone();
            if let Some(name) = fallback {
                self.request_by_name(&name, true);
            }
        }
    }

    fn advance_moves(&mut self) {
        let t = self.t_ms;
        for ri in 0..self.scenes[self.current].regions.len() {
            let rt = self.rt(ri);
            let Some(m) = &rt.active_move else { continue };
            let ((dx, dy), done) = m.plan.offset_at((t - m.started_at) as f64);
            rt.offset = (m.from.0 + dx, m.from.1 + dy);
            if done {
                rt.active_move = None;
                self.emit(EventKind::MoveCompleted, Some(ri), None);
            }
        }
    }

    fn enter_scene(&mut self, si: usize) {
        self.current = si;
        self.scenes[si].entered_at = self.t_ms;
        self.emit(EventKind::SceneEntered, None, None);
        let scene = self.doc.scenes[si].clone();
        self.callback(scene.on_scene_changed.clone(), None);
        if scene.reset_after_enter() && self.scenes[si].visited {
            for ri in 0..scene.regions.len() {
                self.reset_full(ri);
            }
        }
        self.scenes[si].visited = true;
        for rt in &mut self.scenes[si].regions {
            rt.automatic_done = false;
        }
        for name in scene.list_of_regions_to_disable.iter().flatten() {
            match self.region_index(name) {
                Some(ri) => self.disable_now(ri),
                None => self.warn_once(format!("region:{si}:{name}"), None, format!("region `{name}` is not in this scene")),
            }
        }
        if let Some(names) = &scene.name_of_lists_switched_over_after_enter {
            let mut exhausted = false;
            for ev in self.lists.switch_over(names) {
                match ev {
                    ListEvent::SwitchedOver { list, value, .. } => {
                        self.emit(EventKind::ListSwitchedOver, None, Some(format!("{list}={value}")));
                    }
                    ListEvent::Exhausted { list } => {
                        exhausted = true;
                        self.emit(EventKind::ListExhausted, None, Some(list));
                    }
                    ListEvent::StillExhausted { .. } => exhausted = true,
                }
            }
            if exhausted {
                if let Some(name) = &scene.name_of_region_enabled_after_list_finished {
                    self.request_by_name(name, true);
                }
            }
        }
    }

    // ----- rendering -----

    /// The latest frame; `frame_seq` moves only when content changes.
    pub fn current_frame(&self) -> &RenderFrame {
        &self.frame
    }

    fn refresh_frame(&mut self) {
        let mut next = self.build_frame();
        if next.same_content(&self.frame) {
            next.frame_seq = self.frame.frame_seq;
        } else {
            next.frame_seq = self.frame.frame_seq + 1;
        }
        self.frame = next;
    }

    fn color_hex(r: Option<Resolved>) -> Option<String> {
        r.and_then(|r| r.as_text().parse::<ColorValue>().ok()).map(|c| c.to_hex())
    }

    fn build_frame(&mut self) -> RenderFrame {
        let si = self.current;
        let scene = &self.doc.scenes[si];
        let header = &self.doc.scenes_header;
        let background_image = scene.name_of_background_image.as_ref().and_then(|n| {
            self.doc
                .image(n)
                .map(|i| resolve_resource_path(&self.doc, ResourceKind::Image, &i.path))
                .or_else(|| self.doc.movie(n).map(|m| resolve_resource_path(&self.doc, ResourceKind::Movie, &m.path)))
        });
        let spotlight = scene.spotlight.or(header.spotlight).unwrap_or(false).then(|| SpotlightFrame {
            radius: scene.spotlight_radius.or(header.spotlight_radius).unwrap_or(DEFAULT_SPOTLIGHT_RADIUS),
            center: self.gaze,
        });
        let blackout = self.scenes[si].blackout_by.map(|_| BlackoutFrame {
            degree: scene.blackout_degree(),
            color: scene.blackout_color().to_hex(),
        });
        let background_color = scene.background_color.map(|c| c.to_hex());
        let scene_name = scene.name.clone();
        let mut regions = Vec::new();
        let mut missing = Vec::new();
        for ri in 0..self.scenes[si].regions.len() {
            if !self.scenes[si].regions[ri].enabled {
                continue;
            }
            let (frame, missing_image) = self.region_frame(si, ri);
            if let Some(name) = missing_image {
                missing.push((ri, name));
            }
            regions.push(frame);
        }
        for (ri, name) in missing {
            self.warn_once(format!("image:{name}"), Some(ri), format!("image `{name}` is not declared; showing a placeholder"));
        }
        RenderFrame {
            frame_seq: 0,
            t_ms: self.t_ms,
            scene: scene_name,
            screen: self.doc.screen(),
            background_color,
            background_image,
            regions,
            blackout,
            spotlight,
            stopped: self.stopped,
        }
    }

    fn region_frame(&self, si: usize, ri: usize) -> (RegionFrame, Option<String>) {
        let decl = &self.doc.scenes[si].regions[ri];
        let rt = &self.scenes[si].regions[ri];
        let state = rt.state;
        let (center, size) = self.center_and_size(si, ri);
        let pair = |x: &'static str, y: &'static str| -> Option<(f64, f64)> {
            match (self.geometry_num(si, ri, x), self.geometry_num(si, ri, y)) {
                (None, None) => None,
                (a, b) => Some((a.unwrap_or(0.0), b.unwrap_or(0.0))),
            }
        };

        let mut missing = None;
        let mut image = None;
        let mut image_placeholder = false;
        if let Some(name) = self.visual(si, ri, state, "NAME_OF_IMAGE").map(|r| r.as_text()) {
            if let Some(i) = self.doc.image(&name) {
                image = Some(resolve_resource_path(&self.doc, ResourceKind::Image, &i.path));
            } else if let Some(m) = self.doc.movie(&name) {
                image = Some(resolve_resource_path(&self.doc, ResourceKind::Movie, &m.path));
            } else {
                image_placeholder = true;
                missing = Some(name);
            }
        }

        let slot = state_slot(decl, state);
        let own = overlay_of(decl, slot);
        let style = match own {
            Some(o) if slot != Slot::Base => o.font_style,
            _ => decl.base.font_style,
        };
        let font = FontFrame {
            family: self.visual(si, ri, state, "FONT").map(|r| r.as_text()).unwrap_or_else(|| DEFAULT_FONT.into()),
            size: self.visual(si, ri, state, "FONT_SIZE").and_then(|r| r.as_f64()).unwrap_or(DEFAULT_FONT_SIZE),
            color: Self::color_hex(self.visual(si, ri, state, "FONT_COLOR")).unwrap_or_else(|| ColorValue::BLACK.to_hex()),
            style: style.unwrap_or(FontStyle::default()),
        };

        let border = (own.and_then(|o| o.action_type) == Some(ActionType::Border)).then(|| BorderFrame {
            width: self.visual(si, ri, state, "BORDER_WIDTH").and_then(|r| r.as_f64()).unwrap_or(DEFAULT_BORDER_WIDTH),
            color: Self::color_hex(self.visual(si, ri, state, "BORDER_COLOR")).unwrap_or_else(|| ColorValue::BLACK.to_hex()),
        });

        let kind = self.visual_overlay(si, ri, state, |o| o.animation_type).unwrap_or(AnimationType::None);
        let mut anim = Transform::IDENTITY;
        if kind != AnimationType::None {
            let period = self
                .visual(si, ri, state, "ANIMATION_PERIOD")
                .and_then(|r| r.as_f64())
                .unwrap_or(DEFAULT_ANIMATION_PERIOD_MS);
            let amplitude = self.amplitude(si, ri, state);
            anim = animation_transform(kind, amplitude, period, size, (self.t_ms - rt.state_since) as f64);
        }
        let (transform, image_transform) = if decl.region_animation_enabled {
            (anim, Transform::IDENTITY)
        } else if decl.image_animation_enabled {
            (Transform::IDENTITY, anim)
        } else {
            (Transform::IDENTITY, Transform::IDENTITY)
        };

        let threshold = self.threshold(si, ri);
        let activation_progress = match state {
            RegionState::Normal => 0.0,
            RegionState::Reacting => 1.0,
            RegionState::Activated if threshold == 0 => 1.0,
            RegionState::Activated => rt.dwell_ms as f64 / threshold as f64,
        };

        let frame = RegionFrame {
            name: decl.name.clone(),
            shape: decl.shape,
            state,
            center,
            size,
            image,
            image_placeholder,
            image_offset: pair("OFFSET_OF_IMAGE_CENTER_X", "OFFSET_OF_IMAGE_CENTER_Y").unwrap_or((0.0, 0.0)),
            image_size: pair("IMAGE_SIZE_X", "IMAGE_SIZE_Y"),
            text: self.visual(si, ri, state, "TEXT").map(|r| r.as_text()),
            font,
            text_offset: pair("OFFSET_OF_TEXT_X", "OFFSET_OF_TEXT_Y").unwrap_or((0.0, 0.0)),
            border,
            transform,
            image_transform,
            activation_progress,
            activation_bar_offset: pair("OFFSET_OF_ACTIVATION_BAR_X", "OFFSET_OF_ACTIVATION_BAR_Y").unwrap_or((0.0, 0.0)),
        };
        (frame, missing)
    }

    fn amplitude(&self, si: usize, ri: usize, state: RegionState) -> Amplitude {
        let decl = &self.doc.scenes[si].regions[ri];
        let slot = state_slot(decl, state);
        let slot = if self.has_site(si, ri, slot, "ANIMATION_AMPLITUDE") { slot } else { Slot::Base };
        let Some(value) = overlay_of(decl, slot).and_then(|o| o.animation_amplitude.as_ref()) else {
            return Amplitude::Pixels(0.0);
        };
        let raw = match &value.expr {
            ValueExpr::ListRef { list } => self.lists.current_value(list).unwrap_or_default(),
            _ => value.raw.clone(),
        };
        let v = self.resolve(si, ri, slot, "ANIMATION_AMPLITUDE").and_then(|r| r.as_f64()).unwrap_or(0.0);
        if raw.contains('%') {
            Amplitude::Relative(v)
        } else {
            Amplitude::Pixels(v)
        }
    }
}
