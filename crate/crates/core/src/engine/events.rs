use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EventKind {
    SceneEntered,
    SceneLeft,
    RegionActivated,
    ReactionStarted,
    ReactionFinished,
    ReturnedToNormal,
    RegionEnabled,
    RegionDisabled,
    TagEmitted,
    DelayedTagEmitted,
    ListSwitchedOver,
    ListExhausted,
    CallbackInvoked,
    BlackoutOn,
    BlackoutOff,
    MoveCompleted,
    EngineStopped,
    /// A runtime anomaly that did not stop the run.
    Warning,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::SceneEntered => "SceneEntered",
            EventKind::SceneLeft => "SceneLeft",
            EventKind::RegionActivated => "RegionActivated",
            EventKind::ReactionStarted => "ReactionStarted",
            EventKind::ReactionFinished => "ReactionFinished",
            EventKind::ReturnedToNormal => "ReturnedToNormal",
            EventKind::RegionEnabled => "RegionEnabled",
            EventKind::RegionDisabled => "RegionDisabled",
            EventKind::TagEmitted => "TagEmitted",
            EventKind::DelayedTagEmitted => "DelayedTagEmitted",
            EventKind::ListSwitchedOver => "ListSwitchedOver",
            EventKind::ListExhausted => "ListExhausted",
            EventKind::CallbackInvoked => "CallbackInvoked",
            EventKind::BlackoutOn => "BlackoutOn",
            EventKind::BlackoutOff => "BlackoutOff",
            EventKind::MoveCompleted => "MoveCompleted",
            EventKind::EngineStopped => "EngineStopped",
            EventKind::Warning => "Warning",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EngineEvent {
    pub t_ms: u64,
    pub kind: EventKind,
    pub scene: String,
    pub region: Option<String>,
    pub payload: Option<String>,
}

impl EngineEvent {
    pub fn new(t_ms: u64, kind: EventKind, scene: impl Into<String>) -> Self {
        EngineEvent { t_ms, kind, scene: scene.into(), region: None, payload: None }
    }

    pub fn region(mut self, region: impl Into<String>) -> Self {
        self.region = Some(region.into());
        self
    }

    pub fn payload(mut self, payload: impl Into<String>) -> Self {
        self.payload = Some(payload.into());
        self
    }
}

impl fmt::Display for EngineEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}({}", self.t_ms, self.kind, self.scene)?;
        if let Some(r) = &self.region {
            write!(f, "/{r}")?;
        }
        if let Some(p) = &self.payload {
            write!(f, ": {p}")?;
        }
        f.write_str(")")
    }
}
