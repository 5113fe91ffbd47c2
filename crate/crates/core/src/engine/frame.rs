use serde::Serialize;

use super::animation::Transform;
use crate::model::{FontStyle, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionState {
    Normal,
    Activated,
    Reacting,
}

impl RegionState {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionState::Normal => "normal",
            RegionState::Activated => "activated",
            RegionState::Reacting => "reacting",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FontFrame {
    pub family: String,
    pub size: f64,
    /// `#RRGGBB` or `#AARRGGBB`.
    pub color: String,
    pub style: FontStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorderFrame {
    pub width: f64,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionFrame {
    pub name: String,
    pub shape: Shape,
    pub state: RegionState,
    pub center: (f64, f64),
    pub size: (f64, f64),
    /// Image resource path, resolved against the settings folder.
    pub image: Option<String>,
    /// Set when the state names an image that cannot be shown.
    pub image_placeholder: bool,
    pub image_offset: (f64, f64),
    pub image_size: Option<(f64, f64)>,
    pub text: Option<String>,
    pub font: FontFrame,
    pub text_offset: (f64, f64),
    pub border: Option<BorderFrame>,
    pub transform: Transform,
    pub image_transform: Transform,
    /// Dwell progress in `[0, 1]`.
    pub activation_progress: f64,
    pub activation_bar_offset: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlackoutFrame {
    pub degree: u8,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotlightFrame {
    pub radius: f64,
    pub center: Option<(f64, f64)>,
}

/// Everything a player needs to draw one frame, in design coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderFrame {
    /// Increments only when the content changes.
    pub frame_seq: u64,
    pub t_ms: u64,
    pub scene: String,
    pub screen: (f64, f64),
    pub background_color: Option<String>,
    pub background_image: Option<String>,
    pub regions: Vec<RegionFrame>,
    pub blackout: Option<BlackoutFrame>,
    pub spotlight: Option<SpotlightFrame>,
    pub stopped: bool,
}

impl RenderFrame {
    /// Equality ignoring sequence number and timestamp.
    pub fn same_content(&self, other: &RenderFrame) -> bool {
        self.scene == other.scene
            && self.screen == other.screen
            && self.background_color == other.background_color
            && self.background_image == other.background_image
            && self.regions == other.regions
            && self.blackout == other.blackout
            && self.spotlight == other.spotlight
            && self.stopped == other.stopped
    }
}
