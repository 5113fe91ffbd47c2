use std::f64::consts::TAU;

use serde::Serialize;

use crate::model::AnimationType;

/// Visual-only transform of a region or its image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transform {
    pub scale: f64,
    pub rotation_deg: f64,
    pub offset_x: f64,
    pub offset_y: f64,
}

impl Transform {
    pub const IDENTITY: Transform = Transform { scale: 1.0, rotation_deg: 0.0, offset_x: 0.0, offset_y: 0.0 };
}

impl Default for Transform {
    fn default() -> Self {
        Transform::IDENTITY
    }
}

/// Animation amplitude: design pixels, or a fraction of the region size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Pixels(f64),
    Relative(f64),
}

/// Transform `t_ms` into an animation of period `period_ms` on a region of
/// the given size. A non-positive period yields the identity.
pub fn animation_transform(
    kind: AnimationType,
    amplitude: Amplitude,
    period_ms: f64,
    size: (f64, f64),
    t_ms: f64,
) -> Transform {
    if period_ms <= 0.0 || !period_ms.is_finite() {
        return Transform::IDENTITY;
    }
    let phase = (t_ms % period_ms) / period_ms;
    let wave = (TAU * phase).sin();
    let along = |extent: f64| match amplitude {
        Amplitude::Pixels(a) => a,
        Amplitude::Relative(f) => f * extent,
    };
    let mut tr = Transform::IDENTITY;
    match kind {
        AnimationType::None => {}
        AnimationType::SizeChanging => {
            let a = match amplitude {
                Amplitude::Relative(f) => f,
                Amplitude::Pixels(p) if size.0 > 0.0 => p / size.0,
                Amplitude::Pixels(_) => 0.0,
            };
            tr.scale = 1.0 + a * wave;
        }
        AnimationType::RotationCw => tr.rotation_deg = 360.0 * phase,
        AnimationType::RotationCcw => tr.rotation_deg = -360.0 * phase,
        AnimationType::SwingingHorizontal => tr.offset_x = along(size.0) * wave,
        AnimationType::SwingingVertical => tr.offset_y = along(size.1) * wave,
    }
    tr
}
