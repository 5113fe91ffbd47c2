//! Mapping between design space (the document's original screen size) and a
//! player's viewport. Players letterbox the design extent into whatever
//! window they have and send gaze back in design coordinates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Letterbox {
    pub scale: f64,
    pub offset_x: f64,
    pub offset_y: f64,
}

impl Letterbox {
    /// Largest aspect-preserving fit of `design` centred in `viewport`.
    pub fn fit(design: (f64, f64), viewport: (f64, f64)) -> Letterbox {
        let (dw, dh) = (design.0.max(1.0), design.1.max(1.0));
        let scale = (viewport.0 / dw).min(viewport.1 / dh);
        Letterbox { scale, offset_x: (viewport.0 - dw * scale) / 2.0, offset_y: (viewport.1 - dh * scale) / 2.0 }
    }

    pub fn to_screen(&self, p: (f64, f64)) -> (f64, f64) {
        (p.0 * self.scale + self.offset_x, p.1 * self.scale + self.offset_y)
    }

    pub fn to_design(&self, p: (f64, f64)) -> (f64, f64) {
        ((p.0 - self.offset_x) / self.scale, (p.1 - self.offset_y) / self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wide_window_gets_side_bars() {
        let lb = Letterbox::fit((1000.0, 500.0), (1000.0, 250.0));
        assert_eq!(lb.scale, 0.5);
        assert_eq!(lb.offset_x, 250.0);
        assert_eq!(lb.to_screen((1000.0, 500.0)), (750.0, 250.0));
    }

    proptest! {
        #[test]
        fn round_trip(w in 100.0..4000.0f64, h in 100.0..4000.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let lb = Letterbox::fit((1920.0, 1080.0), (w, h));
            let screen = (x * w, y * h);
            let back = lb.to_screen(lb.to_design(screen));
            prop_assert!((back.0 - screen.0).abs() <= 0.5 && (back.1 - screen.1).abs() <= 0.5);
        }
    }
}
