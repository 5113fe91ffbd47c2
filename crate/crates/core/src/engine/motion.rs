//! Piecewise-linear movement along relative waypoints.

/// A move in progress: relative steps walked at constant speed.
#[derive(Debug, Clone, PartialEq)]
pub struct MovePlan {
    steps: Vec<(f64, f64)>,
    /// Design px per second.
    pub speed: f64,
}

impl MovePlan {
    pub fn new(steps: &[(i32, i32)], speed: f64) -> MovePlan {
        MovePlan { steps: steps.iter().map(|&(x, y)| (f64::from(x), f64::from(y))).collect(), speed }
    }

    pub fn length(&self) -> f64 {
        self.steps.iter().map(|(x, y)| x.hypot(*y)).sum()
    }

    /// Total traversal time; zero when the speed is not positive.
    pub fn duration_ms(&self) -> f64 {
        if self.speed <= 0.0 {
            0.0
        } else {
            self.length() / self.speed * 1000.0
        }
    }

    pub fn final_offset(&self) -> (f64, f64) {
        self.steps.iter().fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x, ay + y))
    }

    /// Offset from the starting centre after `elapsed_ms`, and whether the
    /// path is finished.
    pub fn offset_at(&self, elapsed_ms: f64) -> ((f64, f64), bool) {
        if self.speed <= 0.0 {
            return (self.final_offset(), true);
        }
        let mut remaining = self.speed * elapsed_ms / 1000.0;
        let mut at = (0.0, 0.0);
        for &(x, y) in &self.steps {
            let len = x.hypot(y);
            if remaining < len {
                let f = remaining / len;
                return ((at.0 + x * f, at.1 + y * f), false);
            }
            remaining -= len;
            at = (at.0 + x, at.1 + y);
        }
        (at, true)
    }
}
