//! Dispersion-threshold (I-DT) fixation detection.

use std::collections::VecDeque;

use serde::Serialize;

use super::trace::GazeSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdtParams {
    /// Maximum `(max x - min x) + (max y - min y)` inside a fixation, px.
    pub dispersion_px: f64,
    pub min_duration_ms: f64,
}

impl Default for IdtParams {
    fn default() -> Self {
        IdtParams { dispersion_px: 80.0, min_duration_ms: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fixation {
    pub start_ms: f64,
    pub end_ms: f64,
    pub x: f64,
    pub y: f64,
    pub dispersion: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Saccade {
    pub start_ms: f64,
    pub end_ms: f64,
    pub from_x: f64,
    pub from_y: f64,
    pub to_x: f64,
    pub to_y: f64,
    pub amplitude: f64,
}

/// Sliding-window extrema over sample indices.
#[derive(Default)]
struct Extrema {
    min_x: VecDeque<usize>,
    max_x: VecDeque<usize>,
    min_y: VecDeque<usize>,
    max_y: VecDeque<usize>,
}

impl Extrema {
    fn clear(&mut self) {
        self.min_x.clear();
        self.max_x.clear();
        self.min_y.clear();
        self.max_y.clear();
    }

    fn push(&mut self, s: &[GazeSample], i: usize) {
        fn push_by(q: &mut VecDeque<usize>, i: usize, keep: impl Fn(usize) -> bool) {
            while q.back().is_some_and(|&b| !keep(b)) {
                q.pop_back();
            }
            q.push_back(i);
        }
        push_by(&mut self.min_x, i, |b| s[b].x < s[i].x);
        push_by(&mut self.max_x, i, |b| s[b].x > s[i].x);
        push_by(&mut self.min_y, i, |b| s[b].y < s[i].y);
        push_by(&mut self.max_y, i, |b| s[b].y > s[i].y);
    }

    fn pop(&mut self, i: usize) {
        for q in [&mut self.min_x, &mut self.max_x, &mut self.min_y, &mut self.max_y] {
            if q.front() == Some(&i) {
                q.pop_front();
            }
        }
    }

    /// Dispersion of the window, optionally including sample `extra`.
    fn dispersion(&self, s: &[GazeSample], extra: Option<usize>) -> f64 {
        let pick = |q: &VecDeque<usize>, f: fn(f64, f64) -> f64, get: fn(&GazeSample) -> f64| -> f64 {
            let base = q.front().map(|&i| get(&s[i]));
            match (base, extra) {
                (Some(b), Some(e)) => f(b, get(&s[e])),
                (Some(b), None) => b,
                (None, Some(e)) => get(&s[e]),
                (None, None) => 0.0,
            }
        };
        let x = |g: &GazeSample| g.x;
        let y = |g: &GazeSample| g.y;
        (pick(&self.max_x, f64::max, x) - pick(&self.min_x, f64::min, x))
            + (pick(&self.max_y, f64::max, y) - pick(&self.min_y, f64::min, y))
    }
}

fn fixation_of(run: &[GazeSample], from: usize, to: usize, dispersion: f64) -> Fixation {
    let n = (to - from + 1) as f64;
    let (sx, sy) = run[from..=to].iter().fold((0.0, 0.0), |(a, b), s| (a + s.x, b + s.y));
    Fixation {
        start_ms: run[from].t_ms,
        end_ms: run[to].t_ms,
        x: sx / n,
        y: sy / n,
        dispersion,
        sample_count: to - from + 1,
    }
}

fn detect_in_run(run: &[GazeSample], p: IdtParams, out: &mut Vec<Fixation>) {
    let n = run.len();
    let mut ext = Extrema::default();
    let mut i = 0;
    // Window is [i, j); j never moves backwards.
    let mut j = 0;
    while i < n {
        if j <= i {
            ext.clear();
            ext.push(run, i);
            j = i + 1;
        }
        while j < n && ext.dispersion(run, Some(j)) <= p.dispersion_px {
            ext.push(run, j);
            j += 1;
        }
        if run[j - 1].t_ms - run[i].t_ms >= p.min_duration_ms {
            out.push(fixation_of(run, i, j - 1, ext.dispersion(run, None)));
            i = j;
        } else {
            ext.pop(i);
            i += 1;
        }
    }
}

/// Detects fixations. Invalid samples split the trace; a window never spans
/// them. Runs in linear time.
pub fn detect_fixations(samples: &[GazeSample], p: IdtParams) -> Vec<Fixation> {
    let mut out = Vec::new();
    for run in samples.split(|s| !s.valid) {
        if !run.is_empty() {
            detect_in_run(run, p, &mut out);
        }
    }
    out
}

/// Saccades are the gaps between consecutive fixations.
pub fn saccades_between(fixations: &[Fixation]) -> Vec<Saccade> {
    fixations
        .windows(2)
        .map(|w| Saccade {
            start_ms: w[0].end_ms,
            end_ms: w[1].start_ms,
            from_x: w[0].x,
            from_y: w[0].y,
            to_x: w[1].x,
            to_y: w[1].y,
            amplitude: (w[1].x - w[0].x).hypot(w[1].y - w[0].y),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster(t0: f64, n: usize, x: f64, y: f64) -> Vec<GazeSample> {
        (0..n).map(|k| GazeSample::new(t0 + 10.0 * k as f64, x + (k % 3) as f64, y - (k % 2) as f64)).collect()
    }

    #[test]
    fn two_clusters_one_saccade() {
        let mut s = cluster(0.0, 30, 100.0, 100.0);
        s.extend(cluster(300.0, 30, 600.0, 400.0));
        let f = detect_fixations(&s, IdtParams::default());
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].sample_count, 30);
        let sac = saccades_between(&f);
        assert_eq!(sac.len(), 1);
        assert!((sac[0].amplitude - 583.1).abs() < 0.1, "{}", sac[0].amplitude);
    }

    #[test]
    fn invalid_samples_split_windows() {
        let mut s = cluster(0.0, 8, 100.0, 100.0);
        s.push(GazeSample::invalid(80.0));
        s.extend(cluster(90.0, 8, 100.0, 100.0));
        assert!(detect_fixations(&s, IdtParams::default()).is_empty());
    }

    #[test]
    fn short_cluster_is_not_a_fixation() {
        assert!(detect_fixations(&cluster(0.0, 5, 1.0, 1.0), IdtParams::default()).is_empty());
    }
}
