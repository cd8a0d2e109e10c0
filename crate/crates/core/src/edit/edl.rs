//! Edit decision list: kept source intervals with playback speeds.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdlSegment {
    pub src_start: f64,
    pub src_end: f64,
    pub speed: f64,
}

impl EdlSegment {
    pub fn output_duration(&self) -> f64 {
        (self.src_end - self.src_start) / self.speed
    }
}

/// `edl.json`: `{ "source_duration": s, "segments": [{src_start, src_end, speed}] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditDecisionList {
    pub source_duration: f64,
    pub segments: Vec<EdlSegment>,
}

impl EditDecisionList {
    /// The untouched source at normal speed.
    pub fn full(source_duration: f64) -> Self {
        let segments = if source_duration > 0.0 {
            vec![EdlSegment {
                src_start: 0.0,
                src_end: source_duration,
                speed: 1.0,
            }]
        } else {
            Vec::new()
        };
        Self {
            source_duration,
            segments,
        }
    }

    pub fn output_duration(&self) -> f64 {
        self.segments.iter().map(EdlSegment::output_duration).sum()
    }

    /// Cuts `[start, end)` out of every kept segment.
    pub fn remove(&mut self, start: f64, end: f64) {
        if start >= end {
            return;
        }
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        for seg in self.segments.drain(..) {
            if seg.src_end <= start || end <= seg.src_start {
                out.push(seg);
                continue;
            }
            if seg.src_start < start {
                out.push(EdlSegment { src_end: start, ..seg });
            }
            if end < seg.src_end {
                out.push(EdlSegment { src_start: end, ..seg });
            }
        }
        self.segments = out;
        self.normalize();
    }

    /// Sets the speed of whatever is kept inside `[start, end)`.
    pub fn set_speed(&mut self, start: f64, end: f64, speed: f64) {
        if start >= end {
            return;
        }
        let mut out = Vec::with_capacity(self.segments.len() + 2);
        for seg in self.segments.drain(..) {
            if seg.src_end <= start || end <= seg.src_start {
                out.push(seg);
                continue;
            }
            let mid_start = seg.src_start.max(start);
            let mid_end = seg.src_end.min(end);
            if seg.src_start < mid_start {
                out.push(EdlSegment { src_end: mid_start, ..seg });
            }
            out.push(EdlSegment {
                src_start: mid_start,
                src_end: mid_end,
                speed,
            });
            if mid_end < seg.src_end {
                out.push(EdlSegment { src_start: mid_end, ..seg });
            }
        }
        self.segments = out;
        self.normalize();
    }

    /// Sorts and merges touching segments that share a speed.
    pub fn normalize(&mut self) {
        self.segments.retain(|s| s.src_start < s.src_end);
        self.segments.sort_by(|a, b| a.src_start.total_cmp(&b.src_start));
        let mut merged: Vec<EdlSegment> = Vec::with_capacity(self.segments.len());
        for seg in self.segments.drain(..) {
            match merged.last_mut() {
                Some(prev) if prev.src_end == seg.src_start && prev.speed == seg.speed => prev.src_end = seg.src_end,
                _ => merged.push(seg),
            }
        }
        self.segments = merged;
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<(), String> {
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.src_start < s.src_end) {
                return Err(format!("segment {i} is empty or reversed"));
            }
            if s.src_start < 0.0 || s.src_end > self.source_duration {
                return Err(format!("segment {i} leaves the source"));
            }
            if !(s.speed.is_finite() && s.speed > 0.0) {
                return Err(format!("segment {i} has speed {}", s.speed));
            }
        }
        for (i, w) in self.segments.windows(2).enumerate() {
            if w[0].src_end > w[1].src_start {
                return Err(format!("segments {i} and {} overlap or are unsorted", i + 1));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("edl serializes")
    }
}

/// What an external renderer needs: the JSON EDL and a plain cut list.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderPlan {
    pub edl_json: String,
    pub cut_list: String,
    pub warnings: Vec<RenderWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderWarning {
    /// Everything was deleted.
    EmptyOutput,
}

impl std::fmt::Display for RenderWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenderWarning::EmptyOutput => f.write_str("every segment was deleted; the output is empty"),
        }
    }
}

/// Serializes `edl` for rendering. Segments are emitted in source order
/// regardless of how they are stored.
///
/// Cut-list lines look like `keep 0.000 10.000 speed 1.000`.
pub fn compile_render_plan(edl: &EditDecisionList) -> RenderPlan {
    let mut sorted = edl.clone();
    sorted.segments.sort_by(|a, b| a.src_start.total_cmp(&b.src_start));
    let cut_list = sorted
        .segments
        .iter()
        .map(|s| format!("keep {:.3} {:.3} speed {:.3}\n", s.src_start, s.src_end, s.speed))
        .collect();
    let warnings = if sorted.segments.is_empty() {
        vec![RenderWarning::EmptyOutput]
    } else {
        Vec::new()
    };
    RenderPlan {
        edl_json: sorted.to_json(),
        cut_list,
        warnings,
    }
}
