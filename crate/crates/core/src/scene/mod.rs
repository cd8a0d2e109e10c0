//! Scene segmentation from object-set changes.
//!
//! Boundaries are proposed where the objects seen just before and just after
//! a gap differ sharply, then moved onto script-line edges so that no line is
//! cut in half, and finally each scene is titled with a caption of its first
//! sharp frame.

pub mod score;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{AnalysisConfig, FrameRecord};
use crate::labels::{jaccard, label_set};
use crate::transcript::TranscriptDoc;

pub use score::{score_boundaries, score_errors, BoundaryMatchReport, ErrorScoreReport, LabeledSpan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    /// Frames compared across a gap, half before and half after. Even.
    pub window: usize,
    pub similarity_threshold: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            window: 4,
            similarity_threshold: 0.2,
        }
    }
}

/// Half-open scene extent before captioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpan {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub start: f64,
    pub end: f64,
    pub caption: String,
    pub caption_frame_index: usize,
}

/// Object-set similarity for every candidate gap.
///
/// Gap `i` sits between frames `i` and `i + 1`; it compares the union of
/// labels over the `window / 2` frames ending at `i` with the union over the
/// `window / 2` frames starting at `i + 1`. Only gaps with a full window on
/// both sides are candidates.
pub fn gap_similarities(records: &[FrameRecord], window: usize) -> Vec<(usize, f64)> {
    let half = window / 2;
    if half == 0 || records.len() < window {
        return Vec::new();
    }
    let sets: Vec<BTreeSet<&str>> = records.iter().map(label_set).collect();
    let union = |range: std::ops::Range<usize>| -> BTreeSet<&str> {
        sets[range].iter().flat_map(|s| s.iter().copied()).collect()
    };
    (half - 1..records.len() - half)
        .map(|i| (i, jaccard(&union(i + 1 - half..i + 1), &union(i + 1..i + 1 + half))))
        .collect()
}

/// Proposes scene boundary times.
///
/// A boundary is emitted at the time of frame `i + 1` when gap `i` has
/// similarity below the threshold and strictly below every other candidate
/// gap within `window / 2` gaps of it.
pub fn propose_boundaries(records: &[FrameRecord], config: &SegmentationConfig) -> Vec<f64> {
    let sims = gap_similarities(records, config.window);
    let half = config.window / 2;
    let mut out = Vec::new();
    for (k, &(gap, sim)) in sims.iter().enumerate() {
        if sim >= config.similarity_threshold {
            continue;
        }
        let lo = k.saturating_sub(half);
        let hi = (k + half).min(sims.len() - 1);
        let is_min = (lo..=hi).filter(|&j| j != k).all(|j| sim < sims[j].1);
        if is_min {
            out.push(records[gap + 1].time);
        }
    }
    out
}

/// Moves boundaries onto line edges and merges scenes without a whole line.
///
/// A boundary strictly inside a line moves to the nearer edge (ties go to
/// the line start). Boundaries outside `(0, duration)` are dropped and
/// duplicates collapse. A scene that does not fully contain at least one
/// line is merged into its predecessor; a leading one merges forward.
pub fn snap_to_phrases(boundaries: &[f64], transcript: &TranscriptDoc) -> Vec<SceneSpan> {
    let duration = transcript.source_duration;
    let lines = &transcript.lines;

    let mut cuts: Vec<f64> = boundaries
        .iter()
        .map(|&b| {
            // First line ending after b; b is inside it iff it also starts before b.
            let idx = lines.partition_point(|l| l.end <= b);
            match lines.get(idx) {
                Some(l) if l.start < b => {
                    if b - l.start <= l.end - b {
                        l.start
                    } else {
                        l.end
                    }
                }
                _ => b,
            }
        })
        .filter(|&b| b > 0.0 && b < duration)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(0.0);
    edges.extend(cuts);
    edges.push(duration);

    let holds_line = |start: f64, end: f64| lines.iter().any(|l| start <= l.start && l.end <= end);

    let mut scenes: Vec<SceneSpan> = Vec::new();
    let mut pending_start: Option<f64> = None;
    for pair in edges.windows(2) {
        let (start, end) = (pending_start.unwrap_or(pair[0]), pair[1]);
        if holds_line(start, end) {
            scenes.push(SceneSpan { start, end });
            pending_start = None;
        } else if let Some(prev) = scenes.last_mut() {
            prev.end = end;
        } else {
            pending_start = Some(start);
        }
    }
    if scenes.is_empty() && duration > 0.0 {
        scenes.push(SceneSpan { start: 0.0, end: duration });
    }
    scenes
}

#[derive(Debug, Error)]
#[error("no caption for frame {frame_index}: {reason}")]
pub struct CaptionError {
    pub frame_index: usize,
    pub reason: String,
}

/// Something that describes a frame in one sentence.
pub trait CaptionProvider {
    fn caption(&self, frame_index: usize) -> Result<String, CaptionError>;
}

/// Captions read from `captions.json`: `{ "<frame_index>": "caption" }`.
#[derive(Debug, Clone, Default)]
pub struct FixtureCaptions {
    captions: HashMap<usize, String>,
}

impl FixtureCaptions {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let raw: HashMap<String, String> = serde_json::from_str(text)?;
        let mut captions = HashMap::with_capacity(raw.len());
        for (k, v) in raw {
            let idx = k
                .parse::<usize>()
                .map_err(|_| serde::de::Error::custom(format!("caption key {k:?} is not a frame index")))?;
            captions.insert(idx, v);
        }
        Ok(Self { captions })
    }

    pub fn insert(&mut self, frame_index: usize, caption: &str) {
        self.captions.insert(frame_index, caption.to_owned());
    }
}

impl CaptionProvider for FixtureCaptions {
    fn caption(&self, frame_index: usize) -> Result<String, CaptionError> {
        self.captions.get(&frame_index).cloned().ok_or_else(|| CaptionError {
            frame_index,
            reason: "not present in captions fixture".into(),
        })
    }
}

/// A non-fatal captioning problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionDiagnostic {
    pub scene_start: f64,
    pub frame_index: usize,
    pub message: String,
}

/// Captions every scene with its first non-blurry frame.
///
/// Falls back to the scene's first frame when all are blurry, and to the
/// last frame sampled before the scene when it holds no sample at all.
/// Provider failures leave an empty caption and a diagnostic.
pub fn attach_captions(
    spans: &[SceneSpan],
    records: &[FrameRecord],
    config: &AnalysisConfig,
    provider: &dyn CaptionProvider,
) -> (Vec<Scene>, Vec<CaptionDiagnostic>) {
    let mut diagnostics = Vec::new();
    let scenes = spans
        .iter()
        .map(|span| {
            let lo = records.partition_point(|r| r.time < span.start);
            let hi = records.partition_point(|r| r.time < span.end);
            let inside = &records[lo..hi];
            let chosen = inside
                .iter()
                .find(|r| r.focus_score >= config.blur_threshold)
                .or_else(|| inside.first())
                .or_else(|| records[..lo].last())
                .or_else(|| records.first());
            let Some(frame) = chosen else {
                diagnostics.push(CaptionDiagnostic {
                    scene_start: span.start,
                    frame_index: 0,
                    message: "no sampled frames to caption".into(),
                });
                return Scene {
                    start: span.start,
                    end: span.end,
                    caption: String::new(),
                    caption_frame_index: 0,
                };
            };
            let caption = match provider.caption(frame.index) {
                Ok(c) => c,
                Err(e) => {
                    diagnostics.push(CaptionDiagnostic {
                        scene_start: span.start,
                        frame_index: frame.index,
                        message: e.to_string(),
                    });
                    String::new()
                }
            };
            Scene {
                start: span.start,
                end: span.end,
                caption,
                caption_frame_index: frame.index,
            }
        })
        .collect();
    (scenes, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ObjectDetection;
    use crate::transcript::{LineKind, ScriptLine};
    use proptest::prelude::*;

    fn rec(index: usize, labels: &[&str]) -> FrameRecord {
        FrameRecord {
            index,
            time: index as f64,
            mean_luminance: 0.5,
            focus_score: 50.0,
            objects: labels
                .iter()
                .map(|l| ObjectDetection::new(l, 0.9, [0.0, 0.0, 1.0, 1.0]))
                .collect(),
        }
    }

    fn recs(sets: &[&[&str]]) -> Vec<FrameRecord> {
        sets.iter().enumerate().map(|(i, s)| rec(i, s)).collect()
    }

    /// Literal reading of the boundary rule with no shared intermediate state.
    fn oracle(sets: &[Vec<String>], window: usize, threshold: f64) -> Vec<usize> {
        let n = sets.len();
        let half = window / 2;
        if n < window || half == 0 {
            return vec![];
        }
        let sim_at = |i: usize| -> f64 {
            let mut before: Vec<&String> = Vec::new();
            for s in &sets[i + 1 - half..=i] {
                for l in s {
                    if !before.contains(&l) {
                        before.push(l);
                    }
                }
            }
            let mut after: Vec<&String> = Vec::new();
            for s in &sets[i + 1..=i + half] {
                for l in s {
                    if !after.contains(&l) {
                        after.push(l);
                    }
                }
            }
            let inter = before.iter().filter(|l| after.contains(l)).count();
            let uni = before.len() + after.len() - inter;
            if uni == 0 {
                1.0
            } else {
                inter as f64 / uni as f64
            }
        };
        let first = half - 1;
        let last = n - half - 1;
        let mut out = vec![];
        for i in first..=last {
            let s = sim_at(i);
            if s >= threshold {
                continue;
            }
            let mut strict = true;
            for j in first..=last {
                if j != i && j.abs_diff(i) <= half && sim_at(j) <= s {
                    strict = false;
                }
            }
            if strict {
                out.push(i + 1);
            }
        }
        out
    }

    fn owned(sets: &[&[&str]]) -> Vec<Vec<String>> {
        sets.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
    }

    #[test]
    fn single_hard_cut() {
        let sets: [&[&str]; 6] = [&["a", "b"], &["a", "b"], &["a", "b"], &["c", "d"], &["c", "d"], &["c", "d"]];
        let sims = gap_similarities(&recs(&sets), 4);
        assert_eq!(sims, vec![(1, 0.5), (2, 0.0), (3, 0.5)]);
        assert_eq!(propose_boundaries(&recs(&sets), &SegmentationConfig::default()), vec![3.0]);
        assert_eq!(oracle(&owned(&sets), 4, 0.2), vec![3]);
    }

    #[test]
    fn constant_sets_have_no_boundaries() {
        let sets: Vec<&[&str]> = vec![&["a"]; 10];
        assert!(propose_boundaries(&recs(&sets), &SegmentationConfig::default()).is_empty());
    }

    #[test]
    fn alternating_sets_match_oracle() {
        let sets: Vec<&[&str]> = (0..12).map(|i| if i % 2 == 0 { &["a"][..] } else { &["b"][..] }).collect();
        let got = propose_boundaries(&recs(&sets), &SegmentationConfig::default());
        let want: Vec<f64> = oracle(&owned(&sets), 4, 0.2).into_iter().map(|i| i as f64).collect();
        assert_eq!(got, want);
        assert!(got.is_empty());
    }

    #[test]
    fn too_few_frames() {
        let sets: [&[&str]; 3] = [&["a"], &["b"], &["c"]];
        assert!(propose_boundaries(&recs(&sets), &SegmentationConfig::default()).is_empty());
    }

    proptest! {
        #[test]
        fn boundaries_match_oracle(
            raw in proptest::collection::vec(proptest::collection::vec(0usize..5, 0..4), 0..50),
        ) {
            let labels = ["a", "b", "c", "d", "e"];
            let sets: Vec<Vec<String>> = raw.iter()
                .map(|s| s.iter().map(|&i| labels[i].to_string()).collect())
                .collect();
            let records: Vec<FrameRecord> = sets.iter().enumerate().map(|(i, s)| {
                let refs: Vec<&str> = s.iter().map(String::as_str).collect();
                rec(i, &refs)
            }).collect();
            let got = propose_boundaries(&records, &SegmentationConfig::default());
            let want: Vec<f64> = oracle(&sets, 4, 0.2).into_iter().map(|i| i as f64).collect();
            prop_assert_eq!(got, want);
        }
    }

    fn line(start: f64, end: f64) -> ScriptLine {
        ScriptLine {
            kind: LineKind::Narration,
            start,
            end,
            text: "x".into(),
            words: vec![],
        }
    }

    fn tdoc(lines: Vec<ScriptLine>, duration: f64) -> TranscriptDoc {
        TranscriptDoc {
            lines,
            source_duration: duration,
        }
    }

    #[test]
    fn boundary_inside_line_moves_to_nearer_edge() {
        let t = tdoc(vec![line(2.0, 8.0), line(10.0, 15.0), line(16.0, 19.0)], 20.0);
        let s = snap_to_phrases(&[12.0], &t);
        assert_eq!(s, vec![SceneSpan { start: 0.0, end: 10.0 }, SceneSpan { start: 10.0, end: 20.0 }]);
        let s = snap_to_phrases(&[12.5], &t);
        assert_eq!(s[0].end, 10.0, "ties go to the line start");
        let s = snap_to_phrases(&[13.0], &t);
        assert_eq!(s[0].end, 15.0);
    }

    #[test]
    fn short_scene_merges_into_predecessor() {
        let t = tdoc(vec![line(2.0, 8.0), line(12.0, 15.0)], 20.0);
        let s = snap_to_phrases(&[10.0, 11.0], &t);
        assert_eq!(s, vec![SceneSpan { start: 0.0, end: 11.0 }, SceneSpan { start: 11.0, end: 20.0 }]);
    }

    #[test]
    fn leading_short_scene_merges_forward() {
        let t = tdoc(vec![line(5.0, 8.0), line(12.0, 15.0)], 20.0);
        let s = snap_to_phrases(&[1.0, 10.0], &t);
        assert_eq!(s, vec![SceneSpan { start: 0.0, end: 10.0 }, SceneSpan { start: 10.0, end: 20.0 }]);
    }

    #[test]
    fn no_boundaries_single_scene() {
        let t = tdoc(vec![line(2.0, 8.0)], 20.0);
        assert_eq!(snap_to_phrases(&[], &t), vec![SceneSpan { start: 0.0, end: 20.0 }]);
        let empty = tdoc(vec![], 2.0);
        assert_eq!(snap_to_phrases(&[1.0], &empty), vec![SceneSpan { start: 0.0, end: 2.0 }]);
    }

    fn lines_strategy() -> impl Strategy<Value = (Vec<ScriptLine>, f64)> {
        proptest::collection::vec((0.0f64..5.0, 0.1f64..6.0), 0..12).prop_flat_map(|layout| {
            let mut t = 0.0;
            let mut lines = vec![];
            for (gap, len) in layout {
                t += gap;
                lines.push(line(t, t + len));
                t += len;
            }
            (Just(lines), t + 0.1..t + 10.0)
        })
    }

    proptest! {
        #[test]
        fn snap_partitions_and_is_idempotent(
            (lines, duration) in lines_strategy(),
            raw in proptest::collection::vec(0.0f64..1.0, 0..10),
        ) {
            let t = tdoc(lines, duration);
            let bounds: Vec<f64> = raw.iter().map(|r| r * duration).collect();
            let scenes = snap_to_phrases(&bounds, &t);
            prop_assert!(!scenes.is_empty());
            prop_assert_eq!(scenes[0].start, 0.0);
            prop_assert_eq!(scenes.last().unwrap().end, duration);
            for pair in scenes.windows(2) {
                prop_assert_eq!(pair[0].end, pair[1].start);
            }
            for s in &scenes {
                prop_assert!(s.start < s.end);
                if !t.lines.is_empty() {
                    prop_assert!(t.lines.iter().any(|l| s.start <= l.start && l.end <= s.end));
                }
                for l in &t.lines {
                    prop_assert!(!(l.start < s.start && s.start < l.end), "line cut by scene start");
                }
            }
            let again_bounds: Vec<f64> = scenes.iter().skip(1).map(|s| s.start).collect();
            prop_assert_eq!(snap_to_phrases(&again_bounds, &t), scenes);
        }
    }

    #[test]
    fn captions_pick_first_sharp_frame() {
        let mut records = recs(&[&[], &[], &[], &[], &[]]);
        records[0].focus_score = 1.0;
        records[1].focus_score = 1.0;
        let mut caps = FixtureCaptions::default();
        caps.insert(2, "A pantry full of food");
        let spans = [SceneSpan { start: 0.0, end: 5.0 }];
        let (scenes, diags) = attach_captions(&spans, &records, &AnalysisConfig::default(), &caps);
        assert_eq!(scenes[0].caption_frame_index, 2);
        assert_eq!(scenes[0].caption, "A pantry full of food");
        assert!(diags.is_empty());
    }

    #[test]
    fn all_blurry_uses_first_frame_and_missing_caption_is_diagnosed() {
        let mut records = recs(&[&[], &[], &[], &[]]);
        records.iter_mut().for_each(|r| r.focus_score = 0.0);
        let spans = [SceneSpan { start: 1.0, end: 4.0 }];
        let (scenes, diags) =
            attach_captions(&spans, &records, &AnalysisConfig::default(), &FixtureCaptions::default());
        assert_eq!(scenes[0].caption_frame_index, 1);
        assert_eq!(scenes[0].caption, "");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].frame_index, 1);
    }

    #[test]
    fn captions_json() {
        let caps = FixtureCaptions::from_json(r#"{"7": "A person holds a can"}"#).unwrap();
        assert_eq!(caps.caption(7).unwrap(), "A person holds a can");
        assert!(caps.caption(8).is_err());
        assert!(FixtureCaptions::from_json(r#"{"seven": "x"}"#).is_err());
    }
}
