//! The audio-visual script: scene headings, narration and pause lines, and
//! the visual errors that overlap them.

mod nav;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{ErrorKind, ErrorSegment, FrameRecord};
use crate::scene::Scene;
use crate::transcript::{LineKind, TranscriptDoc, WordToken};

pub use nav::{navigate, Cursor, NavMove, NavResult};

#[derive(Debug, Error, PartialEq)]
pub enum ScriptError {
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("time {0} is outside the footage")]
    OutOfRange(f64),
    #[error("invalid cursor: {0}")]
    InvalidCursor(String),
}

/// Stable block identifier. Assigned once at assembly and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u64);

impl std::fmt::Display for BlockId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    SceneHeading,
    Narration,
    Pause,
}

/// An error overlapping a block, clipped to the block's span. The original
/// segment bounds are kept so distinct errors can be told apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorAnnotation {
    pub kind: ErrorKind,
    pub start: f64,
    pub end: f64,
    pub segment_start: f64,
    pub segment_end: f64,
}

impl ErrorAnnotation {
    pub fn segment(&self) -> ErrorSegment {
        ErrorSegment {
            kind: self.kind,
            start: self.segment_start,
            end: self.segment_end,
        }
    }

    fn key(&self) -> (ErrorKind, u64, u64) {
        (self.kind, self.segment_start.to_bits(), self.segment_end.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub kind: BlockKind,
    pub start: f64,
    pub end: f64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub words: Vec<WordToken>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ErrorAnnotation>,
    /// Frame the heading caption was taken from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_frame_index: Option<usize>,
}

impl Block {
    pub fn is_line(&self) -> bool {
        self.kind != BlockKind::SceneHeading
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }

    /// Re-clips annotations after the span shrank, dropping those that no
    /// longer overlap.
    pub(crate) fn reclip_errors(&mut self) {
        let (start, end) = (self.start, self.end);
        self.errors.retain_mut(|e| {
            e.start = e.segment_start.max(start);
            e.end = e.segment_end.min(end);
            e.start < e.end
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AVScriptDoc {
    pub source_duration: f64,
    pub revision: u64,
    pub blocks: Vec<Block>,
}

impl AVScriptDoc {
    pub fn block(&self, id: BlockId) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn position(&self, id: BlockId) -> Option<usize> {
        self.blocks.iter().position(|b| b.id == id)
    }

    /// Index range of the scene opened by the heading at `heading_pos`.
    pub fn scene_range(&self, heading_pos: usize) -> std::ops::Range<usize> {
        let end = self.blocks[heading_pos + 1..]
            .iter()
            .position(|b| b.kind == BlockKind::SceneHeading)
            .map_or(self.blocks.len(), |off| heading_pos + 1 + off);
        heading_pos..end
    }

    /// Line block containing `t`, else the heading of the scene containing it.
    pub fn block_at(&self, t: f64) -> Option<&Block> {
        self.blocks
            .iter()
            .find(|b| b.is_line() && b.contains(t))
            .or_else(|| self.blocks.iter().find(|b| b.kind == BlockKind::SceneHeading && b.contains(t)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serializes")
    }
}

fn overlaps(a0: f64, a1: f64, b0: f64, b1: f64) -> bool {
    a0 < b1 && b0 < a1
}

fn annotate(block: &mut Block, seg: &ErrorSegment) {
    block.errors.push(ErrorAnnotation {
        kind: seg.kind,
        start: seg.start.max(block.start),
        end: seg.end.min(block.end),
        segment_start: seg.start,
        segment_end: seg.end,
    });
}

/// Builds the script from segmented lines, captioned scenes and errors.
///
/// Scenes must partition `[0, source_duration)` and no line may straddle a
/// scene boundary. Each error is attached to every line block it overlaps;
/// an error that touches no line is attached to the heading(s) of the
/// scene(s) it falls in.
pub fn assemble(transcript: &TranscriptDoc, scenes: &[Scene], errors: &[ErrorSegment]) -> Result<AVScriptDoc, ScriptError> {
    let duration = transcript.source_duration;
    let bad = |m: String| Err(ScriptError::InconsistentInput(m));
    if scenes.is_empty() {
        if duration > 0.0 {
            return bad("no scenes for non-empty footage".into());
        }
    } else {
        if scenes[0].start != 0.0 {
            return bad(format!("first scene starts at {}", scenes[0].start));
        }
        if scenes[scenes.len() - 1].end != duration {
            return bad(format!(
                "scenes end at {} but the footage is {duration} s",
                scenes[scenes.len() - 1].end
            ));
        }
        for pair in scenes.windows(2) {
            if pair[0].end != pair[1].start {
                return bad(format!("gap or overlap between scenes at {}", pair[0].end));
            }
        }
        for s in scenes {
            if s.start >= s.end {
                return bad(format!("empty scene at {}", s.start));
            }
        }
    }
    for l in &transcript.lines {
        if let Some(s) = scenes.iter().find(|s| l.start < s.start && s.start < l.end) {
            return bad(format!("scene boundary {} falls inside line [{}, {})", s.start, l.start, l.end));
        }
    }

    let mut next_id = 1u64;
    let mut id = || {
        let v = BlockId(next_id);
        next_id += 1;
        v
    };
    let mut blocks = Vec::with_capacity(scenes.len() + transcript.lines.len());
    let mut lines = transcript.lines.iter().peekable();
    for scene in scenes {
        blocks.push(Block {
            id: id(),
            kind: BlockKind::SceneHeading,
            start: scene.start,
            end: scene.end,
            text: scene.caption.clone(),
            words: Vec::new(),
            errors: Vec::new(),
            caption_frame_index: Some(scene.caption_frame_index),
        });
        while let Some(line) = lines.next_if(|l| l.start < scene.end) {
            blocks.push(Block {
                id: id(),
                kind: match line.kind {
                    LineKind::Narration => BlockKind::Narration,
                    LineKind::Pause => BlockKind::Pause,
                },
                start: line.start,
                end: line.end,
                text: line.text.clone(),
                words: line.words.clone(),
                errors: Vec::new(),
                caption_frame_index: None,
            });
        }
    }

    let mut sorted_errors = errors.to_vec();
    sorted_errors.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.kind.cmp(&b.kind)));
    for seg in &sorted_errors {
        let mut attached = false;
        for b in blocks.iter_mut().filter(|b| b.is_line()) {
            if overlaps(seg.start, seg.end, b.start, b.end) {
                annotate(b, seg);
                attached = true;
            }
        }
        if !attached {
            for b in blocks.iter_mut().filter(|b| b.kind == BlockKind::SceneHeading) {
                if overlaps(seg.start, seg.end, b.start, b.end) {
                    annotate(b, seg);
                }
            }
        }
    }

    Ok(AVScriptDoc {
        source_duration: duration,
        revision: 0,
        blocks,
    })
}

/// `m:ss` with whole seconds truncated.
pub fn format_timestamp(t: f64) -> String {
    let total = t.max(0.0).floor() as u64;
    format!("{}:{:02}", total / 60, total % 60)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlineKind {
    Scene,
    Error,
    Pause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineItem {
    pub kind: OutlineKind,
    pub time: f64,
    pub label: String,
    pub target_block_id: BlockId,
}

/// Scene headings, distinct errors and pauses in timeline order.
///
/// An error's target is the first block carrying it and the item's time is
/// that block's start; the label keeps the error's own timestamp, e.g.
/// `"Camera blur in 4:32"`.
pub fn outline(doc: &AVScriptDoc) -> Vec<OutlineItem> {
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for b in &doc.blocks {
        if b.kind == BlockKind::SceneHeading {
            items.push(OutlineItem {
                kind: OutlineKind::Scene,
                time: b.start,
                label: b.text.clone(),
                target_block_id: b.id,
            });
        }
        for e in &b.errors {
            if seen.insert(e.key()) {
                items.push(OutlineItem {
                    kind: OutlineKind::Error,
                    time: b.start,
                    label: format!("{} in {}", e.kind.label(), format_timestamp(e.segment_start)),
                    target_block_id: b.id,
                });
            }
        }
        if b.kind == BlockKind::Pause {
            items.push(OutlineItem {
                kind: OutlineKind::Pause,
                time: b.start,
                label: b.text.clone(),
                target_block_id: b.id,
            });
        }
    }
    // Stable: equal times keep document order (heading, its errors, pause).
    items.sort_by(|a, b| a.time.total_cmp(&b.time));
    items
}

/// Object labels of the sampled frame nearest to `t`, largest box first.
///
/// Ties in distance pick the earlier frame. Repeated labels keep their
/// largest box; equal areas order by label.
pub fn inspect(records: &[FrameRecord], source_duration: f64, t: f64) -> Result<Vec<String>, ScriptError> {
    if !(t >= 0.0 && t < source_duration) {
        return Err(ScriptError::OutOfRange(t));
    }
    let after = records.partition_point(|r| r.time < t);
    let nearest = match (after.checked_sub(1).map(|i| &records[i]), records.get(after)) {
        (Some(a), Some(b)) => {
            if t - a.time <= b.time - t {
                a
            } else {
                b
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => return Ok(Vec::new()),
    };
    let mut best: Vec<(&str, f64)> = Vec::new();
    for o in &nearest.objects {
        let area = o.bbox.area();
        match best.iter_mut().find(|(l, _)| *l == o.label) {
            Some(entry) => entry.1 = entry.1.max(area),
            None => best.push((&o.label, area)),
        }
    }
    best.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(best.into_iter().map(|(l, _)| l.to_owned()).collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::analysis::ObjectDetection;
    use crate::transcript::ScriptLine;

    pub(crate) fn narr(start: f64, end: f64, text: &str) -> ScriptLine {
        let n = text.split_whitespace().count() as f64;
        let step = (end - start) / n;
        ScriptLine {
            kind: LineKind::Narration,
            start,
            end,
            text: text.into(),
            words: text
                .split_whitespace()
                .enumerate()
                .map(|(i, w)| WordToken::new(w, start + i as f64 * step, start + (i + 1) as f64 * step))
                .collect(),
        }
    }

    fn pause(start: f64, end: f64) -> ScriptLine {
        ScriptLine {
            kind: LineKind::Pause,
            start,
            end,
            text: crate::transcript::format_pause(end - start),
            words: vec![],
        }
    }

    fn scene(start: f64, end: f64, caption: &str) -> Scene {
        Scene {
            start,
            end,
            caption: caption.into(),
            caption_frame_index: start as usize,
        }
    }

    #[test]
    fn one_scene_two_lines() {
        let t = TranscriptDoc {
            lines: vec![narr(1.0, 3.0, "First of all,"), narr(3.5, 5.0, "we need flour.")],
            source_duration: 10.0,
        };
        let doc = assemble(&t, &[scene(0.0, 10.0, "A kitchen")], &[]).unwrap();
        assert_eq!(doc.blocks.len(), 3);
        assert_eq!(doc.blocks[0].kind, BlockKind::SceneHeading);
        assert_eq!(doc.blocks[0].text, "A kitchen");
        let ids: Vec<u64> = doc.blocks.iter().map(|b| b.id.0).collect();
        assert_eq!(ids, vec![1, 2, 3]);
    }

    #[test]
    fn blur_annotation_and_outline_label() {
        let t = TranscriptDoc {
            lines: vec![narr(270.0, 275.0, "open the pantry door"), narr(276.0, 280.0, "and look inside.")],
            source_duration: 300.0,
        };
        let errs = [ErrorSegment {
            kind: ErrorKind::Blur,
            start: 272.0,
            end: 276.0,
        }];
        let doc = assemble(&t, &[scene(0.0, 300.0, "A pantry")], &errs).unwrap();
        assert_eq!(doc.blocks[1].errors.len(), 1);
        assert_eq!(doc.blocks[1].errors[0].kind.label(), "Camera blur");
        assert_eq!((doc.blocks[1].errors[0].start, doc.blocks[1].errors[0].end), (272.0, 275.0));
        assert!(doc.blocks[2].errors.is_empty());
        let items = outline(&doc);
        assert_eq!(items[1].label, "Camera blur in 4:32");
        assert_eq!(items[1].target_block_id, doc.blocks[1].id);
        assert_eq!(items[1].time, doc.blocks[1].start);
    }

    #[test]
    fn error_spanning_two_lines_is_clipped() {
        let t = TranscriptDoc {
            lines: vec![narr(0.0, 4.0, "a b c"), narr(5.0, 9.0, "d e f")],
            source_duration: 10.0,
        };
        let errs = [ErrorSegment {
            kind: ErrorKind::Dark,
            start: 2.0,
            end: 7.0,
        }];
        let doc = assemble(&t, &[scene(0.0, 10.0, "")], &errs).unwrap();
        let e1 = doc.blocks[1].errors[0];
        let e2 = doc.blocks[2].errors[0];
        assert_eq!((e1.start, e1.end), (2.0, 4.0));
        assert_eq!((e2.start, e2.end), (5.0, 7.0));
        assert_eq!(outline(&doc).iter().filter(|i| i.kind == OutlineKind::Error).count(), 1);
    }

    #[test]
    fn error_without_line_goes_to_heading() {
        let t = TranscriptDoc {
            lines: vec![narr(0.0, 2.0, "a b")],
            source_duration: 10.0,
        };
        let errs = [ErrorSegment {
            kind: ErrorKind::Dark,
            start: 4.0,
            end: 8.0,
        }];
        let doc = assemble(&t, &[scene(0.0, 10.0, "x")], &errs).unwrap();
        assert_eq!(doc.blocks[0].errors.len(), 1);
    }

    #[test]
    fn boundary_inside_line_is_rejected() {
        let t = TranscriptDoc {
            lines: vec![narr(4.0, 6.0, "a b")],
            source_duration: 10.0,
        };
        let err = assemble(&t, &[scene(0.0, 5.0, ""), scene(5.0, 10.0, "")], &[]).unwrap_err();
        assert!(matches!(err, ScriptError::InconsistentInput(_)));
        let err = assemble(&t, &[scene(0.0, 9.0, "")], &[]).unwrap_err();
        assert!(matches!(err, ScriptError::InconsistentInput(_)));
    }

    #[test]
    fn outline_counts() {
        let mut lines = vec![];
        let mut scenes = vec![];
        for k in 0..8 {
            let s = k as f64 * 100.0;
            scenes.push(scene(s, s + 100.0, &format!("scene {k}")));
            lines.push(narr(s + 1.0, s + 5.0, "some words here"));
            if k < 2 {
                lines.push(pause(s + 5.0, s + 20.0));
            }
        }
        let errs: Vec<_> = (0..3)
            .map(|k| ErrorSegment {
                kind: ErrorKind::Blur,
                start: 300.0 + k as f64 * 100.0 + 2.0,
                end: 300.0 + k as f64 * 100.0 + 4.0,
            })
            .collect();
        let t = TranscriptDoc {
            lines,
            source_duration: 800.0,
        };
        let doc = assemble(&t, &scenes, &errs).unwrap();
        let items = outline(&doc);
        assert_eq!(items.len(), 13);
        assert!(items.windows(2).all(|w| w[0].time <= w[1].time));
        for it in &items {
            assert_eq!(doc.block(it.target_block_id).unwrap().start, it.time);
        }
        let empty = AVScriptDoc {
            source_duration: 0.0,
            revision: 0,
            blocks: vec![],
        };
        assert!(outline(&empty).is_empty());
    }

    #[test]
    fn timestamps() {
        assert_eq!(format_timestamp(272.0), "4:32");
        assert_eq!(format_timestamp(59.99), "0:59");
        assert_eq!(format_timestamp(3600.0), "60:00");
    }

    fn frame(index: usize, objects: Vec<ObjectDetection>) -> FrameRecord {
        FrameRecord {
            index,
            time: index as f64,
            mean_luminance: 0.5,
            focus_score: 50.0,
            objects,
        }
    }

    #[test]
    fn inspect_orders_by_area() {
        let records = vec![
            frame(0, vec![]),
            frame(
                1,
                vec![
                    ObjectDetection::new("shelf", 0.9, [0.0, 0.0, 50.0, 50.0]),
                    ObjectDetection::new("cereal box", 0.9, [0.0, 0.0, 90.0, 100.0]),
                    ObjectDetection::new("snacks", 0.9, [0.0, 0.0, 40.0, 100.0]),
                ],
            ),
        ];
        assert_eq!(inspect(&records, 2.0, 1.2).unwrap(), vec!["cereal box", "snacks", "shelf"]);
        assert!(inspect(&records, 2.0, 0.4).unwrap().is_empty());
        // 0.5 is equidistant: earlier frame wins.
        assert!(inspect(&records, 2.0, 0.5).unwrap().is_empty());
        assert_eq!(inspect(&records, 2.0, 2.0), Err(ScriptError::OutOfRange(2.0)));
        assert_eq!(inspect(&records, 2.0, -0.1), Err(ScriptError::OutOfRange(-0.1)));
    }

    #[test]
    fn inspect_dedups_labels() {
        let records = vec![frame(
            0,
            vec![
                ObjectDetection::new("cup", 0.9, [0.0, 0.0, 10.0, 10.0]),
                ObjectDetection::new("bowl", 0.9, [0.0, 0.0, 15.0, 15.0]),
                ObjectDetection::new("cup", 0.9, [0.0, 0.0, 20.0, 20.0]),
                ObjectDetection::new("apple", 0.9, [0.0, 0.0, 20.0, 20.0]),
            ],
        )];
        assert_eq!(inspect(&records, 1.0, 0.0).unwrap(), vec!["apple", "cup", "bowl"]);
    }
}
