//! Word-aligned transcripts and their segmentation into script lines.
//!
//! Narration is split at sentence terminators and, when both sides are long
//! enough, at commas. Silence longer than the pause threshold (including
//! leading and trailing silence of the footage) becomes its own pause line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TranscriptError {
    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordToken {
    pub text: String,
    pub start: f64,
    pub end: f64,
}

impl WordToken {
    pub fn new(text: &str, start: f64, end: f64) -> Self {
        Self {
            text: text.to_owned(),
            start,
            end,
        }
    }
}

/// `transcript.json`: `{ "source_duration": s, "words": [{text, start, end}] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedTranscript {
    pub source_duration: f64,
    pub words: Vec<WordToken>,
}

impl AlignedTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }
}

/// Parses and validates an aligned transcript.
///
/// Words must be sorted, non-overlapping, have `0 <= start < end` and lie
/// inside the footage.
pub fn parse_aligned_transcript(json: &str) -> Result<AlignedTranscript, TranscriptError> {
    let doc: AlignedTranscript =
        serde_json::from_str(json).map_err(|e| TranscriptError::MalformedTranscript(e.to_string()))?;
    validate(&doc)?;
    Ok(doc)
}

fn validate(doc: &AlignedTranscript) -> Result<(), TranscriptError> {
    let bad = |msg: String| Err(TranscriptError::MalformedTranscript(msg));
    if !(doc.source_duration.is_finite() && doc.source_duration >= 0.0) {
        return bad(format!("source_duration {} is not a non-negative number", doc.source_duration));
    }
    let mut prev_end = 0.0f64;
    for (i, w) in doc.words.iter().enumerate() {
        if w.text.trim().is_empty() {
            return bad(format!("word {i} has empty text"));
        }
        if !(w.start.is_finite() && w.end.is_finite()) || w.start < 0.0 {
            return bad(format!("word {i} ({:?}) has a negative or non-finite time", w.text));
        }
        if w.start >= w.end {
            return bad(format!("word {i} ({:?}) has start {} >= end {}", w.text, w.start, w.end));
        }
        if w.start < prev_end {
            return bad(format!("word {i} ({:?}) overlaps or precedes the previous word", w.text));
        }
        if w.end > doc.source_duration {
            return bad(format!("word {i} ({:?}) ends after the footage", w.text));
        }
        prev_end = w.end;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Narration,
    Pause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptLine {
    pub kind: LineKind,
    pub start: f64,
    pub end: f64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub words: Vec<WordToken>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptDoc {
    pub lines: Vec<ScriptLine>,
    pub source_duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    /// Silence strictly longer than this becomes a pause line.
    pub pause_threshold: f64,
    /// Both sides of a comma need this many words for the comma to split.
    pub min_phrase_words: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            pause_threshold: 3.0,
            min_phrase_words: 3,
        }
    }
}

/// Pause text, e.g. `"25.5 seconds"`.
pub fn format_pause(duration: f64) -> String {
    format!("{duration:.1} seconds")
}

/// Punctuation check ignoring closing quotes and brackets.
fn trailing_mark(text: &str) -> Option<char> {
    text.trim_end_matches(['"', '\'', '”', '’', ')', ']']).chars().last()
}

fn ends_sentence(text: &str) -> bool {
    matches!(trailing_mark(text), Some('.' | '?' | '!'))
}

fn ends_with_comma(text: &str) -> bool {
    trailing_mark(text) == Some(',')
}

fn narration(words: &[WordToken]) -> ScriptLine {
    ScriptLine {
        kind: LineKind::Narration,
        start: words[0].start,
        end: words[words.len() - 1].end,
        text: words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" "),
        words: words.to_vec(),
    }
}

fn pause(start: f64, end: f64) -> ScriptLine {
    ScriptLine {
        kind: LineKind::Pause,
        start,
        end,
        text: format_pause(end - start),
        words: Vec::new(),
    }
}

/// Splits one unit (words between hard breaks) at qualifying commas.
fn split_unit(unit: &[WordToken], min_words: usize, out: &mut Vec<ScriptLine>) {
    let mut chunk_start = 0;
    for k in 0..unit.len().saturating_sub(1) {
        if !ends_with_comma(&unit[k].text) {
            continue;
        }
        let chunk = k + 1 - chunk_start;
        let remainder = unit.len() - k - 1;
        if chunk >= min_words && remainder >= min_words {
            out.push(narration(&unit[chunk_start..=k]));
            chunk_start = k + 1;
        }
    }
    out.push(narration(&unit[chunk_start..]));
}

/// Segments validated words into narration and pause lines.
///
/// Hard breaks are sentence terminators (`.`, `?`, `!`) and pauses; a pause
/// inside a sentence ends the narration line before it. Within a unit
/// between hard breaks, a comma splits only when the chunk before it and the
/// rest of the unit after it both have `min_phrase_words` words.
pub fn segment_lines(transcript: &AlignedTranscript, config: &SegmentConfig) -> TranscriptDoc {
    let words = &transcript.words;
    let duration = transcript.source_duration;
    let mut lines = Vec::new();

    let mut prev_end = 0.0;
    let mut unit_start = 0;
    for i in 0..words.len() {
        if words[i].start - prev_end > config.pause_threshold {
            if unit_start < i {
                split_unit(&words[unit_start..i], config.min_phrase_words, &mut lines);
            }
            lines.push(pause(prev_end, words[i].start));
            unit_start = i;
        }
        if ends_sentence(&words[i].text) {
            split_unit(&words[unit_start..=i], config.min_phrase_words, &mut lines);
            unit_start = i + 1;
        }
        prev_end = words[i].end;
    }
    if unit_start < words.len() {
        split_unit(&words[unit_start..], config.min_phrase_words, &mut lines);
    }
    if duration - prev_end > config.pause_threshold {
        lines.push(pause(prev_end, duration));
    }

    TranscriptDoc {
        lines,
        source_duration: duration,
    }
}
