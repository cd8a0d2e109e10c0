//! Keyword search over speech, visual objects, errors and pauses.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::analysis::FrameRecord;
use crate::script::{AVScriptDoc, BlockId, BlockKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitKind {
    Speech,
    Object,
    Error,
    Pause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub kind: HitKind,
    pub time: f64,
    pub snippet: String,
    pub target_block_id: BlockId,
}

/// Case-folds, drops apostrophes, turns other punctuation into spaces and
/// collapses whitespace. `"Microwave."` becomes `"microwave"`.
pub fn normalize(text: &str) -> String {
    let cleaned: String = text
        .chars()
        .filter(|c| !matches!(c, '\'' | '\u{2019}'))
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .flat_map(char::to_lowercase)
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone)]
struct SpokenWord {
    term: String,
    time: f64,
    block: BlockId,
    /// Position in the block's word list.
    slot: usize,
}

/// Immutable term index for one document revision.
#[derive(Debug, Clone, Default)]
pub struct SearchIndex {
    terms: BTreeMap<String, Vec<SearchHit>>,
    speech: Vec<SpokenWord>,
    snippets: BTreeMap<BlockId, Vec<String>>,
}

const SNIPPET_RADIUS: usize = 3;

fn snippet_around(words: &[String], from: usize, to: usize) -> String {
    let lo = from.saturating_sub(SNIPPET_RADIUS);
    let hi = (to + SNIPPET_RADIUS).min(words.len());
    words[lo..hi].join(" ")
}

/// Indexes every narration word, every maximal run of frames showing an
/// object label, every distinct error and every pause.
///
/// An object run that starts in deleted time is reported from its first
/// frame that still falls inside a block; a run entirely in deleted time is
/// not indexed.
pub fn build_index(doc: &AVScriptDoc, records: &[FrameRecord]) -> SearchIndex {
    let mut index = SearchIndex::default();

    for b in doc.blocks.iter().filter(|b| b.kind == BlockKind::Narration) {
        let texts: Vec<String> = b.words.iter().map(|w| w.text.clone()).collect();
        for (slot, w) in b.words.iter().enumerate() {
            let term = normalize(&w.text);
            if term.is_empty() {
                continue;
            }
            index.add(
                &term,
                SearchHit {
                    kind: HitKind::Speech,
                    time: w.start,
                    snippet: snippet_around(&texts, slot, slot + 1),
                    target_block_id: b.id,
                },
            );
            index.speech.push(SpokenWord {
                term,
                time: w.start,
                block: b.id,
                slot,
            });
        }
        index.snippets.insert(b.id, texts);
    }

    let mut labels: BTreeSet<&str> = BTreeSet::new();
    for r in records {
        labels.extend(r.objects.iter().map(|o| o.label.as_str()));
    }
    for label in labels {
        let term = normalize(label);
        if term.is_empty() {
            continue;
        }
        let shows = |r: &FrameRecord| r.objects.iter().any(|o| o.label == label);
        let mut i = 0;
        while i < records.len() {
            if !shows(&records[i]) {
                i += 1;
                continue;
            }
            let run_start = i;
            while i < records.len() && shows(&records[i]) && (i == run_start || records[i].index == records[i - 1].index + 1) {
                i += 1;
            }
            let first_visible = records[run_start..i]
                .iter()
                .find_map(|r| doc.block_at(r.time).map(|b| (r.time, b)));
            if let Some((time, block)) = first_visible {
                let caption = doc
                    .blocks
                    .iter()
                    .find(|h| h.kind == BlockKind::SceneHeading && h.contains(time))
                    .map(|h| h.text.as_str())
                    .unwrap_or("");
                let snippet = if caption.is_empty() {
                    label.to_owned()
                } else {
                    format!("{label}: {caption}")
                };
                index.add(
                    &term,
                    SearchHit {
                        kind: HitKind::Object,
                        time,
                        snippet,
                        target_block_id: block.id,
                    },
                );
            }
        }
    }

    let mut seen = HashSet::new();
    for b in &doc.blocks {
        for e in &b.errors {
            if !seen.insert((e.kind, e.segment_start.to_bits(), e.segment_end.to_bits())) {
                continue;
            }
            let hit = SearchHit {
                kind: HitKind::Error,
                time: e.start,
                snippet: e.kind.label().to_owned(),
                target_block_id: b.id,
            };
            let by_label = normalize(e.kind.label());
            let by_name = normalize(e.kind.name());
            if by_name != by_label {
                index.add(&by_name, hit.clone());
            }
            index.add(&by_label, hit);
        }
        if b.kind == BlockKind::Pause {
            index.add(
                "pause",
                SearchHit {
                    kind: HitKind::Pause,
                    time: b.start,
                    snippet: b.text.clone(),
                    target_block_id: b.id,
                },
            );
        }
    }
    index
}

impl SearchIndex {
    fn add(&mut self, term: &str, hit: SearchHit) {
        self.terms.entry(term.to_owned()).or_default().push(hit);
    }

    /// Every indexed term.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    /// Total number of indexed hits.
    pub fn len(&self) -> usize {
        self.terms.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact-term hits of every kind, plus consecutive-word speech matches
    /// for multi-word queries, sorted by time.
    pub fn query(&self, q: &str) -> Vec<SearchHit> {
        let q = normalize(q);
        if q.is_empty() {
            return Vec::new();
        }
        let mut hits = self.terms.get(&q).cloned().unwrap_or_default();
        let phrase: Vec<&str> = q.split(' ').collect();
        if phrase.len() > 1 {
            hits.extend(self.phrase_hits(&phrase));
        }
        hits.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then(a.kind.cmp(&b.kind))
                .then(a.target_block_id.cmp(&b.target_block_id))
        });
        hits
    }

    /// Consecutive spoken words, possibly spanning adjacent lines.
    fn phrase_hits(&self, phrase: &[&str]) -> Vec<SearchHit> {
        self.speech
            .windows(phrase.len())
            .filter(|win| win.iter().zip(phrase).all(|(w, p)| w.term == *p))
            .map(|win| {
                let first = &win[0];
                let words = &self.snippets[&first.block];
                let last_slot = win.iter().take_while(|w| w.block == first.block).last().map_or(first.slot, |w| w.slot);
                SearchHit {
                    kind: HitKind::Speech,
                    time: first.time,
                    snippet: snippet_around(words, first.slot, last_slot + 1),
                    target_block_id: first.block,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{ErrorKind, ErrorSegment, ObjectDetection};
    use crate::scene::Scene;
    use crate::script::assemble;
    use crate::transcript::{format_pause, LineKind, ScriptLine, TranscriptDoc, WordToken};
    use proptest::prelude::*;

    fn narr(start: f64, words: &[&str]) -> ScriptLine {
        ScriptLine {
            kind: LineKind::Narration,
            start,
            end: start + words.len() as f64,
            text: words.join(" "),
            words: words
                .iter()
                .enumerate()
                .map(|(i, w)| WordToken::new(w, start + i as f64, start + i as f64 + 1.0))
                .collect(),
        }
    }

    fn frames(n: usize, labels_at: impl Fn(usize) -> Vec<&'static str>) -> Vec<FrameRecord> {
        (0..n)
            .map(|i| FrameRecord {
                index: i,
                time: i as f64,
                mean_luminance: 0.5,
                focus_score: 100.0,
                objects: labels_at(i)
                    .into_iter()
                    .map(|l| ObjectDetection::new(l, 0.9, [0.0, 0.0, 1.0, 1.0]))
                    .collect(),
            })
            .collect()
    }

    fn doc(lines: Vec<ScriptLine>, errors: &[ErrorSegment], duration: f64) -> AVScriptDoc {
        let scenes = [Scene {
            start: 0.0,
            end: duration,
            caption: "A kitchen".into(),
            caption_frame_index: 0,
        }];
        assemble(
            &TranscriptDoc {
                lines,
                source_duration: duration,
            },
            &scenes,
            errors,
        )
        .unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("Microwave."), "microwave");
        assert_eq!(normalize("  CAMERA   moving "), "camera moving");
        assert_eq!(normalize("don't!"), "dont");
        assert_eq!(normalize("?!"), "");
    }

    #[test]
    fn speech_word_hit() {
        let d = doc(vec![narr(120.0, &["Heat", "the", "Microwave."])], &[], 200.0);
        let hits = build_index(&d, &[]).query("microwave");
        assert_eq!(hits.len(), 1);
        assert_eq!((hits[0].kind, hits[0].time), (HitKind::Speech, 122.0));
        assert_eq!(hits[0].snippet, "Heat the Microwave.");
    }

    #[test]
    fn object_runs_coalesce() {
        let d = doc(vec![], &[], 400.0);
        let recs = frames(400, |i| if (300..=360).contains(&i) { vec!["microwave"] } else { vec![] });
        let hits = build_index(&d, &recs).query("microwave");
        assert_eq!(hits.len(), 1);
        assert_eq!((hits[0].kind, hits[0].time), (HitKind::Object, 300.0));
        assert_eq!(hits[0].snippet, "microwave: A kitchen");
    }

    #[test]
    fn pauses_and_errors() {
        let lines = vec![
            narr(0.0, &["a", "b"]),
            ScriptLine {
                kind: LineKind::Pause,
                start: 2.0,
                end: 10.0,
                text: format_pause(8.0),
                words: vec![],
            },
            narr(10.0, &["c"]),
            ScriptLine {
                kind: LineKind::Pause,
                start: 11.0,
                end: 20.0,
                text: format_pause(9.0),
                words: vec![],
            },
        ];
        let errs = [ErrorSegment {
            kind: ErrorKind::CameraMoving,
            start: 1.0,
            end: 5.0,
        }];
        let d = doc(lines, &errs, 20.0);
        let idx = build_index(&d, &[]);
        assert_eq!(idx.query("Pause").len(), 2);
        let moving = idx.query("CAMERA MOVING");
        assert_eq!(moving, idx.query("camera moving"));
        assert_eq!(moving.len(), 1);
        assert_eq!(moving[0].time, 1.0);
        assert!(idx.query("nothing here").is_empty());
        assert!(idx.query("  ").is_empty());
    }

    #[test]
    fn phrase_across_lines() {
        let d = doc(vec![narr(0.0, &["open", "the"]), narr(3.0, &["microwave", "door"])], &[], 10.0);
        let hits = build_index(&d, &[]).query("the microwave");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].time, 1.0);
    }

    #[test]
    fn deleted_run_start_advances() {
        let lines = vec![narr(0.0, &["a", "b", "c", "d", "e"]), narr(6.0, &["f", "g", "h", "i"])];
        let mut d = doc(lines, &[], 10.0);
        // Drop the heading and first line so [0, 5) has no block.
        d.blocks.retain(|b| b.kind == BlockKind::Narration && b.start >= 6.0);
        let recs = frames(10, |i| if (2..8).contains(&i) { vec!["cup"] } else { vec![] });
        let hits = build_index(&d, &recs).query("cup");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].time, 6.0);
    }

    proptest! {
        #[test]
        fn hits_are_anchored_and_complete(
            present in proptest::collection::vec(proptest::collection::vec(0usize..3, 0..3), 1..60),
            word_count in 1usize..12,
        ) {
            let names = ["cup", "bowl", "spoon"];
            let n = present.len();
            let recs = frames(n, |i| present[i].iter().map(|&k| names[k]).collect());
            let words: Vec<&str> = (0..word_count).map(|k| names[k % 3]).collect();
            let duration = n as f64 + word_count as f64;
            let d = doc(vec![narr(0.5, &words)], &[], duration);
            let idx = build_index(&d, &recs);
            let mut total = 0;
            for term in idx.terms() {
                let hits = idx.query(term);
                total += hits.len();
                prop_assert!(hits.windows(2).all(|w| w[0].time <= w[1].time));
                let mut last_object: Option<f64> = None;
                for h in &hits {
                    let b = d.block(h.target_block_id).unwrap();
                    prop_assert!(b.contains(h.time));
                    if h.kind == HitKind::Object {
                        if let Some(t) = last_object {
                            prop_assert!(h.time - t > 1.0);
                        }
                        last_object = Some(h.time);
                    }
                }
            }
            prop_assert_eq!(total, idx.len());
        }
    }
}
