//! Script edits and the edit decision list they produce.
//!
//! Edits never touch the source footage. Every operation removes or
//! re-times spans of source time in the [`EditDecisionList`] and updates the
//! script blocks to match. The [`Editor`] keeps one linear undo history and
//! an append-only [`LogEntry`] list that replays to the same state.

mod edl;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::script::{AVScriptDoc, Block, BlockId, BlockKind};
use crate::transcript::format_pause;

pub use edl::{compile_render_plan, EdlSegment, EditDecisionList, RenderPlan, RenderWarning};

#[derive(Debug, Error, PartialEq)]
pub enum EditError {
    #[error("revision conflict: document is at {current}, edit was made against {requested}")]
    Conflict { current: u64, requested: u64 },
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("invalid trim: {0}")]
    InvalidTrim(String),
    #[error("invalid edit: {0}")]
    InvalidOp(String),
    #[error("nothing to undo")]
    NothingToUndo,
}

/// One edit, as posted by the UI or written to `edits.log`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EditOp {
    /// Deleting a scene heading deletes its whole scene.
    DeleteBlocks { targets: Vec<BlockId> },
    /// Deletes words `from..to` of a narration block.
    DeleteWords { target: BlockId, from: usize, to: usize },
    /// Shrinks a line to `[start, end)` inside its current span.
    Trim { target: BlockId, start: f64, end: f64 },
    /// Sets the playback speed of the targets' kept time.
    Speed { targets: Vec<BlockId>, factor: f64 },
    /// Reverts the most recent edit that has not been undone.
    Undo,
}

/// An applied edit and the revision it was applied to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub revision: u64,
    pub op: EditOp,
}

impl LogEntry {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log entry serializes")
    }
}

/// Parses newline-delimited `edits.log` content. Blank lines are skipped.
pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpeedLimits {
    pub min: f64,
    pub max: f64,
}

impl Default for SpeedLimits {
    fn default() -> Self {
        Self { min: 0.25, max: 4.0 }
    }
}

#[derive(Debug, Clone)]
struct Snapshot {
    blocks: Vec<Block>,
    edl: EditDecisionList,
}

/// Single-writer edit session over one script.
#[derive(Debug, Clone)]
pub struct Editor {
    doc: AVScriptDoc,
    edl: EditDecisionList,
    history: Vec<Snapshot>,
    log: Vec<LogEntry>,
    limits: SpeedLimits,
}

impl Editor {
    pub fn new(doc: AVScriptDoc, limits: SpeedLimits) -> Self {
        let edl = EditDecisionList::full(doc.source_duration);
        Self {
            doc,
            edl,
            history: Vec::new(),
            log: Vec::new(),
            limits,
        }
    }

    /// Rebuilds a session by replaying `log` over a freshly assembled script.
    pub fn replay(base: AVScriptDoc, limits: SpeedLimits, log: &[LogEntry]) -> Result<Self, EditError> {
        let mut editor = Self::new(base, limits);
        for entry in log {
            editor.apply(entry.revision, entry.op.clone())?;
        }
        Ok(editor)
    }

    pub fn doc(&self) -> &AVScriptDoc {
        &self.doc
    }

    pub fn edl(&self) -> &EditDecisionList {
        &self.edl
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn revision(&self) -> u64 {
        self.doc.revision
    }

    pub fn can_undo(&self) -> bool {
        !self.history.is_empty()
    }

    /// Applies `op` if it was computed against the current revision.
    ///
    /// On error nothing changes. On success the revision goes up by one and
    /// the op is appended to the log.
    pub fn apply(&mut self, revision: u64, op: EditOp) -> Result<&AVScriptDoc, EditError> {
        if revision != self.doc.revision {
            return Err(EditError::Conflict {
                current: self.doc.revision,
                requested: revision,
            });
        }
        if op == EditOp::Undo {
            let snap = self.history.pop().ok_or(EditError::NothingToUndo)?;
            self.doc.blocks = snap.blocks;
            self.edl = snap.edl;
        } else {
            let mut blocks = self.doc.blocks.clone();
            let mut edl = self.edl.clone();
            apply_op(&mut blocks, &mut edl, &op, &self.limits)?;
            debug_assert!(edl.validate().is_ok(), "{:?}", edl.validate());
            let prev = Snapshot {
                blocks: std::mem::replace(&mut self.doc.blocks, blocks),
                edl: std::mem::replace(&mut self.edl, edl),
            };
            self.history.push(prev);
        }
        self.log.push(LogEntry { revision, op });
        self.doc.revision += 1;
        Ok(&self.doc)
    }

    /// Shorthand for [`apply`](Self::apply) with [`EditOp::Undo`].
    pub fn undo(&mut self, revision: u64) -> Result<&AVScriptDoc, EditError> {
        self.apply(revision, EditOp::Undo)
    }
}

fn find(blocks: &[Block], id: BlockId) -> Result<usize, EditError> {
    blocks
        .iter()
        .position(|b| b.id == id)
        .ok_or_else(|| EditError::InvalidTarget(format!("no block {id}")))
}

fn scene_end(blocks: &[Block], heading: usize) -> usize {
    blocks[heading + 1..]
        .iter()
        .position(|b| b.kind == BlockKind::SceneHeading)
        .map_or(blocks.len(), |off| heading + 1 + off)
}

fn retext(block: &mut Block) {
    match block.kind {
        BlockKind::Narration => {
            block.text = block.words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
        }
        BlockKind::Pause => block.text = format_pause(block.end - block.start),
        BlockKind::SceneHeading => {}
    }
}

fn apply_op(blocks: &mut Vec<Block>, edl: &mut EditDecisionList, op: &EditOp, limits: &SpeedLimits) -> Result<(), EditError> {
    match op {
        EditOp::DeleteBlocks { targets } => {
            if targets.is_empty() {
                return Err(EditError::InvalidOp("no targets".into()));
            }
            let mut doomed = BTreeSet::new();
            for &id in targets {
                let pos = find(blocks, id)?;
                if blocks[pos].kind == BlockKind::SceneHeading {
                    doomed.extend(pos..scene_end(blocks, pos));
                } else {
                    doomed.insert(pos);
                }
            }
            for &pos in &doomed {
                edl.remove(blocks[pos].start, blocks[pos].end);
            }
            let mut pos = 0;
            blocks.retain(|_| {
                pos += 1;
                !doomed.contains(&(pos - 1))
            });
        }
        EditOp::DeleteWords { target, from, to } => {
            let pos = find(blocks, *target)?;
            let block = &mut blocks[pos];
            if block.kind != BlockKind::Narration {
                return Err(EditError::InvalidTarget(format!("block {target} has no words")));
            }
            if from >= to || *to > block.words.len() {
                return Err(EditError::InvalidTarget(format!(
                    "word range {from}..{to} out of bounds for block {target} with {} words",
                    block.words.len()
                )));
            }
            edl.remove(block.words[*from].start, block.words[to - 1].end);
            block.words.drain(*from..*to);
            if block.words.is_empty() {
                blocks.remove(pos);
            } else {
                block.start = block.words[0].start;
                block.end = block.words[block.words.len() - 1].end;
                retext(block);
                block.reclip_errors();
            }
        }
        EditOp::Trim { target, start, end } => {
            let pos = find(blocks, *target)?;
            let block = &mut blocks[pos];
            if block.kind == BlockKind::SceneHeading {
                return Err(EditError::InvalidTrim("scene headings cannot be trimmed".into()));
            }
            if !(start.is_finite() && end.is_finite() && block.start <= *start && start < end && *end <= block.end) {
                return Err(EditError::InvalidTrim(format!(
                    "[{start}, {end}) is not a non-empty span inside [{}, {})",
                    block.start, block.end
                )));
            }
            if block.kind == BlockKind::Narration {
                block.words.retain(|w| *start <= w.start && w.end <= *end);
                if block.words.is_empty() {
                    return Err(EditError::InvalidTrim("trim would leave the line without words".into()));
                }
            }
            edl.remove(block.start, *start);
            edl.remove(*end, block.end);
            block.start = *start;
            block.end = *end;
            retext(block);
            block.reclip_errors();
        }
        EditOp::Speed { targets, factor } => {
            if targets.is_empty() {
                return Err(EditError::InvalidOp("no targets".into()));
            }
            if !(factor.is_finite() && limits.min <= *factor && *factor <= limits.max) {
                return Err(EditError::InvalidOp(format!(
                    "speed {factor} outside [{}, {}]",
                    limits.min, limits.max
                )));
            }
            for &id in targets {
                let pos = find(blocks, id)?;
                edl.set_speed(blocks[pos].start, blocks[pos].end, *factor);
            }
        }
        EditOp::Undo => unreachable!("undo is handled by the editor"),
    }
    Ok(())
}
