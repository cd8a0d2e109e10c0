use serde::{Deserialize, Serialize};

use super::{AVScriptDoc, BlockId, BlockKind, ScriptError};

/// Caret position: a block and a word inside it (always 0 for non-narration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cursor {
    pub block_id: BlockId,
    pub word_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavMove {
    NextLine,
    PrevLine,
    NextWord,
    PrevWord,
    NextHeading,
    PrevHeading,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavResult {
    pub cursor: Cursor,
    /// Where the player should seek, in source seconds.
    pub seek: f64,
}

/// Moves the cursor by one unit. Moves past either end of the document
/// leave the cursor where it is.
///
/// Every block, headings included, counts as a line. Word moves skip
/// blocks without words.
pub fn navigate(doc: &AVScriptDoc, cursor: Cursor, mv: NavMove) -> Result<NavResult, ScriptError> {
    let pos = doc
        .position(cursor.block_id)
        .ok_or_else(|| ScriptError::InvalidCursor(format!("no block {}", cursor.block_id)))?;
    let block = &doc.blocks[pos];
    let word_count = block.words.len();
    if (word_count == 0 && cursor.word_index != 0) || (word_count > 0 && cursor.word_index >= word_count) {
        return Err(ScriptError::InvalidCursor(format!(
            "word {} out of range for block {}",
            cursor.word_index, cursor.block_id
        )));
    }

    let at_block = |p: usize| {
        let b = &doc.blocks[p];
        NavResult {
            cursor: Cursor {
                block_id: b.id,
                word_index: 0,
            },
            seek: b.start,
        }
    };
    let at_word = |p: usize, w: usize| {
        let b = &doc.blocks[p];
        NavResult {
            cursor: Cursor {
                block_id: b.id,
                word_index: w,
            },
            seek: b.words[w].start,
        }
    };
    let stay_line = NavResult {
        cursor,
        seek: block.start,
    };
    let stay_word = NavResult {
        cursor,
        seek: block.words.get(cursor.word_index).map_or(block.start, |w| w.start),
    };
    let has_words = |p: &usize| !doc.blocks[*p].words.is_empty();
    let is_heading = |p: &usize| doc.blocks[*p].kind == BlockKind::SceneHeading;

    let result = match mv {
        NavMove::NextLine => (pos + 1 < doc.blocks.len()).then(|| at_block(pos + 1)).unwrap_or(stay_line),
        NavMove::PrevLine => pos.checked_sub(1).map(at_block).unwrap_or(stay_line),
        NavMove::NextHeading => (pos + 1..doc.blocks.len())
            .find(is_heading)
            .map(at_block)
            .unwrap_or(stay_line),
        NavMove::PrevHeading => (0..pos).rev().find(is_heading).map(at_block).unwrap_or(stay_line),
        NavMove::NextWord => {
            if cursor.word_index + 1 < word_count {
                at_word(pos, cursor.word_index + 1)
            } else {
                (pos + 1..doc.blocks.len())
                    .find(has_words)
                    .map(|p| at_word(p, 0))
                    .unwrap_or(stay_word)
            }
        }
        NavMove::PrevWord => {
            if word_count > 0 && cursor.word_index > 0 {
                at_word(pos, cursor.word_index - 1)
            } else {
                (0..pos)
                    .rev()
                    .find(has_words)
                    .map(|p| at_word(p, doc.blocks[p].words.len() - 1))
                    .unwrap_or(stay_word)
            }
        }
    };
    Ok(result)
}
