//! Audio-visual script engine.
//!
//! Turns sampled footage frames, a word-aligned transcript and per-frame
//! object detections into a navigable script of scene headings, narration
//! lines, pause lines and visual-error annotations, and compiles edits made
//! on that script into an edit decision list for an external renderer.
//!
//! The pipeline runs in this order:
//!
//! 1. [`analysis`] measures every sampled frame and flags dark, blurry and
//!    camera-moving runs.
//! 2. [`transcript`] splits aligned words into narration and pause lines.
//! 3. [`scene`] proposes scene boundaries from object-set changes, snaps them
//!    to line edges and attaches captions.
//! 4. [`script`] assembles everything into an [`script::AVScriptDoc`].
//! 5. [`edit`] applies delete / trim / speed operations and keeps the
//!    [`edit::EditDecisionList`] in sync.
//! 6. [`search`] indexes speech, objects, errors and pauses.
//!
//! [`project`] and [`server`] persist a project directory and expose it over
//! HTTP for the browser editor.

pub mod analysis;
pub mod edit;
pub mod labels;
pub mod project;
pub mod scene;
pub mod script;
pub mod search;
pub mod server;
pub mod transcript;

pub use analysis::{AnalysisConfig, ErrorKind, ErrorSegment, FrameRecord, ObjectDetection};
pub use edit::{EditDecisionList, EditOp, Editor};
pub use script::{AVScriptDoc, Block, BlockId, BlockKind};
pub use transcript::{ScriptLine, TranscriptDoc, WordToken};
