//! File-backed projects.
//!
//! A project directory holds the inputs
//!
//! ```text
//! frames/000000.pgm ...   sampled frames (pgm or png), contiguous from 0
//! detections.json         optional, { "<frame>": [{label, confidence, bbox}] }
//! transcript.json         { source_duration, words: [{text, start, end}] }
//! captions.json           optional, { "<frame>": "caption" }
//! config.json             optional, see [`ProjectConfig`]
//! ```
//!
//! and the derived artifacts `analysis.json`, `script.json`, `edl.json`,
//! `edits.log` and `cutlist.txt`. Everything derived can be rebuilt from the
//! inputs, the config and `edits.log`.

use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    analyze_frames, detect_errors, AnalysisConfig, AnalysisError, Detections, ErrorSegment, FixtureFrameProvider,
    FrameProvider,
    FrameRecord,
};
use crate::edit::{compile_render_plan, parse_log, EditError, EditOp, Editor, LogEntry, RenderPlan, SpeedLimits};
use crate::scene::{
    attach_captions, propose_boundaries, snap_to_phrases, CaptionDiagnostic, CaptionError, CaptionProvider,
    FixtureCaptions, SegmentationConfig,
};
use crate::script::{assemble, inspect, outline, AVScriptDoc, OutlineItem, ScriptError};
use crate::search::{build_index, SearchHit};
use crate::transcript::{parse_aligned_transcript, segment_lines, SegmentConfig, TranscriptError};

pub const FRAMES_DIR: &str = "frames";
pub const DETECTIONS: &str = "detections.json";
pub const TRANSCRIPT: &str = "transcript.json";
pub const CAPTIONS: &str = "captions.json";
pub const CONFIG: &str = "config.json";
pub const ANALYSIS: &str = "analysis.json";
pub const SCRIPT: &str = "script.json";
pub const EDL: &str = "edl.json";
pub const EDITS_LOG: &str = "edits.log";
pub const CUT_LIST: &str = "cutlist.txt";
const LOCK_FILE: &str = ".avse.lock";

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("{file}: {message}")]
    Malformed { file: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("project {} is locked by another process", .0.display())]
    Locked(PathBuf),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Edit(#[from] EditError),
}

impl ProjectError {
    /// CLI exit status: 4 for revision conflicts and locks, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProjectError::Edit(EditError::Conflict { .. }) | ProjectError::Locked(_) => 4,
            _ => 3,
        }
    }
}

type Result<T> = std::result::Result<T, ProjectError>;

/// `config.json`. Every section and field is optional.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectConfig {
    pub analysis: AnalysisConfig,
    pub segmentation: SegmentationConfig,
    pub transcript: SegmentConfig,
    pub edit: SpeedLimits,
}

/// `analysis.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisArtifact {
    pub config: AnalysisConfig,
    pub frames: Vec<FrameRecord>,
    pub segments: Vec<ErrorSegment>,
}

/// Result of regenerating the script.
#[derive(Debug, Clone)]
pub struct ScriptOutcome {
    pub doc: AVScriptDoc,
    pub outline: Vec<OutlineItem>,
    pub diagnostics: Vec<CaptionDiagnostic>,
    /// Where a non-empty `edits.log` was moved, if it was.
    pub invalidated_log: Option<PathBuf>,
}

/// Exclusive hold on a project directory, released on drop.
#[derive(Debug)]
pub struct ProjectLock {
    _file: File,
}

#[derive(Debug, Clone)]
pub struct Project {
    root: PathBuf,
    config: ProjectConfig,
}

fn read_opt(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(ProjectError::Io { path: path.to_path_buf(), source: e }),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(file: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| ProjectError::Malformed {
        file: file.to_owned(),
        message: e.to_string(),
    })
}

/// Writes through a temporary file and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |e| ProjectError::Io { path: path.to_path_buf(), source: e };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = File::create(&tmp).map_err(io_err)?;
    f.write_all(contents.as_bytes()).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

/// Captions a frame from its own detections, largest object first.
struct LabelCaptions<'a> {
    records: &'a [FrameRecord],
}

impl CaptionProvider for LabelCaptions<'_> {
    fn caption(&self, frame_index: usize) -> std::result::Result<String, CaptionError> {
        let record = self.records.iter().find(|r| r.index == frame_index);
        let labels = record
            .map(|r| inspect(std::slice::from_ref(r), r.time + 1.0, r.time).unwrap_or_default())
            .unwrap_or_default();
        if labels.is_empty() {
            return Err(CaptionError {
                frame_index,
                reason: "no captions.json and no detected objects".into(),
            });
        }
        Ok(labels.join(", "))
    }
}

impl Project {
    /// Opens `root`, reading `config.json` unless `config_override` names
    /// another file.
    pub fn open(root: &Path, config_override: Option<&Path>) -> Result<Self> {
        if !root.is_dir() {
            return Err(ProjectError::MissingInput(root.display().to_string()));
        }
        let config_path = config_override.map_or_else(|| root.join(CONFIG), Path::to_path_buf);
        let config = match read_opt(&config_path)? {
            Some(text) => parse_json(&config_path.display().to_string(), &text)?,
            None if config_override.is_some() => {
                return Err(ProjectError::MissingInput(config_path.display().to_string()))
            }
            None => ProjectConfig::default(),
        };
        Ok(Self {
            root: root.to_path_buf(),
            config,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &ProjectConfig {
        &self.config
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Takes the single-writer lock without blocking.
    pub fn lock(&self) -> Result<ProjectLock> {
        let path = self.path(LOCK_FILE);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| ProjectError::Io { path: path.clone(), source: e })?;
        match file.try_lock() {
            Ok(()) => Ok(ProjectLock { _file: file }),
            Err(TryLockError::WouldBlock) => Err(ProjectError::Locked(self.root.clone())),
            Err(TryLockError::Error(e)) => Err(ProjectError::Io { path, source: e }),
        }
    }

    /// Measures every frame and writes `analysis.json`.
    pub fn analyze(&self) -> Result<AnalysisArtifact> {
        let frames_dir = self.path(FRAMES_DIR);
        if !frames_dir.is_dir() {
            return Err(ProjectError::MissingInput(FRAMES_DIR.into()));
        }
        let provider = FixtureFrameProvider::open(&frames_dir)?;
        if provider.is_empty() {
            return Err(ProjectError::MissingInput(FRAMES_DIR.into()));
        }
        let detections = match read_opt(&self.path(DETECTIONS))? {
            Some(text) => Detections::from_json(&text)?,
            None => Detections::default(),
        };
        let config = self.config.analysis;
        let frames = analyze_frames(&provider, &detections, &config)?;
        let segments = detect_errors(&frames, &config);
        let artifact = AnalysisArtifact {
            config,
            frames,
            segments,
        };
        let json = serde_json::to_string_pretty(&artifact).expect("analysis serializes");
        write_atomic(&self.path(ANALYSIS), &json)?;
        Ok(artifact)
    }

    pub fn load_analysis(&self) -> Result<AnalysisArtifact> {
        let text = read_opt(&self.path(ANALYSIS))?.ok_or_else(|| ProjectError::MissingInput(ANALYSIS.into()))?;
        parse_json(ANALYSIS, &text)
    }

    /// Assembles revision 0 of the script from the inputs.
    pub fn base_script(&self) -> Result<(AVScriptDoc, Vec<CaptionDiagnostic>, AnalysisArtifact)> {
        let analysis = self.load_analysis()?;
        let text = read_opt(&self.path(TRANSCRIPT))?.ok_or_else(|| ProjectError::MissingInput(TRANSCRIPT.into()))?;
        let aligned = parse_aligned_transcript(&text)?;
        let duration = aligned.source_duration;
        let frames = &analysis.frames;
        let rate = analysis.config.sample_rate;
        let Some(last) = frames.last() else {
            return Err(ProjectError::InconsistentInput("analysis.json has no frames".into()));
        };
        if !(last.time < duration && duration <= frames.len() as f64 / rate + 1e-9) {
            return Err(ProjectError::InconsistentInput(format!(
                "transcript covers {duration} s but {} frames at {rate} fps cover {} s",
                frames.len(),
                frames.len() as f64 / rate
            )));
        }

        let lines = segment_lines(&aligned, &self.config.transcript);
        let boundaries = propose_boundaries(frames, &self.config.segmentation);
        let spans = snap_to_phrases(&boundaries, &lines);
        let (scenes, diagnostics) = match read_opt(&self.path(CAPTIONS))? {
            Some(text) => {
                let captions = FixtureCaptions::from_json(&text).map_err(|e| ProjectError::Malformed {
                    file: CAPTIONS.into(),
                    message: e.to_string(),
                })?;
                attach_captions(&spans, frames, &analysis.config, &captions)
            }
            None => attach_captions(&spans, frames, &analysis.config, &LabelCaptions { records: frames }),
        };
        let doc = assemble(&lines, &scenes, &analysis.segments)?;
        Ok((doc, diagnostics, analysis))
    }

    /// Regenerates `script.json` at revision 0 and resets the EDL. A
    /// non-empty `edits.log` no longer applies and is moved aside.
    pub fn script(&self) -> Result<ScriptOutcome> {
        let (doc, diagnostics, _) = self.base_script()?;
        let log_path = self.path(EDITS_LOG);
        let mut invalidated_log = None;
        if read_opt(&log_path)?.is_some_and(|t| !t.trim().is_empty()) {
            let dest = self.path(&format!("{EDITS_LOG}.invalidated"));
            fs::rename(&log_path, &dest).map_err(|e| ProjectError::Io { path: log_path.clone(), source: e })?;
            invalidated_log = Some(dest);
        }
        let editor = Editor::new(doc, self.config.edit);
        self.write_artifacts(&editor)?;
        Ok(ScriptOutcome {
            outline: outline(editor.doc()),
            doc: editor.doc().clone(),
            diagnostics,
            invalidated_log,
        })
    }

    fn read_log(&self) -> Result<Vec<LogEntry>> {
        match read_opt(&self.path(EDITS_LOG))? {
            Some(text) => parse_log(&text).map_err(|e| ProjectError::Malformed {
                file: EDITS_LOG.into(),
                message: e.to_string(),
            }),
            None => Ok(Vec::new()),
        }
    }

    /// Rebuilds the edit session by replaying `edits.log` over the base
    /// script, and rewrites the artifacts if they lag behind the log.
    pub fn editor(&self) -> Result<Editor> {
        let stored = read_opt(&self.path(SCRIPT))?.ok_or_else(|| ProjectError::MissingInput(SCRIPT.into()))?;
        let (base, _, _) = self.base_script()?;
        let log = self.read_log()?;
        let editor = Editor::replay(base, self.config.edit, &log).map_err(|e| {
            ProjectError::InconsistentInput(format!("{EDITS_LOG} does not replay on the current inputs: {e}"))
        })?;
        if stored != editor.doc().to_json() {
            self.write_artifacts(&editor)?;
        }
        Ok(editor)
    }

    pub fn write_artifacts(&self, editor: &Editor) -> Result<()> {
        write_atomic(&self.path(SCRIPT), &editor.doc().to_json())?;
        write_atomic(&self.path(EDL), &editor.edl().to_json())
    }

    /// Durably appends one applied edit to `edits.log`.
    pub fn append_log(&self, entry: &LogEntry) -> Result<()> {
        let path = self.path(EDITS_LOG);
        let io_err = |e| ProjectError::Io { path: path.clone(), source: e };
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err)?;
        f.write_all(format!("{}\n", entry.to_line()).as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)
    }

    /// Applies `op` to `editor` and persists it: log first, then artifacts.
    pub fn commit(&self, editor: &mut Editor, revision: u64, op: EditOp) -> Result<()> {
        editor.apply(revision, op)?;
        let entry = editor.log().last().expect("apply appended a log entry");
        self.append_log(entry)?;
        self.write_artifacts(editor)
    }

    /// Loads the session, applies one op and persists. Without a revision
    /// the op applies to the current one.
    pub fn edit(&self, revision: Option<u64>, op: EditOp) -> Result<Editor> {
        let mut editor = self.editor()?;
        let rev = revision.unwrap_or(editor.revision());
        self.commit(&mut editor, rev, op)?;
        Ok(editor)
    }

    /// Writes `edl.json` and `cutlist.txt` for the current revision.
    pub fn export(&self) -> Result<RenderPlan> {
        let editor = self.editor()?;
        let plan = compile_render_plan(editor.edl());
        write_atomic(&self.path(EDL), &plan.edl_json)?;
        write_atomic(&self.path(CUT_LIST), &plan.cut_list)?;
        Ok(plan)
    }

    pub fn search(&self, q: &str) -> Result<Vec<SearchHit>> {
        let editor = self.editor()?;
        let analysis = self.load_analysis()?;
        Ok(build_index(editor.doc(), &analysis.frames).query(q))
    }

    pub fn inspect(&self, t: f64) -> Result<Vec<String>> {
        let editor = self.editor()?;
        let analysis = self.load_analysis()?;
        Ok(inspect(&analysis.frames, editor.doc().source_duration, t)?)
    }
}
