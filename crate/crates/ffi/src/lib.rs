//! C ABI over `avse-core`.
//!
//! Every function returns an [`AvseStatus`]. On failure a description is
//! available from [`avse_last_error_message`] on the same thread. Strings
//! handed out by the library must be released with [`avse_string_free`];
//! projects with [`avse_project_free`]. An open project holds the project
//! directory's writer lock until it is freed.
//!
//! The generated header is `include/avse.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use avse_core::analysis::{compute_focus_score, compute_luminance, AnalysisConfig, AnalysisError, GrayFrame};
use avse_core::edit::{compile_render_plan, EditError, EditOp, Editor};
use avse_core::project::{Project, ProjectError, ProjectLock};
use avse_core::scene::{score_boundaries, score_errors, LabeledSpan};
use avse_core::script::{outline, ScriptError};
use avse_core::{ErrorKind, ErrorSegment};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvseStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    MissingInput = 3,
    InconsistentInput = 4,
    MalformedInput = 5,
    Io = 6,
    Locked = 7,
    Conflict = 8,
    InvalidEdit = 9,
    OutOfRange = 10,
    Panic = 11,
}

/// Agreement between two boundary lists.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AvseBoundaryReport {
    pub jaccard_similarity: f64,
    pub matched: usize,
    pub total_a: usize,
    pub total_b: usize,
}

/// A time span in seconds, `[start, end)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AvseSpan {
    pub start: f64,
    pub end: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AvseErrorReport {
    pub precision: f64,
    pub recall: f64,
    pub matched: usize,
    pub predicted: usize,
    pub ground_truth: usize,
}

/// Opaque project handle.
pub struct AvseProject {
    project: Project,
    editor: Option<Editor>,
    _lock: ProjectLock,
}

impl AvseProject {
    fn editor(&mut self) -> Result<&mut Editor, Failure> {
        if self.editor.is_none() {
            self.editor = Some(self.project.editor()?);
        }
        Ok(self.editor.as_mut().expect("editor loaded"))
    }

    fn commit(&mut self, revision: u64, op: EditOp) -> Result<(), Failure> {
        let mut next = self.editor()?.clone();
        self.project.commit(&mut next, revision, op)?;
        self.editor = Some(next);
        Ok(())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(AvseStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(AvseStatus::NullArgument, format!("{what} is null"))
    }
}

impl From<ProjectError> for Failure {
    fn from(e: ProjectError) -> Self {
        use AvseStatus as S;
        let status = match &e {
            ProjectError::MissingInput(_) => S::MissingInput,
            ProjectError::InconsistentInput(_) | ProjectError::Script(ScriptError::InconsistentInput(_)) => {
                S::InconsistentInput
            }
            ProjectError::Malformed { .. } | ProjectError::Transcript(_) => S::MalformedInput,
            ProjectError::Analysis(AnalysisError::InvalidConfig(_)) => S::InvalidArgument,
            ProjectError::Analysis(AnalysisError::Io(..)) | ProjectError::Io { .. } => S::Io,
            ProjectError::Analysis(_) => S::MalformedInput,
            ProjectError::Locked(_) => S::Locked,
            ProjectError::Edit(EditError::Conflict { .. }) => S::Conflict,
            ProjectError::Edit(_) => S::InvalidEdit,
            ProjectError::Script(ScriptError::OutOfRange(_)) => S::OutOfRange,
            ProjectError::Script(ScriptError::InvalidCursor(_)) => S::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure(AvseStatus::InvalidArgument, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AvseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AvseStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal error: the library panicked".into());
            AvseStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AvseStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn project_arg<'a>(p: *mut AvseProject) -> Result<&'a mut AvseProject, Failure> {
    p.as_mut().ok_or_else(|| Failure::null("project"))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    *out = CString::new(s).expect("library strings contain no nul bytes").into_raw();
    Ok(())
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    *out = value;
    Ok(())
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => Err(Failure::null(what)),
        (false, n) => Ok(std::slice::from_raw_parts(p, n)),
    }
}

unsafe fn frame_arg(pixels: *const u8, width: usize, height: usize) -> Result<GrayFrame, Failure> {
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Failure(AvseStatus::InvalidArgument, "frame size overflows".into()))?;
    if pixels.is_null() {
        return Err(Failure::null("pixels"));
    }
    Ok(GrayFrame::from_u8(width, height, std::slice::from_raw_parts(pixels, n))?)
}

fn json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("value serializes")
}

/// Description of the last failure on this thread, or NULL after a
/// success. Valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn avse_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn avse_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Variance of the 4-neighbour Laplacian of an 8-bit grayscale frame.
///
/// # Safety
/// `pixels` must point to `width * height` readable bytes, row-major.
#[no_mangle]
pub unsafe extern "C" fn avse_focus_score(
    pixels: *const u8,
    width: usize,
    height: usize,
    out: *mut f64,
) -> AvseStatus {
    guard(|| {
        let frame = frame_arg(pixels, width, height)?;
        put(out, compute_focus_score(&frame)?)
    })
}

/// Mean luminance in `[0, 1]` of an 8-bit grayscale frame, after area
/// downsampling to at most 100x100.
///
/// # Safety
/// `pixels` must point to `width * height` readable bytes, row-major.
#[no_mangle]
pub unsafe extern "C" fn avse_luminance(
    pixels: *const u8,
    width: usize,
    height: usize,
    out: *mut f64,
) -> AvseStatus {
    guard(|| {
        let frame = frame_arg(pixels, width, height)?.scaled(1.0 / 255.0);
        put(out, compute_luminance(&frame, &AnalysisConfig::default())?)
    })
}

/// Scores two sorted boundary lists (seconds) against each other.
///
/// # Safety
/// `a` and `b` must point to `a_len` and `b_len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn avse_score_boundaries(
    a: *const f64,
    a_len: usize,
    b: *const f64,
    b_len: usize,
    tolerance: f64,
    out: *mut AvseBoundaryReport,
) -> AvseStatus {
    guard(|| {
        let r = score_boundaries(slice_arg(a, a_len, "a")?, slice_arg(b, b_len, "b")?, tolerance);
        put(
            out,
            AvseBoundaryReport {
                jaccard_similarity: r.jaccard_similarity,
                matched: r.matched,
                total_a: r.total_a,
                total_b: r.total_b,
            },
        )
    })
}

/// Precision and recall of predicted error spans against labeled spans.
///
/// # Safety
/// `predicted` and `ground_truth` must point to the given number of spans.
#[no_mangle]
pub unsafe extern "C" fn avse_score_errors(
    predicted: *const AvseSpan,
    predicted_len: usize,
    ground_truth: *const AvseSpan,
    ground_truth_len: usize,
    tolerance: f64,
    out: *mut AvseErrorReport,
) -> AvseStatus {
    guard(|| {
        let pred: Vec<ErrorSegment> = slice_arg(predicted, predicted_len, "predicted")?
            .iter()
            .map(|s| ErrorSegment {
                kind: ErrorKind::Blur,
                start: s.start,
                end: s.end,
            })
            .collect();
        let gt: Vec<LabeledSpan> = slice_arg(ground_truth, ground_truth_len, "ground_truth")?
            .iter()
            .map(|s| LabeledSpan {
                kind: String::new(),
                start: s.start,
                end: s.end,
            })
            .collect();
        let r = score_errors(&pred, &gt, tolerance);
        put(
            out,
            AvseErrorReport {
                precision: r.precision,
                recall: r.recall,
                matched: r.matched,
                predicted: r.predicted,
                ground_truth: r.ground_truth,
            },
        )
    })
}

/// Opens and locks a project directory. `config_path` may be NULL to use
/// the project's own `config.json`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avse_project_open(
    root: *const c_char,
    config_path: *const c_char,
    out: *mut *mut AvseProject,
) -> AvseStatus {
    guard(|| {
        let root = str_arg(root, "root")?;
        let config = if config_path.is_null() {
            None
        } else {
            Some(Path::new(str_arg(config_path, "config_path")?))
        };
        let project = Project::open(Path::new(root), config)?;
        let lock = project.lock()?;
        let handle = Box::new(AvseProject {
            project,
            editor: None,
            _lock: lock,
        });
        put(out, Box::into_raw(handle))
    })
}

/// Closes a project and releases its lock. NULL is ignored.
///
/// # Safety
/// `project` must come from [`avse_project_open`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn avse_project_free(project: *mut AvseProject) {
    if !project.is_null() {
        drop(Box::from_raw(project));
    }
}

/// Measures the frames and writes `analysis.json`.
///
/// # Safety
/// `project` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn avse_project_analyze(project: *mut AvseProject) -> AvseStatus {
    guard(|| {
        project_arg(project)?.project.analyze()?;
        Ok(())
    })
}

/// Rebuilds the script at revision 0. Earlier edits are moved aside.
///
/// # Safety
/// `project` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn avse_project_script(project: *mut AvseProject) -> AvseStatus {
    guard(|| {
        let p = project_arg(project)?;
        p.editor = None;
        p.project.script()?;
        Ok(())
    })
}

/// # Safety
/// `project` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avse_project_revision(project: *mut AvseProject, out: *mut u64) -> AvseStatus {
    guard(|| {
        let rev = project_arg(project)?.editor()?.revision();
        put(out, rev)
    })
}

/// Applies one edit given as JSON, e.g.
/// `{"kind": "delete_blocks", "targets": [3]}`.
///
/// # Safety
/// `project` must be a live handle; `op_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn avse_project_apply_edit_json(
    project: *mut AvseProject,
    revision: u64,
    op_json: *const c_char,
) -> AvseStatus {
    guard(|| {
        let p = project_arg(project)?;
        let op: EditOp = serde_json::from_str(str_arg(op_json, "op_json")?)
            .map_err(|e| Failure(AvseStatus::InvalidEdit, format!("bad edit: {e}")))?;
        p.commit(revision, op)
    })
}

/// # Safety
/// `project` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn avse_project_undo(project: *mut AvseProject, revision: u64) -> AvseStatus {
    guard(|| project_arg(project)?.commit(revision, EditOp::Undo))
}

/// The current script as JSON.
///
/// # Safety
/// `project` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn avse_project_script_json(project: *mut AvseProject, out: *mut *mut c_char) -> AvseStatus {
    guard(|| {
        let doc = project_arg(project)?.editor()?.doc().to_json();
        put_string(out, doc)
    })
}

/// The outline as a JSON array.
///
/// # Safety
/// `project` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn avse_project_outline_json(project: *mut AvseProject, out: *mut *mut c_char) -> AvseStatus {
    guard(|| {
        let items = outline(project_arg(project)?.editor()?.doc());
        put_string(out, json(&items))
    })
}

/// The edit decision list as JSON.
///
/// # Safety
/// `project` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn avse_project_edl_json(project: *mut AvseProject, out: *mut *mut c_char) -> AvseStatus {
    guard(|| {
        let edl = project_arg(project)?.editor()?.edl().to_json();
        put_string(out, edl)
    })
}

/// Search hits for `query` as a JSON array.
///
/// # Safety
/// `project` must be a live handle; `query` NUL-terminated; `out`
/// receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn avse_project_search_json(
    project: *mut AvseProject,
    query: *const c_char,
    out: *mut *mut c_char,
) -> AvseStatus {
    guard(|| {
        let q = str_arg(query, "query")?;
        let hits = project_arg(project)?.project.search(q)?;
        put_string(out, json(&hits))
    })
}

/// Object labels at `time` seconds as a JSON array, largest first.
///
/// # Safety
/// `project` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn avse_project_inspect_json(
    project: *mut AvseProject,
    time: f64,
    out: *mut *mut c_char,
) -> AvseStatus {
    guard(|| {
        let labels = project_arg(project)?.project.inspect(time)?;
        put_string(out, json(&labels))
    })
}

/// Writes `edl.json` and `cutlist.txt` and returns the cut list.
///
/// # Safety
/// `project` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn avse_project_export(project: *mut AvseProject, out: *mut *mut c_char) -> AvseStatus {
    guard(|| {
        let p = project_arg(project)?;
        let plan = p.project.export()?;
        debug_assert_eq!(plan.cut_list, compile_render_plan(p.editor()?.edl()).cut_list);
        put_string(out, plan.cut_list)
    })
}
