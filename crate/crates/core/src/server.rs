//! HTTP/JSON API for the browser editor.
//!
//! | route              | result                                  |
//! |--------------------|-----------------------------------------|
//! | `GET /script`      | the current script document             |
//! | `GET /outline`     | outline items                           |
//! | `GET /search?q=`   | search hits, time-sorted                |
//! | `GET /inspect?t=`  | object labels at `t`, largest first     |
//! | `POST /edits`      | apply `{revision, op}`, returns script  |
//! | `POST /undo`       | undo, optional `{revision}` body        |
//! | `GET /edl`         | the edit decision list                  |
//! | `GET /events`      | server-sent `{"revision": n}` events    |
//!
//! Stale revisions answer 409, invalid edits 422, unknown routes 404.
//! Mutations go through one writer; reads use the last published snapshot.

use std::convert::Infallible;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast;

use crate::analysis::FrameRecord;
use crate::edit::{EditDecisionList, EditError, EditOp, Editor};
use crate::project::{Project, ProjectError, ProjectLock};
use crate::script::{inspect, outline, AVScriptDoc, OutlineItem, ScriptError};
use crate::search::{build_index, SearchIndex};

struct Snapshot {
    doc: AVScriptDoc,
    edl: EditDecisionList,
    outline: Vec<OutlineItem>,
    index: SearchIndex,
}

impl Snapshot {
    fn of(editor: &Editor, records: &[FrameRecord]) -> Arc<Self> {
        Arc::new(Self {
            doc: editor.doc().clone(),
            edl: editor.edl().clone(),
            outline: outline(editor.doc()),
            index: build_index(editor.doc(), records),
        })
    }
}

/// Shared service state for one project.
pub struct AppState {
    project: Project,
    records: Vec<FrameRecord>,
    writer: Mutex<Editor>,
    snapshot: RwLock<Arc<Snapshot>>,
    events: broadcast::Sender<u64>,
    _lock: Option<ProjectLock>,
}

impl AppState {
    /// Loads the project's edit session. With `lock` the project stays
    /// locked against other writers for the life of the state.
    pub fn load(project: Project, lock: bool) -> Result<Arc<Self>, ProjectError> {
        let held = if lock { Some(project.lock()?) } else { None };
        let editor = project.editor()?;
        let records = project.load_analysis()?.frames;
        let snapshot = Snapshot::of(&editor, &records);
        let (events, _) = broadcast::channel(64);
        Ok(Arc::new(Self {
            project,
            records,
            writer: Mutex::new(editor),
            snapshot: RwLock::new(snapshot),
            events,
            _lock: held,
        }))
    }

    fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    fn mutate(&self, revision: Option<u64>, op: EditOp) -> Result<Arc<Snapshot>, ProjectError> {
        let mut editor = self.writer.lock().expect("writer lock");
        let mut next = editor.clone();
        let rev = revision.unwrap_or(next.revision());
        self.project.commit(&mut next, rev, op)?;
        *editor = next;
        let snap = Snapshot::of(&editor, &self.records);
        *self.snapshot.write().expect("snapshot lock") = snap.clone();
        let _ = self.events.send(editor.revision());
        Ok(snap)
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ProjectError> for ApiError {
    fn from(e: ProjectError) -> Self {
        let status = match &e {
            ProjectError::Edit(EditError::Conflict { .. }) => StatusCode::CONFLICT,
            ProjectError::Edit(_) | ProjectError::Script(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = State<Arc<AppState>>;

async fn get_script(State(s): Shared) -> ApiResult<AVScriptDoc> {
    Ok(Json(s.snapshot().doc.clone()))
}

async fn get_outline(State(s): Shared) -> ApiResult<Vec<OutlineItem>> {
    Ok(Json(s.snapshot().outline.clone()))
}

async fn get_edl(State(s): Shared) -> ApiResult<EditDecisionList> {
    Ok(Json(s.snapshot().edl.clone()))
}

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
}

async fn get_search(State(s): Shared, Query(p): Query<SearchParams>) -> ApiResult<Vec<crate::search::SearchHit>> {
    Ok(Json(s.snapshot().index.query(&p.q)))
}

#[derive(Deserialize)]
struct InspectParams {
    t: f64,
}

async fn get_inspect(State(s): Shared, Query(p): Query<InspectParams>) -> ApiResult<Vec<String>> {
    let duration = s.snapshot().doc.source_duration;
    inspect(&s.records, duration, p.t)
        .map(Json)
        .map_err(|e: ScriptError| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))
}

/// `{"revision": n, "op": {...}}`, or the op's fields inline next to
/// `revision`.
#[derive(Deserialize)]
#[serde(untagged)]
enum EditRequest {
    Nested {
        revision: u64,
        op: EditOp,
    },
    Flat {
        revision: u64,
        #[serde(flatten)]
        op: EditOp,
    },
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, format!("bad request body: {e}")))
}

async fn post_edits(State(s): Shared, body: Bytes) -> ApiResult<AVScriptDoc> {
    let (revision, op) = match parse_body(&body)? {
        EditRequest::Nested { revision, op } | EditRequest::Flat { revision, op } => (revision, op),
    };
    Ok(Json(s.mutate(Some(revision), op)?.doc.clone()))
}

#[derive(Deserialize)]
struct UndoRequest {
    revision: Option<u64>,
}

async fn post_undo(State(s): Shared, body: Bytes) -> ApiResult<AVScriptDoc> {
    let revision = if body.iter().all(u8::is_ascii_whitespace) {
        None
    } else {
        parse_body::<UndoRequest>(&body)?.revision
    };
    Ok(Json(s.mutate(revision, EditOp::Undo)?.doc.clone()))
}

async fn get_events(State(s): Shared) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = s.events.subscribe();
    let current = s.writer.lock().expect("writer lock").revision();
    let stream = futures::stream::unfold((Some(current), rx), |(first, mut rx)| async move {
        let revision = match first {
            Some(r) => r,
            None => loop {
                match rx.recv().await {
                    Ok(r) => break r,
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => return None,
                }
            },
        };
        let event = Event::default().data(json!({ "revision": revision }).to_string());
        Some((Ok(event), (None, rx)))
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

async fn not_found() -> ApiError {
    ApiError(StatusCode::NOT_FOUND, "no such route".into())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/script", get(get_script))
        .route("/outline", get(get_outline))
        .route("/search", get(get_search))
        .route("/inspect", get(get_inspect))
        .route("/edits", post(post_edits))
        .route("/undo", post(post_undo))
        .route("/edl", get(get_edl))
        .route("/events", get(get_events))
        .fallback(not_found)
        .with_state(state)
}

/// Serves the project on `127.0.0.1:port` until ctrl-c.
pub async fn serve(state: Arc<AppState>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(SocketAddr::from((Ipv4Addr::LOCALHOST, port))).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
