//! JSON over HTTP.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use qnim::{Move, MoveResult};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::{Player, Session, Turn};
use crate::store::SessionStore;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::Parse(_) | ServiceError::BadLength(_) | ServiceError::BadRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::NotYourTurn(_) | ServiceError::GameOver(_) => StatusCode::CONFLICT,
            ServiceError::IllegalMove(_) | ServiceError::Unsupported(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorBody {
            error: self.code(),
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

type ApiResult<T> = Result<T, ServiceError>;

#[derive(Deserialize)]
struct CreateGame {
    length: usize,
    rules: String,
    #[serde(default = "human")]
    first: Player,
    seed: Option<u64>,
}

fn human() -> Player {
    Player::Human
}

#[derive(Deserialize)]
struct SubmitMove {
    positions: Vec<usize>,
}

#[derive(Deserialize)]
struct GrundyQuery {
    rules: String,
    n: usize,
}

#[derive(Deserialize)]
struct ValueQuery {
    board: String,
    rules: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Created {
    id: String,
    board: String,
    to_move: Player,
    status: String,
    seed: u64,
}

#[derive(Serialize)]
struct Measurement {
    position: usize,
    outcome: u8,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ResultView {
    survived: bool,
    measured: Vec<Measurement>,
    loss_position: Option<usize>,
}

impl From<&MoveResult> for ResultView {
    fn from(r: &MoveResult) -> Self {
        Self {
            survived: r.survived,
            measured: r
                .measured
                .iter()
                .map(|&(position, bit)| Measurement {
                    position,
                    outcome: bit as u8,
                })
                .collect(),
            loss_position: r.loss_position,
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TurnView {
    player: Player,
    #[serde(rename = "move")]
    mv: String,
    positions: Vec<usize>,
    result: ResultView,
    board: String,
}

impl From<&Turn> for TurnView {
    fn from(t: &Turn) -> Self {
        Self {
            player: t.player,
            mv: t.mv.to_string(),
            positions: t.mv.positions().collect(),
            result: (&t.result).into(),
            board: t.board.to_string(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionView {
    id: String,
    rules: String,
    board: String,
    to_move: Player,
    status: String,
    seed: u64,
    legal_moves: Vec<Vec<usize>>,
    history: Vec<TurnView>,
}

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        let legal_moves = if s.is_over() {
            Vec::new()
        } else {
            s.board
                .legal_moves(&s.rules)
                .into_iter()
                .map(|m| m.positions().collect())
                .collect()
        };
        Self {
            id: s.id.clone(),
            rules: s.rules.to_string(),
            board: s.board.to_string(),
            to_move: s.to_move,
            status: s.status.to_string(),
            seed: s.seed,
            legal_moves,
            history: s.history.iter().map(TurnView::from).collect(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct MoveReply {
    #[serde(rename = "move")]
    mv: String,
    positions: Vec<usize>,
    result: ResultView,
    board: String,
    status: String,
    to_move: Player,
}

fn move_reply(turn: &Turn, s: &Session) -> MoveReply {
    MoveReply {
        mv: turn.mv.to_string(),
        positions: turn.mv.positions().collect(),
        result: (&turn.result).into(),
        board: s.board.to_string(),
        status: s.status.to_string(),
        to_move: s.to_move,
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct HintView {
    #[serde(rename = "move")]
    mv: String,
    positions: Vec<usize>,
    couple: Option<String>,
    bracket: Option<String>,
    white_class: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_value: Option<String>,
    rationale: String,
}

#[derive(Serialize)]
struct ValueView {
    exact: String,
    decimal: f64,
}

fn bad_json(e: JsonRejection) -> ServiceError {
    ServiceError::BadRequest(e.body_text())
}

fn bad_query(e: QueryRejection) -> ServiceError {
    ServiceError::BadRequest(e.body_text())
}

/// Runs blocking analysis work off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Unsupported(format!("analysis task failed: {e}")))?
}

async fn create_game(
    State(store): State<Arc<SessionStore>>,
    body: Result<Json<CreateGame>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let Json(req) = body.map_err(bad_json)?;
    let s = store.create_session(req.length, &req.rules, req.first, req.seed)?;
    tracing::info!(id = %s.id, rules = %s.rules, length = req.length, "session created");
    Ok((
        StatusCode::CREATED,
        Json(Created {
            id: s.id.clone(),
            board: s.board.to_string(),
            to_move: s.to_move,
            status: s.status.to_string(),
            seed: s.seed,
        }),
    ))
}

async fn get_game(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionView>> {
    Ok(Json((&store.get(&id)?).into()))
}

async fn submit_move(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<SubmitMove>, JsonRejection>,
) -> ApiResult<Json<MoveReply>> {
    let Json(req) = body.map_err(bad_json)?;
    let mv = Move::from_positions(&req.positions)
        .map_err(|e| ServiceError::IllegalMove(e.to_string()))?;
    let (turn, s) = store.submit_move(&id, Player::Human, mv)?;
    Ok(Json(move_reply(&turn, &s)))
}

async fn engine_turn(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<Json<MoveReply>> {
    let (turn, s) = blocking(move || store.engine_turn(&id)).await?;
    Ok(Json(move_reply(&turn, &s)))
}

async fn hint(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<Json<HintView>> {
    let h = blocking(move || store.hint(&id)).await?;
    Ok(Json(HintView {
        mv: h.mv.to_string(),
        positions: h.mv.positions().collect(),
        couple: h.couple.map(|c| c.to_string()),
        bracket: h.bracket.map(|b| b.to_string()),
        white_class: h.white_class.0,
        exact_value: h.exact_value.map(|v| v.to_string()),
        rationale: h.rationale.to_string(),
    }))
}

async fn grundy(
    State(store): State<Arc<SessionStore>>,
    query: Result<Query<GrundyQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = query.map_err(bad_query)?;
    let tsv = blocking(move || store.grundy_tsv(&q.rules, q.n)).await?;
    Ok(([(header::CONTENT_TYPE, "text/tab-separated-values")], tsv).into_response())
}

async fn value(
    State(store): State<Arc<SessionStore>>,
    query: Result<Query<ValueQuery>, QueryRejection>,
) -> ApiResult<Json<ValueView>> {
    let Query(q) = query.map_err(bad_query)?;
    let v = blocking(move || store.value(&q.board, &q.rules)).await?;
    Ok(Json(ValueView {
        exact: v.to_string(),
        decimal: v.to_f64(),
    }))
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(submit_move))
        .route("/games/{id}/engine", post(engine_turn))
        .route("/games/{id}/hint", get(hint))
        .route("/analysis/grundy", get(grundy))
        .route("/analysis/value", get(value))
        .with_state(store)
}

/// Serves `router` on `addr` until the process is stopped.
pub async fn serve(addr: std::net::SocketAddr, store: Arc<SessionStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(store)).await
}
