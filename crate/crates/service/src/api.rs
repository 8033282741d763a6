use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use critters_core::blocklang::block_count;
use critters_core::diagnostic::has_errors;
use critters_core::engine::{validate_setup, RunResult, Setup};
use critters_core::Diagnostic;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::log::{Event, GameFinished};
use crate::metrics;
use crate::model::{Phase, Player, Progress, Session};
use crate::views::{LevelSummary, PublicLevel, RunReport};
use crate::AppState;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), diagnostics: Vec::new() }
    }

    fn not_found(what: &str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("unknown {what} `{id}`"))
    }

    fn locked(level: &str) -> Self {
        ApiError::new(StatusCode::FORBIDDEN, format!("level `{level}` is locked"))
    }

    fn phase(phase: Phase) -> Self {
        ApiError::new(StatusCode::CONFLICT, format!("session is in phase {phase:?}").to_lowercase())
    }

    pub(crate) fn storage(e: crate::log::LogError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(r.status(), r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if !self.diagnostics.is_empty() {
            body["diagnostics"] = serde_json::to_value(&self.diagnostics).unwrap_or(Value::Null);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/players", post(create_player))
        .route("/api/players/{id}/progress", get(player_progress))
        .route("/api/levels", get(list_levels))
        .route("/api/levels/{id}", get(get_level))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/tests", put(put_tests))
        .route("/api/sessions/{id}/run", post(run_session))
        .route("/api/leaderboard/{level}", get(leaderboard))
        .route("/api/metrics/export", get(metrics_export))
        .with_state(state)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct NewPlayer {
    display_name: String,
}

async fn create_player(
    State(state): State<AppState>,
    body: Result<Json<NewPlayer>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Player>)> {
    let Json(body) = body?;
    let display_name = body.display_name.trim().to_string();
    if display_name.is_empty() {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "display name must not be empty"));
    }
    let id = uuid::Uuid::new_v4().simple().to_string();
    let player = state.commit(&id, None, |_| {
        let player = Player { player_id: id.clone(), display_name: display_name.clone() };
        Ok((vec![Event::PlayerCreated { display_name }], player))
    })?;
    Ok((StatusCode::CREATED, Json(player)))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ProgressRow {
    level: String,
    locked: bool,
    #[serde(flatten)]
    progress: Progress,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PlayerProgress {
    player_id: String,
    display_name: String,
    levels: Vec<ProgressRow>,
}

async fn player_progress(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<PlayerProgress>> {
    let model = state.model();
    let player = model.players.get(&id).ok_or_else(|| ApiError::not_found("player", &id))?;
    let levels = state
        .levels()
        .iter()
        .map(|l| ProgressRow {
            level: l.id.clone(),
            locked: !model.is_unlocked(Some(&id), l),
            progress: model
                .progress
                .get(&(id.clone(), l.id.clone()))
                .cloned()
                .unwrap_or(Progress { best_total: 0, best_stars: 0, attempts: 0, best_seq: 0 }),
        })
        .collect();
    Ok(Json(PlayerProgress { player_id: id.clone(), display_name: player.display_name.clone(), levels }))
}

#[derive(Deserialize)]
struct PlayerQuery {
    player: Option<String>,
}

async fn list_levels(State(state): State<AppState>, Query(q): Query<PlayerQuery>) -> Json<Vec<LevelSummary>> {
    let model = state.model();
    let player = q.player.as_deref().filter(|p| model.players.contains_key(*p));
    Json(
        state
            .levels()
            .iter()
            .map(|l| {
                let progress = player.and_then(|p| model.progress.get(&(p.to_string(), l.id.clone())));
                LevelSummary::new(l, !model.is_unlocked(player, l), progress)
            })
            .collect(),
    )
}

async fn get_level(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PlayerQuery>,
) -> ApiResult<Json<PublicLevel>> {
    let level = state.level(&id).ok_or_else(|| ApiError::not_found("level", &id))?;
    if !state.model().is_unlocked(q.player.as_deref(), level) {
        return Err(ApiError::locked(&id));
    }
    Ok(Json(PublicLevel::from(level)))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct NewSession {
    player: String,
    level: String,
    seed: Option<u64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionView {
    session_id: String,
    player: String,
    level: String,
    seed: u64,
    phase: Phase,
    setup: Setup,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<RunReport>,
}

impl SessionView {
    fn new(s: &Session, report: Option<RunReport>) -> Self {
        SessionView {
            session_id: s.id.clone(),
            player: s.player.clone(),
            level: s.level.clone(),
            seed: s.seed,
            phase: s.phase,
            setup: s.setup.clone(),
            report,
        }
    }
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let Json(body) = body?;
    let level = state.level(&body.level).ok_or_else(|| ApiError::not_found("level", &body.level))?;
    let seed = body.seed.unwrap_or_else(|| u64::from(rand::random::<u32>()));
    let id = uuid::Uuid::new_v4().simple().to_string();
    state.commit(&body.player, Some(&level.id), |model| {
        if !model.players.contains_key(&body.player) {
            return Err(ApiError::not_found("player", &body.player));
        }
        if !model.is_unlocked(Some(&body.player), level) {
            return Err(ApiError::locked(&level.id));
        }
        Ok((vec![Event::SessionCreated { session_id: id.clone(), seed }], ()))
    })?;
    let model = state.model();
    Ok((StatusCode::CREATED, Json(SessionView::new(&model.sessions[&id], None))))
}

fn session_snapshot(state: &AppState, id: &str) -> ApiResult<Session> {
    state.model().sessions.get(id).cloned().ok_or_else(|| ApiError::not_found("session", id))
}

fn report_for(state: &AppState, s: &Session) -> ApiResult<Option<RunReport>> {
    let Some(game) = &s.finished else { return Ok(None) };
    let level = state.level(&s.level).ok_or_else(|| ApiError::not_found("level", &s.level))?;
    RunReport::compute(level, &s.id, &game.setup, game.seed, game.setup_seconds, state.time_bonus())
        .map(Some)
        .map_err(ApiError::internal)
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let s = session_snapshot(&state, &id)?;
    let report = report_for(&state, &s)?;
    Ok(Json(SessionView::new(&s, report)))
}

/// Blocks the player placed: portals on base levels plus every code block.
fn placed_blocks(setup: &Setup) -> usize {
    setup.portals.len() + setup.tests().map(block_count).sum::<usize>()
}

async fn put_tests(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Setup>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let Json(setup) = body?;
    let s = session_snapshot(&state, &id)?;
    let level = state.level(&s.level).ok_or_else(|| ApiError::not_found("level", &s.level))?;
    state.commit(&s.player, Some(&s.level), |model| {
        let current = &model.sessions[&id];
        if current.phase != Phase::Setup {
            return Err(ApiError::phase(current.phase));
        }
        let diagnostics = validate_setup(level, &setup);
        if has_errors(&diagnostics) {
            return Err(ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                message: "invalid tests or placements".into(),
                diagnostics,
            });
        }
        let (before, after) = (placed_blocks(&current.setup), placed_blocks(&setup));
        let mut events = vec![Event::TestsSubmitted { session_id: id.clone(), setup: setup.clone() }];
        if after > before {
            events.push(Event::TestBlockAdded { session_id: id.clone(), count: after - before });
        } else if before > after {
            events.push(Event::TestBlockRemoved { session_id: id.clone(), count: before - after });
        }
        Ok((events, ()))
    })?;
    Ok(Json(SessionView::new(&session_snapshot(&state, &id)?, None)))
}

async fn run_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<RunReport>> {
    let s = session_snapshot(&state, &id)?;
    let level = state.level(&s.level).ok_or_else(|| ApiError::not_found("level", &s.level))?;
    let now = state.now_ms();
    let setup_seconds = now.saturating_sub(s.started_at) as f64 / 1000.0;
    let setup = state.commit(&s.player, Some(&s.level), |model| {
        let current = &model.sessions[&id];
        if current.phase != Phase::Setup {
            return Err(ApiError::phase(current.phase));
        }
        Ok((vec![Event::GameStarted { session_id: id.clone(), setup_seconds }], current.setup.clone()))
    })?;
    let report = RunReport::compute(level, &id, &setup, s.seed, setup_seconds, state.time_bonus())
        .map_err(ApiError::internal)?;
    let (healthy_total, healthy_passed, mutants_total, mutants_detected) = match &report.result {
        RunResult::Base(r) => (r.healthy_total, r.healthy_saved, r.mutants_total, r.mutants_detected),
        RunResult::Loop(r) => (r.healthy_total, r.healthy_successful, r.mutants_total, r.mutants_detected),
    };
    let game = GameFinished {
        session_id: id.clone(),
        seed: s.seed,
        setup,
        setup_seconds,
        total: report.score.total,
        stars: report.score.stars,
        healthy_total,
        healthy_passed,
        mutants_total,
        mutants_detected,
    };
    state.commit(&s.player, Some(&s.level), |_| Ok((vec![Event::GameFinished(game)], ())))?;
    Ok(Json(report))
}

#[derive(Deserialize)]
struct LeaderboardQuery {
    limit: Option<usize>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct LeaderboardRow {
    rank: usize,
    player_id: String,
    display_name: String,
    best_total: i64,
    best_stars: u8,
    attempts: u32,
}

async fn leaderboard(
    State(state): State<AppState>,
    Path(level): Path<String>,
    Query(q): Query<LeaderboardQuery>,
) -> ApiResult<Json<Vec<LeaderboardRow>>> {
    if state.level(&level).is_none() {
        return Err(ApiError::not_found("level", &level));
    }
    let model = state.model();
    let rows = model
        .leaderboard(&level)
        .into_iter()
        .take(q.limit.unwrap_or(10))
        .enumerate()
        .map(|(i, (player, p))| LeaderboardRow {
            rank: i + 1,
            player_id: player.player_id.clone(),
            display_name: player.display_name.clone(),
            best_total: p.best_total,
            best_stars: p.best_stars,
            attempts: p.attempts,
        })
        .collect();
    Ok(Json(rows))
}

#[derive(Deserialize)]
struct RangeQuery {
    from: Option<u64>,
    to: Option<u64>,
}

fn presented_token(headers: &HeaderMap) -> Option<&str> {
    let bearer = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    bearer.or_else(|| headers.get("x-admin-token").and_then(|v| v.to_str().ok()))
}

async fn metrics_export(
    State(state): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<RangeQuery>,
) -> ApiResult<Json<metrics::MetricsExport>> {
    match (state.admin_token(), presented_token(&headers)) {
        (Some(expected), Some(given)) if expected == given => {}
        _ => return Err(ApiError::new(StatusCode::FORBIDDEN, "admin token required")),
    }
    Ok(Json(metrics::export(&state.model(), state.levels(), q.from, q.to)))
}
