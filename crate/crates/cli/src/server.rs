use std::net::SocketAddr;

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use npisim_core::api::{self, ApiError, SimRequest};
use npisim_core::ENGINE_VERSION;
use serde::Serialize;

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

fn error(status: StatusCode, error: String, path: Option<String>) -> Response {
    (status, Json(ErrorBody { error, path })).into_response()
}

/// Stateless routes: every request builds and runs its own model.
pub fn router() -> Router {
    Router::new()
        .route("/api/simulate", post(simulate))
        .route("/api/presets", get(presets))
        .route("/api/healthz", get(healthz))
}

/// Parses a request body, reporting the JSON path of the first bad field.
pub fn parse_request(body: &[u8]) -> Result<SimRequest, (String, Option<String>)> {
    let mut de = serde_json::Deserializer::from_slice(body);
    let req: SimRequest = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        (e.into_inner().to_string(), (path != ".").then_some(path))
    })?;
    de.end().map_err(|e| (e.to_string(), None))?;
    Ok(req)
}

async fn simulate(body: Bytes) -> Response {
    let req = match parse_request(&body) {
        Ok(r) => r,
        Err((msg, path)) => return error(StatusCode::BAD_REQUEST, msg, path),
    };
    match tokio::task::spawn_blocking(move || api::simulate(&req)).await {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(ApiError::Invalid(msg))) => error(StatusCode::UNPROCESSABLE_ENTITY, msg, None),
        Ok(Err(e @ ApiError::Engine(_))) => {
            log::error!("simulation failed: {e}");
            error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None)
        }
        Err(join) => error(StatusCode::INTERNAL_SERVER_ERROR, join.to_string(), None),
    }
}

async fn presets() -> Json<Vec<api::ScenarioFile>> {
    Json(api::presets())
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn healthz() -> Json<Health> {
    Json(Health {
        status: "ok",
        version: ENGINE_VERSION,
    })
}

pub async fn serve(addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router()).await?;
    Ok(())
}
