//! HTTP render service.
//!
//! The scene sits behind an `Arc` that reloads replace wholesale, so a
//! render always finishes on the scene it started with.

use crate::request::{render_png, RenderRequest, RequestError};
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ctsplat_core::agp::Scene;
use ctsplat_core::gauss6d::NUM_GROUPS;
use ctsplat_core::raster::{RenderConfig, Renderer};
use ctsplat_core::scene_io::load_scene;
use ctsplat_core::volume::{TfSet, GROUP_NAMES};
use ctsplat_core::{Renderer32, Scene32};
use serde::Serialize;
use serde_json::json;
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};

pub struct LoadedScene {
    pub scene: Scene32,
    pub renderer: Renderer32,
}

impl LoadedScene {
    pub fn new(scene: Scene32) -> Self {
        let renderer = Renderer::new(&scene, RenderConfig::default());
        Self { scene, renderer }
    }
}

pub struct AppState {
    current: RwLock<Arc<LoadedScene>>,
    reloading: AtomicBool,
    /// File that `POST /scene/reload` re-reads.
    source: Option<PathBuf>,
}

/// Held while a reload is in progress; requests see 503 until it is
/// finished or dropped.
pub struct ReloadGuard<'a> {
    state: &'a AppState,
}

impl ReloadGuard<'_> {
    pub fn finish(self, loaded: LoadedScene) {
        *self.state.current.write().expect("scene lock") = Arc::new(loaded);
    }
}

impl Drop for ReloadGuard<'_> {
    fn drop(&mut self) {
        self.state.reloading.store(false, Ordering::Release);
    }
}

impl AppState {
    pub fn new(scene: Scene32, source: Option<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            current: RwLock::new(Arc::new(LoadedScene::new(scene))),
            reloading: AtomicBool::new(false),
            source,
        })
    }

    pub fn snapshot(&self) -> Arc<LoadedScene> {
        self.current.read().expect("scene lock").clone()
    }

    pub fn is_reloading(&self) -> bool {
        self.reloading.load(Ordering::Acquire)
    }

    pub fn try_begin_reload(&self) -> Option<ReloadGuard<'_>> {
        self.reloading
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| ReloadGuard { state: self })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/meta", get(meta))
        .route("/groups", get(groups))
        .route("/render", get(render))
        .route("/scene/reload", post(reload))
        .with_state(state)
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, [(header::CACHE_CONTROL, "no-store")], Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<RequestError> for ApiError {
    fn from(e: RequestError) -> Self {
        let code = match e {
            RequestError::Malformed(_) => StatusCode::BAD_REQUEST,
            RequestError::TooLarge(_) => StatusCode::PAYLOAD_TOO_LARGE,
        };
        ApiError(code, e.to_string())
    }
}

fn unavailable() -> ApiError {
    ApiError(StatusCode::SERVICE_UNAVAILABLE, "scene reload in progress".into())
}

fn ready(state: &AppState) -> Result<Arc<LoadedScene>, ApiError> {
    if state.is_reloading() {
        return Err(unavailable());
    }
    Ok(state.snapshot())
}

#[derive(Serialize)]
pub struct GroupInfo {
    pub index: usize,
    pub name: &'static str,
    pub count: usize,
}

fn group_infos<T: ctsplat_core::Real>(scene: &Scene<T>) -> Vec<GroupInfo> {
    let counts = scene.group_counts();
    (0..NUM_GROUPS)
        .map(|i| GroupInfo {
            index: i,
            name: GROUP_NAMES[i],
            count: counts[i],
        })
        .collect()
}

pub fn meta_json<T: ctsplat_core::Real>(scene: &Scene<T>) -> serde_json::Value {
    let g = &scene.geometry;
    json!({
        "count": scene.len(),
        "group_counts": scene.group_counts(),
        "groups": group_infos(scene),
        "bbox": scene.bounds().map(|(lo, hi)| json!({ "min": lo, "max": hi })),
        "volume": { "dims": g.dims, "spacing": g.spacing, "origin": g.origin },
        "cov_scale": {
            "spatial": scene.cov_scale.spatial.as_f64(),
            "directional": scene.cov_scale.directional.as_f64(),
        },
        "tf_presets": TfSet::preset_names(),
    })
}

async fn meta(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let loaded = ready(&state)?;
    Ok(Json(meta_json(&loaded.scene)).into_response())
}

async fn groups(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let loaded = ready(&state)?;
    Ok(Json(group_infos(&loaded.scene)).into_response())
}

async fn render(
    State(state): State<Arc<AppState>>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let req = RenderRequest::from_query(&q)?;
    let loaded = ready(&state)?;
    let png = tokio::task::spawn_blocking(move || render_png(&loaded.renderer, &req))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png"),
            (header::CACHE_CONTROL, "no-store"),
        ],
        png,
    )
        .into_response())
}

async fn reload(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let Some(path) = state.source.clone() else {
        return Err(ApiError(StatusCode::CONFLICT, "service was started without a scene file".into()));
    };
    let guard = state.try_begin_reload().ok_or_else(unavailable)?;
    let loaded = tokio::task::spawn_blocking(move || load_scene::<f32>(&path).map(LoadedScene::new))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match loaded {
        Ok(next) => {
            let count = next.scene.len();
            guard.finish(next);
            log::info!("reloaded scene, {count} primitives");
            Ok(Json(json!({ "count": count })).into_response())
        }
        Err(e) => Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())),
    }
}
