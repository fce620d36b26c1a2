//! Request handlers.

use std::sync::Arc;

use axum::extract::multipart::Multipart;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::Json;
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uuid::Uuid;

use segsynth::contour_synth::{apply_engines, EngineParams, EngineTrace, SeededRng};
use segsynth::mask_io::{decode_mask, encode_mask, rasterize, BinaryMask, MaskFormat, Point};
use segsynth::metrics::{
    confusion, evaluate_all_with, ConfusionCounts, EvalOptions, MetricReport, MetricsError,
};
use segsynth::study::DEFAULT_THRESHOLD;

use crate::error::{ApiError, FieldError};
use crate::rle::RleMask;
use crate::session::{Session, SessionStore};

pub type AppState = Arc<SessionStore>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: Uuid,
    pub width: usize,
    pub height: usize,
    pub truth_area: usize,
    pub contour: Vec<Point>,
    pub digest: String,
    pub created_unix: u64,
}

impl SessionInfo {
    fn of(s: &Session) -> Self {
        Self {
            id: s.id,
            width: s.truth.width(),
            height: s.truth.height(),
            truth_area: s.truth.foreground_count(),
            contour: s.contour.points().to_vec(),
            digest: s.digest.clone(),
            created_unix: s.created_unix,
        }
    }
}

/// Concrete engine parameters plus the seed for the descriptor draws.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthRequest {
    #[serde(default)]
    pub params: EngineParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub msi_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRequest {
    #[serde(flatten)]
    pub synth: SynthRequest,
    #[serde(default = "default_format")]
    pub format: MaskFormat,
}

fn default_format() -> MaskFormat {
    MaskFormat::Png
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewResponse {
    pub seed: u64,
    pub contour: Vec<Point>,
    pub mask: RleMask,
    pub counts: ConfusionCounts,
    pub report: MetricReport,
    pub trace: EngineTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportProvenance {
    pub session: Uuid,
    pub seed: u64,
    pub params: EngineParams,
    pub trace: EngineTrace,
    pub truth_digest: String,
    pub truth_area: usize,
    pub synthetic_area: usize,
    pub width: usize,
    pub height: usize,
    pub mask_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportResponse {
    pub filename: String,
    pub mime: String,
    pub mask_base64: String,
    pub provenance: ExportProvenance,
}

#[derive(Debug, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub sessions: usize,
}

pub async fn healthz(State(store): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok",
        sessions: store.len(),
    })
}

pub async fn openapi() -> ([(axum::http::HeaderName, &'static str); 1], &'static str) {
    (
        [(axum::http::header::CONTENT_TYPE, "application/yaml")],
        crate::OPENAPI_YAML,
    )
}

pub async fn create_session(
    State(store): State<AppState>,
    mut multipart: Multipart,
) -> Result<(axum::http::StatusCode, Json<SessionInfo>), ApiError> {
    let mut bytes = None;
    let mut threshold = DEFAULT_THRESHOLD;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::BadRequest(e.body_text()))?
    {
        match field.name() {
            Some("mask") => {
                bytes = Some(
                    field
                        .bytes()
                        .await
                        .map_err(|e| ApiError::BadRequest(e.body_text()))?,
                );
            }
            Some("threshold") => {
                let text = field
                    .text()
                    .await
                    .map_err(|e| ApiError::BadRequest(e.body_text()))?;
                threshold = text.trim().parse().map_err(|_| {
                    ApiError::Validation(vec![FieldError {
                        field: "threshold".into(),
                        reason: "must be an integer in [0, 255]".into(),
                    }])
                })?;
            }
            _ => {}
        }
    }
    let bytes = bytes.ok_or_else(|| ApiError::BadRequest("missing `mask` file field".into()))?;
    let session = tokio::task::spawn_blocking(move || {
        let (mask, _) = decode_mask(&bytes, threshold).map_err(ApiError::from_mask)?;
        store.create(mask).map_err(ApiError::from_mask)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    tracing::info!(id = %session.id, "session created");
    Ok((
        axum::http::StatusCode::CREATED,
        Json(SessionInfo::of(&session)),
    ))
}

fn lookup(store: &SessionStore, id: &str) -> Result<Arc<Session>, ApiError> {
    let id = Uuid::parse_str(id)
        .map_err(|_| ApiError::BadRequest(format!("`{id}` is not a session id")))?;
    store.get(id).ok_or(ApiError::NotFound(id))
}

pub async fn get_session(
    State(store): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionInfo>, ApiError> {
    let session = lookup(&store, &id)?;
    Ok(Json(SessionInfo::of(&session)))
}

struct Rendered {
    contour: Vec<Point>,
    mask: BinaryMask,
    trace: EngineTrace,
}

fn options(req: &SynthRequest) -> Result<EvalOptions, ApiError> {
    let mut opts = EvalOptions::default();
    if let Some(t) = req.msi_tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(ApiError::Validation(vec![FieldError {
                field: "msi_tolerance".into(),
                reason: "must be finite and > 0".into(),
            }]));
        }
        opts.msi_tolerance = t;
    }
    Ok(opts)
}

fn validate(req: &SynthRequest) -> Result<EvalOptions, ApiError> {
    let mut fields = Vec::new();
    if let Err(errors) = req.params.validate() {
        if let ApiError::Validation(f) = ApiError::from_validation(errors) {
            fields = f;
        }
    }
    match options(req) {
        Ok(opts) if fields.is_empty() => Ok(opts),
        Ok(_) => Err(ApiError::Validation(fields)),
        Err(ApiError::Validation(f)) => {
            fields.extend(f);
            Err(ApiError::Validation(fields))
        }
        Err(e) => Err(e),
    }
}

fn render(session: &Session, req: &SynthRequest) -> Result<Rendered, ApiError> {
    let mut rng = SeededRng::new(req.seed);
    let (contour, trace) =
        apply_engines(&session.contour, &req.params, &mut rng).map_err(ApiError::from_synth)?;
    let mask = rasterize(&contour, session.truth.width(), session.truth.height()).map_err(|e| {
        ApiError::Synthesis {
            stage: Some("rasterize"),
            message: format!("rasterize stage failed: {e}"),
        }
    })?;
    Ok(Rendered {
        contour: contour.into_points(),
        mask,
        trace,
    })
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError::BadRequest(e.body_text()))
}

fn metrics_error(e: MetricsError) -> ApiError {
    ApiError::Internal(e.to_string())
}

pub async fn preview(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SynthRequest>, JsonRejection>,
) -> Result<Json<PreviewResponse>, ApiError> {
    let session = lookup(&store, &id)?;
    let req = json_body(body)?;
    let opts = validate(&req)?;
    let response = tokio::task::spawn_blocking(move || {
        let r = render(&session, &req)?;
        let counts = confusion(&session.truth, &r.mask).map_err(metrics_error)?;
        let report = evaluate_all_with(&session.truth, &r.mask, &opts).map_err(metrics_error)?;
        Ok::<_, ApiError>(PreviewResponse {
            seed: req.seed,
            contour: r.contour,
            mask: RleMask::encode(&r.mask),
            counts,
            report,
            trace: r.trace,
        })
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(response))
}

pub async fn export(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ExportRequest>, JsonRejection>,
) -> Result<Json<ExportResponse>, ApiError> {
    let session = lookup(&store, &id)?;
    let req = json_body(body)?;
    validate(&req.synth)?;
    let response = tokio::task::spawn_blocking(move || {
        let r = render(&session, &req.synth)?;
        let bytes =
            encode_mask(&r.mask, req.format).map_err(|e| ApiError::Internal(e.to_string()))?;
        let digest: String = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok::<_, ApiError>(ExportResponse {
            filename: format!("synthetic_{}.{}", req.synth.seed, req.format.extension()),
            mime: req.format.mime().into(),
            mask_base64: STANDARD.encode(&bytes),
            provenance: ExportProvenance {
                session: session.id,
                seed: req.synth.seed,
                params: req.synth.params,
                trace: r.trace,
                truth_digest: session.digest.clone(),
                truth_area: session.truth.foreground_count(),
                synthetic_area: r.mask.foreground_count(),
                width: r.mask.width(),
                height: r.mask.height(),
                mask_sha256: digest,
            },
        })
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(response))
}
