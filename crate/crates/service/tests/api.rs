use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use segsynth::mask_io::{
    centroid, decode_mask, encode_mask, extract_contour, rasterize, BinaryMask, MaskFormat, Point,
};
use segsynth::metrics::Metric;
use segsynth_service::{
    mask_digest, router, ExportResponse, PreviewResponse, SessionInfo, SessionStore,
};

const BOUNDARY: &str = "segsynth-test-boundary";

fn app() -> (Router, Arc<SessionStore>) {
    let store = Arc::new(SessionStore::new(Duration::from_secs(3600)));
    (router(Arc::clone(&store), None), store)
}

fn disk(size: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
    BinaryMask::from_fn(size, size, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        dx * dx + dy * dy <= r * r
    })
    .unwrap()
}

fn multipart(fields: &[(&str, Vec<u8>)]) -> Body {
    let mut body = Vec::new();
    for (name, bytes) in fields {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        if *name == "mask" {
            body.extend_from_slice(
                b"Content-Disposition: form-data; name=\"mask\"; filename=\"mask.png\"\r\nContent-Type: application/octet-stream\r\n\r\n",
            );
        } else {
            body.extend_from_slice(
                format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes(),
            );
        }
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    Body::from(body)
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, bytes)
}

async fn upload_bytes(app: &Router, bytes: Vec<u8>) -> (StatusCode, Vec<u8>) {
    let req = Request::post("/sessions")
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(multipart(&[("mask", bytes)]))
        .unwrap();
    send(app, req).await
}

async fn upload(app: &Router, mask: &BinaryMask) -> SessionInfo {
    let (status, body) = upload_bytes(app, encode_mask(mask, MaskFormat::Png).unwrap()).await;
    assert_eq!(
        status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&body)
    );
    serde_json::from_slice(&body).unwrap()
}

async fn post_json(app: &Router, uri: &str, body: &Value) -> (StatusCode, Vec<u8>) {
    let req = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(serde_json::to_vec(body).unwrap()))
        .unwrap();
    send(app, req).await
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

fn as_json(body: &[u8]) -> Value {
    serde_json::from_slice(body).unwrap()
}

#[tokio::test]
async fn block_upload_returns_eight_point_contour() {
    let (app, _) = app();
    let mask = BinaryMask::from_ascii(&[".....", ".###.", ".###.", ".###.", "....."]).unwrap();
    let info = upload(&app, &mask).await;
    assert_eq!((info.width, info.height, info.truth_area), (5, 5, 9));
    assert_eq!(info.contour.len(), 8);
    assert_eq!(
        centroid(&extract_contour(&mask).unwrap()),
        Point::new(2.0, 2.0)
    );

    let (status, body) = get(&app, &format!("/sessions/{}", info.id)).await;
    assert_eq!(status, StatusCode::OK);
    let again: SessionInfo = serde_json::from_slice(&body).unwrap();
    assert_eq!(again, info);
}

#[tokio::test]
async fn pgm_uploads_and_threshold_field_are_accepted() {
    let (app, _) = app();
    let mask = disk(32, 16.0, 16.0, 8.0);
    let req = Request::post("/sessions")
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(multipart(&[
            ("threshold", b"127".to_vec()),
            ("mask", encode_mask(&mask, MaskFormat::Pgm).unwrap()),
        ]))
        .unwrap();
    let (status, body) = send(&app, req).await;
    assert_eq!(
        status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&body)
    );
    let info: SessionInfo = serde_json::from_slice(&body).unwrap();
    assert_eq!(info.truth_area, mask.foreground_count());
}

#[tokio::test]
async fn empty_mask_is_unprocessable() {
    let (app, store) = app();
    let blank = BinaryMask::new(8, 8).unwrap();
    let (status, body) = upload_bytes(&app, encode_mask(&blank, MaskFormat::Png).unwrap()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(as_json(&body)["error"], "empty mask");
    assert!(store.is_empty());

    let (status, body) = upload_bytes(&app, b"not an image".to_vec()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(as_json(&body)["error"].as_str().unwrap().contains("PNG"));
}

#[tokio::test]
async fn missing_mask_field_is_a_bad_request() {
    let (app, _) = app();
    let req = Request::post("/sessions")
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(multipart(&[("threshold", b"0".to_vec())]))
        .unwrap();
    let (status, _) = send(&app, req).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn same_file_twice_gives_distinct_sessions() {
    let (app, store) = app();
    let mask = disk(40, 20.0, 20.0, 10.0);
    let a = upload(&app, &mask).await;
    let b = upload(&app, &mask).await;
    assert_ne!(a.id, b.id);
    assert_eq!(a.digest, b.digest);
    assert_eq!(store.len(), 2);
}

#[tokio::test]
async fn identity_preview_returns_round_trip_truth() {
    let (app, _) = app();
    let truth = disk(96, 47.3, 45.8, 30.0);
    let info = upload(&app, &truth).await;
    let (status, body) =
        post_json(&app, &format!("/sessions/{}/preview", info.id), &json!({})).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    let preview: PreviewResponse = serde_json::from_slice(&body).unwrap();

    let expected = rasterize(&extract_contour(&truth).unwrap(), 96, 96).unwrap();
    assert_eq!(preview.mask.decode().unwrap(), expected);
    assert_eq!(preview.contour, info.contour);
    assert!(preview.report.value(Metric::Dice).unwrap() >= 0.98);
    assert!(preview.report.is_complete());
    assert_eq!(
        preview.counts.tp + preview.counts.fp + preview.counts.fn_ + preview.counts.tn,
        96 * 96
    );
}

#[tokio::test]
async fn single_spiculation_moves_the_zero_angle_point_outward() {
    let (app, _) = app();
    let truth = disk(128, 64.0, 64.0, 30.0);
    let info = upload(&app, &truth).await;
    let body = json!({
        "params": {
            "fd": {"detail": 1.0, "range": 0.0, "magnitude": 0.0},
            "spiculations": [{"center": 0.0, "height": 10.0, "width": 0.3}]
        }
    });
    let (status, resp) = post_json(&app, &format!("/sessions/{}/preview", info.id), &body).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&resp));
    let preview: PreviewResponse = serde_json::from_slice(&resp).unwrap();

    let c = centroid(&extract_contour(&truth).unwrap());
    let angle = |p: &Point| (p.y - c.y).atan2(p.x - c.x);
    let (i, _) = info
        .contour
        .iter()
        .enumerate()
        .min_by(|a, b| angle(a.1).abs().total_cmp(&angle(b.1).abs()))
        .unwrap();
    assert_eq!(preview.contour.len(), info.contour.len());
    let (before, after) = (info.contour[i], preview.contour[i]);
    let moved = after.distance(before);
    assert!((moved - 10.0).abs() < 0.5, "moved {moved}");
    assert!(after.distance(c) > before.distance(c) + 9.5);
    assert!(preview.counts.fp > 0);
}

#[tokio::test]
async fn preview_is_referentially_transparent() {
    let (app, _) = app();
    let info = upload(&app, &disk(80, 40.0, 40.0, 25.0)).await;
    let body = json!({
        "params": {"fd": {"detail": 0.5, "range": 0.8, "magnitude": 3.0}},
        "seed": 99
    });
    let uri = format!("/sessions/{}/preview", info.id);
    let (s1, a) = post_json(&app, &uri, &body).await;
    let (s2, b) = post_json(&app, &uri, &body).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    let other = json!({
        "params": {"fd": {"detail": 0.5, "range": 0.8, "magnitude": 3.0}},
        "seed": 100
    });
    let (_, c) = post_json(&app, &uri, &other).await;
    assert_ne!(a, c);
}

#[tokio::test]
async fn unknown_or_malformed_session_ids() {
    let (app, _) = app();
    let id = uuid::Uuid::new_v4();
    let (status, body) = get(&app, &format!("/sessions/{id}")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(as_json(&body)["error"]
        .as_str()
        .unwrap()
        .contains("not found"));
    let (status, _) = post_json(&app, &format!("/sessions/{id}/preview"), &json!({})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = post_json(&app, &format!("/sessions/{id}/export"), &json!({})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = get(&app, "/sessions/not-a-uuid").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn malformed_json_is_a_bad_request() {
    let (app, _) = app();
    let info = upload(&app, &disk(32, 16.0, 16.0, 8.0)).await;
    let req = Request::post(format!("/sessions/{}/preview", info.id))
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{\"seed\": \"x\""))
        .unwrap();
    let (status, body) = send(&app, req).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(as_json(&body)["error"].is_string());
}

#[tokio::test]
async fn export_round_trips_and_is_deterministic() {
    let (app, _) = app();
    let info = upload(&app, &disk(72, 36.0, 36.0, 20.0)).await;
    let uri = format!("/sessions/{}/export", info.id);
    let preview_uri = format!("/sessions/{}/preview", info.id);
    for format in ["png", "pgm"] {
        let body = json!({
            "params": {
                "fd": {"detail": 0.6, "range": 0.5, "magnitude": 2.0},
                "affine": {"resize_x": 0.9, "resize_y": 0.9, "shift_dx": 2.0}
            },
            "seed": 7,
            "format": format
        });
        let (s1, a) = post_json(&app, &uri, &body).await;
        let (s2, b) = post_json(&app, &uri, &body).await;
        assert_eq!(
            (s1, s2),
            (StatusCode::OK, StatusCode::OK),
            "{}",
            String::from_utf8_lossy(&a)
        );
        assert_eq!(a, b);

        let export: ExportResponse = serde_json::from_slice(&a).unwrap();
        assert_eq!(export.filename, format!("synthetic_7.{format}"));
        let bytes = STANDARD.decode(&export.mask_base64).unwrap();
        let (mask, fmt) = decode_mask(&bytes, 0).unwrap();
        assert_eq!(fmt.extension(), format);
        assert_eq!(encode_mask(&mask, fmt).unwrap(), bytes);
        assert_eq!(export.provenance.seed, 7);
        assert_eq!(export.provenance.truth_digest, info.digest);
        assert_eq!(export.provenance.synthetic_area, mask.foreground_count());

        let (_, p) = post_json(&app, &preview_uri, &body).await;
        let preview: PreviewResponse = serde_json::from_slice(&p).unwrap();
        assert_eq!(preview.mask.decode().unwrap(), mask);
        assert_eq!(preview.trace, export.provenance.trace);
    }
}

#[tokio::test]
async fn invalid_parameters_list_every_offending_field() {
    let (app, _) = app();
    let info = upload(&app, &disk(40, 20.0, 20.0, 12.0)).await;
    let body = json!({
        "params": {
            "fd": {"detail": 0.0, "range": 0.5, "magnitude": 1.0},
            "spiculations": [
                {"center": 0.0, "height": 3.0, "width": 0.2},
                {"center": 1.0, "height": 3.0, "width": 0.0}
            ],
            "affine": {"resize_x": -1.0}
        },
        "msi_tolerance": 0.0
    });
    for route in ["preview", "export"] {
        let (status, resp) =
            post_json(&app, &format!("/sessions/{}/{route}", info.id), &body).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
        let v = as_json(&resp);
        let fields: Vec<&str> = v["fields"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f["field"].as_str().unwrap())
            .collect();
        assert_eq!(
            fields,
            [
                "fd.detail",
                "spiculations[1].width",
                "affine.resize_x",
                "msi_tolerance"
            ]
        );
    }
}

#[tokio::test]
async fn synthesis_failures_name_the_stage() {
    let (app, _) = app();
    let info = upload(&app, &disk(64, 32.0, 32.0, 15.0)).await;
    let body = json!({
        "params": {"spiculations": [{"center": 1.0, "height": -40.0, "width": 0.5}]}
    });
    let (status, resp) = post_json(&app, &format!("/sessions/{}/preview", info.id), &body).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = as_json(&resp);
    assert_eq!(v["stage"], "spiculation");
    assert!(v["error"]
        .as_str()
        .unwrap()
        .starts_with("spiculation stage failed"));
}

#[tokio::test]
async fn requests_never_mutate_the_truth() {
    let (app, store) = app();
    let truth = disk(64, 30.0, 33.0, 18.0);
    let info = upload(&app, &truth).await;
    let before = mask_digest(&truth);
    assert_eq!(info.digest, before);
    let requests = [
        ("preview", json!({})),
        ("preview", json!({"params": {"affine": {"shift_dx": 50.0}}})),
        (
            "export",
            json!({"params": {"fd": {"detail": 0.2, "range": 1.0, "magnitude": 9.0}}, "seed": 3}),
        ),
        (
            "preview",
            json!({"params": {"spiculations": [{"center": 2.0, "height": -40.0, "width": 1.0}]}}),
        ),
        (
            "preview",
            json!({"params": {"fd": {"detail": 0.0, "range": 0.0, "magnitude": 0.0}}}),
        ),
    ];
    for (route, body) in &requests {
        post_json(&app, &format!("/sessions/{}/{route}", info.id), body).await;
    }
    let session = store.get(info.id).unwrap();
    assert_eq!(session.truth, truth);
    assert_eq!(mask_digest(&session.truth), before);
    let (_, body) = get(&app, &format!("/sessions/{}", info.id)).await;
    assert_eq!(serde_json::from_slice::<SessionInfo>(&body).unwrap(), info);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let store = Arc::new(SessionStore::new(Duration::from_millis(50)));
    let app = router(Arc::clone(&store), None);
    let info = upload(&app, &disk(24, 12.0, 12.0, 6.0)).await;
    let (status, _) = get(&app, &format!("/sessions/{}", info.id)).await;
    assert_eq!(status, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(120)).await;
    let (status, _) = get(&app, &format!("/sessions/{}", info.id)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn healthz_reports_ok() {
    let (app, _) = app();
    let (status, body) = get(&app, "/healthz").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(as_json(&body), json!({"status": "ok", "sessions": 0}));
}

#[tokio::test]
async fn openapi_document_covers_every_route() {
    let (app, _) = app();
    let (status, body) = get(&app, "/openapi.yaml").await;
    assert_eq!(status, StatusCode::OK);
    let on_disk =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/openapi.yaml")).unwrap();
    assert_eq!(String::from_utf8(body).unwrap(), on_disk);

    let doc: serde_yaml::Value = serde_yaml::from_str(&on_disk).unwrap();
    let paths = doc["paths"].as_mapping().unwrap();
    for (path, method) in [
        ("/sessions", "post"),
        ("/sessions/{id}", "get"),
        ("/sessions/{id}/preview", "post"),
        ("/sessions/{id}/export", "post"),
        ("/healthz", "get"),
        ("/openapi.yaml", "get"),
    ] {
        let item = paths
            .get(serde_yaml::Value::from(path))
            .unwrap_or_else(|| panic!("{path} missing"));
        assert!(item.get(method).is_some(), "{method} {path} missing");
    }
    let schemas = doc["components"]["schemas"].as_mapping().unwrap();
    for name in [
        "SessionInfo",
        "SynthRequest",
        "PreviewResponse",
        "ExportResponse",
        "Error",
        "RleMask",
    ] {
        assert!(
            schemas.contains_key(serde_yaml::Value::from(name)),
            "{name} missing"
        );
    }
}

#[tokio::test]
async fn ui_directory_is_served_next_to_the_api() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let store = Arc::new(SessionStore::new(Duration::from_secs(60)));
    let app = router(store, Some(dir.path().to_path_buf()));

    let (status, body) = get(&app, "/").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<html>ui</html>");
    let (status, body) = get(&app, "/app.js").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"console.log(1)");
    let (status, _) = get(&app, "/healthz").await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = get(&app, "/missing.css").await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (plain, _) = self::app();
    let (status, _) = get(&plain, "/").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn missing_ui_directory_is_rejected_at_startup() {
    let config = segsynth_service::ServiceConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        ui_dir: Some("/nonexistent/segsynth-ui".into()),
        ..Default::default()
    };
    let err = segsynth_service::serve(config).await.unwrap_err();
    assert!(matches!(
        err,
        segsynth_service::ServiceError::MissingUiDir(_)
    ));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn preview_on_a_megapixel_mask_meets_the_latency_budget() {
    let (app, _) = app();
    let truth = disk(1024, 511.5, 500.0, 400.0);
    let info = upload(&app, &truth).await;
    let uri = format!("/sessions/{}/preview", info.id);
    let body = json!({
        "params": {
            "fd": {"detail": 0.1, "range": 0.8, "magnitude": 4.0},
            "spiculations": [{"center": 0.5, "height": 25.0, "width": 0.1}],
            "affine": {"resize_x": 0.95, "resize_y": 1.05, "shift_dx": 6.0}
        },
        "seed": 11
    });
    // first call warms allocator and thread pool
    post_json(&app, &uri, &body).await;
    let mut worst = Duration::ZERO;
    for _ in 0..3 {
        let t = Instant::now();
        let (status, _) = post_json(&app, &uri, &body).await;
        worst = worst.max(t.elapsed());
        assert_eq!(status, StatusCode::OK);
    }
    assert!(
        worst < Duration::from_millis(200),
        "worst preview {worst:?}"
    );
}
