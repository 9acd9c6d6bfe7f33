//! HTTP API exercised in-process against a temporary session directory.

use std::path::Path;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use calliope_cli::api::AppState;
use calliope_cli::{router, Store};
use calliope_core::pipeline::PipelineConfig;
use calliope_core::text::Templates;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn lesmis() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/lesmis.json")).unwrap()
}

fn app(dir: &Path) -> Router {
    router(AppState { store: Store::new(dir).unwrap(), cfg: PipelineConfig::default(), templates: Templates::default() })
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::Null), text)
}

async fn upload(app: &Router) -> String {
    let req = Request::builder().method(Method::POST).uri("/api/graphs").body(Body::from(lesmis())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::CREATED);
    let v: Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!((v["nodes"].as_u64(), v["edges"].as_u64()), (Some(77), Some(254)));
    v["sessionId"].as_str().unwrap().to_string()
}

async fn generated(app: &Router) -> String {
    let id = upload(app).await;
    let (s, v, _) =
        call(app, Method::POST, &format!("/api/sessions/{id}/generate"), Some(json!({"topic": "hidden-ties", "seed": 3}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["revision"], 1);
    id
}

async fn revision(app: &Router, id: &str) -> u64 {
    call(app, Method::GET, &format!("/api/sessions/{id}"), None).await.1["revision"].as_u64().unwrap()
}

#[tokio::test]
async fn unknown_topic_and_session_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = upload(&app).await;
    let (s, v, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/generate"), Some(json!({"topic": "gossip"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("unknown topic"));
    assert_eq!(revision(&app, &id).await, 0);
    let (s, _, _) = call(&app, Method::GET, "/api/sessions/nope/narrative", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _, _) = call(&app, Method::GET, &format!("/api/sessions/{id}/narrative"), None).await;
    assert_eq!(s, StatusCode::CONFLICT, "nothing generated yet");
}

#[tokio::test]
async fn narrative_edits() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = generated(&app).await;
    let url = format!("/api/sessions/{id}/narrative");
    let (_, n, _) = call(&app, Method::GET, &url, None).await;
    let facts = n["narrative"]["facts"].as_array().unwrap().clone();
    let root = facts[0]["id"].as_str().unwrap().to_string();
    let r0 = n["narrative"]["rewards"]["R"].as_f64().unwrap();

    let (s, v, _) = call(&app, Method::PATCH, &url, Some(json!({"ops": [{"op": "remove", "fact": root}]}))).await;
    assert!(s.is_client_error());
    assert!(v["error"].as_str().unwrap().contains("cannot remove topic root"));
    assert_eq!(revision(&app, &id).await, 1);

    // Remove a leaf: a fact that is nobody's predecessor.
    let relations = n["narrative"]["relations"].as_array().unwrap();
    let leaf = facts
        .iter()
        .map(|f| f["id"].as_str().unwrap())
        .rev()
        .find(|fid| relations.iter().all(|r| r["pred"] != *fid))
        .unwrap()
        .to_string();
    let (s, after, _) = call(&app, Method::PATCH, &url, Some(json!({"ops": [{"op": "remove", "fact": leaf}]}))).await;
    assert_eq!(s, StatusCode::OK, "{after}");
    assert_eq!(after["revision"], 2);
    let r1 = after["narrative"]["rewards"]["R"].as_f64().unwrap();
    assert!(r1 <= r0 + 1e-12);
    let ids: Vec<&str> = after["narrative"]["facts"].as_array().unwrap().iter().map(|f| f["id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), facts.len() - 1);
    for r in after["narrative"]["relations"].as_array().unwrap() {
        assert!(ids.contains(&r["pred"].as_str().unwrap()) && ids.contains(&r["succ"].as_str().unwrap()));
    }

    // Add the best recommendation with a positive gain.
    let (s, rec, _) = call(&app, Method::GET, &format!("/api/sessions/{id}/recommend?focus=node:Valjean"), None).await;
    assert_eq!(s, StatusCode::OK, "{rec}");
    let list = rec["facts"].as_array().unwrap();
    assert!(!list.is_empty() && list.len() <= 20);
    if let Some(pick) = list.iter().find(|r| !r["inNarrative"].as_bool().unwrap() && r["gain"].as_f64().unwrap() > 0.0) {
        let fid = pick["fact"]["id"].as_str().unwrap();
        let (s, added, _) = call(&app, Method::PATCH, &url, Some(json!({"ops": [{"op": "add", "fact": fid}]}))).await;
        assert_eq!(s, StatusCode::OK, "{added}");
        assert!(added["narrative"]["rewards"]["R"].as_f64().unwrap() >= r1);
    }
    let (s, _, _) = call(&app, Method::GET, &format!("/api/sessions/{id}/recommend?focus=planet:x"), None).await;
    assert!(s.is_client_error());
}

#[tokio::test]
async fn text_edit_changes_only_text_in_the_export() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = generated(&app).await;
    let export = format!("/api/sessions/{id}/export?format=json");
    let (_, before, _) = call(&app, Method::GET, &export, None).await;
    let fid = before["annotations"][0]["facts"][0].as_str().unwrap().to_string();
    let ops = json!({"ops": [{"op": "edit-text", "fact": fid, "text": "Edited by hand."}]});
    let (s, _, _) = call(&app, Method::PATCH, &format!("/api/sessions/{id}/narrative"), Some(ops)).await;
    assert_eq!(s, StatusCode::OK);
    let (_, after, _) = call(&app, Method::GET, &export, None).await;
    for key in ["title", "narrative", "layout", "graph_summary", "legend", "width", "height"] {
        assert_eq!(before[key], after[key], "{key} changed");
    }
    let (a, b) = (&before["annotations"][0], &after["annotations"][0]);
    assert_eq!((&a["id"], &a["facts"], &a["chart"], &a["color"]), (&b["id"], &b["facts"], &b["chart"], &b["color"]));
    assert!(b["full_text"].as_str().unwrap().contains("Edited by hand."));
    assert_eq!(before["annotations"].as_array().unwrap()[1..], after["annotations"].as_array().unwrap()[1..]);
}

#[tokio::test]
async fn layout_moves_pins_and_reoptimization() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = generated(&app).await;
    let export = format!("/api/sessions/{id}/export?format=json");
    let layout = format!("/api/sessions/{id}/layout");
    let (_, before, _) = call(&app, Method::GET, &export, None).await;
    let anns = before["layout"]["annotations"].as_object().unwrap();
    let (ann, rect) = anns.iter().next().unwrap();

    let body = json!({"moves": [{"element": ann, "by": [15.0, 10.0]}]});
    let (s, v, _) = call(&app, Method::POST, &layout, Some(body)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["revision"], 2);
    let moved = &v["layout"]["annotations"][ann];
    assert_eq!(moved["cx"].as_f64().unwrap(), rect["cx"].as_f64().unwrap() + 15.0);
    assert_eq!(moved["cy"].as_f64().unwrap(), rect["cy"].as_f64().unwrap() + 10.0);
    for (k, r) in anns {
        if k != ann {
            assert_eq!(&v["layout"]["annotations"][k], r);
        }
    }
    assert_eq!(v["layout"]["nodes"], before["layout"]["nodes"]);

    let (s, v2, _) = call(&app, Method::POST, &layout, Some(json!({"reoptimize": true}))).await;
    assert_eq!(s, StatusCode::OK, "{v2}");
    assert_eq!(&v2["layout"]["annotations"][ann], moved);
    assert_eq!(v2["pinned"], json!([ann]));

    let (s, v3, _) = call(&app, Method::POST, &layout, Some(json!({"moves": [{"element": "community:1", "by": [-4.0, 6.0]}]}))).await;
    assert_eq!(s, StatusCode::OK);
    let nodes_before = v2["layout"]["nodes"].as_object().unwrap();
    let moved_nodes = nodes_before
        .iter()
        .filter(|(k, p)| {
            let q = &v3["layout"]["nodes"][k.as_str()];
            let d = [q[0].as_f64().unwrap() - p[0].as_f64().unwrap(), q[1].as_f64().unwrap() - p[1].as_f64().unwrap()];
            if d == [0.0, 0.0] {
                return false;
            }
            assert!((d[0] + 4.0).abs() < 1e-9 && (d[1] - 6.0).abs() < 1e-9);
            true
        })
        .count();
    assert!(moved_nodes > 0);

    let (s, _, _) = call(&app, Method::POST, &layout, Some(json!({"moves": [{"element": "node:Nobody", "to": [1.0, 1.0]}]}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(revision(&app, &id).await, 4);
}

#[tokio::test]
async fn concurrent_mutations_serialize() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = generated(&app).await;
    let (_, before, _) = call(&app, Method::GET, &format!("/api/sessions/{id}/export?format=json"), None).await;
    let ann = before["annotations"][0]["id"].as_str().unwrap().to_string();
    let tasks: Vec<_> = (0..6)
        .map(|_| {
            let app = app.clone();
            let uri = format!("/api/sessions/{id}/layout");
            let body = json!({"moves": [{"element": ann, "by": [1.0, 0.0]}]});
            tokio::spawn(async move { call(&app, Method::POST, &uri, Some(body)).await.1["revision"].as_u64().unwrap() })
        })
        .collect();
    let mut revs = vec![];
    for t in tasks {
        revs.push(t.await.unwrap());
    }
    revs.sort();
    assert_eq!(revs, vec![2, 3, 4, 5, 6, 7]);
    let (_, after, _) = call(&app, Method::GET, &format!("/api/sessions/{id}/export?format=json"), None).await;
    let dx = after["layout"]["annotations"][&ann]["cx"].as_f64().unwrap() - before["layout"]["annotations"][&ann]["cx"].as_f64().unwrap();
    assert!((dx - 6.0).abs() < 1e-9);
}

#[tokio::test]
async fn search_export_and_persistence() {
    let dir = tempfile::tempdir().unwrap();
    let first = app(dir.path());
    let id = generated(&first).await;
    let (_, hits, _) = call(&first, Method::GET, &format!("/api/sessions/{id}/search?q=val"), None).await;
    assert!(hits.as_array().unwrap().iter().any(|h| h == "Valjean"));
    let (_, none, _) = call(&first, Method::GET, &format!("/api/sessions/{id}/search?q="), None).await;
    assert_eq!(none, json!([]));
    let (_, none, _) = call(&first, Method::GET, &format!("/api/sessions/{id}/search?q=zzzz"), None).await;
    assert_eq!(none, json!([]));

    let (s, _, svg) = call(&first, Method::GET, &format!("/api/sessions/{id}/export?format=svg"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let (s, _, _) = call(&first, Method::GET, &format!("/api/sessions/{id}/export?format=pdf"), None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    // A fresh service over the same directory reproduces the export.
    let (_, json_before, _) = call(&first, Method::GET, &format!("/api/sessions/{id}/export?format=json"), None).await;
    let second = app(dir.path());
    let (_, _, svg_again) = call(&second, Method::GET, &format!("/api/sessions/{id}/export?format=svg"), None).await;
    let (_, json_again, _) = call(&second, Method::GET, &format!("/api/sessions/{id}/export?format=json"), None).await;
    assert_eq!(svg, svg_again);
    assert_eq!(json_before, json_again);
    assert_eq!(revision(&second, &id).await, 1);
}

#[tokio::test]
async fn regenerating_with_the_same_request_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = generated(&app).await;
    let uri = format!("/api/sessions/{id}/export?format=json");
    let (_, a, _) = call(&app, Method::GET, &uri, None).await;
    let (s, v, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/generate"), Some(json!({"topic": "hidden-ties", "seed": 3}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["revision"], 2);
    let (_, b, _) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(a, b);
}
