mod common;

use axum::http::{Method, StatusCode};
use common::*;
use lode_core::editor::originality_score;
use lode_core::level::{Cell, Level, TileKind};
use lode_core::playability::check_playability;
use serde_json::json;

fn brush(id: u8, size: u8, col: i32, row: i32) -> serde_json::Value {
    json!({"tool": "brush", "suggestion_id": id, "size": size, "anchor": {"col": col, "row": row}})
}

#[tokio::test]
async fn health_and_missing_models() {
    let app = TestApp::new(None);
    let (s, v) = app.call(Method::GET, "/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["models_loaded"], false);
    let (s, v) = app.call(Method::POST, "/api/session", None).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(error_code(&v), "models_unavailable");
    let (s, v) = app.call(Method::GET, "/api/session/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&v), "session_not_found");
}

#[tokio::test]
async fn fresh_session_shape_and_score() {
    let app = TestApp::new(Some(vae_models()));
    let v = app.create().await;
    assert_eq!(v["suggestions"].as_array().unwrap().len(), 6);
    assert_eq!(v["budgets"]["refreshes_used"], 0);
    assert_eq!(v["budgets"]["refreshes_left"], 7);
    assert_eq!(v["budgets"]["wand_left"], 7);
    assert_eq!(v["can_undo"], false);
    assert_eq!(level_of(&v), Level::empty());
    let themes: Vec<_> = v["suggestions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| format!("{}-{}", s["theme"].as_str().unwrap(), s["variance"].as_str().unwrap()))
        .collect();
    assert_eq!(
        themes,
        [
            "platform-low",
            "platform-high",
            "ladder-low",
            "ladder-high",
            "gold-low",
            "gold-high"
        ]
    );
    let expected = originality_score(&Level::empty(), &tiny_vae(4)).unwrap();
    assert_eq!(v["score"].as_f64().unwrap(), expected);
    assert_eq!(app.create().await["score"], v["score"]);
}

#[tokio::test]
async fn edits_budgets_and_errors() {
    let app = TestApp::new(Some(fixture_models()));
    let id = app.create().await["id"].as_str().unwrap().to_string();
    let edit = format!("/api/session/{id}/edit");

    let (s, v) = app.call(Method::POST, &edit, Some(brush(4, 1, 0, 0))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["changed"], 1);
    assert_eq!(level_of(&v).get(Cell::new(0, 0)), TileKind::Gold);
    assert!((v["score"].as_f64().unwrap() - 100.0 / 704.0).abs() < 1e-12);
    assert_eq!(v["score_low"], true);

    let (s, v) = app.call(Method::POST, &edit, Some(brush(6, 1, 0, 0))).await;
    assert_eq!(
        (s, error_code(&v)),
        (StatusCode::UNPROCESSABLE_ENTITY, "unknown_suggestion")
    );
    let (s, v) = app.call(Method::POST, &edit, Some(brush(1, 4, 0, 0))).await;
    assert_eq!(
        (s, error_code(&v)),
        (StatusCode::UNPROCESSABLE_ENTITY, "invalid_brush_size")
    );
    let (s, v) = app.call(Method::POST, &edit, Some(brush(1, 5, 40, 0))).await;
    assert_eq!(
        (s, error_code(&v)),
        (StatusCode::UNPROCESSABLE_ENTITY, "empty_footprint")
    );
    let (s, v) = app.call(Method::POST, &edit, Some(json!({"tool": "paint"}))).await;
    assert!(s.is_client_error());
    assert_eq!(error_code(&v), "invalid_body");

    for i in 0..7 {
        let (s, v) = app
            .call(
                Method::POST,
                &edit,
                Some(json!({"tool": "wand", "cell": {"col": 10, "row": i}})),
            )
            .await;
        assert_eq!(s, StatusCode::OK, "{v}");
        assert_eq!(v["budgets"]["wand_left"], 6 - i);
    }
    let (s, v) = app
        .call(
            Method::POST,
            &edit,
            Some(json!({"tool": "wand", "cell": {"col": 1, "row": 1}})),
        )
        .await;
    assert_eq!((s, error_code(&v)), (StatusCode::CONFLICT, "wand_budget_exhausted"));

    let refresh = format!("/api/session/{id}/refresh");
    for i in 1..=7 {
        let (s, v) = app.call(Method::POST, &refresh, None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["budgets"]["refreshes_left"], 7 - i);
    }
    let (s, v) = app.call(Method::POST, &refresh, None).await;
    assert_eq!((s, error_code(&v)), (StatusCode::CONFLICT, "refresh_budget_exhausted"));

    let (s, v) = app
        .call(
            Method::POST,
            &edit,
            Some(json!({"tool": "spawn", "cell": {"col": 0, "row": 0}})),
        )
        .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let (_, v) = app.call(Method::POST, &edit, Some(brush(1, 2, 0, 0))).await;
    assert_eq!(v["spawn"], serde_json::Value::Null);
    let (s, v) = app
        .call(
            Method::POST,
            &edit,
            Some(json!({"tool": "spawn", "cell": {"col": 0, "row": 0}})),
        )
        .await;
    assert_eq!((s, error_code(&v)), (StatusCode::UNPROCESSABLE_ENTITY, "invalid_spawn"));
}

#[tokio::test]
async fn undo_redo_and_clear() {
    let app = TestApp::new(Some(fixture_models()));
    let id = app.create().await["id"].as_str().unwrap().to_string();
    let (_, v) = app.call(Method::POST, &format!("/api/session/{id}/undo"), None).await;
    assert_eq!(v["applied"], false);
    app.call(
        Method::POST,
        &format!("/api/session/{id}/edit"),
        Some(brush(2, 3, 4, 4)),
    )
    .await;
    let (_, v) = app.call(Method::POST, &format!("/api/session/{id}/undo"), None).await;
    assert_eq!(v["applied"], true);
    assert_eq!(level_of(&v), Level::empty());
    assert_eq!(v["can_redo"], true);
    let (_, v) = app.call(Method::POST, &format!("/api/session/{id}/redo"), None).await;
    assert_eq!(level_of(&v).count(TileKind::Ladder), 9);
    app.call(Method::POST, &format!("/api/session/{id}/refresh"), None)
        .await;
    let (s, v) = app.call(Method::POST, &format!("/api/session/{id}/clear"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["id"], id.as_str());
    assert_eq!(level_of(&v), Level::empty());
    assert_eq!(v["budgets"]["refreshes_used"], 0);
    assert_eq!(
        (v["can_undo"].clone(), v["can_redo"].clone()),
        (json!(false), json!(false))
    );
}

#[tokio::test]
async fn check_share_and_events() {
    let app = TestApp::new(Some(fixture_models()));
    let id = app.create().await["id"].as_str().unwrap().to_string();
    let edit = format!("/api/session/{id}/edit");
    for c in (0..32).step_by(5) {
        app.call(Method::POST, &edit, Some(brush(0, 5, c, 17))).await;
    }
    let (s, report) = app.call(Method::POST, &format!("/api/session/{id}/check"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(report["has_spawn"], false);
    assert_eq!(report["playable"], false);
    app.call(
        Method::POST,
        &edit,
        Some(json!({"tool": "spawn", "cell": {"col": 0, "row": 20}})),
    )
    .await;
    let (_, report) = app.call(Method::POST, &format!("/api/session/{id}/check"), None).await;
    assert_eq!(report["playable"], true, "{report}");
    let (_, view) = app.call(Method::GET, &format!("/api/session/{id}"), None).await;
    let level = level_of(&view);
    assert_eq!(report, serde_json::to_value(check_playability(&level)).unwrap());

    // Sealed gold from suggestion 1.
    app.call(Method::POST, &edit, Some(brush(1, 3, 19, 9))).await;
    let (_, report) = app.call(Method::POST, &format!("/api/session/{id}/check"), None).await;
    assert_eq!(report["playable"], false);
    assert_eq!(report["total_gold"], 2);
    assert_eq!(report["reachable_gold"], 1);

    let (s, share) = app.call(Method::GET, &format!("/api/session/{id}/share"), None).await;
    assert_eq!(s, StatusCode::OK);
    let token = share["token"].as_str().unwrap();
    let (s, shared) = app.call(Method::GET, share["path"].as_str().unwrap(), None).await;
    assert_eq!(s, StatusCode::OK);
    let (_, view) = app.call(Method::GET, &format!("/api/session/{id}"), None).await;
    assert_eq!(level_of(&shared), level_of(&view));
    let mut bad = token.to_string();
    let flip = if bad.ends_with('A') { "B" } else { "A" };
    bad.replace_range(bad.len() - 1.., flip);
    let (s, v) = app.call(Method::GET, &format!("/api/level/{bad}"), None).await;
    assert_eq!((s, error_code(&v)), (StatusCode::BAD_REQUEST, "invalid_token"));

    let events = format!("/api/session/{id}/events");
    let (s, v) = app
        .call(
            Method::POST,
            &events,
            Some(
                json!({"events": [{"kind": "play"}, {"kind": "select_suggestion", "suggestion_id": 2},
                {"kind": "win", "originality": 99.0}]}),
            ),
        )
        .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["accepted"], 3);
    let (s, v) = app
        .call(
            Method::POST,
            &events,
            Some(json!({"events": [{"kind": "play"}, {"kind": "teleport"}, {"kind": "undo"}]})),
        )
        .await;
    assert_eq!(
        (s, error_code(&v)),
        (StatusCode::UNPROCESSABLE_ENTITY, "invalid_events")
    );
    let bad: Vec<_> = v["error"]["details"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["index"].clone())
        .collect();
    assert_eq!(bad, vec![json!(1), json!(2)]);

    let (_, o) = app.call(Method::GET, "/api/analytics/originality", None).await;
    let scores = o["scores"].as_array().unwrap();
    assert_eq!(scores.len(), 1);
    let (_, view) = app.call(Method::GET, &format!("/api/session/{id}"), None).await;
    let expected = originality_score(&level_of(&view), &EmptyScorer).unwrap();
    assert_eq!(
        scores[0]["originality"].as_f64().unwrap(),
        expected,
        "server computes the score"
    );
    let (_, h) = app.call(Method::GET, "/api/analytics/heatmaps", None).await;
    assert_eq!(h["levels"], 1);
    assert_eq!(h["spawn"][20][0], 1);
    let (_, sg) = app.call(Method::GET, "/api/analytics/suggestions", None).await;
    assert_eq!(sg["suggestions"][2]["selections"], 1);
    assert_eq!(sg["suggestions"][0]["brush_applies"], 7);
    let (s, v) = app.call(Method::GET, "/api/analytics/nonsense", None).await;
    assert_eq!((s, error_code(&v)), (StatusCode::NOT_FOUND, "unknown_analytics"));
}

#[tokio::test]
async fn restart_restores_sessions() {
    let app = TestApp::new(Some(fixture_models()));
    let a = app.create().await["id"].as_str().unwrap().to_string();
    let b = app.create().await["id"].as_str().unwrap().to_string();
    app.call(Method::POST, &format!("/api/session/{a}/edit"), Some(brush(3, 5, 2, 2)))
        .await;
    app.call(Method::POST, &format!("/api/session/{a}/refresh"), None).await;
    app.state.store.write_snapshot().unwrap();
    app.call(Method::POST, &format!("/api/session/{b}/edit"), Some(brush(2, 2, 0, 0)))
        .await;
    app.call(Method::POST, &format!("/api/session/{a}/undo"), None).await;
    let c = app.create().await["id"].as_str().unwrap().to_string();
    app.call(
        Method::POST,
        &format!("/api/session/{c}/edit"),
        Some(json!({"tool": "wand", "cell": {"col": 0, "row": 0}})),
    )
    .await;

    let reopened = app.reopen(Some(fixture_models()));
    assert_eq!(reopened.store.ids(), app.state.store.ids());
    for id in [&a, &b, &c] {
        let before = app.state.store.read(id, |s| s.clone()).unwrap();
        let after = reopened.store.read(id, |s| s.clone()).unwrap();
        assert_eq!(before, after, "session {id}");
    }

    // Without a snapshot the journal alone is enough.
    std::fs::remove_file(app.dir.path().join("snapshot.json")).unwrap();
    let from_journal = app.reopen(None);
    for id in [&a, &b, &c] {
        assert_eq!(
            app.state.store.read(id, |s| s.clone()).unwrap(),
            from_journal.store.read(id, |s| s.clone()).unwrap()
        );
    }
}

#[tokio::test]
async fn idle_sessions_expire() {
    let app = TestApp::new(Some(fixture_models()));
    let id = app.create().await["id"].as_str().unwrap().to_string();
    let now = lode_core::editor::now_millis();
    assert_eq!(app.state.store.expire_idle(now, 60_000), 0);
    assert_eq!(app.state.store.expire_idle(now + 120_000, 60_000), 1);
    let (s, _) = app.call(Method::GET, &format!("/api/session/{id}"), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    app.state.store.write_snapshot().unwrap();
    assert!(app.reopen(None).store.is_empty());
    let (_, h) = app.call(Method::GET, "/api/analytics/refreshes", None).await;
    assert_eq!(h["sessions"], 1, "journal keeps expired sessions for analytics");
}

#[tokio::test]
async fn reads_do_not_touch_the_journal() {
    let app = TestApp::new(Some(fixture_models()));
    let id = app.create().await["id"].as_str().unwrap().to_string();
    let path = app.dir.path().join("journal.jsonl");
    let before = std::fs::read(&path).unwrap();
    for uri in [
        format!("/api/session/{id}"),
        format!("/api/session/{id}/share"),
        "/api/analytics/suggestions".to_string(),
        "/api/analytics/heatmaps".to_string(),
    ] {
        app.call(Method::GET, &uri, None).await;
    }
    app.call(Method::POST, &format!("/api/session/{id}/check"), None).await;
    app.call(Method::POST, &format!("/api/session/{id}/undo"), None).await;
    assert_eq!(std::fs::read(&path).unwrap(), before);
}
