use rankone_web::{alpha_profile_json, orbit_json, tower_layout_json};

const STAIRCASE: &str = r#"{"kind": "staircase", "r": [3]}"#;

#[test]
fn orbit_moves_between_subcolumns() {
    let v = orbit_json(STAIRCASE, 0, 0.1, 4).unwrap();
    let path = v["path"].as_array().unwrap();
    assert_eq!(path.len(), 5);
    assert_eq!(path[0]["level"], "0");
    // C_0 has one level, so T sends the point to the next copy of it.
    assert_eq!(path[1]["level"], "0");
    let x = path[1]["x"].as_f64().unwrap();
    assert!((x - (0.1 + 1.0 / 3.0)).abs() < 1e-12, "{x}");
}

#[test]
fn orbit_reports_spacers() {
    let v = orbit_json(STAIRCASE, 0, 0.5, 3).unwrap();
    let path = v["path"].as_array().unwrap();
    assert!(path.iter().any(|p| p["level"].is_null()), "{v}");
}

#[test]
fn alpha_profile_matches_exact_measure() {
    let v = alpha_profile_json(STAIRCASE, 0, 2, "1/2").unwrap();
    let pts = v["points"].as_array().unwrap();
    let at2 = pts.iter().find(|p| p[0] == "2").unwrap();
    assert_eq!(at2[1], "1/3");
}

#[test]
fn layout_survives_budget_limits() {
    let v = tower_layout_json(r#"{"kind": "main_wde", "max_odd_r": 64}"#, 30, 5).unwrap();
    let stages = v["stages"].as_array().unwrap();
    assert!(stages.len() >= 5 && stages.len() <= 24);
    assert!(v["name"].as_str().unwrap().starts_with("main_wde"));
}
