use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn qgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_bimatrix(dir: &Path, a: [[f64; 2]; 2], p: [[f64; 2]; 2]) -> (String, String) {
    let game = serde_json::json!({
        "players": 2,
        "strategyCounts": [2, 2],
        "utilities": [a, [[1.0, 1.0], [1.0, 1.0]]],
        "normalized": true,
    });
    let dist = serde_json::json!({
        "shape": [2, 2],
        "probabilities": [p[0][0], p[0][1], p[1][0], p[1][1]],
    });
    let g = dir.join("game.json");
    let d = dir.join("dist.json");
    fs::write(&g, game.to_string()).unwrap();
    fs::write(&d, dist.to_string()).unwrap();
    (path(&g).into(), path(&d).into())
}

#[test]
fn traffic_light_ce_verifies_classically() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("tl");
    assert_eq!(code(&qgame(&["construct", "traffic-light", "--out", path(&out)])), 0);
    let o = qgame(&["verify", path(&out.join("game.json")), path(&out.join("dist.json"))]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["report"]["verdict"], Value::Bool(true));
}

#[test]
fn fourier_state_fails_quantum_check_with_three_quarters() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("f4");
    assert_eq!(code(&qgame(&["construct", "fourier", "--n", "4", "--out", path(&out)])), 0);
    let o = qgame(&["verify", path(&out.join("game.json")), path(&out.join("state.json")), "--mode", "quantum"]);
    assert_eq!(code(&o), 1);
    let gain = json(&o)["incentives"][0].as_f64().unwrap();
    assert!((gain - 0.75).abs() < 1e-6, "{gain}");
}

#[test]
fn mixture_of_battle_of_sexes_ce_is_a_qce() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("bos");
    assert_eq!(code(&qgame(&["construct", "battle-of-sexes", "--out", path(&out)])), 0);
    let game = out.join("game.json");
    let o = qgame(&["verify", path(&game), path(&out.join("mixture_state.json")), "--mode", "quantum"]);
    assert_eq!(code(&o), 0);
    // the distribution file maps to the same mixture
    let o = qgame(&["verify", path(&game), path(&out.join("dist.json")), "--mode", "quantum"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn two_by_two_incentives() {
    let dir = tempdir().unwrap();
    let s = 2f64.sqrt() / 4.0;
    let (g, d) = write_bimatrix(dir.path(), [[1.0, 0.0], [0.0, 1.0]], [[s, s], [0.0, 1.0 - 2.0 * s]]);
    let o = qgame(&["incentive", &g, &d, "--mode", "add"]);
    assert_eq!(code(&o), 0);
    let v = json(&o)["value"].as_f64().unwrap();
    assert!((v - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-7, "{v}");

    let (g, d) = write_bimatrix(dir.path(), [[1.0, 0.0], [0.0, 1.0]], [[0.4, 0.4], [0.0, 0.2]]);
    let o = qgame(&["incentive", &g, &d, "--mode", "mul"]);
    let v = json(&o)["value"].as_f64().unwrap();
    assert!((v - 4.0 / 3.0).abs() < 1e-7, "{v}");

    let (g, d) = write_bimatrix(dir.path(), [[1.0, 0.0], [0.0, 1.0]], [[0.25, 0.25], [0.25, 0.25]]);
    let v = json(&qgame(&["incentive", &g, &d]))["value"].as_f64().unwrap();
    assert!(v.abs() < 1e-7, "{v}");
}

#[test]
fn constructions_write_files_and_predictions() {
    let dir = tempdir().unwrap();
    let e8 = dir.path().join("e8");
    let o = qgame(&["construct", "epsilon", "--d", "8", "--out", path(&e8)]);
    assert_eq!(code(&o), 0);
    let pred = json(&o);
    let gain = pred["simulated"]["gain"].as_f64().unwrap();
    assert!((gain - pred["predicted_gain"].as_f64().unwrap()).abs() < 1e-9);
    for f in ["base_game.json", "base_dist.json", "base_deviation.json", "predictions.json"] {
        assert!(e8.join(f).exists(), "{f}");
    }

    let o = qgame(&["construct", "cyclic", "--c", "4", "--d", "2"]);
    let ratio = json(&o)["simulated"]["ratio"].as_f64().unwrap();
    assert!((ratio - 2.25f64.powi(2)).abs() < 1e-9);

    let lb = dir.path().join("lb");
    assert_eq!(code(&qgame(&["construct", "load-balancing", "--n", "8", "--out", path(&lb)])), 0);
    let g: Value = serde_json::from_str(&fs::read_to_string(lb.join("game.json")).unwrap()).unwrap();
    assert_eq!(g["strategyCounts"], serde_json::json!([8, 8]));
    assert_eq!(g["utilities"][0][3][3].as_f64(), Some(0.0));
    assert_eq!(g["utilities"][1][3][4].as_f64(), Some(1.0));
}

#[test]
fn correlation_rows() {
    let o = qgame(&["corr", "ed:8", "hjmr:4", "conjecture:4:2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance,size,rank,rank-lb,nnr-lb,nnr-ub,qcorr-ub(qubits),rcorr-lb(bits),notes")
    );
    let ed: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((ed[0], ed[6], ed[7]), ("ed-8", "1", "3"));
    let hjmr: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((hjmr[0], hjmr[2]), ("hjmr-4", "5"));
    assert!(lines.next().unwrap().starts_with("conjecture-4-2,"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert_eq!(code(&qgame(&["corr", "conjecture:5:2", "ed:4", "--seed", "7", "--out", path(out)])), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = qgame(&["reproduce", "--format", "json", "--out", path(out)]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn reproduce_prints_eleven_passing_lines() {
    let o = qgame(&["reproduce"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines.iter().all(|l| l.contains(" PASS ")), "{text}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&qgame(&["verify", path(&missing), path(&missing)])), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"shape":[2],"probabilities":[0.5,0.6]}"#).unwrap();
    let (g, _) = write_bimatrix(dir.path(), [[1.0, 0.0], [0.0, 1.0]], [[0.25; 2]; 2]);
    assert_eq!(code(&qgame(&["verify", &g, path(&bad)])), 2);
    assert_eq!(code(&qgame(&["construct", "nonsense"])), 2);
    assert_eq!(code(&qgame(&["verify", &g, path(&bad), "--tol", "-1"])), 2);
    assert_eq!(code(&qgame(&["corr", "ed:1"])), 2);
}

#[test]
fn non_ce_classical_verdict_exits_with_one() {
    let dir = tempdir().unwrap();
    let (g, d) = write_bimatrix(dir.path(), [[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.5], [0.5, 0.0]]);
    let o = qgame(&["verify", &g, &d]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["report"]["verdict"], Value::Bool(false));
}
