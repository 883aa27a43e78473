use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn permwit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permwit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn witness_reports_indecomposable_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = permwit(
        &[
            "witness", "--n", "4", "--t", "1", "--perm", "2,3,1,4", "--out", "w.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("w.json")).unwrap();
    assert!(text.contains(
        r#""metadata":{"n":4,"t":1.0,"perm":[2,3,1,4],"t_max":1.3333333333333333,"verdict":"indecomposable"}"#
    ));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["dim_a"], 4);
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
}

#[test]
fn witness_for_involution_embeds_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let out = permwit(
        &[
            "witness", "--n", "4", "--t", "1", "--perm", "2,1,4,3", "--out", "w.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("w.json"));
    assert_eq!(v["metadata"]["verdict"], "decomposable");
    assert_eq!(v["decomposition"]["q1_psd"], true);
    assert_eq!(v["decomposition"]["q2_pt_psd"], true);
    assert_eq!(v["decomposition"]["sum_matches"], true);
}

#[test]
fn witness_rejects_out_of_range_t() {
    let dir = tempfile::tempdir().unwrap();
    let out = permwit(
        &["witness", "--n", "4", "--t", "0", "--perm", "2,3,1,4"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("t must satisfy 0 < t ≤ 4/3"),
        "{}",
        stderr(&out)
    );

    let out = permwit(
        &["witness", "--n", "4", "--t", "2", "--perm", "2,3,1,4"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("t=2 exceeds t_max=4/3"));

    let out = permwit(
        &["witness", "--n", "3", "--t", "1", "--perm", "1,2,3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn detect_flags_rho_x_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        permwit(&["state", "rhox", "--x", "0.1", "--out", "r.json"], d)
            .status
            .code(),
        Some(0)
    );
    permwit(
        &[
            "witness", "--n", "4", "--t", "1", "--perm", "2,3,1,4", "--out", "w.json",
        ],
        d,
    );
    let out = permwit(
        &[
            "detect",
            "--state",
            "r.json",
            "--witness",
            "w.json",
            "--out",
            "report.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let v = json(&d.join("report.json"));
    assert_eq!(v["verdicts"]["map"], "entangled");
    assert_eq!(v["verdicts"]["ppt"], "inconclusive");
    assert!(v["map_min_eig"].as_f64().unwrap() < 0.0);
}

#[test]
fn detect_on_maximally_mixed_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = Vec::new();
    for r in 0..9 {
        let row: Vec<String> = (0..9)
            .map(|s| {
                if r == s {
                    "[0.1111111111111111,0]".to_string()
                } else {
                    "[0,0]".to_string()
                }
            })
            .collect();
        rows.push(format!("[{}]", row.join(",")));
    }
    let text = format!(r#"{{"dim_a":3,"dim_b":3,"rows":[{}]}}"#, rows.join(","));
    fs::write(dir.path().join("mm.json"), text).unwrap();
    let out = permwit(&["detect", "--state", "mm.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for name in ["witness", "map", "ppt", "ccnr", "cov"] {
        assert_eq!(v["verdicts"][name], "inconclusive");
    }
    assert!(v["witness_value"].is_null());
}

#[test]
fn detect_reports_io_errors_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = permwit(&["detect", "--state", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    fs::write(dir.path().join("bad.json"), "{\"dim_a\":2}").unwrap();
    assert_eq!(
        permwit(&["detect", "--state", "bad.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn decompose_checks_pass_for_transposition() {
    let dir = tempfile::tempdir().unwrap();
    let out = permwit(
        &["decompose", "--n", "3", "--t", "1", "--perm", "2,1,3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["q1_psd"], true);
    assert_eq!(v["q2_pt_psd"], true);
    assert_eq!(v["sum_matches"], true);
    let out = permwit(
        &["decompose", "--n", "3", "--t", "1", "--perm", "2,3,1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn state_commands_round_trip_weights() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("q.json"), r#"{"q0":0.24615384615384617,"q":{"1":[0.24615384615384617,0.13846153846153847]},"q_tilde":0.36923076923076925}"#).unwrap();
    let out = permwit(
        &[
            "state",
            "theorem21",
            "--n",
            "4",
            "--perm",
            "2,3,1,4",
            "--weights",
            "q.json",
            "--out",
            "a.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = permwit(
        &[
            "state",
            "theorem21",
            "--n",
            "4",
            "--perm",
            "2,3,1,4",
            "--canonical",
            "--out",
            "b.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(0));
    let (a, b) = (json(&d.join("a.json")), json(&d.join("b.json")));
    let diff = a["rows"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .zip(
            b["rows"]
                .as_array()
                .unwrap()
                .iter()
                .flat_map(|r| r.as_array().unwrap()),
        )
        .map(|(x, y)| (x[0].as_f64().unwrap() - y[0].as_f64().unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-15);
    let out = permwit(&["state", "theorem21", "--n", "4", "--perm", "2,3,1,4"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "sweep", "--x-min", "0", "--x-max", "2", "--steps", "201", "--t", "1",
    ];
    let first = permwit(&args, d);
    let second = permwit(&args, d);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("x,ccnr_norm,ccnr_closed_form,ppt_min_eig,map_min_eig,cov_slack")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 201);
    assert!((rows[0][1] - 0.7665680).abs() < 1e-7);
    for r in &rows {
        assert!(r[1] < 0.8 && r[5] < -0.2);
        if r[0] < 9.0 / 160.0 {
            assert!(r[3] < 0.0);
        } else if r[0] > 9.0 / 160.0 && r[0] < 0.75 {
            assert!(r[3] >= -1e-10 && r[4] < 0.0);
        }
    }
    assert_eq!(
        permwit(
            &["sweep", "--x-min", "1", "--x-max", "0", "--steps", "5"],
            d
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        permwit(
            &["sweep", "--x-min", "0", "--x-max", "1", "--steps", "1"],
            d
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn check_positivity_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "check-positivity",
        "--n",
        "4",
        "--t",
        "1.3833333333333333",
        "--perm",
        "2,3,1,4",
        "--samples",
        "500",
        "--seed",
        "3",
        "--restarts",
        "32",
    ];
    let first = permwit(&args, dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(first.stdout, permwit(&args, dir.path()).stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["block_positive"], false);
    assert!(v["min_value"].as_f64().unwrap() < -1e-4);

    let ok = permwit(
        &[
            "check-positivity",
            "--n",
            "4",
            "--t",
            "1",
            "--perm",
            "2,3,1,4",
            "--samples",
            "500",
            "--seed",
            "3",
        ],
        dir.path(),
    );
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["block_positive"], true);

    let no_seed = permwit(
        &[
            "check-positivity",
            "--n",
            "4",
            "--t",
            "1",
            "--perm",
            "2,3,1,4",
            "--samples",
            "5",
        ],
        dir.path(),
    );
    assert_eq!(no_seed.status.code(), Some(2));
}
