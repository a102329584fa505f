use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-relax"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const DIAMOND: &str =
    r#"{"K": {"type": "norm_sphere", "norm": "l1", "radius": 1}, "p": 2, "q": 1, "grid": {"lo": -2, "hi": 2, "n": 41}}"#;
const SQUARE: &str = r#"{"K": {"type": "cartesian", "A": [-1, 1]}, "p": 2, "q": 2, "grid": {"lo": -2, "hi": 2, "n": 41}}"#;

/// Rows of a mask CSV as (xi, zeta, bit).
fn mask_rows(path: &Path) -> Vec<(f64, f64, u8)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,zeta,value"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn every_preset_verifies() {
    for preset in ["four-well", "diamond-boundary", "five-point", "cartesian", "indicator"] {
        let out = run(&["verify", preset]);
        assert_eq!(out.status.code(), Some(0), "{preset}: {}", String::from_utf8_lossy(&out.stderr));
        let r = json(&out);
        assert_eq!(r["passed"], true, "{preset}");
        assert_eq!(r["preset"], preset);
    }
}

#[test]
fn four_well_and_diamond_report_expected_numbers() {
    let r = json(&run(&["verify", "four-well"]));
    let f = &r["findings"][0]["detail"];
    assert_eq!((f["min_w"].as_f64(), f["min_w_hat"].as_f64()), (Some(0.0), Some(1.0)));

    let r = json(&run(&["verify", "diamond-boundary", "--fraction", "0.5"]));
    let gap = r["findings"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["name"].as_str().unwrap().starts_with("gap"))
        .unwrap();
    let per_n = gap["detail"]["per_n"].as_array().unwrap();
    for row in per_n {
        // target value of the two-valued limit is 1/4
        let total = row["minimum"].as_f64().unwrap();
        assert!((total - row["delta"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
    assert!(gap["detail"]["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "d.json", DIAMOND);
    let mut snapshots = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = out.to_str().unwrap();
        assert_eq!(run(&["envelope", &sc, "--out", o]).status.code(), Some(0));
        assert_eq!(run(&["sets", &sc, "--out", o]).status.code(), Some(0));
        assert_eq!(run(&["check", &sc, "--condition", "ness", "--out", o]).status.code(), Some(0));
        let m = run(&["minimize", &sc, "--pieces", "4", "--mean", "0.25"]);
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        let mut snap: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
            .collect();
        snap.push(("minimize".into(), m.stdout));
        snapshots.push(snap);
    }
    assert!(snapshots[0].len() >= 12);
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn envelope_writes_all_grids() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "d.json", DIAMOND);
    let out = dir.path().join("env");
    let o = run(&["envelope", &sc, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["w", "w_co", "w_sc", "w_slc", "w_hat"] {
        let text = std::fs::read_to_string(out.join(format!("{name}.csv"))).unwrap();
        assert!(text.starts_with("xi,zeta,value\n"));
        assert_eq!(text.lines().count(), 1 + 41 * 41);
    }
    let s = json(&o);
    assert_eq!(s["minima"]["w_hat"]["value"], 0.0);
    assert_eq!(s["sc_equals_co_check"]["k_sc_equals_k_co"], true);
    assert_eq!(s["sc_equals_co_check"]["consistent"], true);
    // W at the corner (-2, -2): l1 distance to the diamond is 3
    let first = std::fs::read_to_string(out.join("w.csv")).unwrap();
    let row: Vec<f64> = first.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row, vec![-2.0, -2.0, 9.0]);
}

#[test]
fn sets_on_a_square_relax_to_the_hull_square() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", SQUARE);
    let out = dir.path().join("sets");
    let o = run(&["sets", &sc, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let inside = |x: f64, y: f64| x.abs() <= 1.0 + 1e-12 && y.abs() <= 1.0 + 1e-12;
    for name in ["k_rlx", "k_co", "k_sc"] {
        for (x, y, b) in mask_rows(&out.join(format!("{name}.csv"))) {
            assert_eq!(b == 1, inside(x, y), "{name} at ({x}, {y})");
        }
    }
    let k: Vec<_> = mask_rows(&out.join("k.csv")).into_iter().filter(|r| r.2 == 1).collect();
    assert_eq!(k.len(), 4);
    let pieces: Value = serde_json::from_str(&std::fs::read_to_string(out.join("pieces.json")).unwrap()).unwrap();
    assert_eq!(pieces[0]["values"], serde_json::json!([-1.0, 1.0]));
}

#[test]
fn minimize_respects_the_mean() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "d.json", DIAMOND);
    let r = json(&run(&["minimize", &sc, "--pieces", "3", "--mean", "0.3"]));
    let v: Vec<f64> = r["best_field"]["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(v.len(), 3);
    let mean = v.iter().sum::<f64>() / 3.0;
    assert!((mean - 0.3).abs() <= 0.05 + 1e-12, "{v:?}");
    assert!(r["best_value"].as_f64().unwrap() >= r["lower_bound"].as_f64().unwrap());

    // without a constraint constant fields reach min W-hat
    let r = json(&run(&["minimize", &sc, "--pieces", "3"]));
    assert!(r["best_value"].as_f64().unwrap() <= r["upper_bound"].as_f64().unwrap() + 1e-12);
}

#[test]
fn check_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let five = write(
        dir.path(),
        "five.json",
        r#"{"K": {"type": "points", "points": [[1,0],[-1,0],[0,1],[0,-1],[2,2]]}, "p": 2, "q": 2, "grid": {"lo": -3, "hi": 3, "n": 61}}"#,
    );
    let out = dir.path().join("c");
    let o = run(&["check", &five, "--condition", "ness", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["verdict"], "fails");
    assert!(!r["differing_cells"].as_array().unwrap().is_empty());
    let diff: usize = mask_rows(&out.join("difference.csv")).iter().map(|r| r.2 as usize).sum();
    assert_eq!(diff, r["differing_cells"].as_array().unwrap().len());

    let four = write(
        dir.path(),
        "four.json",
        r#"{"K": {"type": "points", "points": [[1,0],[-1,0],[0,1],[0,-1]]}, "p": 1, "q": 2}"#,
    );
    let r = json(&run(&["check", &four, "--condition", "minhat", "--out", out.to_str().unwrap()]));
    assert_eq!(r["report"]["verdict"], "fails");
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("{\n  \"K\": {\"type\": \"points\"}\n}", "line 3"),
        ("{\n  \"K\": ,\n}", "line 2"),
        (r#"{"K": {"type": "cartesian", "A": [1]}, "extra": 0}"#, "extra"),
        (r#"{"K": {"type": "cartesian", "A": [1]}, "q": "two"}"#, "\"q\""),
        (r#"{"K": {"type": "norm_sphere", "norm": "l3", "radius": 1}}"#, "K.norm"),
        (r#"{"K": {"type": "cartesian", "A": [1]}, "grid": {"lo": 2, "hi": 1, "n": 9}}"#, "grid"),
    ];
    for (k, (text, needle)) in cases.iter().enumerate() {
        let p = write(dir.path(), &format!("bad{k}.json"), text);
        let o = run(&["sets", &p, "--out", dir.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{text}: {err}");
    }
    assert_eq!(run(&["verify", "no-such-preset"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let ok = write(dir.path(), "ok.json", DIAMOND);
    let o = run(&["minimize", &ok, "--pieces", "2", "--mean", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["verify", "cartesian"]).env("NONLOCAL_RELAX_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["verify", "cartesian"]).env("NONLOCAL_RELAX_THREADS", "2").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn export_plot_reshapes_grids() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.csv", "xi,zeta,value\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n2,0,5\n2,1,6\n");
    let long = dir.path().join("long.dat");
    let o = run(&["export-plot", &g, "--out", long.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&long).unwrap();
    let blocks: Vec<&str> = text.trim_end().split("\n\n").collect();
    assert_eq!(blocks.len(), 3);
    let last: Vec<f64> = blocks[2].lines().last().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last, vec![2.0, 1.0, 6.0]);

    let o = run(&["export-plot", &g, "--layout", "matrix"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2][2].parse::<f64>().unwrap(), 4.0);

    let bad = write(dir.path(), "bad.csv", "xi,zeta,value\n0,0,1\n0,1,2\n1,1,3\n");
    let o = run(&["export-plot", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let bad = write(dir.path(), "bad2.csv", "x,y,z\n");
    assert_eq!(run(&["export-plot", &bad]).status.code(), Some(2));
}
