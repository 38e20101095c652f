use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dmspace"));
    c.env_remove("DMSPACE_OUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "failed: {}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn fixtures() -> TempDir {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "a.json",
        r#"{"schema_version": 1, "labels": ["a","b","c"],
            "dist": [[0, "1/2", "inf"], ["1/2", 0, "inf"], ["inf", "inf", 0]],
            "mass": ["1", 0.5, "1/3"]}"#,
    );
    write(
        dir.path(),
        "b.json",
        r#"{"schema_version": 1, "labels": ["p","q"], "dist": [[0, 0.5], [0.5, 0]], "mass": [1, "1/2"]}"#,
    );
    dir
}

#[test]
fn validate_reports_components_and_violations() {
    let dir = fixtures();
    let v = json(&run(dir.path(), &["validate", "a.json"]));
    assert_eq!(v["ok"], true);
    assert_eq!(v["components"], 2);

    write(dir.path(), "asym.json", r#"{"schema_version": 1, "labels": ["u","v"], "dist": [[0, 1], [2, 0]], "mass": [1, 1]}"#);
    let o = run(dir.path(), &["validate", "asym.json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["violations"][0]["invariant"], "symmetry");
    assert!(v["violations"][0]["detail"].as_str().unwrap().contains("d(u,v)"));

    let o = run(dir.path(), &["components", "asym.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("symmetry"), "{}", stderr(&o));
}

#[test]
fn infinite_cross_distances_split_components() {
    let dir = fixtures();
    let v = json(&run(dir.path(), &["components", "a.json"]));
    assert_eq!(v["count"], 2);
    assert_eq!(v["components"][1][0], "c");
    assert_eq!(v["masses"][0], "3/2");
}

#[test]
fn documents_are_checked() {
    let dir = fixtures();
    write(dir.path(), "v2.json", r#"{"schema_version": 2, "labels": [], "dist": [], "mass": []}"#);
    let o = run(dir.path(), &["validate", "v2.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unsupported schema version 2"));

    write(dir.path(), "broken.json", "{\"schema_version\": 1,\n \"labels\": [\"a\"\n");
    let o = run(dir.path(), &["validate", "broken.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    write(dir.path(), "badnum.json", r#"{"schema_version": 1, "labels": ["a","b"], "dist": [[0, "x"], ["x", 0]], "mass": [1, 1]}"#);
    let o = run(dir.path(), &["validate", "badnum.json"]);
    assert!(stderr(&o).contains("dist[0][1]"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    let dir = fixtures();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["rho", "a.json"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["degenerate", "--b2", "0.1,0.5"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["prokhorov", "a.json", "--nu", "1,1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["glue", "a.json", "b.json", "--pairs", "a=zz"]).status.code(), Some(2));
}

#[test]
fn save_and_load_round_trip() {
    let dir = fixtures();
    let first = run(dir.path(), &["limit", "a.json", "--tail", "1", "--save", "out.json"]);
    assert!(first.status.success());
    let again = run(dir.path(), &["limit", "out.json", "--tail", "1"]);
    assert_eq!(stdout(&first), stdout(&again));
    let v = json(&again);
    assert_eq!(v["mass"], serde_json::json!(["1", "1/2", "1/3"]));
    assert_eq!(v["dist"][0][2], "inf");
}

#[test]
fn prokhorov_matches_oracle() {
    let dir = fixtures();
    let v = json(&run(dir.path(), &["prokhorov", "a.json", "--nu", "1,1,0", "--oracle"]));
    assert_eq!(v["value"], "1/2");
    assert_eq!(v["oracle"]["agrees"], true);
    let v = json(&run(dir.path(), &["--float", "prokhorov", "a.json", "--mu", "1,0,0", "--nu", "0,1,0", "--oracle"]));
    assert_eq!(v["value"], 0.5);
    assert_eq!(v["oracle"]["agrees"], true);
}

#[test]
fn rho_is_deterministic_and_revalidated() {
    let dir = fixtures();
    let args = ["rho", "a.json", "b.json", "--budget", "default", "--seed", "7", "--witness-out", "w.json"];
    let first = run(dir.path(), &args);
    let w1 = std::fs::read(dir.path().join("w.json")).unwrap();
    let second = run(dir.path(), &args);
    let w2 = std::fs::read(dir.path().join("w.json")).unwrap();
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(w1, w2);
    let v = json(&first);
    assert_eq!(v["lower"], "1/3");
    assert_eq!(v["upper"], "1/3");
    assert_eq!(v["witness"]["provenance"]["kind"], "glued");
    let doc: serde_json::Value = serde_json::from_slice(&w1).unwrap();
    assert_eq!(doc["schema_version"], 1);

    let v = json(&run(dir.path(), &["--float", "rho", "a.json", "a.json"]));
    assert_eq!(v["upper"], 0.0);
}

#[test]
fn equivalence_and_gluing() {
    let dir = fixtures();
    write(
        dir.path(),
        "a2.json",
        r#"{"schema_version": 1, "labels": ["z","y","x","w"],
            "dist": [[0,"inf","inf","inf"],["inf",0,"1/2","inf"],["inf","1/2",0,"inf"],["inf","inf","inf",0]],
            "mass": ["1/3","1/2","1","0"]}"#,
    );
    let v = json(&run(dir.path(), &["equiv", "a.json", "a2.json"]));
    assert_eq!(v["equivalent"], true);
    assert_eq!(json(&run(dir.path(), &["equiv", "a.json", "b.json"]))["equivalent"], false);

    let v = json(&run(dir.path(), &["glue", "a.json", "b.json", "--pairs", "a=p,b=q", "--delta", "0", "--save", "g.json"]));
    assert_eq!(v["x_isometric"], true);
    assert_eq!(v["quotient_points"], 3);
    let q = json(&run(dir.path(), &["validate", "g.json"]));
    assert_eq!(q["points"], 3);
}

#[test]
fn approximation_and_certificates() {
    let dir = fixtures();
    let v = json(&run(dir.path(), &["approx", "a.json", "--eps", "1"]));
    assert_eq!(v["centers"], serde_json::json!(["a", "c"]));
    assert_eq!(v["prokhorov"], "1/2");

    write(dir.path(), "heavy.json", r#"{"schema_version": 1, "labels": ["h"], "dist": [[0]], "mass": [5]}"#);
    let v = json(&run(dir.path(), &["certify", "a.json", "heavy.json", "--eps", "1/2", "--cap", "2", "--ball", "1/3"]));
    assert_eq!(v["spaces"][0]["status"], "certified");
    assert_eq!(v["spaces"][1]["status"], "flagged");
}

#[test]
fn hexagon_and_pants() {
    let dir = fixtures();
    let v = json(&run(dir.path(), &["hexagon", "--b", "1,1,1", "--compare", "1,0,1"]));
    assert!((v["area"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9);
    let sd = &v["symmetric_difference"];
    assert!((sd["area"].as_f64().unwrap() - sd["closed_form"]["value"].as_f64().unwrap()).abs() < 1e-9);

    let v = json(&run(dir.path(), &["pants", "--lengths", "2,2,2", "--depth", "1", "--save", "p.json"]));
    assert!((v["total_mass"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    let back = json(&run(dir.path(), &["--float", "validate", "p.json"]));
    assert_eq!(back["points"], v["points"]);
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let head: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&head[..2], ["seed", "tolerance"]);
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn degenerate_table_is_nonincreasing() {
    let dir = fixtures();
    let o = run(dir.path(), &["degenerate", "--b2", "1,0.5,0.1,0.01", "--csv", "deg.csv"]);
    let v = json(&o);
    assert_eq!(v["nonincreasing"], true);
    let rows = csv_rows(&dir.path().join("deg.csv"));
    assert_eq!(rows.len(), 4);
    let upper: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(upper.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{upper:?}");
    assert!(rows.iter().all(|r| r[0] == "0"));
}

/// Default table name in the output directory.
fn csv_name(command: &str) -> String {
    let suite = match command {
        "certify" => "precompact",
        "degenerate" => "degeneration",
        other => other,
    };
    format!("{suite}.csv")
}

#[test]
fn suites_are_byte_identical_and_use_out_dir() {
    let dir = fixtures();
    let out = TempDir::new().unwrap();
    let suites: [&[&str]; 4] = [
        &["solenoid", "--degrees", "2,3,2", "--seed", "3"],
        &["collapse", "--seed", "3"],
        &["degenerate", "--b2", "1,0.1", "--depth", "1", "--seed", "3"],
        &["certify", "a.json", "b.json", "--eps", "1/2", "--cap", "2", "--ball", "1/3", "--seed", "3"],
    ];
    for args in suites {
        let mut snapshots = Vec::new();
        for _ in 0..2 {
            let o = bin().current_dir(dir.path()).env("DMSPACE_OUT_DIR", out.path()).args(args).output().unwrap();
            assert!(o.status.success(), "{args:?}: {}", stderr(&o));
            let csv = std::fs::read(out.path().join(csv_name(args[0]))).unwrap();
            snapshots.push((o.stdout, csv));
        }
        assert_eq!(snapshots[0], snapshots[1], "{args:?}");
        let rows = csv_rows(&out.path().join(csv_name(args[0])));
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r[0] == "3"), "{args:?}");
    }
}
