use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn carpet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carpet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = carpet(&full);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["schema"], 1);
    v
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn baranski_example_has_the_crossed_hypothesis() {
    let v = json(&["example-baranski", "--delta", "0.025", "dims"]);
    let dirs = v["dimensions"]["directions"].as_array().unwrap();
    assert_eq!(dirs.len(), 2);
    assert_eq!(dirs[0]["axis"], "horizontal");
    let d1 = dirs[0]["d"]["value"].as_f64().unwrap();
    let d2 = dirs[1]["d"]["value"].as_f64().unwrap();
    let a1 = dirs[0]["assouad_candidate"].as_f64().unwrap();
    let a2 = dirs[1]["assouad_candidate"].as_f64().unwrap();
    assert!(d1 < d2, "{d1} {d2}");
    assert!(a1 > a2, "{a1} {a2}");
    assert_eq!(v["dimensions"]["kind"], "Baranski");
}

#[test]
fn delta_accepts_fractions() {
    let a = json(&["example-baranski", "--delta", "1/40"]);
    let b = json(&["example-baranski"]);
    assert_eq!(a, b);
    assert_eq!(a["carpet"]["maps"].as_array().unwrap().len(), 12);
}

#[test]
fn gl_dimensions() {
    let v = json(&["dims", &data("gl_example.json")]);
    let d = &v["dimensions"];
    assert_eq!(d["kind"], "GatzourasLalley");
    assert!((d["dim_b"].as_f64().unwrap() - 1.0073513646).abs() < 1e-9);
    let order: Vec<f64> = ["dim_l", "dim_h", "dim_b", "dim_a"]
        .iter()
        .map(|k| d[k].as_f64().unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{order:?}");
}

#[test]
fn classify_reads_stdin() {
    use std::io::Write;
    let text = std::fs::read_to_string(data("product.json")).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_carpet"))
        .args(["--json", "classify", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["maps"], 4);
    assert_eq!(v["classification"]["interiors_disjoint"], true);
}

#[test]
fn boxcount_csv_rows() {
    let out = carpet(&["boxcount", &data("product.json"), "--min-k", "1", "--max-k", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["scale,count", "0.5,4", "0.25,16", "0.125,64", "0.0625,256"]);
}

#[test]
fn boxcount_json_has_a_regression() {
    let v = json(&["boxcount", &data("product.json"), "--max-k", "5"]);
    assert!((v["regression"]["slope"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn sequences_parse_in_both_forms() {
    let short = json(&[
        "fibre-dim",
        &data("gl_example.json"),
        "--gamma",
        "2|0,1,2",
        "--m-max",
        "512",
    ]);
    let long = json(&[
        "fibre-dim",
        &data("gl_example.json"),
        "--gamma",
        r#"{"preperiod":[2],"period":[0,1,2]}"#,
        "--m-max",
        "512",
    ]);
    assert_eq!(short, long);
    let f = &short["fibre"];
    let (est, lim, err) = (
        f["estimate"].as_f64().unwrap(),
        f["periodic_limit"].as_f64().unwrap(),
        f["error_bound"].as_f64().unwrap(),
    );
    assert!((est - lim).abs() <= err + 1e-12);
}

#[test]
fn pointwise_at_the_max_column_is_assouad() {
    let p = json(&["pointwise", &data("gl_example.json"), "--gamma", "0"]);
    let d = json(&["dims", &data("gl_example.json")]);
    let diff = p["pointwise"]["value"].as_f64().unwrap() - d["dimensions"]["dim_a"].as_f64().unwrap();
    assert!(diff.abs() < 1e-9, "{diff}");
}

#[test]
fn target_sequence_lands_near_alpha() {
    let v = json(&["target-seq", &data("gl_example.json"), "--alpha", "1.1"]);
    assert!((v["target"]["limit"].as_f64().unwrap() - 1.1).abs() < 0.01);
}

#[test]
fn tangent_writes_svg_with_the_same_distances() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("t.svg");
    let v = json(&[
        "tangent",
        &data("gl_example.json"),
        "--gamma",
        "1",
        "--n",
        "3",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    let doc = std::fs::read_to_string(&svg).unwrap();
    let meta = doc
        .split("<metadata>")
        .nth(1)
        .unwrap()
        .split("</metadata>")
        .next()
        .unwrap()
        .replace("&quot;", "\"");
    let meta: Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta, v["distances"]);
}

#[test]
fn local_count_is_one_row() {
    let out = carpet(&[
        "local",
        &data("gl_example.json"),
        "--gamma",
        "0",
        "--R",
        "0.01",
        "--r",
        "0.001",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "scale,count");
    assert!(lines[1].starts_with("0.001,"));
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for p in [&a, &b] {
        let out = carpet(&["example-baranski", "render", "--depth", "1", "-o", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().matches("<rect").count(), 1 + 12);
}

#[test]
fn render_spec_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let out = dir.path().join("out.svg");
    std::fs::write(
        &spec,
        format!(
            r#"{{"depth": 0, "highlights": [{{"kind": "word", "word": [1]}}], "output": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let res = carpet(&["render", &data("gl_example.json"), "--spec", spec.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let doc = std::fs::read_to_string(out).unwrap();
    assert!(doc.contains("highlights"));
}

#[test]
fn exit_codes() {
    let gl = data("gl_example.json");
    assert_eq!(carpet(&["dims", "no/such/file.json"]).status.code(), Some(1));
    assert_eq!(carpet(&["pointwise", &gl, "--gamma", "9"]).status.code(), Some(2));
    assert_eq!(
        carpet(&["local", &gl, "--gamma", "0", "--R", "0.01", "--r", "0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(carpet(&["target-seq", &gl, "--alpha", "3"]).status.code(), Some(2));
    assert_eq!(
        carpet(&["example-baranski", "tangent", "--gamma", "0", "--n", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(carpet(&["--budget", "10", "boxcount", &gl]).status.code(), Some(3));
    assert_eq!(
        carpet(&["--budget", "8", "render", &gl, "--depth", "2"]).status.code(),
        Some(3)
    );
    assert_eq!(carpet(&["dims"]).status.code(), Some(2));
}

#[test]
fn bad_carpets_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(
        &p,
        r#"{"maps":[{"a":"1/2","b":"1/4","dx":"3/4","dy":"0"},{"a":"1/2","b":"1/4","dx":"0","dy":"0"}]}"#,
    )
    .unwrap();
    let out = carpet(&["classify", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid map 0"));
}
