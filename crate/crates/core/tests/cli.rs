use std::process::{Command, Output};

fn vex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vex"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("VEX_GRID_DEPTH")
        .args(args)
        .output()
        .expect("vex runs")
}

fn code(args: &[&str]) -> i32 {
    vex(args).status.code().expect("exit code")
}

fn stdout_json(args: &[&str]) -> serde_json::Value {
    serde_json::from_slice(&vex(args).stdout).expect("json on stdout")
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&["check", "-p", "data/f4.json", "--property", "approx-stationary"]), 0);
    assert_eq!(code(&["check", "-p", "data/f4.json", "--property", "stationary"]), 10);
    assert_eq!(code(&["check", "-p", "missing.json", "--property", "stationary"]), 2);
    assert_eq!(code(&["check", "-p", "data/f4.json", "--property", "sideways"]), 2);
    assert_eq!(code(&["check", "-p", "bundled:f1.json", "--property", "extremal"]), 0);
}

#[test]
fn input_errors_are_distinguished() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = vex(&["check", "-p", bad.to_str().unwrap(), "--property", "extremal"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));

    let infeasible = dir.path().join("infeasible.json");
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/f4.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["refpoint"]["y"] = serde_json::json!(["-1"]);
    std::fs::write(&infeasible, v.to_string()).unwrap();
    let o = vex(&["check", "-p", infeasible.to_str().unwrap(), "--property", "extremal"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed input"));
}

#[test]
fn coderivative_of_f4() {
    let v = stdout_json(&["coderivative", "-p", "data/f4.json", "--x", "1/200", "--y", "-1/40000", "--y-star", "1"]);
    assert_eq!(v["value"], serde_json::json!({ "kind": "point", "point": ["-1/100"] }));
}

#[test]
fn clarke_cone_at_the_f4_kink() {
    let v = stdout_json(&["cones", "-p", "data/f4.json", "--flavor", "clarke"]);
    assert_eq!(v["normal_cone"]["generators"], serde_json::json!([["1", "-1"], ["0", "-1"]]));
}

#[test]
fn multiplier_certificate_accept_and_reject() {
    let args = ["verify-cert", "-p", "data/f4.json", "--cert", "data/f4-multiplier-cert.json"];
    assert_eq!(code(&args), 0);
    assert_eq!(code(&[&args[..], &["--eps", "1/200"]].concat()), 10);
}

#[test]
fn emitted_certificate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["fuzzy-separation", "multiplier-rule"] {
        let cert = dir.path().join(format!("{kind}.json"));
        let c = cert.to_str().unwrap();
        assert_eq!(code(&["certify", "-p", "data/f4.json", "--kind", kind, "--eps", "1/8", "--out", c]), 0);
        assert_eq!(code(&["verify-cert", "-p", "data/f4.json", "--cert", c]), 0);
    }
}

#[test]
fn qc_and_aubin() {
    assert_eq!(code(&["qc", "-p", "data/identity-on-ray.json"]), 0);
    assert_eq!(code(&["qc", "-p", "data/point-graph.json"]), 10);
    let v = stdout_json(&["aubin", "-p", "data/f4.json", "--delta", "1/4"]);
    assert_eq!(v["tau_upper"], "1");
    assert_eq!(v["audit_passed"], true);
}

#[test]
fn levelset_reports() {
    let v = stdout_json(&["levelset", "-p", "data/singleton-map.json"]);
    assert_eq!(v["properties"]["o1"]["verdict"], "fails-with-witness");
    assert_eq!(v["properties"]["o4"]["verdict"], "holds-on-grid");
}

#[test]
fn corpus_filter_stub_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = out.to_str().unwrap().to_string();
        let m = format!("{o}/manifest.json");
        assert_eq!(code(&["corpus", "--out", &o, "--manifest", &m]), 0);
        out
    };
    let (a, b) = (run("a"), run("b"));
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 14);
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n:?}");
    }

    let v = stdout_json(&["corpus", "--filter", "o-properties"]);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 2);
    assert!(cases.iter().all(|c| c["tag"] == "o-properties"));

    let o = vex(&["corpus", "--stub-cones"]);
    assert_ne!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = v["cases"].as_array().unwrap().iter().find(|c| c["pass"] == false).unwrap();
    assert_eq!(first["tag"], "example-3.3");
}
