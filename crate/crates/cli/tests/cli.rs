use serde_json::Value;
use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn isoval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoval")).args(args).env_remove("ISOVAL_GRID_LEVEL").output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = isoval(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn op<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["operators"].as_array().unwrap().iter().find(|o| o["operator"] == name).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn compute_cube() {
    let r = json(&["compute", "--body", "cube", "--measure", "discrete:0.5", "--p", "1"]);
    assert_eq!(r["schema"], "isoval/1");
    assert_eq!(r["seed"], 0);
    for name in ["pi", "phi_mu"] {
        assert!((f(&op(&r, name)["polar_volume"]) - 4.0 / 3.0).abs() < 1e-5);
    }
}

#[test]
fn compute_ball_fields_are_constant() {
    // equatorial and lebesgue measures of mass ½ both send the ball to πB
    for m in ["equatorial:0.5", "lebesgue:0.5"] {
        let r = json(&["compute", "--body", "ball:1", "--measure", m]);
        let field = &op(&r, "phi_mu")["field"];
        assert!((f(&field["min"]) - PI).abs() < 1e-7 && (f(&field["max"]) - PI).abs() < 1e-7, "{m}: {field}");
    }
}

#[test]
fn verify_thm2_is_clean() {
    let r = json(&["verify", "thm2", "--trials", "200", "--seed", "42"]);
    assert_eq!(r["summary"]["violations"], 0);
    assert_eq!(r["summary"]["records"], 200 * 4 * 2);
    assert_eq!(r["seed"], 42);
}

#[test]
fn verify_lemma41_residuals() {
    let r = json(&["verify", "lemma41", "--trials", "50", "--seed", "7"]);
    assert_eq!(r["summary"]["violations"], 0);
    assert!(f(&r["summary"]["max_equality_residual"]) <= 1e-6);
}

#[test]
fn verify_flags_ball_equality() {
    let r = json(&["verify", "thm1", "--body", "ball:1", "--measure", "equatorial:0.5", "--trials", "1"]);
    let t = &r["trials"][0];
    assert_eq!(t["equality_expected"], true);
    assert!(f(&t["margin"]).abs() <= 1e-6);
}

#[test]
fn sobolev_char_ball() {
    let r = json(&["sobolev", "char", "--body", "ball:1", "--measure", "discrete:0.5"]);
    let z = (2.0 * PI * PI).cbrt();
    assert!((f(&r["sobolev_zhang"]["lhs"]) - z).abs() < 1e-5);
    assert!((f(&r["sobolev_zhang"]["rhs"]) - z).abs() < 1e-5);
    assert!((f(&r["lhs"]) - f(&r["rhs"])).abs() < 1e-5);
}

#[test]
fn sobolev_grid_aubin_talenti() {
    let r = json(&["sobolev", "grid", "--profile", "aubin-talenti", "--p", "2", "--measure", "lebesgue:1"]);
    assert!((f(&r["ratio"]) - 1.0).abs() <= 0.05, "{}", r["ratio"]);
}

#[test]
fn raster_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("g.grid");
    let raster = raster.to_str().unwrap();
    let common = ["--profile", "gaussian", "--p", "1.5", "--measure", "equatorial:0.5", "--points", "33", "--box", "4"];
    let a = json(&[&["sobolev", "grid", "--save", raster][..], &common[..]].concat());
    let b = json(&["sobolev", "grid", "--input", raster, "--p", "1.5", "--measure", "equatorial:0.5"]);
    assert_eq!(a["lhs"], b["lhs"]);
    assert_eq!(a["rhs"], b["rhs"]);
}

#[test]
fn extremize_trajectory() {
    let out = isoval(&["extremize", "--measure", "equatorial:0.5", "--start", "ellipsoid:2,1,0.5", "--seed", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rd.headers().unwrap(), vec!["step", "a1", "a2", "a3", "product", "body"]);
    let products: Vec<f64> = rd.records().map(|r| r.unwrap()[4].parse().unwrap()).collect();
    assert!(products.windows(2).all(|w| w[1] >= w[0]));
    assert!((products.last().unwrap() - 64.0 / 27.0).abs() < 1e-4);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn output_bytes_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.csv");
    let d = dir.path().join("d.csv");
    for (path, jobs, fmt) in [(&a, "1", "json"), (&b, "3", "json"), (&c, "1", "csv"), (&d, "2", "csv")] {
        let out = isoval(&["verify", "thm52", "--trials", "6", "--seed", "9", "--grid-level", "8", "--jobs", jobs, "--format", fmt, "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&c), read(&d));
    assert!(String::from_utf8(read(&c)).unwrap().starts_with("trial,check,body,mu,p,lhs,bound,margin,equality_expected,pass"));
}

#[test]
fn grid_level_from_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_isoval"));
        cmd.args(args).env_remove("ISOVAL_GRID_LEVEL");
        if let Some(l) = env {
            cmd.env("ISOVAL_GRID_LEVEL", l);
        }
        String::from_utf8(cmd.output().unwrap().stdout).unwrap().lines().count() - 1
    };
    assert_eq!(run(Some("3"), &["grid"]), 6 * 12);
    assert_eq!(run(Some("3"), &["grid", "--grid-level", "2"]), 4 * 8);
    assert_eq!(run(None, &["grid"]), 64 * 128);
}

#[test]
fn hull_files() {
    let dir = tempfile::tempdir().unwrap();
    let js = dir.path().join("cube.json");
    let off = dir.path().join("cube.off");
    let mut verts = Vec::new();
    for x in [-0.5, 0.5] {
        for y in [-0.5, 0.5] {
            for z in [-0.5, 0.5] {
                verts.push([x, y, z]);
            }
        }
    }
    std::fs::write(&js, serde_json::json!({ "vertices": verts }).to_string()).unwrap();
    let rows: Vec<String> = verts.iter().map(|v| format!("{} {} {}", v[0], v[1], v[2])).collect();
    std::fs::write(&off, format!("OFF\n8 0 0\n{}\n", rows.join("\n"))).unwrap();
    for path in [&js, &off] {
        let body = format!("hull:@{}", path.display());
        let r = json(&["compute", "--body", &body, "--measure", "discrete:0.5", "--grid-level", "8"]);
        assert!((f(&op(&r, "pi")["polar_volume"]) - 4.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn measure_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("mu.json");
    std::fs::write(&m, r#"{"kind": "custom", "mass": 0.5, "density_samples": [[0.0, 1.0], [0.5, 1.0], [1.0, 1.0]]}"#).unwrap();
    let spec = format!("@{}", m.display());
    let r = json(&["compute", "--body", "ball:1", "--measure", &spec, "--grid-level", "8"]);
    // a constant density is the Lebesgue measure
    assert!((f(&op(&r, "phi_mu")["field"]["mean"]) - PI).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    assert_eq!(isoval(&["compute", "--body", "blob", "--measure", "discrete:0.5"]).status.code(), Some(2));
    assert_eq!(isoval(&["compute", "--body", "cube", "--measure", "discrete:zero"]).status.code(), Some(2));
    assert_eq!(isoval(&["verify", "thm9"]).status.code(), Some(2));
    assert_eq!(isoval(&["compute", "--body", "cube"]).status.code(), Some(2));
    assert_eq!(isoval(&["verify", "thm1", "--trials", "1", "--grid-level", "0"]).status.code(), Some(2));
    // a NaN sample is a numeric failure, not a malformed request
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("nan.grid");
    let mut bytes = br#"{"schema":"isoval/1","dims":[3,3,3],"box":[[-1.0,1.0],[-1.0,1.0],[-1.0,1.0]],"spacing":1.0}"#.to_vec();
    bytes.push(b'\n');
    for i in 0..27 {
        bytes.extend_from_slice(&(if i == 13 { f64::NAN } else { 0.0 }).to_le_bytes());
    }
    std::fs::write(&raster, bytes).unwrap();
    let out = isoval(&["sobolev", "grid", "--input", raster.to_str().unwrap(), "--measure", "lebesgue:1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
