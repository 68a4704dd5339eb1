use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bbcool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbcool")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn synth_file(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut full = vec!["synthesize"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--output", path.to_str().unwrap()]);
    assert!(bbcool(&full).status.success());
    path
}

/// Optimal turn count per target from a JSON times table.
fn optimal_by_gamma(doc: &Value) -> BTreeMap<u64, u32> {
    let mut best: BTreeMap<u64, (u32, f64)> = BTreeMap::new();
    for r in doc["rows"].as_array().unwrap() {
        let Some(t) = r["T"].as_f64() else { continue };
        let g = r["gamma"].as_f64().unwrap().to_bits();
        let n = r["n"].as_u64().unwrap() as u32;
        let e = best.entry(g).or_insert((n, t));
        if t < e.1 - 1e-12 {
            *e = (n, t);
        }
    }
    best.into_iter().map(|(g, (n, _))| (g, n)).collect()
}

#[test]
fn synthesize_symmetric_bounds() {
    let out = bbcool(&["synthesize", "--u1", "1", "--u2", "1", "--gamma", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["optimal_n"], 0);
    assert!((v["total_time"].as_f64().unwrap() - (2f64.ln() + PI / 4.0)).abs() < 1e-12);
    assert_eq!(v["arcs"].as_array().unwrap().len(), 2);
}

#[test]
fn synthesize_one_turn() {
    let v = json(&bbcool(&["synthesize", "--u1", "1", "--u2", "8", "--gamma", "9"]));
    assert_eq!(v["optimal_n"], 1);
    assert_eq!(v["arcs"].as_array().unwrap().len(), 3);
    assert_eq!(v["boundary_jumps"]["u0"].as_f64().unwrap(), 1.0);
    assert_eq!(v["boundary_jumps"]["uT"].as_f64().unwrap(), 1.0 / 6561.0);
}

#[test]
fn synthesize_csv() {
    let out = bbcool(&["synthesize", "--u1", "1", "--u2", "8", "--gamma", "9", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,control,value,duration,start_x1,start_x2,end_x1,end_x2");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,Y,8.0000000000000000e0,"));
}

#[test]
fn times_sweep_csv() {
    let out = bbcool(&["times", "--u1", "1", "--u2", "8", "--gamma-range", "1.05:10:200"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,n,feasible,s,T"));
    let mut gammas: Vec<String> = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 5);
        if cells[1] == "0" {
            gammas.push(cells[0].to_string());
            assert_eq!(cells[2], "true");
        }
        if cells[2] == "false" {
            assert!(cells[3].is_empty() && cells[4].is_empty());
        }
    }
    assert_eq!(gammas.len(), 200);
    assert_eq!(gammas[0].parse::<f64>().unwrap(), 1.05);
    assert_eq!(gammas[199].parse::<f64>().unwrap(), 10.0);
}

#[test]
fn times_without_spiral_interval() {
    let text = String::from_utf8(bbcool(&["times", "--u1", "1", "--u2", "2", "--gamma", "3"]).stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains(",0,true,,"));
}

#[test]
fn times_regimes_for_u2_50() {
    let v = json(&bbcool(&[
        "times", "--u1", "1", "--u2", "50", "--gamma-range", "1.05:15:300", "--format", "json",
    ]));
    let seq: Vec<u32> = optimal_by_gamma(&v).into_values().collect();
    let mut regimes = seq.clone();
    regimes.dedup();
    assert_eq!(regimes, vec![0, 1, 2]);
    let far = json(&bbcool(&["synthesize", "--u1", "1", "--u2", "50", "--gamma", "50"]));
    assert_eq!(far["optimal_n"], 3);
}

#[test]
fn n_max_override_limits_rows() {
    let v = json(&bbcool(&["times", "--u1", "1", "--u2", "8", "--gamma", "9", "--n-max", "0", "--format", "json"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn invalid_flags_exit_2() {
    for args in [
        vec!["synthesize", "--u1", "0.5", "--u2", "8", "--gamma", "2"],
        vec!["synthesize", "--u1", "1", "--u2", "8", "--gamma", "1"],
        vec!["synthesize", "--u1", "1", "--u2", "8", "--gamma", "2", "--tol", "0"],
        vec!["synthesize", "--u1", "1", "--u2", "8", "--gamma", "2", "--step", "-1"],
        vec!["synthesize", "--u1", "1", "--u2", "8"],
        vec!["synthesize", "--u2", "8", "--gamma", "2"],
        vec!["times", "--u1", "1", "--u2", "8", "--gamma-range", "3:2:10"],
        vec!["times", "--u1", "1", "--u2", "8", "--gamma-range", "abc"],
        vec!["times", "--u1", "1", "--u2", "8", "--gamma", "2", "--format", "xml"],
        vec!["frobnicate"],
    ] {
        let out = bbcool(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unreachable_tolerance_exits_3() {
    let out = bbcool(&["synthesize", "--u1", "1", "--u2", "8", "--gamma", "9", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth_file(dir.path(), "s.json", &["--u1", "1", "--u2", "8", "--gamma", "9"]);
    let out = bbcool(&["verify", "--schedule", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["pmp"]["phi_sign_violations"], 0);
    assert!(v["pmp"]["max_abs_H"].as_f64().unwrap() <= 1e-6);

    // synthesizing from flags gives the same report
    let direct = bbcool(&["verify", "--u1", "1", "--u2", "8", "--gamma", "9"]);
    assert_eq!(direct.stdout, out.stdout);
}

#[test]
fn verify_flags_edited_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth_file(dir.path(), "s.json", &["--u1", "1", "--u2", "8", "--gamma", "9"]);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();

    let mut bad = doc.clone();
    let d = bad["arcs"][1]["duration"].as_f64().unwrap();
    bad["arcs"][1]["duration"] = Value::from(d + 1e-2);
    let p = dir.path().join("bad.json");
    fs::write(&p, bad.to_string()).unwrap();
    let out = bbcool(&["verify", "--schedule", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(json(&out)["pmp"]["endpoint_error"].as_f64().unwrap() >= 1e-3);

    let mut repeated = doc.clone();
    repeated["arcs"][1]["control"] = Value::from("Y");
    repeated["arcs"][1]["value"] = Value::from(8.0);
    fs::write(&p, repeated.to_string()).unwrap();
    assert_eq!(bbcool(&["verify", "--schedule", p.to_str().unwrap()]).status.code(), Some(2));

    fs::write(&p, "{ not json").unwrap();
    assert_eq!(bbcool(&["verify", "--schedule", p.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(bbcool(&["verify", "--schedule", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic_with_meta_record() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--u1", "1", "--u2", "50", "--gamma", "12"];
    let a = synth_file(dir.path(), "a.json", &args);
    let b = synth_file(dir.path(), "b.json", &args);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["schema"], "bbcool/1");
    assert_eq!(meta["command"], "synthesize");
    assert_eq!(meta["files"][0], "a.json");

    let t1 = bbcool(&["times", "--u1", "1", "--u2", "8", "--gamma-range", "1.05:10:50"]);
    let t2 = bbcool(&["times", "--u1", "1", "--u2", "8", "--gamma-range", "1.05:10:50"]);
    assert_eq!(t1.stdout, t2.stdout);
}

#[test]
fn curves_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("curves");
    let o = out_dir.to_str().unwrap();
    let run = bbcool(&[
        "curves", "--u1", "1", "--u2", "8", "--gamma-range", "1.1:10:60", "--resolution", "30", "--output", o,
        "--overlay", "2,9",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let mut names: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "curves.meta.json",
            "n1_switch1_1.csv",
            "n1_switch2_2.csv",
            "trajectory_0.csv",
            "trajectory_1.csv",
            "zero_turn_x_arc_0.csv"
        ]
    );
    let arc = fs::read_to_string(out_dir.join("zero_turn_x_arc_0.csv")).unwrap();
    assert_eq!(arc.lines().count(), 31);
    let traj = fs::read_to_string(out_dir.join("trajectory_1.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 3 * 30);
}

#[test]
fn curves_zero_turn_range_without_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("c");
    let run = bbcool(&[
        "curves", "--u1", "1", "--u2", "8", "--gamma-range", "1.05:3:20", "--output", o.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let mut names: Vec<String> =
        fs::read_dir(&o).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["curves.meta.json", "zero_turn_x_arc_0.csv"]);

    let j = dir.path().join("j");
    let run = bbcool(&[
        "curves", "--u1", "1", "--u2", "8", "--gamma-range", "1.05:3:20", "--format", "json", "--output",
        j.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(j.join("curves.json")).unwrap()).unwrap();
    assert_eq!(v["curves"].as_array().unwrap().len(), 1);
    assert_eq!(v["trajectories"].as_array().unwrap().len(), 0);
}

#[test]
fn curves_needs_output_dir() {
    let out = bbcool(&["curves", "--u1", "1", "--u2", "8", "--gamma-range", "1.05:3:20"]);
    assert_eq!(out.status.code(), Some(2));
}
