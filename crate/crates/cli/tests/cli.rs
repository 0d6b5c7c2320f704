use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn grnn_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grnn-lab")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = grnn_lab(args);
    assert!(
        out.status.success(),
        "{args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a `gene,...` CSV keyed by the first column.
fn rows(csv: &str) -> BTreeMap<String, Vec<f64>> {
    csv.lines()
        .skip(1)
        .filter_map(|l| {
            let mut f = l.split(',');
            let key = f.next()?.to_string();
            let vals: Result<Vec<f64>, _> = f.map(str::parse).collect();
            vals.ok().map(|v| (key, v))
        })
        .collect()
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

const CYCLE: &str = r#"{
  "inputs": ["x"],
  "outputs": ["a"],
  "genes": {
    "a": { "k1": 1, "k2": 1, "d1": 1, "d2": 1, "copy_number": 1 },
    "b": { "k1": 1, "k2": 1, "d1": 1, "d2": 1, "copy_number": 1 }
  },
  "edges": [
    { "from": "x", "to": "a", "mode": "activation", "k_half": 1 },
    { "from": "a", "to": "b", "mode": "activation", "k_half": 1 },
    { "from": "b", "to": "a", "mode": "repression", "k_half": 1 }
  ]
}"#;

const SINGLE_EQUAL_DECAY: &str = r#"{
  "inputs": ["x"],
  "outputs": ["g"],
  "genes": { "g": { "k1": 0.5, "k2": 0.8, "d1": 0.25, "d2": 0.25, "copy_number": 10 } },
  "edges": [ { "from": "x", "to": "g", "mode": "activation", "k_half": 2 } ]
}"#;

#[test]
fn validate_exit_codes() {
    for name in ["multilayer", "random_structured", "ecoli"] {
        ok(&["validate", "--builtin", name]);
    }
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, CYCLE).unwrap();
    let out = grnn_lab(&["validate", path(&broken)]);
    assert_eq!(out.status.code(), Some(1));
    let listed = String::from_utf8(out.stdout).unwrap();
    assert!(listed.lines().any(|l| l.starts_with("cycle:")), "{listed}");

    let out = grnn_lab(&["validate", path(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(grnn_lab(&["validate"]).status.code(), Some(2));
    assert_eq!(grnn_lab(&["validate", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(grnn_lab(&["validate", "--builtin", "ecoli", "--param-set", "2"]).status.code(), Some(2));
    assert_eq!(grnn_lab(&["steady-state", "--builtin", "multilayer", "--set", "g11k1=2"]).status.code(), Some(2));
    assert_eq!(grnn_lab(&["bogus"]).status.code(), Some(2));
}

#[test]
fn simulate_settles_to_steady_state() {
    let dir = tempfile::tempdir().unwrap();
    let steady = rows(&ok(&["steady-state", "--builtin", "multilayer", "--param-set", "1"]));
    let sim = rows(&ok(&["simulate", "--builtin", "multilayer", "--param-set", "1", "--out", path(dir.path())]));
    assert_eq!(steady.len(), 4);
    for (gene, s) in &steady {
        // simulate prints gene,time,rna,protein; steady-state gene,rna,protein,normalized
        let (p_sim, p_ss) = (sim[gene][2], s[1]);
        assert!((p_sim - p_ss).abs() <= 1e-6 * p_ss.abs().max(1e-300), "{gene}: {p_sim} vs {p_ss}");
    }
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("time,g11.rna,g11.protein,g12.rna"));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn zero_horizon_gives_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--builtin", "multilayer", "--t-end", "0", "--out", path(dir.path())]);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1], "0,0,0,0,0,0,0,0,0");
}

#[test]
fn ecoli_runs_finite() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--builtin", "ecoli", "--out", path(dir.path())]);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut n = 0;
    for line in trace.lines().skip(1) {
        for v in line.split(',') {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
        n += 1;
    }
    assert_eq!(n, 1000);
}

#[test]
fn stability_reports() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["stability", "--builtin", "multilayer", "--out", path(dir.path())]);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(stdout.starts_with(&summary));
    let net = rows(&summary);
    let builtin = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&builtin).unwrap();
    for (gene, r) in &net {
        let g = &manifest["network"]["genes"][gene];
        assert_eq!(r[0], -g["d1"].as_f64().unwrap());
        assert_eq!(r[1], -g["d2"].as_f64().unwrap());
        assert!(r[2] <= 30.0, "{gene} stabilizes at {}", r[2]);
        let trace = fs::read_to_string(dir.path().join(format!("{gene}.csv"))).unwrap();
        assert!(trace.starts_with("time,dVdt\n"));
    }
    assert!(!summary.contains("not_reached"));
}

#[test]
fn stability_equal_decay_rates() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("single.json");
    fs::write(&spec, SINGLE_EQUAL_DECAY).unwrap();
    for mode in ["coupled", "quasi-static"] {
        let out = dir.path().join(mode);
        ok(&["stability", path(&spec), "--input", "x=3", "--mode", mode, "--out", path(&out)]);
        let trace = fs::read_to_string(out.join("g.csv")).unwrap();
        let dvdt: Vec<f64> = trace.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        let peak = dvdt.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak > 0.0);
        for v in &dvdt {
            // Past settling the coupled trace is integration noise around zero.
            assert!(v.is_finite() && *v <= 1e-12 * peak, "{mode}: {v}");
        }
        let summary = rows(&fs::read_to_string(out.join("summary.csv")).unwrap());
        assert_eq!(summary["g"][..2], [-0.25, -0.25]);
    }
}

#[test]
fn classify_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["classify", "--builtin", "multilayer", "--grid", "2x2", "--out", path(dir.path())]);
    assert!(stdout.starts_with("gene,area_fraction\ng21,"));
    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 5);
    assert!(grid.starts_with("x,y,g11,g12,g13,g21\n"));
    for gene in ["g11", "g12", "g13", "g21"] {
        assert!(fs::read_to_string(dir.path().join(format!("{gene}.pgm"))).unwrap().starts_with("P2"));
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{gene}.json"))).unwrap()).unwrap();
        assert_eq!(m["gene"], gene);
    }
}

#[test]
fn classify_unknown_axis_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        grnn_lab(&["classify", "--builtin", "multilayer", "--range", "x1:0:1e-3,q:0:1e-3", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown input `q`"));
    assert!(!dir.path().join("grid.csv").exists());
}

fn area(dir: &Path, gene: &str) -> f64 {
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join(format!("{gene}.json"))).unwrap()).unwrap();
    m["area_fraction"].as_f64().unwrap()
}

fn extent(dir: &Path, gene: &str, axis: &str) -> [f64; 2] {
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join(format!("{gene}.json"))).unwrap()).unwrap();
    let e = m[axis].as_array().unwrap();
    [e[0].as_f64().unwrap(), e[1].as_f64().unwrap()]
}

#[test]
fn classify_parameter_sets_shift_areas() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("set1"), dir.path().join("set2"));
    ok(&["classify", "--builtin", "multilayer", "--param-set", "1", "--grid", "60x60", "--out", path(&a)]);
    ok(&["classify", "--builtin", "multilayer", "--param-set", "2", "--grid", "60x60", "--out", path(&b)]);
    assert!(area(&b, "g12") > area(&a, "g12"));
    assert!(area(&b, "g13") < area(&a, "g13"));
}

#[test]
fn classify_ecoli_b1892_reaches_lower_inputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["classify", "--builtin", "ecoli", "--grid", "80x80", "--out", path(dir.path())]);
    for axis in ["x_extent", "y_extent"] {
        assert!(extent(dir.path(), "b1892", axis)[0] < extent(dir.path(), "b1891", axis)[0], "{axis}");
    }
}

#[test]
fn overrides_change_results() {
    let base = rows(&ok(&["steady-state", "--builtin", "multilayer"]));
    let bumped = rows(&ok(&["steady-state", "--builtin", "multilayer", "--set", "g21.k2=1.0"]));
    assert_eq!(base["g11"], bumped["g11"]);
    assert!(bumped["g21"][1] > base["g21"][1]);
    let out = grnn_lab(&["steady-state", "--builtin", "multilayer", "--set", "g21.d1=-1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = grnn_lab(&["steady-state", "--builtin", "multilayer", "--set", "nope.k1=1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_commands_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "classify",
            "--builtin",
            "random_structured",
            "--param-set",
            "2",
            "--grid",
            "25x31",
            "--set",
            "g31.k1=0.3",
            "--out",
            path(out),
        ]);
    }
    let (ma, mb) = (artifacts(&a), artifacts(&b));
    assert_eq!(ma.keys().collect::<Vec<_>>(), mb.keys().collect::<Vec<_>>());
    for (name, body) in &ma {
        if name != "manifest.json" {
            assert_eq!(body, &mb[name], "{name}");
        }
    }
    // Same directory, same command: manifest is bitwise identical too.
    let before = fs::read(a.join("manifest.json")).unwrap();
    ok(&[
        "classify",
        "--builtin",
        "random_structured",
        "--param-set",
        "2",
        "--grid",
        "25x31",
        "--set",
        "g31.k1=0.3",
        "--out",
        path(&a),
    ]);
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), before);
}

#[test]
fn replay_reproduces_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("single.json");
    fs::write(&spec, SINGLE_EQUAL_DECAY).unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec![
            "simulate".into(),
            "--builtin".into(),
            "ecoli".into(),
            "--t-end".into(),
            "37.5".into(),
            "--rel-tol".into(),
            "1e-9".into(),
        ],
        vec![
            "stability".into(),
            "--builtin".into(),
            "multilayer".into(),
            "--param-set".into(),
            "2".into(),
            "--mode".into(),
            "quasi-static".into(),
        ],
        vec![
            "classify".into(),
            "--builtin".into(),
            "multilayer".into(),
            "--grid".into(),
            "9x7".into(),
            "--threshold".into(),
            "0.3".into(),
            "--input".into(),
            "x2=1e-4".into(),
        ],
        vec![
            "steady-state".into(),
            path(&spec).into(),
            "--input".into(),
            "x=0.7".into(),
            "--set".into(),
            "g.k_half=0.1".into(),
        ],
    ];
    for (i, run) in runs.iter().enumerate() {
        let first = dir.path().join(format!("run{i}"));
        let again = dir.path().join(format!("replay{i}"));
        let mut args: Vec<&str> = run.iter().map(String::as_str).collect();
        args.extend(["--out", path(&first)]);
        let stdout = ok(&args);
        // The manifest alone suffices, even once the spec file is gone.
        let replay_out = ok(&["replay", path(&first.join("manifest.json")), "--out", path(&again)]);
        assert_eq!(stdout, replay_out, "{run:?}");
        let (ma, mb) = (artifacts(&first), artifacts(&again));
        assert_eq!(ma.len(), mb.len());
        for (name, body) in &ma {
            if name != "manifest.json" {
                assert_eq!(body, &mb[name], "{run:?}: {name}");
            }
        }
        // Replaying in place rewrites a bitwise identical manifest.
        let before = fs::read(first.join("manifest.json")).unwrap();
        ok(&["replay", path(&first.join("manifest.json"))]);
        assert_eq!(fs::read(first.join("manifest.json")).unwrap(), before);
    }
    fs::remove_file(&spec).unwrap();
    ok(&["replay", path(&dir.path().join("run3").join("manifest.json")), "--out", path(&dir.path().join("gone"))]);
}

#[test]
fn replay_rejects_non_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("manifest.json");
    fs::write(&bogus, "{\"hello\": 1}").unwrap();
    assert_eq!(grnn_lab(&["replay", path(&bogus)]).status.code(), Some(2));
    assert_eq!(grnn_lab(&["replay", path(&dir.path().join("absent.json"))]).status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["classify", "--builtin", "ecoli", "--grid", "40x40", "--out", path(&a)]);
    let out = Command::new(env!("CARGO_BIN_EXE_grnn-lab"))
        .args(["classify", "--builtin", "ecoli", "--grid", "40x40", "--out", path(&b)])
        .env("GRNN_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(a.join("grid.csv")).unwrap(), fs::read(b.join("grid.csv")).unwrap());
}
