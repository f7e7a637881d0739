use std::path::Path;
use std::process::{Command, Output};

use witamp_cli::checks::{run_check, CheckOptions, CHECK_NAMES};
use witamp_cli::config::{parse_config, InstanceClass, InstanceSource};
use witamp_core::{Construction, Cutoff};

fn witamp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_witamp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SIMPLE: &str = "construction = \"simple-pe\"\np = 2\nc = 0.99\ns = 0.01\nseed = 5\nout = \"out\"\n";

#[test]
fn run_writes_one_row_per_instance() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.toml", SIMPLE);
    let o = witamp(&["run", "--config", "cfg.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let csv = std::fs::read_to_string(out.join("acceptance.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("instance,source,seed,class,lambda_max"));
    for row in &lines[1..] {
        assert!(row.contains(",true,"), "{row}");
        assert!(row.ends_with("\"Error reduction: (1 - 2^-p, 2^-p)\""), "{row}");
    }
    let resources: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("resources.json")).unwrap()).unwrap();
    assert_eq!(resources["instances"].as_array().unwrap().len(), 5);
    assert_eq!(resources["instances"][0]["matches_prediction"], true);
    let schedule: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("schedule.json")).unwrap()).unwrap();
    assert_eq!(schedule["construction"], "simple-pe");
}

#[test]
fn json_and_toml_configs_agree() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.toml", "construction = \"hybrid\"\np = 2\nc = 0.99\ns = 0.01\n");
    write(
        dir.path(),
        "b.json",
        r#"{"construction": "hybrid", "p": 2, "c": 0.99, "s": 0.01}"#,
    );
    assert_eq!(witamp(&["run", "--config", "a.toml", "--out", "a"], dir.path()).status.code(), Some(0));
    assert_eq!(witamp(&["run", "--config", "b.json", "--out", "b"], dir.path()).status.code(), Some(0));
    for file in ["schedule.json", "resources.json", "acceptance.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn invalid_gap_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.toml", "construction = \"simple-pe\"\np = 2\nc = 0.3\ns = 0.3\n");
    let o = witamp(&["run", "--config", "cfg.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c > s"), "{}", stderr(&o));
}

#[test]
fn hybrid_at_p1_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.toml", "construction = \"hybrid\"\np = 1\nc = 0.9\ns = 0.1\n");
    let o = witamp(&["run", "--config", "cfg.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("log p"), "{}", stderr(&o));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.toml", &format!("{SIMPLE}colour = \"blue\"\n"));
    assert_eq!(witamp(&["run", "--config", "cfg.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn capacity_exits_with_needed_budget() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.toml", SIMPLE);
    let o = witamp(&["run", "--config", "cfg.toml", "--max-qubits", "5"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--max-qubits 8"), "{}", stderr(&o));
}

#[test]
fn verify_named_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = witamp(&["verify", "prop2", "--trials", "50", "--seed", "1", "--tol", "1e-9"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("prop2: PASS"));
    assert!(stdout(&o).contains("worst residual"));

    let o = witamp(&["verify", "thm1-pe", "--p", "2", "--trials", "5", "--out", "thm.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("thm.json")).unwrap()).unwrap();
    for row in report["rows"].as_array().unwrap() {
        let bound = row["bound"].as_f64().unwrap();
        match row["relation"].as_str().unwrap() {
            "at-least" => assert_eq!(bound, 0.75),
            "at-most" => assert_eq!(bound, 0.25),
            other => panic!("unexpected relation {other}"),
        }
        assert_eq!(row["pass"], true);
        assert!(!row["anchor"].as_str().unwrap().is_empty());
    }

    let o = witamp(&["verify", "prop10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = witamp(&["verify", "prop2", "--trials", "2", "--tol", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reflection_check_near_half() {
    let opts = CheckOptions {
        trials: 6,
        seed: 3,
        ..CheckOptions::default()
    };
    let report = run_check("prop9", &opts).unwrap();
    assert!(report.passed);
    let near_half = report.rows.iter().filter(|r| r.trial % 2 == 1);
    for r in near_half {
        assert!(r.measured > 0.98, "{r:?}");
    }
}

#[test]
fn every_check_passes_briefly() {
    for name in CHECK_NAMES {
        let opts = CheckOptions {
            trials: 3,
            seed: 9,
            ..CheckOptions::default()
        };
        let report = run_check(name, &opts).unwrap();
        assert!(report.passed, "{name}: {}", report.table());
        assert!(report.rows.iter().all(|r| !r.anchor.is_empty()));
    }
}

#[test]
fn schedule_and_gen_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let o = witamp(&["schedule", "--construction", "random-guess", "--p", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["q"], 14);

    let o = witamp(&["schedule", "--construction", "random-guess", "--p", "2", "--cutoff", "random-guess"], dir.path());
    assert_eq!(o.status.code(), Some(2), "side condition fails at p = 2");

    let o = witamp(&["gen", "--kind", "yes", "--seed", "4", "--out", "v.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let again = witamp(&["gen", "--kind", "yes", "--seed", "4"], dir.path());
    assert_eq!(std::fs::read_to_string(dir.path().join("v.json")).unwrap(), stdout(&again));

    write(
        dir.path(),
        "files.toml",
        "construction = \"simple-pe\"\np = 2\nc = 0.99\ns = 0.01\n[instances]\nkind = \"files\"\npaths = [\"v.json\"]\n",
    );
    let o = witamp(&["run", "--config", "files.toml", "--out", "r"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("r/acceptance.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.contains(",yes,"));
}

#[test]
fn config_defaults() {
    let cfg = parse_config(Path::new("x.toml"), "construction = \"random-guess\"\np = 3\nc = 0.9\ns = 0.2\ncutoff = \"mild-guess\"\n").unwrap();
    assert_eq!(cfg.construction, Construction::RandomGuess);
    assert_eq!(cfg.cutoff, Some(Cutoff::MildGuess));
    assert_eq!(
        cfg.instances,
        InstanceSource::Random {
            count: 5,
            witness_width: 1,
            class: InstanceClass::Mixed
        }
    );
    assert!(parse_config(Path::new("x.json"), "{\"construction\": \"hybrid\"}").is_err());
}
