use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lgfmo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgfmo")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn data_rows(csv: &Path) -> Vec<String> {
    fs::read_to_string(csv).unwrap().lines().skip(1).map(String::from).collect()
}

#[test]
fn table2_writes_22_rows_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = lgfmo(&["table2", "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("res/table2.csv");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("experiment,initial_state,observable,gamma_per_ps,dt_ps,pattern,K,violation\n"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 22);
    assert!(rows[0].starts_with("table2,mix16,site1,0,0.16678"));
    assert!(rows[21].starts_with("table2,maxmix7,all,"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/table2.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 22);
    assert_eq!(meta["pattern"], "flip2");
    assert_eq!(meta["model"]["clock"], "published");
}

#[test]
fn missing_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = lgfmo(&["--config", "missing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cfg"));
}

#[test]
fn bad_config_line_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "[model]\ngamma_deph_per_ps = -1\n").unwrap();
    let out = lgfmo(&["--config", "run.cfg", "table2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_pattern_and_missing_experiment_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lgfmo(&["--pattern", "flip4", "table2"], dir.path()).status.code(), Some(1));
    assert_eq!(lgfmo(&[], dir.path()).status.code(), Some(1));
}

#[test]
fn propagate_writes_501_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = lgfmo(&["propagate", "--initial", "site1", "--t-max", "5", "--step", "0.01", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("o/propagate.csv"));
    assert_eq!(rows.len(), 501);
    assert!(rows[0].starts_with("0,0,1,0,0,0,0,0,0,0"));
    assert!(rows[500].starts_with("5,"));
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep.cfg"),
        "[run]\nexperiment = dephasing-sweep\ninitial_state = site6\nsites = 6\nout = sweep\n\n[grid]\ngamma_max = 1\ngamma_step = 0.5\n",
    )
    .unwrap();
    let out = lgfmo(&["--config", "sweep.cfg"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("sweep/dephasing-sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.starts_with("dephasing-sweep,site6,site6,")));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[run]\ntrials = 2\nseed = 9\n";
    fs::write(dir.path().join("r.cfg"), cfg).unwrap();
    for sub in ["a", "b"] {
        let out = lgfmo(&["--config", "r.cfg", "--out", sub, "robustness"], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["robustness.csv", "robustness.meta.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(a == b || file.ends_with(".json") && strip_out(&a) == strip_out(&b), "{file} differs");
    }
}

// the rendered config echoes the output directory
fn strip_out(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).lines().filter(|l| !l.contains("out = ")).collect()
}
