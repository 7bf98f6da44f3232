use std::path::Path;
use std::process::Command;

const REFERENCE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/reference.toml");

fn wsan(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wsan")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_reference_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let metrics = dir.path().join("m.csv");
    let out = wsan(&["run", REFERENCE, "--trace", trace.to_str().unwrap(), "--metrics", metrics.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("all fires contained"));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().next().unwrap().starts_with("{\"header\":"));
    let csv = std::fs::read_to_string(&metrics).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().last().unwrap().starts_with("total,"));
}

#[test]
fn seed_override_leaves_zero_drop_body_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let m = dir.path().join("m.csv");
    let m = m.to_str().unwrap();
    wsan(&["run", REFERENCE, "--quiet", "--trace", a.to_str().unwrap(), "--metrics", m]);
    wsan(&["run", REFERENCE, "--quiet", "--seed", "99", "--trace", b.to_str().unwrap(), "--metrics", m]);
    let (a, b) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
    assert_ne!(a.lines().next(), b.lines().next());
    assert!(a.lines().skip(1).eq(b.lines().skip(1)));
}

#[test]
fn invalid_scenario_exits_1_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "horizon = 10.0\n[grid]\nn = 3\nr = 50.0\n");
    let out = wsan(&["run", &bad, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    let out = wsan(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let out = wsan(&["validate", REFERENCE]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unreachable_fire_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "cold.toml",
        "horizon = 100.0\n[grid]\nn = 4\nr = 50.0\n[[fire_events]]\nx = 100.0\ny = 100.0\nspeed = 0.0\nt0 = 0.0\n",
    );
    let out = wsan(&["run", &sc, "--quiet", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("cold.metrics.csv").exists());
}

#[test]
fn several_scenarios_in_one_invocation() {
    let dir = tempfile::tempdir().unwrap();
    let cold = write(
        dir.path(),
        "cold.toml",
        "horizon = 50.0\n[grid]\nn = 2\nr = 50.0\n[[fire_events]]\nx = 100.0\ny = 100.0\nspeed = 0.0\nt0 = 0.0\n",
    );
    let out_dir = dir.path().join("out");
    let out = wsan(&["run", REFERENCE, &cold, "--quiet", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    for f in ["reference.trace.jsonl", "reference.metrics.csv", "cold.trace.jsonl", "cold.metrics.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let out = wsan(&["run", REFERENCE, &cold, "--trace", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plan_subcommand() {
    let out = wsan(&["plan", "--n", "4", "--r", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("center: 16, intersection: 25"));
    assert_eq!(wsan(&["plan", "--n", "3", "--r", "50"]).status.code(), Some(1));
}
