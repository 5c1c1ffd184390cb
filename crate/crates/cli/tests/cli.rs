use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn auter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auter")).args(args).output().expect("run auter")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_fixtures() {
    for f in ["r2.txt", "r2_swap.txt", "theta.txt", "r2w.txt"] {
        let o = auter(&["validate", path(&data(f))]);
        assert!(o.status.success(), "{f}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("ok: rank 2"));
    }
}

#[test]
fn validate_rejects_missing_basepoint() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    std::fs::write(&p, "[graph]\nvertex v\nedge e : v -> v\n").unwrap();
    let o = auter(&["validate", path(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[graph]"), "{}", stderr(&o));
}

#[test]
fn validate_warns_on_unreduced_marking() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("loop.txt");
    let text = std::fs::read_to_string(data("r2.txt")).unwrap().replace("x1 = a", "x1 = b ~b a");
    std::fs::write(&p, text).unwrap();
    let o = auter(&["validate", path(&p)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn validate_writes_graph_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let o = auter(&["validate", path(&data("theta.txt")), "--dot", path(&dot)]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&dot).unwrap().contains("digraph"));
}

#[test]
fn norm_of_identity_rose_on_unit_loops() {
    let o = auter(&["norm", path(&data("r2.txt")), "--horizon", "1", "--kind", "out"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "out h=1 : [1, 1, 1, 1]");
    assert!(out.contains("[x1]") && out.contains("[~x2]"));
}

#[test]
fn norm_rejects_unknown_kind() {
    let o = auter(&["norm", path(&data("r2.txt")), "--kind", "inn"]);
    assert!(!o.status.success());
}

#[test]
fn ideal_edges_lists_theta_orbit() {
    let o = auter(&["ideal-edges", path(&data("theta.txt")), "--horizon", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("* : {~e2,~e3} stab=2 D={} inv=no"), "{}", stdout(&o));
}

#[test]
fn move_outside_d_set_is_a_hypothesis_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.txt");
    let o = auter(&["move", path(&data("r2w.txt")), "--vertex", "*", "--alpha", "a,~b", "--collapse", "b", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not in D"));
    assert!(!out.exists());
}

#[test]
fn move_writes_a_valid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.txt");
    let o = auter(&["move", path(&data("r2w.txt")), "--vertex", "*", "--alpha", "a,~b", "--collapse", "a", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = auter(&["validate", path(&out)]);
    assert!(v.status.success());
}

#[test]
fn reduce_reaches_identity_norms_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.txt");
    let o = auter(&["reduce", path(&data("r2w.txt")), "--horizon", "3", "--log", path(&log)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let reduced = dir.path().join("reduced.txt");
    std::fs::write(&reduced, stdout(&o)).unwrap();
    let n = auter(&["norm", path(&reduced), "--horizon", "1"]);
    assert_eq!(stdout(&n).lines().next().unwrap(), "out h=1 : [1, 1, 1, 1]");
    let log = std::fs::read_to_string(&log).unwrap();
    assert!(log.starts_with("step 1: "));
    assert!(log.contains("red_tot=") && log.contains("norm_out=") && log.contains("norm_aut="));
}

#[test]
fn star_reports_acyclic_complex_and_point() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("h.dot");
    let o = auter(&["star", path(&data("r2w.txt")), "--horizon", "3", "--homology", "--retract", "--dot", path(&dot)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("reduced betti: [0, 0]"), "{out}");
    assert!(out.contains("result: point"), "{out}");
    assert!(std::fs::read_to_string(&dot).unwrap().contains("digraph"));
}

#[test]
fn star_needs_a_reduced_graph() {
    let o = auter(&["star", path(&data("theta.txt"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn selftest_norms_passes() {
    let o = auter(&["selftest", "--suite", "norms", "--seed", "1", "--horizon", "4", "--count", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn reports_are_deterministic() {
    let file = data("r2_swap.txt");
    let args = ["ideal-edges", path(&file), "--horizon", "3"];
    assert_eq!(auter(&args).stdout, auter(&args).stdout);
    let args = ["selftest", "--suite", "star", "--seed", "7", "--horizon", "3", "--count", "6"];
    assert_eq!(auter(&args).stdout, auter(&args).stdout);
}
