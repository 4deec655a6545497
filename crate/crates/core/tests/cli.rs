use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kernel_dilation::generators::random_psd;
use kernel_dilation::io;
use kernel_dilation::linearisation::{kolmogorov, kolmogorov_pivoted_cholesky};
use kernel_dilation::scenario::{run, Scenario, ScenarioReport, Task, Verdict};
use kernel_dilation::AlgebraShape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios")
}

fn dilate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilate")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn trivial_scenario_exits_zero() {
    let o = dilate(&["run", path_str(&scenarios().join("trivial.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("dilate          pass"));
}

#[test]
fn failed_verdict_exits_one() {
    let f = scenarios().join("perturbed.json");
    let o = dilate(&["run", path_str(&f), "--tasks", "invariance,psd"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn errors_exit_two() {
    let o = dilate(&["run", path_str(&scenarios().join("perturbed.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("NonInvariantKernel"));
    let o = dilate(&["run", path_str(&scenarios().join("transpose.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("TaskDependencyError"));
}

#[test]
fn quiet_suppresses_output() {
    let o = dilate(&["run", path_str(&scenarios().join("trivial.json")), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_scenario_reports_parse_error_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("broken.json");
    std::fs::write(&f, "{\"schema_version\": 1, \"algebra\": [1], \"tasks\": [").unwrap();
    let o = dilate(&["run", path_str(&f)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ParseError") && err.contains("broken.json"), "{err}");
}

#[test]
fn wrong_schema_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("v2.json");
    std::fs::write(&f, r#"{"schema_version": 2, "algebra": [1], "cp_map": {"kind": "identity"}, "tasks": ["psd"]}"#).unwrap();
    let o = dilate(&["run", path_str(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("VersionMismatch"));
}

#[test]
fn report_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let sc = scenarios().join("s3_invariant.json");
    for out in [&a, &b] {
        let o = dilate(&["run", path_str(&sc), "--report", path_str(out), "--seed", "42", "--quiet"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let report = ScenarioReport::load(&a).unwrap();
    assert_eq!(report.provenance.seed, 42);
    assert_eq!(format!("{}\n", report.to_canonical_json().unwrap()).as_bytes(), &ta[..]);
}

#[test]
fn tol_override_sets_every_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = dilate(&["run", path_str(&scenarios().join("trivial.json")), "--tol", "1e-7", "--report", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["provenance"]["tolerances"], json!({"psd_tol": 1e-7, "rank_tol": 1e-7, "rep_tol": 1e-7}));
}

#[test]
fn verify_and_equiv_on_saved_files() {
    let dir = tempfile::tempdir().unwrap();
    let shape = AlgebraShape::new(vec![2, 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = random_psd(&mut rng, &shape, 2, 3, &[4, 2]).unwrap();
    let other = random_psd(&mut rng, &shape, 2, 3, &[4, 2]).unwrap();
    let p = |n: &str| dir.path().join(n);
    io::save_kernel(&p("k.json"), &k).unwrap();
    io::save_kernel(&p("other.json"), &other).unwrap();
    io::save_linearisation(&p("eig.json"), &kolmogorov(&k, 1e-10).unwrap(), Some(&k)).unwrap();
    io::save_linearisation(&p("chol.json"), &kolmogorov_pivoted_cholesky(&k, 1e-10).unwrap(), None).unwrap();
    io::save_linearisation(&p("lin_other.json"), &kolmogorov(&other, 1e-10).unwrap(), Some(&other)).unwrap();

    let o = dilate(&["verify", path_str(&p("eig.json")), path_str(&p("k.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("kernel hash matches"));
    let o = dilate(&["verify", path_str(&p("eig.json")), path_str(&p("other.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch"));

    let o = dilate(&["equiv", path_str(&p("eig.json")), path_str(&p("chol.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = dilate(&["equiv", path_str(&p("eig.json")), path_str(&p("lin_other.json"))]);
    assert_eq!(o.status.code(), Some(1));
    let o = dilate(&["verify", path_str(&p("missing.json")), path_str(&p("k.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kms_window_dimension_and_constants() {
    let sc = Scenario::from_json(
        r#"{"schema_version": 1, "algebra": [1], "semigroup": {"kind": "integer_window", "n": 6},
            "generator": {"kind": "kms", "a": 0.5, "points": 6}, "tasks": ["psd", "dilate", "b2"]}"#,
    )
    .unwrap();
    let r = run(&sc).unwrap();
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.task(Task::Dilate).unwrap().payload["total_dim"], json!(6));
    // k(x, x) = 1 for the KMS matrix, so c_p(x) = 1 everywhere.
    let cs = r.task(Task::B2).unwrap().payload["constants"].as_array().unwrap().clone();
    assert_eq!(cs.len(), 6);
    assert!(cs.iter().all(|c| (c.as_f64().unwrap() - 1.0).abs() < 1e-14));
}

#[test]
fn non_invariant_kernel_names_a_triple() {
    let sc = Scenario::load(&scenarios().join("perturbed.json")).unwrap();
    let r = run(&sc).unwrap();
    let t = r.task(Task::Representation).unwrap();
    assert_eq!(t.verdict, Verdict::Error);
    let e = t.error.as_ref().unwrap();
    assert_eq!(e.kind, "NonInvariantKernel");
    assert!(e.message.contains("xi=") && e.message.contains("x=") && e.message.contains("y="));
    assert_eq!(r.task(Task::Invariance).unwrap().verdict, Verdict::Fail);
}

#[test]
fn every_bundled_scenario_is_deterministic() {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenarios()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    for f in files {
        let sc = Scenario::load(&f).unwrap();
        let a = run(&sc).unwrap().to_canonical_json().unwrap();
        let b = run(&sc).unwrap().to_canonical_json().unwrap();
        assert_eq!(a, b, "{}", f.display());
    }
}

#[test]
fn report_lists_requested_tasks_in_canonical_order() {
    let mut sc = Scenario::load(&scenarios().join("kms_window.json")).unwrap();
    sc.tasks = vec![Task::B2, Task::Validate, Task::B2];
    let r = run(&sc).unwrap();
    let order: Vec<Task> = r.tasks.iter().map(|t| t.task).collect();
    assert_eq!(order, vec![Task::Validate, Task::B2]);
}
