use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn summary(&self) -> Value {
        serde_json::from_str(&self.read("summary.json")).unwrap()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out.join(name))
            .unwrap_or_else(|e| panic!("{name}: {e}\n{}", self.stderr))
    }
}

fn eddyctl(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Run {
    let config_path = dir.join(format!("{command}.json"));
    std::fs::write(&config_path, config).unwrap();
    let out = dir.join(format!("out-{command}-{}", extra.join("").replace('-', "")));
    let output = Command::new(env!("CARGO_BIN_EXE_eddyctl"))
        .arg(command)
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: output.status.code().unwrap(),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        out,
    }
}

const BESSEL: &str =
    r#"{"bessel": {"current": 1, "omega": 1, "mu": 1, "sigma": 1, "radius": 0.5, "height": 1}}"#;

#[test]
fn gen_mesh_writes_readable_meshes() {
    let dir = TempDir::new().unwrap();
    let run = eddyctl(
        dir.path(),
        "gen-mesh",
        r#"{"mesh": {"cylinder": {"levels": [1, 2]}}}"#,
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let summary = run.summary();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["results"]["meshes"][1]["tets"], 36 * 8);
    assert!(run.read("mesh_m2.msh").starts_with("$MeshFormat"));

    // the written files serve as a mesh source for another command
    let config = format!(
        r#"{{"mesh": {{"files": ["{0}/mesh_m1.msh", "{0}/mesh_m2.msh"]}}, "problem": {{"field": {{"constant": [[1, 0], [0, 1], [2, 0]]}}}}}}"#,
        run.out.display()
    );
    let run = eddyctl(dir.path(), "validate", &config, &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(
        run.summary()["results"]["levels"],
        serde_json::json!(["f0", "f1"])
    );
}

#[test]
fn validate_reproduces_constant_fields() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"mesh": {"cube": {"levels": [1, 2]}}, "order": 1,
        "problem": {"field": {"constant": [[1, -1], [0, 2], [0.5, 0]]}, "kappa": [[2, 0, 0], [0, 3, 0], [0, 0, 1]], "omega": 4}}"#;
    let run = eddyctl(dir.path(), "validate", config, &[]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert!(run.summary()["results"]["max_error"].as_f64().unwrap() < 1e-10);
    assert!(run.stdout.starts_with("PASS"));
}

#[test]
fn validate_bessel_rate_and_outputs() {
    let dir = TempDir::new().unwrap();
    let config = format!(
        r#"{{"mesh": {{"cylinder": {{"levels": [1, 2, 3]}}}}, "problem": {{"field": {BESSEL}}}, "vtk": true}}"#
    );
    let run = eddyctl(dir.path(), "validate", &config, &[]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    let slope = run.summary()["results"]["slope"].as_f64().unwrap();
    assert!(slope >= 0.9, "{slope}");
    let csv = run.read("convergence.csv");
    assert_eq!(
        csv.lines().next().unwrap(),
        "h,ndofs,l2_error,curl_error,hcurl_error"
    );
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(run.read("timings.csv").lines().count(), 4);
    assert!(run.read("solution_m3.vtk").starts_with("# vtk DataFile"));
}

#[test]
fn failing_level_leaves_partial_csv_and_error_status() {
    let dir = TempDir::new().unwrap();
    let config = format!(
        r#"{{"mesh": {{"cylinder": {{"levels": [1, 2]}}}}, "problem": {{"field": {BESSEL}}}}}"#
    );
    let run = eddyctl(dir.path(), "validate", &config, &["--order", "5"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("level m1"), "{}", run.stderr);
    assert_eq!(
        run.read("convergence.csv"),
        "h,ndofs,l2_error,curl_error,hcurl_error\n"
    );
}

#[test]
fn grad_check_is_deterministic_under_a_seed() {
    let dir = TempDir::new().unwrap();
    let config = format!(
        r#"{{"mesh": {{"cylinder": {{"levels": [1]}}}}, "problem": {{"field": {BESSEL}, "beta": 0.1}}, "grad_check": {{"decades": 8}}}}"#
    );
    let a = eddyctl(
        dir.path(),
        "grad-check",
        &config,
        &["--seed", "11", "--threads", "1"],
    );
    let b = eddyctl(
        dir.path(),
        "grad-check",
        &config,
        &["--seed", "11", "--threads", "3"],
    );
    let c = eddyctl(dir.path(), "grad-check", &config, &["--seed", "12"]);
    for run in [&a, &b, &c] {
        assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    }
    assert_eq!(a.read("gradcheck.csv"), b.read("gradcheck.csv"));
    assert_ne!(a.read("gradcheck.csv"), c.read("gradcheck.csv"));
    assert_eq!(a.read("gradcheck.csv").lines().count(), 9);
    let slope = a.summary()["results"]["slope"].as_f64().unwrap();
    assert!((0.8..=1.2).contains(&slope));
}

#[test]
fn failed_check_sets_exit_status_one() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"mesh": {"cube": {"levels": [1]}}, "problem": {"field": {"constant": [[1, 0], [0, 0], [0, 0]]}},
        "grad_check": {"decades": 6, "slope_min": 3.0, "slope_max": 4.0}}"#;
    let run = eddyctl(dir.path(), "grad-check", config, &[]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    assert_eq!(run.summary()["passed"], false);
    assert!(run.stdout.contains("FAIL decay slope"));
}

#[test]
fn trivial_target_is_optimal_at_zero() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"mesh": {"cylinder": {"levels": [1]}}, "problem": {"field": "zero", "alpha": 1e-3, "beta": 0}}"#;
    let run = eddyctl(dir.path(), "optimize", config, &[]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    let control: Value = serde_json::from_str(&run.read("control_m1.json")).unwrap();
    assert!(control["re"].as_array().unwrap().iter().all(|v| v == 0.0));
    assert_eq!(control["result"]["cost"]["j"], 0.0);
    assert!(run
        .read("history_m1.csv")
        .starts_with("iter,J,J1,J2,J3,grad_norm,step\n"));
}

#[test]
fn optimize_reports_gaps_against_the_finest_level() {
    let dir = TempDir::new().unwrap();
    let config = format!(
        r#"{{"mesh": {{"cylinder": {{"levels": [1, 2]}}}}, "problem": {{"field": {BESSEL}, "beta": 0}}, "vtk": true}}"#
    );
    let run = eddyctl(dir.path(), "optimize", &config, &[]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    let csv = run.read("optimization.csv");
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "m2");
    assert_eq!(&last[last.len() - 3..], ["0e0", "0e0", "0e0"]);
    assert!(run.read("state_m2.vtk").contains("VECTORS u_re double"));
    // the same run again gives identical tables
    let again = eddyctl(dir.path(), "optimize", &config, &["--threads", "1"]);
    assert_eq!(again.read("optimization.csv"), csv);
    assert_eq!(again.read("history_m1.csv"), run.read("history_m1.csv"));
}

#[test]
fn bad_configs_are_errors() {
    let dir = TempDir::new().unwrap();
    let run = eddyctl(
        dir.path(),
        "validate",
        r#"{"mesh": {"cube": {"levels": [1]}}, "ordr": 1}"#,
        &[],
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("unknown field"), "{}", run.stderr);
    let run = eddyctl(
        dir.path(),
        "optimize",
        r#"{"command": "validate", "mesh": {"cube": {"levels": [1]}}}"#,
        &[],
    );
    assert_eq!(run.code, 2);
    let run = eddyctl(
        dir.path(),
        "validate",
        r#"{"mesh": {"cube": {"levels": [1]}}, "problem": {"source": [[1, 0], [0, 0], [0, 0]]}}"#,
        &[],
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("known solution"), "{}", run.stderr);
}
