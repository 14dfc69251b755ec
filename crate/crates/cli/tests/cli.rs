use std::process::{Command, Output};

fn conormal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conormal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lists_every_example() {
    let o = conormal(&["examples", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["hyperbola", "ellipse", "titeica", "sphere", "hyperboloid", "quartic", "pseudoflat", "scrambled-titeica"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn verify_writes_report_with_schema_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = conormal(&["verify", "--example", "hyperbola", "--report", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["meta"]["example"], "hyperbola");
    let checks = json["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        for key in ["name", "residual", "tol", "verdict", "seconds"] {
            assert!(c.get(key).is_some(), "check lacks {key}");
        }
        assert_eq!(c["verdict"], "pass");
        assert!(c["seconds"].is_null());
    }
}

#[test]
fn identical_flags_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = conormal(&["verify", "--example", "titeica", "--n", "2", "--grid", "9", "--seed", "3", "--report", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stdout(&o));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn quartic_negative_controls_pass() {
    let o = conormal(&["verify", "--example", "quartic", "--grid", "7", "--only", "maximality,harmonic"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS maximality.mean_curvature"));
}

#[test]
fn tension_prints_sup_line() {
    let o = conormal(&["tension", "--example", "titeica", "--n", "2", "--grid", "5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().next().unwrap().starts_with("sup ‖τ(𝒢_f)‖ = "));
}

#[test]
fn failing_verdict_gives_nonzero_exit() {
    // a field step of 0.5 ruins the fd Codazzi identities
    let o = conormal(&["verify", "--example", "quartic", "--grid", "5", "--step", "0.5", "--only", "codazzi"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn bad_input_is_an_error() {
    assert_eq!(conormal(&["verify", "--example", "hyperbola", "--n", "2"]).status.code(), Some(2));
    assert_eq!(conormal(&["verify", "--example", "nope"]).status.code(), Some(2));
    assert_eq!(conormal(&["invert", "--example", "sphere"]).status.code(), Some(2));
    assert_eq!(conormal(&["boundary", "--example", "sphere"]).status.code(), Some(2));
}

#[test]
fn boundary_writes_ray_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = conormal(&["boundary", "--example", "hyperbola", "--csv", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("ray_000.csv")).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("s,x0,"));
    assert_eq!(lines.count(), 3);
    assert!(dir.path().join("rays.csv").exists());
}

#[test]
fn invert_writes_gauge_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = conormal(&["invert", "--csv", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("gauge.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "u0,u1,mu_hat,minus_mu");
}
