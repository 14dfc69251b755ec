use conormal::examples::{example, NAMES};
use conormal::suite::{run_example, Expect, Report, SuiteConfig, TolProfile, Verdict};
use conormal::Error;

fn quick() -> SuiteConfig {
    SuiteConfig { grid: 7, samples: 20, ..Default::default() }
}

#[test]
fn registry_rejects_bad_requests() {
    assert!(matches!(example("hyperbola", 2), Err(Error::BadDimension { .. })));
    assert!(matches!(example("titeica", 0), Err(Error::BadDimension { .. })));
    assert!(matches!(example("torus", 2), Err(Error::UnknownExample(_))));
    for name in NAMES {
        let n = if matches!(name, "hyperbola" | "ellipse") { 1 } else { 2 };
        assert_eq!(example(name, n).unwrap().name, name);
    }
}

#[test]
fn every_example_passes_on_a_small_grid() {
    for name in NAMES {
        let n = if matches!(name, "hyperbola" | "ellipse") { 1 } else { 2 };
        let r = run_example(name, n, &quick()).unwrap();
        let bad: Vec<_> = r.failures().iter().map(|c| format!("{} {:?} {:?}", c.name, c.residual, c.note)).collect();
        assert!(bad.is_empty(), "{name}: {bad:?}");
    }
}

#[test]
fn quartic_reports_its_negative_controls() {
    let r = run_example("quartic", 2, &SuiteConfig { filter: vec!["maximality".into(), "harmonic".into()], ..quick() }).unwrap();
    let control = r.checks.iter().find(|c| c.name == "maximality.mean_curvature").unwrap();
    assert_eq!(control.expect, Expect::Above);
    assert_eq!(control.verdict, Verdict::Pass);
    assert_eq!(r.meta.tol_profile, TolProfile::Fd);
}

#[test]
fn orthant_graph_is_refused() {
    let r = run_example("titeica", 2, &SuiteConfig { filter: vec!["boundary".into()], ..quick() }).unwrap();
    let g = r.checks.iter().find(|c| c.name == "boundary.graph").unwrap();
    assert_eq!(g.expect, Expect::Error);
    assert_eq!(g.verdict, Verdict::Pass);
    assert_eq!(g.note.as_deref(), Some("cone is not strictly convex"));
}

#[test]
fn report_round_trips_through_json() {
    let r = run_example("sphere", 2, &SuiteConfig { filter: vec!["structure".into(), "sigma".into()], ..quick() }).unwrap();
    let back = Report::from_json(&r.to_json()).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json(), r.to_json());
}

#[test]
fn filter_restricts_groups() {
    let r = run_example("ellipse", 1, &SuiteConfig { filter: vec!["codazzi".into()], ..quick() }).unwrap();
    assert!(!r.checks.is_empty());
    assert!(r.checks.iter().all(|c| c.name.starts_with("codazzi") || c.name.starts_with("pick")));
}

#[test]
fn timings_only_when_asked() {
    let cfg = SuiteConfig { filter: vec!["structure".into()], ..quick() };
    let r = run_example("hyperbola", 1, &cfg).unwrap();
    assert!(r.checks.iter().all(|c| c.seconds.is_none()));
    let r = run_example("hyperbola", 1, &SuiteConfig { timings: true, ..cfg }).unwrap();
    assert!(r.checks.iter().all(|c| c.seconds.is_some()));
}
