use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use conormal::boundary::{sweep_rays, write_ray_csv, write_summary_csv, RayReport, S_MAX};
use conormal::examples::{example, ExampleSpec, Extra, NAMES};
use conormal::lift::{integrate_gauge, LiftedImmersion, PATH_TOL_ANALYTIC};
use conormal::sigma::{build_sigma, SigmaKind};
use conormal::split::QuadricKind;
use conormal::suite::{coarse_points, describe, run_suite, Check, Report, SuiteConfig, TolProfile, Verdict};
use conormal::symmetric::{norm_at, spd_tension, BlaschkeLift};

#[derive(Parser)]
#[command(name = "conormal", version, about = "Checks for equiaffine hypersurfaces and their lifts to split quadrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Built-in examples
    Examples {
        #[command(subcommand)]
        action: ExamplesCmd,
    },
    /// Run every check in the example's manifest
    Verify(RunArgs),
    /// Tension of the Blaschke lift into unimodular inner products
    Tension(RunArgs),
    /// Recover the horizontal gauge and the centroaffine pair from a scrambled lift
    Invert(RunArgs),
    /// Projective limits of σ⁻ along rays and their boundary checks
    Boundary(RunArgs),
}

#[derive(Subcommand)]
enum ExamplesCmd {
    List,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    example: Option<String>,
    /// dimension of the hypersurface (1 for the plane curves, 2 otherwise)
    #[arg(long)]
    n: Option<usize>,
    /// points per axis
    #[arg(long)]
    grid: Option<usize>,
    /// finite-difference step for derived fields
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, value_parser = parse_profile)]
    tol_profile: Option<TolProfile>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// random samples for the model-space checks
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
    /// write CSV tables into this directory
    #[arg(long)]
    csv: Option<PathBuf>,
    /// record wall time per check (makes reports run-dependent)
    #[arg(long)]
    timings: bool,
    /// only run check groups with these prefixes
    #[arg(long = "only", value_delimiter = ',')]
    only: Vec<String>,
}

fn parse_profile(s: &str) -> Result<TolProfile, String> {
    s.parse()
}

impl RunArgs {
    fn spec(&self, fallback: &str) -> anyhow::Result<ExampleSpec> {
        let name = self.example.as_deref().unwrap_or(fallback);
        let n = self.n.unwrap_or(if matches!(name, "hyperbola" | "ellipse") { 1 } else { 2 });
        let mut spec = example(name, n)?;
        if let Some(h) = self.step {
            spec.imm = spec.imm.with_field_step(h);
        }
        Ok(spec)
    }

    fn config(&self, groups: &[&str]) -> SuiteConfig {
        let mut filter = self.only.clone();
        filter.extend(groups.iter().map(|g| g.to_string()));
        SuiteConfig {
            grid: self.grid.unwrap_or(21),
            coarse_grid: None,
            step: self.step,
            profile: self.tol_profile,
            seed: self.seed,
            samples: self.samples,
            filter,
            timings: self.timings,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Examples { action: ExamplesCmd::List } => {
            for name in NAMES {
                let n = if matches!(name, "hyperbola" | "ellipse") { 1 } else { 2 };
                let spec = example(name, n)?;
                println!("{name:<18} {}", describe(&spec));
            }
            Ok(true)
        }
        Cmd::Verify(a) => {
            let spec = a.spec("titeica")?;
            let report = run_suite(&spec, &a.config(&[]));
            print_checks(&report);
            finish(&a, &report)
        }
        Cmd::Tension(a) => tension(&a),
        Cmd::Invert(a) => invert(&a),
        Cmd::Boundary(a) => boundary(&a),
    }
}

fn print_checks(report: &Report) {
    println!("{} n={} grid={} profile={:?}", report.meta.example, report.meta.n, report.meta.grid, report.meta.tol_profile);
    for c in &report.checks {
        let residual = c.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
        let verdict = match c.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        let note = c.note.as_deref().map(|s| format!("  {s}")).unwrap_or_default();
        println!("{verdict} {:<36} {residual:>11}  tol {:.0e} {:?}{note}", c.name, c.tol, c.expect);
    }
    let failed = report.failures().len();
    println!("{} checks, {failed} failed", report.checks.len());
}

fn finish(a: &RunArgs, report: &Report) -> anyhow::Result<bool> {
    if let Some(path) = &a.report {
        fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(dir) = &a.csv {
        fs::create_dir_all(dir)?;
        write_checks_csv(&dir.join("checks.csv"), &report.checks)?;
    }
    Ok(report.passed())
}

fn write_checks_csv(path: &Path, checks: &[Check]) -> anyhow::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "name,residual,tol,expect,verdict")?;
    for c in checks {
        let r = c.residual.map(|r| format!("{r:.6e}")).unwrap_or_default();
        writeln!(f, "{},{r},{:e},{:?},{:?}", c.name, c.tol, c.expect, c.verdict)?;
    }
    Ok(())
}

fn tension(a: &RunArgs) -> anyhow::Result<bool> {
    let spec = a.spec("titeica")?;
    let mut cfg = a.config(&["harmonic"]);
    cfg.coarse_grid = a.grid;
    let report = run_suite(&spec, &cfg);
    match report.checks.iter().find(|c| c.name == "harmonic.tension") {
        Some(Check { residual: Some(r), .. }) => println!("sup ‖τ(𝒢_f)‖ = {r:.6e}"),
        _ => println!("sup ‖τ(𝒢_f)‖ unavailable"),
    }
    print_checks(&report);
    if let Some(dir) = &a.csv {
        fs::create_dir_all(dir)?;
        let lift = BlaschkeLift::new(&spec.imm, &spec.center())?;
        let chart = lift.q_chart();
        let mut f = fs::File::create(dir.join("tension.csv"))?;
        let coords: Vec<String> = (0..spec.n).map(|i| format!("u{i}")).collect();
        writeln!(f, "{},tension", coords.join(","))?;
        for p in spec.grid(coarse_points(&spec, &cfg)) {
            let (hi, gamma) = lift.domain_geometry(&p)?;
            let t = norm_at(&lift.q(&p)?, &spd_tension(&chart, &hi, &gamma, &p)?)?;
            let u: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
            writeln!(f, "{},{t:.6e}", u.join(","))?;
        }
    }
    finish(a, &report)
}

fn invert(a: &RunArgs) -> anyhow::Result<bool> {
    let spec = a.spec("scrambled-titeica")?;
    let Extra::Scrambled { lift, mu } = &spec.extra else {
        bail!("example `{}` carries no scrambled lift to invert", spec.name);
    };
    let cfg = a.config(&["invert"]);
    let report = run_suite(&spec, &cfg);
    print_checks(&report);
    if let Some(dir) = &a.csv {
        fs::create_dir_all(dir)?;
        let nodes = spec.grid(coarse_points(&spec, &cfg));
        let li = LiftedImmersion::new(lift.clone(), QuadricKind::Sphere, spec.center())?;
        let g = integrate_gauge(&li, &nodes, PATH_TOL_ANALYTIC.max(1e-8))?;
        let mut f = fs::File::create(dir.join("gauge.csv"))?;
        let coords: Vec<String> = (0..spec.n).map(|i| format!("u{i}")).collect();
        writeln!(f, "{},mu_hat,minus_mu", coords.join(","))?;
        for (p, m) in nodes.iter().zip(&g.values) {
            let u: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
            writeln!(f, "{},{m:.12e},{:.12e}", u.join(","), -mu.value(p)?[0])?;
        }
    }
    finish(a, &report)
}

fn boundary(a: &RunArgs) -> anyhow::Result<bool> {
    let spec = a.spec("titeica")?;
    let Some(cone) = spec.cone.as_ref() else {
        bail!("example `{}` has no boundary cone", spec.name);
    };
    let sigma = build_sigma(&spec.imm, SigmaKind::Minus, &spec.center())?;
    let eval = |p: &[f64]| sigma.value(p);
    let rays = sweep_rays(&eval, cone, &spec.rays, S_MAX);
    for (i, r) in rays.iter().enumerate() {
        match r {
            Ok(r) => println!("ray {i:>3} ratio {:.3e} ein {:.3e} lambda {:.3e}", r.limit.ratio, r.ein, r.lambda.max()),
            Err(e) => println!("ray {i:>3} {e}"),
        }
    }
    if let Some(dir) = &a.csv {
        fs::create_dir_all(dir)?;
        for (i, r) in rays.iter().enumerate() {
            if let Ok(r) = r {
                write_ray_csv(&dir.join(format!("ray_{i:03}.csv")), r)?;
            }
        }
        let ok: Vec<RayReport> = rays.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
        write_summary_csv(fs::File::create(dir.join("rays.csv"))?, &ok)?;
    }
    let report = run_suite(&spec, &a.config(&["boundary"]));
    print_checks(&report);
    finish(a, &report)
}
