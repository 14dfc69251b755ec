//! Verification driver: runs every check implied by an example's manifest
//! and assembles a serializable report.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{affine_jet, codazzi_residuals, decompose_structure, is_proper_affine_sphere, pick_from_jet};
use crate::boundary::{flow_boundary, flow_invariance, surjectivity_gap, sweep_rays, tau_boundary_graph, Ray, RayReport, S_MAX};
use crate::error::{Error, Result};
use crate::examples::{example, scramble_gauge, ExampleSpec, Extra, JetSource, SphereType};
use crate::lift::{
    centered_variance, closedness_residual, extract_centroaffine_pair, horizontal_lift, integrate_gauge, LiftedImmersion, PATH_TOL_ANALYTIC,
};
use crate::numeric::linalg::{signature_of, Matrix};
use crate::numeric::{box_grid, sup};
use crate::sigma::{build_sigma, gauge_transform, maximality_verdict, QuadricImmersion, SigmaKind};
use crate::split::{axioms_report, contact_density, random_quadric_point, random_tangent, QuadricKind};
use crate::symmetric::{b_preservation, composed_tension, equivariance_residual, harmonicity_report, BlaschkeLift};

pub const SCHEMA: &str = "conormal-report/1";

/// Lower bound for |η∧(dη)ⁿ| on a Euclidean orthonormal frame at points
/// drawn by [`random_quadric_point`] with standard normal entries.
pub const CONTACT_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TolProfile {
    Analytic,
    Fd,
}

impl std::str::FromStr for TolProfile {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "analytic" => Ok(TolProfile::Analytic),
            "fd" => Ok(TolProfile::Fd),
            _ => Err(format!("unknown tolerance profile `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    pub structure: f64,
    pub codazzi: f64,
    pub sphere: f64,
    pub quadric: f64,
    pub metric: f64,
    pub horizontal: f64,
    pub mean_curvature: f64,
    pub maximal: f64,
    pub negative_floor: f64,
    pub gauge_variance: f64,
    pub homothety: f64,
    pub duality: f64,
    pub harmonic: f64,
    pub horizontal_block: f64,
    pub pipelines: f64,
    pub composed: f64,
    pub unimodular: f64,
    pub boundary: f64,
    pub flow: f64,
    pub surjectivity: f64,
    pub para_sasaki: f64,
    pub algebra: f64,
}

impl Tolerances {
    pub fn for_profile(p: TolProfile) -> Self {
        let base = Tolerances {
            structure: 1e-10,
            codazzi: 1e-7,
            sphere: 1e-6,
            quadric: 1e-10,
            metric: 1e-8,
            horizontal: 1e-6,
            mean_curvature: 1e-6,
            maximal: 1e-6,
            negative_floor: 1e-2,
            gauge_variance: 1e-6,
            homothety: 1e-7,
            duality: 1e-8,
            harmonic: 1e-4,
            horizontal_block: 1e-8,
            pipelines: 1e-4,
            composed: 1e-3,
            unimodular: 1e-9,
            boundary: 1e-3,
            flow: 1e-6,
            surjectivity: 5e-2,
            para_sasaki: 1e-5,
            algebra: 1e-12,
        };
        match p {
            TolProfile::Analytic => Tolerances { harmonic: 1e-6, ..base },
            TolProfile::Fd => Tolerances { structure: 1e-7, metric: 1e-6, sphere: 1e-5, maximal: 1e-5, ..base },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    /// residual ≤ tol
    Below,
    /// residual > tol (negative controls)
    Above,
    /// the computation must be refused
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: Option<f64>,
    pub tol: f64,
    pub expect: Expect,
    pub verdict: Verdict,
    pub provenance: String,
    pub seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema: String,
    pub version: String,
    pub example: String,
    pub n: usize,
    pub grid: usize,
    pub coarse_grid: usize,
    pub step: Option<f64>,
    pub tol_profile: TolProfile,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub grid: usize,
    pub coarse_grid: Option<usize>,
    pub step: Option<f64>,
    pub profile: Option<TolProfile>,
    pub seed: u64,
    pub samples: usize,
    /// run only groups whose name starts with one of these
    pub filter: Vec<String>,
    pub timings: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { grid: 21, coarse_grid: None, step: None, profile: None, seed: 7, samples: 100, filter: vec![], timings: false }
    }
}

struct Outcome {
    name: String,
    residual: Result<f64>,
    tol: f64,
    expect: Expect,
    note: Option<String>,
}

fn out(name: &str, residual: Result<f64>, tol: f64, expect: Expect) -> Outcome {
    Outcome { name: name.to_string(), residual, tol, expect, note: None }
}

type JobFn<'a> = Box<dyn Fn() -> Vec<Outcome> + Send + Sync + 'a>;

struct Job<'a> {
    group: &'static str,
    run: JobFn<'a>,
}

fn judge(o: &Outcome) -> (Option<f64>, Verdict, Option<String>) {
    match (&o.residual, o.expect) {
        (Ok(r), Expect::Below) if r.is_finite() => (Some(*r), if *r <= o.tol { Verdict::Pass } else { Verdict::Fail }, None),
        (Ok(r), Expect::Above) if r.is_finite() => (Some(*r), if *r > o.tol { Verdict::Pass } else { Verdict::Fail }, None),
        (Ok(r), Expect::Error) => (r.is_finite().then_some(*r), Verdict::Fail, Some("expected the computation to be refused".into())),
        (Ok(r), _) => (None, Verdict::Fail, Some(format!("non-finite residual {r}"))),
        (Err(e), Expect::Error) => (None, Verdict::Pass, Some(e.to_string())),
        (Err(e), _) => (None, Verdict::Fail, Some(e.to_string())),
    }
}

/// Builds the example and runs its checks.
pub fn run_example(name: &str, n: usize, cfg: &SuiteConfig) -> Result<Report> {
    let mut spec = example(name, n)?;
    if let Some(h) = cfg.step {
        spec.imm = spec.imm.with_field_step(h);
    }
    Ok(run_suite(&spec, cfg))
}

pub fn default_profile(spec: &ExampleSpec) -> TolProfile {
    match spec.jets {
        JetSource::Analytic => TolProfile::Analytic,
        JetSource::Fd => TolProfile::Fd,
    }
}

pub fn coarse_points(spec: &ExampleSpec, cfg: &SuiteConfig) -> usize {
    cfg.coarse_grid.unwrap_or(if spec.n <= 2 { 7 } else { 4 }).min(cfg.grid)
}

pub fn run_suite(spec: &ExampleSpec, cfg: &SuiteConfig) -> Report {
    let profile = cfg.profile.unwrap_or_else(|| default_profile(spec));
    let tol = Tolerances::for_profile(profile);
    let grid = spec.grid(cfg.grid);
    let coarse_n = coarse_points(spec, cfg);
    let coarse = spec.grid(coarse_n);
    let ctx = Ctx { spec, tol, grid, coarse, cfg };
    let jobs: Vec<Job> =
        ctx.jobs().into_iter().filter(|j| cfg.filter.is_empty() || cfg.filter.iter().any(|f| j.group.starts_with(f.as_str()))).collect();
    let provenance = match spec.jets {
        JetSource::Analytic => "analytic",
        JetSource::Fd => "fd",
    };
    let results: Vec<(Vec<Outcome>, f64)> = jobs
        .par_iter()
        .map(|j| {
            let t0 = Instant::now();
            let o = (j.run)();
            (o, t0.elapsed().as_secs_f64())
        })
        .collect();
    let mut checks = Vec::new();
    for (outcomes, secs) in results {
        for o in outcomes {
            let (residual, verdict, note) = judge(&o);
            checks.push(Check {
                name: o.name,
                residual,
                tol: o.tol,
                expect: o.expect,
                verdict,
                provenance: provenance.to_string(),
                seconds: cfg.timings.then_some(secs),
                note: o.note.or(note),
            });
        }
    }
    Report {
        meta: Meta {
            schema: SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            example: spec.name.clone(),
            n: spec.n,
            grid: cfg.grid,
            coarse_grid: coarse_n,
            step: cfg.step,
            tol_profile: profile,
            seed: cfg.seed,
            samples: cfg.samples,
        },
        checks,
    }
}

struct Ctx<'a> {
    spec: &'a ExampleSpec,
    tol: Tolerances,
    grid: Vec<Vec<f64>>,
    coarse: Vec<Vec<f64>>,
    cfg: &'a SuiteConfig,
}

fn par_sup(points: &[Vec<f64>], f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<f64> {
    let v: Vec<f64> = points.par_iter().map(|p| f(p)).collect::<Result<_>>()?;
    Ok(sup(v))
}

fn par_sup_many<const K: usize>(points: &[Vec<f64>], f: impl Fn(&[f64]) -> Result<[f64; K]> + Sync) -> Result<[f64; K]> {
    let v: Vec<[f64; K]> = points.par_iter().map(|p| f(p)).collect::<Result<_>>()?;
    let mut outv = [0.0; K];
    for (k, o) in outv.iter_mut().enumerate() {
        *o = sup(v.iter().map(|r| r[k]));
    }
    Ok(outv)
}

fn split<const K: usize>(names: [&str; K], r: Result<[f64; K]>, tol: f64) -> Vec<Outcome> {
    match r {
        Ok(v) => names.iter().zip(v).map(|(n, x)| out(n, Ok(x), tol, Expect::Below)).collect(),
        Err(e) => names.iter().map(|n| out(n, Err(e.clone()), tol, Expect::Below)).collect(),
    }
}

impl<'a> Ctx<'a> {
    fn jobs(&self) -> Vec<Job<'_>> {
        let mut jobs: Vec<Job> = vec![
            Job { group: "structure", run: Box::new(|| self.structure()) },
            Job { group: "codazzi", run: Box::new(|| self.codazzi()) },
            Job { group: "sphere", run: Box::new(|| self.sphere()) },
            Job { group: "sigma", run: Box::new(|| self.sigma(SigmaKind::Plus)) },
            Job { group: "sigma", run: Box::new(|| self.sigma(SigmaKind::Minus)) },
            Job { group: "maximality", run: Box::new(|| self.maximality()) },
            Job { group: "gauge", run: Box::new(|| self.negative_gauge()) },
            Job { group: "model", run: Box::new(|| self.model()) },
        ];
        if self.spec.manifest.harmonic.is_some() {
            jobs.push(Job { group: "harmonic", run: Box::new(|| self.harmonic()) });
        }
        if self.spec.cone.is_some() {
            jobs.push(Job { group: "boundary", run: Box::new(|| self.boundary()) });
        }
        match &self.spec.extra {
            Extra::Pseudoflat(map) => jobs.push(Job { group: "pseudoflat", run: Box::new(move || self.pseudoflat(map)) }),
            Extra::Scrambled { .. } => jobs.push(Job { group: "invert", run: Box::new(|| self.invert()) }),
            Extra::None => {}
        }
        jobs
    }

    fn structure(&self) -> Vec<Outcome> {
        let imm = &self.spec.imm;
        let t = self.tol.structure;
        let r = par_sup_many(&self.grid, |p| {
            let d = decompose_structure(imm, p)?;
            let c = imm.centroaffine_factor(p)?;
            let n = d.h.nrows();
            let shape = (&d.s + Matrix::identity(n, n) * c).amax();
            Ok([d.residual, d.tau.amax(), shape])
        });
        let mut v = split(["structure.reconstruction", "structure.tau", "structure.shape"], r, t);
        let sig = decompose_structure(imm, &self.spec.center()).and_then(|d| signature_of(&d.h)).map(|s| {
            if (s.positive, s.negative) == self.spec.manifest.signature {
                0.0
            } else {
                1.0
            }
        });
        v.push(out("structure.signature", sig, 0.5, Expect::Below));
        if let Some(known) = self.known_values() {
            v.push(out("structure.known", known, t, Expect::Below));
        }
        v
    }

    /// Exact Γ, h, S, τ for the closed-form examples.
    fn known_values(&self) -> Option<Result<f64>> {
        let imm = &self.spec.imm;
        let (h, gamma): (Matrix, Option<(f64, f64)>) = match (self.spec.name.as_str(), self.spec.n) {
            ("hyperbola", 1) | ("ellipse", 1) => (Matrix::identity(1, 1), None),
            ("titeica", 2) => (Matrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]), Some((1.0 / 3.0, -2.0 / 3.0))),
            _ => return None,
        };
        let r = par_sup(&self.grid, |p| {
            let d = decompose_structure(imm, p)?;
            let n = h.nrows();
            let c = imm.centroaffine_factor(p)?;
            let mut r = (&d.h - &h).amax().max((&d.s + Matrix::identity(n, n) * c).amax()).max(d.tau.amax());
            match gamma {
                None => r = r.max(d.gamma.iter().map(|g| g.amax()).fold(0.0, f64::max)),
                Some((guu, gvuu)) => r = r.max((d.gamma[0][(0, 0)] - guu).abs()).max((d.gamma[1][(0, 0)] - gvuu).abs()),
            }
            Ok(r)
        });
        Some(r)
    }

    fn codazzi(&self) -> Vec<Outcome> {
        let imm = &self.spec.imm;
        let r = par_sup_many(&self.grid, |p| {
            let aj = affine_jet(imm, p)?;
            let c = codazzi_residuals(&aj);
            let pd = pick_from_jet(&aj)?;
            Ok([c.h, c.s.max(c.s_symmetry), pd.symmetry_residual(), pd.cubic_form_residual()])
        });
        split(["codazzi.h", "codazzi.s", "pick.symmetry", "pick.cubic_form"], r, self.tol.codazzi)
    }

    fn sphere(&self) -> Vec<Outcome> {
        let expect = if self.spec.manifest.affine_sphere.is_some() { Expect::Below } else { Expect::Above };
        let tol = if expect == Expect::Below { self.tol.sphere } else { self.tol.negative_floor };
        let r = is_proper_affine_sphere(&self.spec.imm, &self.grid, self.tol.sphere).map(|s| s.sup_tr_c);
        vec![out("sphere.trace_c", r, tol, expect)]
    }

    fn sigma(&self, kind: SigmaKind) -> Vec<Outcome> {
        let tag = match kind {
            SigmaKind::Plus => "sigma+",
            SigmaKind::Minus => "sigma-",
        };
        let names = ["norm", "metric", "horizontality", "deta_pullback"].map(|s| format!("{tag}.{s}"));
        let mc = format!("{tag}.mean_curvature");
        let sigma = match build_sigma(&self.spec.imm, kind, &self.spec.center()) {
            Ok(s) => s,
            Err(e) => {
                let mut v: Vec<Outcome> = names.iter().map(|n| out(n, Err(e.clone()), self.tol.quadric, Expect::Below)).collect();
                v.push(out(&mc, Err(e), self.tol.mean_curvature, Expect::Below));
                return v;
            }
        };
        let first = par_sup_many(&self.grid, |p| {
            let r = sigma.map.first_order(p)?;
            Ok([r.norm, sigma.metric_match(p)?, r.horizontality, r.anti_invariance])
        });
        let tols = [self.tol.quadric, self.tol.metric, self.tol.horizontal, self.tol.horizontal];
        let mut v: Vec<Outcome> = match first {
            Ok(vals) => names.iter().zip(vals).zip(tols).map(|((n, x), t)| out(n, Ok(x), t, Expect::Below)).collect(),
            Err(e) => names.iter().zip(tols).map(|(n, t)| out(n, Err(e.clone()), t, Expect::Below)).collect(),
        };
        let cross = par_sup(&self.coarse, |p| {
            let d = sigma.at(p)?;
            let h = sigma.mean_curvature_pick(p, None)?;
            Ok((&d.mean_curvature - h).amax())
        });
        v.push(out(&mc, cross, self.tol.mean_curvature, Expect::Below));
        v
    }

    fn maximality(&self) -> Vec<Outcome> {
        let m = &self.spec.manifest;
        let verdict = build_sigma(&self.spec.imm, SigmaKind::Plus, &self.spec.center())
            .and_then(|s| maximality_verdict(&s, &self.coarse, self.tol.maximal));
        let (expect, tol) = if m.maximal { (Expect::Below, self.tol.maximal) } else { (Expect::Above, self.tol.negative_floor) };
        let mut v = vec![out("maximality.mean_curvature", verdict.clone().map(|x| x.sup_h), tol, expect)];
        let bicond = verdict.clone().map(|x| if x.consistent() && x.maximal == m.maximal { 0.0 } else { 1.0 });
        let mut o = out("maximality.dual_sphere_agreement", bicond, 0.5, Expect::Below);
        if let Ok(x) = &verdict {
            o.note = Some(format!("maximal={} dual_sphere={} dual_sup_tr_c={:.3e}", x.maximal, x.dual_sphere, x.dual_sup_tr_c));
        }
        v.push(o);
        v
    }

    fn negative_gauge(&self) -> Vec<Outcome> {
        let r = build_sigma(&self.spec.imm, SigmaKind::Minus, &self.spec.center()).and_then(|s| {
            let q = QuadricImmersion::new(gauge_transform(&s.map.chart, &scramble_gauge(self.spec.n)), s.map.kind);
            par_sup(&self.coarse, |p| q.horizontality_residual(p))
        });
        vec![out("gauge.scrambled_horizontality", r, self.tol.negative_floor, Expect::Above)]
    }

    fn model(&self) -> Vec<Outcome> {
        model_checks(self.spec.n + 1, self.cfg.samples, self.cfg.seed, &self.tol)
    }

    fn harmonic(&self) -> Vec<Outcome> {
        let expect_harmonic = self.spec.manifest.harmonic == Some(true);
        let lift = match BlaschkeLift::new(&self.spec.imm, &self.spec.center()) {
            Ok(l) => l,
            Err(e) => return vec![out("harmonic.tension", Err(e), self.tol.harmonic, Expect::Below)],
        };
        let det = par_sup(&self.coarse, |p| Ok(lift.q(p)?.determinant() - 1.0));
        let mut v = vec![out("harmonic.unit_determinant", det, self.tol.unimodular, Expect::Below)];
        let (expect, tol) = if expect_harmonic { (Expect::Below, self.tol.harmonic) } else { (Expect::Above, self.tol.negative_floor) };
        match harmonicity_report(&lift, &self.coarse, self.tol.harmonic) {
            Ok(rep) => {
                v.push(out("harmonic.tension", Ok(rep.sup_tension), tol, expect));
                if expect_harmonic {
                    let opt = |x: Option<f64>| x.ok_or(Error::FrameNotUnimodular(f64::NAN));
                    v.push(out("harmonic.horizontal_block", opt(rep.sup_k_m), self.tol.horizontal_block, Expect::Below));
                    v.push(out("harmonic.pipelines", opt(rep.pipeline_gap), self.tol.pipelines, Expect::Below));
                    v.push(out("harmonic.pick_trace", opt(rep.pick_trace_gap), self.tol.pipelines, Expect::Below));
                }
            }
            Err(e) => v.push(out("harmonic.tension", Err(e), tol, expect)),
        }
        let composed = par_sup(&self.coarse, |p| Ok(composed_tension(&lift, p)?.1));
        let ctol = if expect_harmonic { self.tol.composed } else { self.tol.negative_floor };
        v.push(out("harmonic.composed", composed, ctol, expect));
        v
    }

    fn boundary(&self) -> Vec<Outcome> {
        let cone = self.spec.cone.as_ref().expect("job only scheduled with a cone");
        let t = self.tol;
        let sigma = match build_sigma(&self.spec.imm, SigmaKind::Minus, &self.spec.center()) {
            Ok(s) => s,
            Err(e) => return vec![out("boundary.lambda", Err(e), t.boundary, Expect::Below)],
        };
        let eval = |p: &[f64]| sigma.value(p);
        let reports: Vec<Result<RayReport>> = sweep_rays(&eval, cone, &self.spec.rays, S_MAX);
        let ok: Result<Vec<RayReport>> = reports.into_iter().collect();
        let mut v = Vec::new();
        match &ok {
            Ok(reps) => {
                v.push(out("boundary.lambda", Ok(sup(reps.iter().map(|r| r.lambda.max()))), t.boundary, Expect::Below));
                v.push(out("boundary.ein", Ok(sup(reps.iter().map(|r| r.ein))), t.boundary, Expect::Below));
            }
            Err(e) => {
                v.push(out("boundary.lambda", Err(e.clone()), t.boundary, Expect::Below));
                v.push(out("boundary.ein", Err(e.clone()), t.boundary, Expect::Below));
            }
        }
        let flow = self
            .spec
            .rays
            .par_iter()
            .take(8)
            .map(|r| flow_invariance(&eval, r, &[-1.0, 0.0, 1.0], S_MAX))
            .collect::<Result<Vec<f64>>>()
            .map(sup);
        v.push(out("boundary.flow_invariance", flow, t.flow, Expect::Below));
        let c = self.spec.center();
        let fl = (|| {
            let val = sigma.value(&c)?;
            let f = self.spec.imm.f.value(&c)?;
            let nu = crate::affine::conormal(&self.spec.imm, &c)?;
            flow_boundary(&val, &f, &nu, cone, 20.0)
        })();
        v.push(out(
            "boundary.flow_limits",
            fl.as_ref().map(|x| x.forward_gap.max(x.backward_gap)).map_err(Clone::clone),
            t.flow,
            Expect::Below,
        ));
        v.push(out("boundary.flow_interior", fl.map(|x| x.margins.0.min(x.margins.1)), 0.0, Expect::Above));
        let graph = ok.clone().and_then(|reps| tau_boundary_graph(&reps, cone, t.boundary));
        let expect = if cone.strictly_convex() { Expect::Below } else { Expect::Error };
        v.push(out("boundary.graph", graph.map(|g| g.incidence.max(g.uniqueness)), t.boundary, expect));
        let surj = surjectivity_rays(self.spec).map(|rays| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x005e_edb0);
            let targets = cone.sample_lambda(&mut rng, 20);
            let limits: Vec<_> = sweep_rays(&eval, cone, &rays, S_MAX).into_iter().filter_map(|r| r.ok()).map(|r| r.pair).collect();
            surjectivity_gap(&targets, &limits)
        });
        if let Some(gap) = surj {
            v.push(out("boundary.surjectivity", Ok(gap), t.surjectivity, Expect::Below));
        }
        v
    }

    fn pseudoflat(&self, map: &QuadricImmersion) -> Vec<Outcome> {
        let pts = box_grid(self.spec.n + 1, coarse_points(self.spec, self.cfg), -1.0, 1.0);
        let base = map.induced_metric(&pts[0]);
        let r = par_sup_many(&pts, |p| {
            let r = map.first_order(p)?;
            let (g, _) = map.induced_metric(p)?;
            let g0 = base.as_ref().map_err(Clone::clone)?;
            Ok([r.norm, (g - &g0.0).amax()])
        });
        let mut v = split(["pseudoflat.norm", "pseudoflat.constant_metric"], r, self.tol.quadric);
        v[1].tol = self.tol.metric;
        v
    }

    fn invert(&self) -> Vec<Outcome> {
        let Extra::Scrambled { lift, mu } = &self.spec.extra else { return vec![] };
        let t = self.tol;
        let names = ["invert.closed", "invert.gauge_variance", "invert.homothety_spread", "invert.duality"];
        let tols = [t.horizontal, t.gauge_variance, t.homothety, t.duality];
        let r = (|| -> Result<[f64; 4]> {
            let li = LiftedImmersion::new(lift.clone(), QuadricKind::Sphere, self.spec.center())?;
            let closed = closedness_residual(&li, &self.coarse)?;
            let g = integrate_gauge(&li, &self.coarse, PATH_TOL_ANALYTIC.max(1e-8))?;
            let truth: Vec<f64> = self.coarse.iter().map(|p| Ok(-mu.value(p)?[0])).collect::<Result<_>>()?;
            let var = centered_variance(&g.values, &truth);
            let hl = horizontal_lift(&li);
            let (f, _, dual) = extract_centroaffine_pair(&hl, &self.coarse)?;
            let ratios: Vec<f64> = self
                .coarse
                .iter()
                .map(|p| {
                    let a = f.value(p)?;
                    let b = self.spec.imm.f.value(p)?;
                    Ok(a.dot(&b) / b.norm_squared())
                })
                .collect::<Result<_>>()?;
            let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) - ratios.iter().cloned().fold(f64::MAX, f64::min);
            Ok([closed, var, spread, dual.pairing.max(dual.tangential)])
        })();
        match r {
            Ok(vals) => names.iter().zip(vals).zip(tols).map(|((n, x), t)| out(n, Ok(x), t, Expect::Below)).collect(),
            Err(e) => names.iter().zip(tols).map(|(n, t)| out(n, Err(e.clone()), t, Expect::Below)).collect(),
        }
    }
}

/// Rays dense enough to approach any sampled pair of Λ_Ω within the
/// surjectivity tolerance; None where no such family is provided.
pub fn surjectivity_rays(spec: &ExampleSpec) -> Option<Vec<Ray>> {
    let n = spec.n;
    match spec.name.as_str() {
        "hyperbola" => Some(spec.rays.clone()),
        "titeica" if n <= 3 => {
            let mut rays = Vec::new();
            for d in crate::examples::titeica_directions(n) {
                let dv = crate::numeric::Vector::from_column_slice(&d);
                let comp = crate::numeric::linalg::orthogonal_complement(&[dv], n);
                let pts = box_grid(n - 1, 61, -3.0, 3.0);
                for c in pts {
                    let mut o = vec![0.0; n];
                    for (k, ck) in c.iter().enumerate() {
                        for i in 0..n {
                            o[i] += ck * comp[(i, k)];
                        }
                    }
                    rays.push(Ray::linear(o, d.clone()));
                }
            }
            Some(rays)
        }
        "hyperboloid" if n <= 3 => {
            let dirs = match n {
                3 => fibonacci_sphere(4000),
                _ => crate::examples::sphere_directions(n, 180),
            };
            Some(dirs.into_iter().map(|d| Ray { origin: vec![0.0; n], direction: d, scale: crate::boundary::RayScale::Sinh }).collect())
        }
        _ => None,
    }
}

fn fibonacci_sphere(k: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..k)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            vec![r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// Para-Sasaki axioms and contact density at seeded random points of both
/// quadrics of ℝ^{m,m}, and the ι/Φ algebra over random draws.
fn model_checks(m: usize, samples: usize, seed: u64, tol: &Tolerances) -> Vec<Outcome> {
    let mut v = Vec::new();
    for kind in [QuadricKind::Sphere, QuadricKind::Hyperbolic] {
        let tag = match kind {
            QuadricKind::Sphere => "sphere",
            QuadricKind::Hyperbolic => "hyperbolic",
        };
        let r = para_sasaki_sweep(m, kind, samples, seed);
        match r {
            Ok((ax, floor)) => {
                v.push(out(&format!("model.para_sasaki.{tag}"), Ok(ax), tol.para_sasaki, Expect::Below));
                v.push(out(&format!("model.contact_floor.{tag}"), Ok(floor), CONTACT_FLOOR, Expect::Above));
            }
            Err(e) => {
                v.push(out(&format!("model.para_sasaki.{tag}"), Err(e.clone()), tol.para_sasaki, Expect::Below));
                v.push(out(&format!("model.contact_floor.{tag}"), Err(e), CONTACT_FLOOR, Expect::Above));
            }
        }
    }
    let (b, eq) = algebra_sweep(m, samples, seed);
    v.push(out("model.iota_preserves_b", b, tol.algebra, Expect::Below));
    v.push(out("model.equivariance", eq, tol.algebra, Expect::Below));
    v
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}

/// (max axiom residual, min contact density) over seeded samples.
pub fn para_sasaki_sweep(m: usize, kind: QuadricKind, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(kind.sign().to_bits()));
    let draws: Vec<_> = (0..samples)
        .map(|_| {
            let q = random_quadric_point(m, kind, || normal(&mut rng));
            let x = random_tangent(&q, || normal(&mut rng));
            let y = random_tangent(&q, || normal(&mut rng));
            (q, x, y)
        })
        .collect();
    let res: Vec<(f64, f64)> = draws
        .par_iter()
        .map(|(q, x, y)| Ok((axioms_report(q, &[(x.clone(), y.clone())])?.max(), contact_density(q)?)))
        .collect::<Result<_>>()?;
    let ax = sup(res.iter().map(|r| r.0));
    let floor = res.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok((ax, floor))
}

/// Random M ∈ SL(m) as exp of a traceless matrix and random Q ∈ 𝕏_m.
pub fn random_sl_pair(m: usize, rng: &mut ChaCha8Rng) -> (Matrix, Matrix) {
    let mut a = Matrix::from_fn(m, m, |_, _| rng.gen_range(-0.5..0.5));
    let tr = a.trace() / m as f64;
    for i in 0..m {
        a[(i, i)] -= tr;
    }
    let b = Matrix::from_fn(m, m, |_, _| rng.gen_range(-0.5..0.5));
    let s = (&b + b.transpose()) * 0.5;
    let tr = s.trace() / m as f64;
    let s = s - Matrix::identity(m, m) * tr;
    (a.exp(), s.exp())
}

pub fn algebra_sweep(m: usize, samples: usize, seed: u64) -> (Result<f64>, Result<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0a19_eb7a);
    let draws: Vec<(Matrix, Matrix)> = (0..samples).map(|_| random_sl_pair(m, &mut rng)).collect();
    let b = draws.iter().map(|(mm, _)| b_preservation(mm)).collect::<Result<Vec<_>>>().map(sup);
    let e = draws.iter().map(|(mm, q)| equivariance_residual(mm, q)).collect::<Result<Vec<_>>>().map(sup);
    (b, e)
}

/// Sphere type reported by the manifest, for listings.
pub fn describe(spec: &ExampleSpec) -> String {
    let kind = match spec.manifest.affine_sphere {
        Some(SphereType::Hyperbolic) => "hyperbolic affine sphere",
        Some(SphereType::Elliptic) => "elliptic affine sphere",
        None => "not an affine sphere",
    };
    let jets = match spec.jets {
        JetSource::Analytic => "analytic jets",
        JetSource::Fd => "fd jets",
    };
    let cone = spec.manifest.cone.map(|c| format!(", cone {c}")).unwrap_or_default();
    format!("{kind}, {jets}{cone}")
}
