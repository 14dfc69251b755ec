//! Points at infinity: projective limits of σ⁻ along rays, the hyperplane
//! boundary set Λ_Ω of a built-in convex cone, and the limits of the
//! ℝ-flow.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::linalg::{inverse, Matrix, Vector};
use crate::split::{ghat, r_action};

/// Default ray length.
pub const S_MAX: f64 = 10.0;
/// Successive dyadic distances must shrink at least by this factor.
pub const CAUCHY_RATIO: f64 = 0.9;
/// Below this the Cauchy test is considered settled.
const SETTLED: f64 = 1e-13;

/// A point of a projective space, stored by a unit representative.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ProjPoint {
    pub rep: Vector,
}

impl ProjPoint {
    pub fn new(v: &Vector) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NonFiniteValue("projective point"));
        }
        Ok(ProjPoint { rep: v / n })
    }

    /// min(∠(u,w), ∠(u,−w)).
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        let a = (&self.rep - &other.rep).norm();
        let b = (&self.rep + &other.rep).norm();
        2.0 * (0.5 * a.min(b)).min(1.0).asin()
    }

    /// Split a point of ℙ(V) into its v and φ classes; None for a zero part.
    pub fn parts(&self) -> (Option<ProjPoint>, Option<ProjPoint>) {
        let m = self.rep.len() / 2;
        let v = self.rep.rows(0, m).into_owned();
        let phi = self.rep.rows(m, m).into_owned();
        (ProjPoint::new(&v).ok().filter(|_| v.norm() > 1e-300), ProjPoint::new(&phi).ok())
    }
}

/// A pair ([v], [φ]) in ℙ(ℝᵐ) × ℙ(ℝᵐ*).
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundaryPair {
    pub v: ProjPoint,
    pub phi: ProjPoint,
}

impl BoundaryPair {
    pub fn new(v: &Vector, phi: &Vector) -> Result<Self> {
        Ok(BoundaryPair { v: ProjPoint::new(v)?, phi: ProjPoint::new(phi)? })
    }

    pub fn from_split(p: &ProjPoint) -> Result<Self> {
        match p.parts() {
            (Some(v), Some(phi)) => Ok(BoundaryPair { v, phi }),
            _ => Err(Error::NonFiniteValue("projective point")),
        }
    }

    pub fn distance(&self, other: &BoundaryPair) -> f64 {
        self.v.distance(&other.v).max(self.phi.distance(&other.phi))
    }
}

/// 2|ĝ(x,x)|/‖x‖², which lies in [0, 1] and vanishes exactly on the isotropic cone.
pub fn ein_membership(p: &ProjPoint) -> f64 {
    2.0 * ghat(&p.rep, &p.rep).abs() / p.rep.norm_squared()
}

/// Built-in properly convex cones.
#[derive(Clone, Debug)]
pub enum ConvexCone {
    /// G·ℝ₊ᵐ for invertible G (orthant when G = I, a sector when m = 2)
    Simplicial { gens: Matrix },
    /// A·{y : y_m ≥ |y'|}
    Ellipsoid { transform: Matrix },
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct LambdaResidual {
    /// distance of [v] from ∂C
    pub boundary: f64,
    /// |φ(v)| for unit representatives
    pub incidence: f64,
    /// failure of ±φ to be nonnegative on C
    pub support: f64,
}

impl LambdaResidual {
    pub fn max(&self) -> f64 {
        self.boundary.max(self.incidence).max(self.support)
    }
}

fn best_sign(f: impl Fn(f64) -> f64) -> f64 {
    f(1.0).min(f(-1.0))
}

impl ConvexCone {
    pub fn orthant(m: usize) -> Self {
        ConvexCone::Simplicial { gens: Matrix::identity(m, m) }
    }

    /// Cone spanned by two vectors of ℝ².
    pub fn segment(a: [f64; 2], b: [f64; 2]) -> Result<Self> {
        let gens = Matrix::from_column_slice(2, 2, &[a[0], a[1], b[0], b[1]]);
        inverse(&gens).map_err(|_| Error::UnsupportedCone("segment generators are parallel".into()))?;
        Ok(ConvexCone::Simplicial { gens })
    }

    pub fn lorentz(m: usize) -> Self {
        ConvexCone::Ellipsoid { transform: Matrix::identity(m, m) }
    }

    pub fn ellipsoid(transform: Matrix) -> Result<Self> {
        inverse(&transform).map_err(|_| Error::UnsupportedCone("singular transform".into()))?;
        Ok(ConvexCone::Ellipsoid { transform })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexCone::Simplicial { gens } => gens.nrows(),
            ConvexCone::Ellipsoid { transform } => transform.nrows(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConvexCone::Simplicial { gens } if gens.nrows() == 2 => "segment",
            ConvexCone::Simplicial { .. } => "orthant",
            ConvexCone::Ellipsoid { .. } => "ellipsoid",
        }
    }

    /// No segments in the projectivized boundary.
    pub fn strictly_convex(&self) -> bool {
        match self {
            ConvexCone::Simplicial { gens } => gens.nrows() <= 2,
            ConvexCone::Ellipsoid { .. } => true,
        }
    }

    fn coords(&self, v: &Vector) -> Vector {
        let c = match self {
            ConvexCone::Simplicial { gens } => inverse(gens).expect("checked at construction") * v,
            ConvexCone::Ellipsoid { transform } => inverse(transform).expect("checked at construction") * v,
        };
        let n = c.norm();
        c / n
    }

    fn dual_coords(&self, phi: &Vector) -> Vector {
        let c = match self {
            ConvexCone::Simplicial { gens } => gens.transpose() * phi,
            ConvexCone::Ellipsoid { transform } => transform.transpose() * phi,
        };
        let n = c.norm();
        c / n
    }

    /// Signed depth of [v] inside C (positive in the interior, up to sign of v).
    pub fn interior_margin(&self, v: &Vector) -> f64 {
        let c = self.coords(v);
        match self {
            ConvexCone::Simplicial { .. } => c.min().max(-c.max()),
            ConvexCone::Ellipsoid { .. } => lorentz_margin(&c),
        }
    }

    /// Signed depth of [φ] inside the dual cone.
    pub fn dual_interior_margin(&self, phi: &Vector) -> f64 {
        let c = self.dual_coords(phi);
        match self {
            ConvexCone::Simplicial { .. } => c.min().max(-c.max()),
            ConvexCone::Ellipsoid { .. } => lorentz_margin(&c),
        }
    }

    pub fn boundary_residual(&self, v: &Vector) -> f64 {
        let c = self.coords(v);
        match self {
            ConvexCone::Simplicial { .. } => best_sign(|s| (c.map(|x| x * s)).min().abs()),
            ConvexCone::Ellipsoid { .. } => lorentz_margin(&c).abs(),
        }
    }

    pub fn support_residual(&self, phi: &Vector) -> f64 {
        let c = self.dual_coords(phi);
        match self {
            ConvexCone::Simplicial { .. } => best_sign(|s| (-(c.map(|x| x * s)).min()).max(0.0)),
            ConvexCone::Ellipsoid { .. } => (-lorentz_margin(&c)).max(0.0),
        }
    }

    /// The unique supporting functional at a boundary point.
    pub fn support_at(&self, v: &Vector) -> Result<Vector> {
        if !self.strictly_convex() {
            return Err(Error::NotStrictlyConvex);
        }
        let c = self.coords(v);
        match self {
            ConvexCone::Simplicial { gens } => {
                let gi = inverse(gens)?;
                let k = if c[0].abs() < c[1].abs() { 0 } else { 1 };
                Ok(gi.row(k).transpose())
            }
            ConvexCone::Ellipsoid { transform } => {
                let m = c.len();
                let s = c[m - 1].signum();
                let mut psi = -&c * s;
                psi[m - 1] = c[m - 1] * s;
                Ok(inverse(&transform.transpose())? * psi)
            }
        }
    }

    pub fn lambda_membership(&self, v: &Vector, phi: &Vector) -> Result<LambdaResidual> {
        if v.len() != self.dim() || phi.len() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: v.len() });
        }
        let (vn, pn) = (v.norm(), phi.norm());
        if vn == 0.0 || pn == 0.0 {
            return Ok(LambdaResidual { boundary: 1.0, incidence: 1.0, support: 1.0 });
        }
        Ok(LambdaResidual {
            boundary: self.boundary_residual(v),
            incidence: (phi.dot(v) / (vn * pn)).abs(),
            support: self.support_residual(phi),
        })
    }

    /// Random pairs of Λ_Ω: generic boundary points with a supporting functional.
    pub fn sample_lambda<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<BoundaryPair> {
        let m = self.dim();
        (0..count)
            .map(|_| match self {
                ConvexCone::Simplicial { gens } => {
                    let face = rng.gen_range(0..m);
                    let c = Vector::from_fn(m, |i, _| if i == face { 0.0 } else { rng.gen_range(0.05..1.0) });
                    let gi = inverse(gens).expect("checked at construction");
                    BoundaryPair::new(&(gens * c), &gi.row(face).transpose()).expect("nonzero")
                }
                ConvexCone::Ellipsoid { transform } => {
                    let mut y = Vector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
                    y[m - 1] = 0.0;
                    let y = if y.norm() < 1e-3 { Vector::from_fn(m, |i, _| if i == 0 { 1.0 } else { 0.0 }) } else { y.normalize() };
                    let mut psi = -&y;
                    let mut yy = y;
                    yy[m - 1] = 1.0;
                    psi[m - 1] = 1.0;
                    let phi = inverse(&transform.transpose()).expect("checked at construction") * psi;
                    BoundaryPair::new(&(transform * yy), &phi).expect("nonzero")
                }
            })
            .collect()
    }
}

fn lorentz_margin(c: &Vector) -> f64 {
    let m = c.len();
    let tail = c.rows(0, m - 1).norm();
    (c[m - 1].abs() - tail) / std::f64::consts::SQRT_2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RayScale {
    Linear,
    /// chart parameter sinh(s), for charts where geodesic distance grows like asinh
    Sinh,
}

/// Ray p(s) = origin + r(s)·direction with r(s) = s or sinh s.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Ray {
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
    pub scale: RayScale,
}

impl Ray {
    pub fn linear(origin: Vec<f64>, direction: Vec<f64>) -> Self {
        Ray { origin, direction, scale: RayScale::Linear }
    }

    pub fn at(&self, s: f64) -> Vec<f64> {
        let r = match self.scale {
            RayScale::Linear => s,
            RayScale::Sinh => s.sinh(),
        };
        self.origin.iter().zip(&self.direction).map(|(o, d)| o + r * d).collect()
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ProjectiveLimit {
    /// (s, normalized value) at s_max/4, s_max/2, s_max
    pub table: Vec<(f64, ProjPoint)>,
    pub limit: ProjPoint,
    /// ratio of successive dyadic distances
    pub ratio: f64,
}

/// Normalized values at the dyadic samples with a Cauchy certificate.
pub fn projective_limit(eval: &(dyn Fn(&[f64]) -> Result<Vector> + Sync), ray: &Ray, s_max: f64) -> Result<ProjectiveLimit> {
    let table = [0.25, 0.5, 1.0]
        .iter()
        .map(|f| {
            let s = f * s_max;
            Ok((s, ProjPoint::new(&eval(&ray.at(s))?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let d1 = table[0].1.distance(&table[1].1);
    let d2 = table[1].1.distance(&table[2].1);
    let ratio = if d2 <= SETTLED { 0.0 } else { d2 / d1 };
    if ratio > CAUCHY_RATIO {
        return Err(Error::NoConvergence(ratio));
    }
    let limit = table[2].1.clone();
    Ok(ProjectiveLimit { table, limit, ratio })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RayReport {
    pub ray: Ray,
    pub limit: ProjectiveLimit,
    pub pair: BoundaryPair,
    pub ein: f64,
    pub lambda: LambdaResidual,
}

pub fn ray_report(eval: &(dyn Fn(&[f64]) -> Result<Vector> + Sync), cone: &ConvexCone, ray: &Ray, s_max: f64) -> Result<RayReport> {
    let limit = projective_limit(eval, ray, s_max)?;
    let pair = BoundaryPair::from_split(&limit.limit)?;
    let lambda = cone.lambda_membership(&pair.v.rep, &pair.phi.rep)?;
    Ok(RayReport { ray: ray.clone(), ein: ein_membership(&limit.limit), pair, limit, lambda })
}

/// Ray reports in input order; rays whose Cauchy test fails are kept as errors.
pub fn sweep_rays(eval: &(dyn Fn(&[f64]) -> Result<Vector> + Sync), cone: &ConvexCone, rays: &[Ray], s_max: f64) -> Vec<Result<RayReport>> {
    rays.par_iter().map(|r| ray_report(eval, cone, r, s_max)).collect()
}

/// Largest pair distance between the limits of σ and of Ψ_t∘σ over `ts`.
pub fn flow_invariance(eval: &(dyn Fn(&[f64]) -> Result<Vector> + Sync), ray: &Ray, ts: &[f64], s_max: f64) -> Result<f64> {
    let base = BoundaryPair::from_split(&projective_limit(eval, ray, s_max)?.limit)?;
    let mut worst = 0.0f64;
    for &t in ts {
        let flowed = |p: &[f64]| -> Result<Vector> { Ok(r_action(t, &eval(p)?)) };
        let pair = BoundaryPair::from_split(&projective_limit(&flowed, ray, s_max)?.limit)?;
        worst = worst.max(base.distance(&pair));
    }
    Ok(worst)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct FlowLimits {
    pub forward: ProjPoint,
    pub backward: ProjPoint,
    /// distance of the t → +∞ limit from [f(p), 0]
    pub forward_gap: f64,
    /// distance of the t → −∞ limit from [0, ν(p)]
    pub backward_gap: f64,
    /// depth of [f(p)] in C and of [ν(p)] in the dual cone
    pub margins: (f64, f64),
}

/// Limits of Ψ_t σ(p) as t → ±∞, evaluated at |t| = t_abs.
pub fn flow_boundary(value: &Vector, f: &Vector, nu: &Vector, cone: &ConvexCone, t_abs: f64) -> Result<FlowLimits> {
    let m = f.len();
    let forward = ProjPoint::new(&r_action(t_abs, value))?;
    let backward = ProjPoint::new(&r_action(-t_abs, value))?;
    let mut fv = Vector::zeros(2 * m);
    fv.rows_mut(0, m).copy_from(f);
    let mut nv = Vector::zeros(2 * m);
    nv.rows_mut(m, m).copy_from(nu);
    Ok(FlowLimits {
        forward_gap: forward.distance(&ProjPoint::new(&fv)?),
        backward_gap: backward.distance(&ProjPoint::new(&nv)?),
        forward,
        backward,
        margins: (cone.interior_margin(f), cone.dual_interior_margin(nu)),
    })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct GraphReport {
    pub pairs: Vec<BoundaryPair>,
    /// max |φ(v)|
    pub incidence: f64,
    /// max distance of [φ] from the unique supporting functional at [v]
    pub uniqueness: f64,
    /// smallest d(φ,φ') over pairs with d(v,v') above the tolerance
    pub injectivity: f64,
}

/// Checks that the sampled ray limits lie on the graph of v ↦ φ_v.
pub fn tau_boundary_graph(reports: &[RayReport], cone: &ConvexCone, tol: f64) -> Result<GraphReport> {
    if !cone.strictly_convex() {
        return Err(Error::NotStrictlyConvex);
    }
    let pairs: Vec<BoundaryPair> = reports.iter().map(|r| r.pair.clone()).collect();
    let mut incidence = 0.0f64;
    let mut uniqueness = 0.0f64;
    for p in &pairs {
        incidence = incidence.max(p.phi.rep.dot(&p.v.rep).abs());
        let expect = ProjPoint::new(&cone.support_at(&p.v.rep)?)?;
        uniqueness = uniqueness.max(expect.distance(&p.phi));
    }
    let mut injectivity = f64::INFINITY;
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i + 1..] {
            if a.v.distance(&b.v) > tol {
                injectivity = injectivity.min(a.phi.distance(&b.phi));
            }
        }
    }
    Ok(GraphReport { pairs, incidence, uniqueness, injectivity })
}

/// Largest over targets of the distance to the nearest ray limit.
pub fn surjectivity_gap(targets: &[BoundaryPair], limits: &[BoundaryPair]) -> f64 {
    targets.iter().map(|t| limits.iter().map(|l| t.distance(l)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

/// One CSV per ray table: s, projective coordinates, ein residual.
pub fn write_ray_csv(path: &Path, report: &RayReport) -> Result<()> {
    let m = report.limit.limit.rep.len();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let mut header = vec!["s".to_string()];
    header.extend((0..m).map(|i| format!("x{i}")));
    header.extend(["ein", "boundary", "incidence", "support"].map(String::from));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (s, p) in &report.limit.table {
        let mut row = vec![format!("{s}")];
        row.extend(p.rep.iter().map(|x| format!("{x:.15e}")));
        let lam = match BoundaryPair::from_split(p) {
            Ok(bp) => report_lambda(&bp, &report.lambda),
            Err(_) => LambdaResidual { boundary: 1.0, incidence: 1.0, support: 1.0 },
        };
        row.push(format!("{:.6e}", ein_membership(p)));
        row.extend([lam.boundary, lam.incidence, lam.support].map(|x| format!("{x:.6e}")));
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn report_lambda(bp: &BoundaryPair, at_limit: &LambdaResidual) -> LambdaResidual {
    LambdaResidual { incidence: bp.phi.rep.dot(&bp.v.rep).abs(), ..*at_limit }
}

/// Writes a summary table of several ray reports.
pub fn write_summary_csv<W: Write>(out: W, reports: &[RayReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ray", "ratio", "ein", "boundary", "incidence", "support"]).map_err(|e| Error::Io(e.to_string()))?;
    for (i, r) in reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:.6e}", r.limit.ratio),
            format!("{:.6e}", r.ein),
            format!("{:.6e}", r.lambda.boundary),
            format!("{:.6e}", r.lambda.incidence),
            format!("{:.6e}", r.lambda.support),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{conormal, EquiaffineImmersion};
    use crate::numeric::{ChartMap, Dual2};
    use crate::sigma::{build_sigma, SigmaKind};

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn ein_examples() {
        let a = ProjPoint::new(&v(&[1.0, 1.0, 1.0, -1.0])).unwrap();
        assert!(ein_membership(&a) < 1e-15);
        let b = ProjPoint::new(&v(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        assert!(ein_membership(&b) < 1e-15);
        let c = ProjPoint::new(&v(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        assert!((ein_membership(&c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_examples() {
        let o = ConvexCone::orthant(3);
        assert!(o.lambda_membership(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 0.0, 1.0])).unwrap().max() < 1e-15);
        assert!(o.lambda_membership(&v(&[1.0, 1.0, 1.0]), &v(&[0.0, 0.0, 1.0])).unwrap().max() > 0.1);
        let s = ConvexCone::segment([1.0, 1.0], [1.0, -1.0]).unwrap();
        assert!(s.lambda_membership(&v(&[1.0, 1.0]), &v(&[1.0, -1.0])).unwrap().max() < 1e-15);
        assert!(matches!(o.support_at(&v(&[1.0, 0.0, 0.0])), Err(Error::NotStrictlyConvex)));
    }

    #[test]
    fn sampled_pairs_are_members() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = Matrix::from_row_slice(3, 3, &[1.0, 0.4, 0.0, 0.0, 1.0, 0.2, 0.1, 0.0, 1.0]);
        for cone in [ConvexCone::orthant(3), ConvexCone::ellipsoid(a).unwrap(), ConvexCone::segment([2.0, 1.0], [0.0, 1.0]).unwrap()] {
            for p in cone.sample_lambda(&mut rng, 20) {
                assert!(cone.lambda_membership(&p.v.rep, &p.phi.rep).unwrap().max() < 1e-12, "{}", cone.name());
                if cone.strictly_convex() {
                    let s = ProjPoint::new(&cone.support_at(&p.v.rep).unwrap()).unwrap();
                    assert!(s.distance(&p.phi) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hyperbola_limit() {
        let imm = EquiaffineImmersion::centroaffine(ChartMap::analytic(1, 2, |s| vec![s[0].cosh(), s[0].sinh()]), 1.0);
        let sigma = build_sigma(&imm, SigmaKind::Minus, &[0.0]).unwrap();
        let eval = |p: &[f64]| sigma.value(p);
        let ray = Ray::linear(vec![0.0], vec![1.0]);
        let lim = projective_limit(&eval, &ray, S_MAX).unwrap();
        let expect = ProjPoint::new(&v(&[-1.0, -1.0, 1.0, -1.0])).unwrap();
        assert!(lim.limit.distance(&expect) < 1e-3);
        assert!(flow_invariance(&eval, &ray, &[-1.0, 0.0, 1.0], S_MAX).unwrap() < 1e-6);
        let cone = ConvexCone::segment([1.0, 1.0], [1.0, -1.0]).unwrap();
        let reps: Vec<RayReport> =
            [1.0, -1.0].iter().map(|d| ray_report(&eval, &cone, &Ray::linear(vec![0.0], vec![*d]), S_MAX).unwrap()).collect();
        for r in &reps {
            assert!(r.lambda.max() < 1e-3 && r.ein < 1e-3, "{r:?}");
        }
        let g = tau_boundary_graph(&reps, &cone, 1e-2).unwrap();
        assert!(g.uniqueness < 1e-3 && g.injectivity > 0.1);
    }

    #[test]
    fn titeica_limits_and_flow() {
        let f = ChartMap::analytic(2, 3, |u: &[Dual2]| vec![u[0].exp(), u[1].exp(), (-(&u[0] + &u[1])).exp()]);
        let imm = EquiaffineImmersion::centroaffine(f, 1.0);
        let sigma = build_sigma(&imm, SigmaKind::Minus, &[0.0, 0.0]).unwrap();
        let eval = |p: &[f64]| sigma.value(p);
        let cone = ConvexCone::orthant(3);
        let r = ray_report(&eval, &cone, &Ray::linear(vec![0.0, 0.0], vec![1.0, 0.0]), S_MAX).unwrap();
        assert!(r.pair.v.distance(&ProjPoint::new(&v(&[1.0, 0.0, 0.0])).unwrap()) < 1e-3);
        assert!(r.pair.phi.distance(&ProjPoint::new(&v(&[0.0, 0.0, 1.0])).unwrap()) < 1e-3);
        assert!(r.lambda.max() < 1e-3);
        let val = sigma.value(&[0.0, 0.0]).unwrap();
        let fl = flow_boundary(&val, &imm.f.value(&[0.0, 0.0]).unwrap(), &conormal(&imm, &[0.0, 0.0]).unwrap(), &cone, 20.0).unwrap();
        assert!(fl.forward_gap < 1e-6 && fl.backward_gap < 1e-6);
        assert!(fl.margins.0 > 0.1 && fl.margins.1 > 0.1);
    }
}
