//! Registry of built-in immersions with their expected properties.

use crate::affine::EquiaffineImmersion;
use crate::boundary::{ConvexCone, Ray, RayScale};
use crate::error::{Error, Result};
use crate::numeric::linalg::{Matrix, Vector};
use crate::numeric::{ChartMap, Dual2};
use crate::sigma::{build_sigma, gauge_transform, QuadricImmersion, SigmaKind};

/// FD step for the quartic chart and its derived fields.
pub const QUARTIC_STEP: f64 = 3e-3;

pub const NAMES: [&str; 8] = ["hyperbola", "ellipse", "titeica", "sphere", "hyperboloid", "quartic", "pseudoflat", "scrambled-titeica"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SphereType {
    Hyperbolic,
    Elliptic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JetSource {
    Analytic,
    Fd,
}

/// Expected properties; each entry maps to a suite check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Manifest {
    pub affine_sphere: Option<SphereType>,
    /// signature (positive, negative) of the affine metric of (f, ξ)
    pub signature: (usize, usize),
    pub maximal: bool,
    pub cone: Option<&'static str>,
    pub harmonic: Option<bool>,
}

#[derive(Clone, Debug)]
pub enum Extra {
    None,
    /// Ψ_t σ⁻ as a chart on ℝⁿ × ℝ, last coordinate t
    Pseudoflat(QuadricImmersion),
    /// Ψ_μ σ⁺ and the true gauge μ
    Scrambled {
        lift: ChartMap,
        mu: ChartMap,
    },
}

#[derive(Clone, Debug)]
pub struct ExampleSpec {
    pub name: String,
    pub n: usize,
    pub imm: EquiaffineImmersion,
    pub jets: JetSource,
    pub manifest: Manifest,
    /// chart box [lo, hi]ⁿ
    pub domain: (f64, f64),
    pub cone: Option<ConvexCone>,
    pub rays: Vec<Ray>,
    pub extra: Extra,
}

impl ExampleSpec {
    pub fn grid(&self, points: usize) -> Vec<Vec<f64>> {
        crate::numeric::box_grid(self.n, points, self.domain.0, self.domain.1)
    }

    pub fn center(&self) -> Vec<f64> {
        vec![0.5 * (self.domain.0 + self.domain.1); self.n]
    }
}

pub fn list() -> &'static [&'static str] {
    &NAMES
}

pub fn example(name: &str, n: usize) -> Result<ExampleSpec> {
    let bad = || Err(Error::BadDimension { name: name.to_string(), n });
    if n == 0 {
        return bad();
    }
    match name {
        "hyperbola" if n == 1 => Ok(hyperbola()),
        "ellipse" if n == 1 => Ok(ellipse()),
        "hyperbola" | "ellipse" => bad(),
        "titeica" => Ok(titeica(n)),
        "sphere" => Ok(sphere(n)),
        "hyperboloid" => Ok(hyperboloid(n)),
        "quartic" => Ok(quartic(n)),
        "pseudoflat" => pseudoflat(n),
        "scrambled-titeica" => scrambled(n),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn hyperbola() -> ExampleSpec {
    let f = ChartMap::analytic(1, 2, |s| vec![s[0].cosh(), s[0].sinh()]);
    ExampleSpec {
        name: "hyperbola".into(),
        n: 1,
        imm: EquiaffineImmersion::centroaffine(f, 1.0),
        jets: JetSource::Analytic,
        manifest: Manifest {
            affine_sphere: Some(SphereType::Hyperbolic),
            signature: (1, 0),
            maximal: true,
            cone: Some("segment"),
            harmonic: Some(true),
        },
        domain: (-1.0, 1.0),
        cone: Some(ConvexCone::segment([1.0, 1.0], [1.0, -1.0]).expect("independent")),
        rays: [1.0, -1.0].iter().map(|d| Ray { origin: vec![0.0], direction: vec![*d], scale: RayScale::Linear }).collect(),
        extra: Extra::None,
    }
}

fn ellipse() -> ExampleSpec {
    let f = ChartMap::analytic(1, 2, |s| vec![s[0].cos().scale(2.0), s[0].sin().scale(0.5)]);
    ExampleSpec {
        name: "ellipse".into(),
        n: 1,
        imm: EquiaffineImmersion::centroaffine(f, -1.0),
        jets: JetSource::Analytic,
        manifest: Manifest { affine_sphere: Some(SphereType::Elliptic), signature: (1, 0), maximal: true, cone: None, harmonic: None },
        domain: (-1.0, 1.0),
        cone: None,
        rays: vec![],
        extra: Extra::None,
    }
}

fn titeica_chart(n: usize) -> ChartMap {
    ChartMap::analytic(n, n + 1, move |u: &[Dual2]| {
        let mut out: Vec<Dual2> = u.iter().map(|x| x.exp()).collect();
        let s = u.iter().skip(1).fold(u[0].clone(), |a, b| &a + b);
        out.push((-s).exp());
        out
    })
}

/// Ray speed in exponential coordinates. The slowest block separation along
/// the face directions is 0.447 per unit length, too slow to settle by s = 10.
pub const TITEICA_SPEED: f64 = 4.0;

/// Directions whose exponent vectors are constant on a proper subset S and
/// on its complement; limits along them reach the open faces of the orthant.
/// Each has length [`TITEICA_SPEED`].
pub fn titeica_directions(n: usize) -> Vec<Vec<f64>> {
    let m = n + 1;
    let mut out = Vec::new();
    for mask in 1..(1u32 << m) - 1 {
        let k = mask.count_ones() as f64;
        let e: Vec<f64> = (0..m).map(|i| if mask >> i & 1 == 1 { 1.0 / k } else { -1.0 / (m as f64 - k) }).collect();
        let d = Vector::from_column_slice(&e[..n]).normalize() * TITEICA_SPEED;
        out.push(d.iter().copied().collect());
    }
    out
}

fn titeica(n: usize) -> ExampleSpec {
    let origins = crate::numeric::box_grid(n, 3, -1.0, 1.0);
    let rays = titeica_directions(n)
        .into_iter()
        .flat_map(|d| origins.iter().map(move |o| Ray { origin: o.clone(), direction: d.clone(), scale: RayScale::Linear }))
        .collect();
    ExampleSpec {
        name: "titeica".into(),
        n,
        imm: EquiaffineImmersion::centroaffine(titeica_chart(n), 1.0),
        jets: JetSource::Analytic,
        manifest: Manifest {
            affine_sphere: Some(SphereType::Hyperbolic),
            signature: (n, 0),
            maximal: true,
            cone: Some("orthant"),
            harmonic: Some(true),
        },
        domain: (-1.0, 1.0),
        cone: Some(ConvexCone::orthant(n + 1)),
        rays,
        extra: Extra::None,
    }
}

fn sphere(n: usize) -> ExampleSpec {
    let f = ChartMap::analytic(n, n + 1, move |u: &[Dual2]| {
        let r2 = u.iter().fold(Dual2::cst(1.0), |a, x| &a + &(x * x));
        let inv = r2.powf(-0.5);
        let mut out: Vec<Dual2> = u.iter().map(|x| x * &inv).collect();
        out.push(inv);
        out
    });
    ExampleSpec {
        name: "sphere".into(),
        n,
        imm: EquiaffineImmersion::centroaffine(f, -1.0),
        jets: JetSource::Analytic,
        manifest: Manifest { affine_sphere: Some(SphereType::Elliptic), signature: (n, 0), maximal: true, cone: None, harmonic: None },
        domain: (-1.0, 1.0),
        cone: None,
        rays: vec![],
        extra: Extra::None,
    }
}

/// The unimodular shear applied to the hyperboloid.
pub fn hyperboloid_transform(n: usize) -> Matrix {
    Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j {
            1.0
        } else if j == i + 1 {
            0.3
        } else {
            0.0
        }
    })
}

/// Unit directions in ℝⁿ: ±1 for n = 1, equally spaced angles for n = 2,
/// and ± axes together with the diagonals otherwise.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut out: Vec<Vec<f64>> = (0..n).flat_map(|i| [unit(n, i), unit(n, i).iter().map(|x| -x).collect()]).collect();
            for mask in 0..(1u32 << n) {
                let s = (n as f64).sqrt();
                out.push((0..n).map(|i| if mask >> i & 1 == 1 { -1.0 / s } else { 1.0 / s }).collect());
            }
            out
        }
    }
}

fn hyperboloid(n: usize) -> ExampleSpec {
    let a = hyperboloid_transform(n);
    let am = a.clone();
    let f = ChartMap::analytic(n, n + 1, move |u: &[Dual2]| {
        let r2 = u.iter().fold(Dual2::cst(1.0), |acc, x| &acc + &(x * x));
        let mut y: Vec<Dual2> = u.to_vec();
        y.push(r2.sqrt());
        (0..n + 1).map(|i| (0..n + 1).fold(Dual2::cst(0.0), |acc, j| &acc + &y[j].scale(am[(i, j)]))).collect()
    });
    let rays = sphere_directions(n, 24).into_iter().map(|d| Ray { origin: vec![0.0; n], direction: d, scale: RayScale::Sinh }).collect();
    ExampleSpec {
        name: "hyperboloid".into(),
        n,
        imm: EquiaffineImmersion::centroaffine(f, 1.0),
        jets: JetSource::Analytic,
        manifest: Manifest {
            affine_sphere: Some(SphereType::Hyperbolic),
            signature: (n, 0),
            maximal: true,
            cone: Some("ellipsoid"),
            harmonic: Some(true),
        },
        domain: (-1.0, 1.0),
        cone: Some(ConvexCone::ellipsoid(a).expect("unimodular")),
        rays,
        extra: Extra::None,
    }
}

/// Radial parametrization p ↦ p/(Σ pᵢ⁴)^{1/4} of the unit quartic body over
/// the chart p = (u, 1), with difference-quotient jets.
pub fn quartic_chart(n: usize, step: f64) -> ChartMap {
    ChartMap::sampled(n, n + 1, step, move |u: &[f64]| {
        let r = (u.iter().map(|x| x.powi(4)).sum::<f64>() + 1.0).powf(-0.25);
        let mut out: Vec<f64> = u.iter().map(|x| x * r).collect();
        out.push(r);
        Ok(Vector::from_vec(out))
    })
}

fn quartic(n: usize) -> ExampleSpec {
    ExampleSpec {
        name: "quartic".into(),
        n,
        imm: EquiaffineImmersion::centroaffine(quartic_chart(n, QUARTIC_STEP), -1.0).with_field_step(QUARTIC_STEP),
        jets: JetSource::Fd,
        manifest: Manifest { affine_sphere: None, signature: (n, 0), maximal: false, cone: None, harmonic: Some(false) },
        domain: (0.25, 1.0),
        cone: None,
        rays: vec![],
        extra: Extra::None,
    }
}

fn pseudoflat(n: usize) -> Result<ExampleSpec> {
    let mut spec = titeica(n);
    let sigma = build_sigma(&spec.imm, SigmaKind::Minus, &vec![0.0; n])?;
    let inner = sigma.map.chart.clone();
    let chart = ChartMap::from_jet_fn(n + 1, 2 * n + 2, crate::numeric::FD_STEP, move |p, order| {
        let (u, t) = (&p[..n], p[n]);
        let j = inner.jet(u, order)?;
        let m = n + 1;
        let scale = |k: usize| if k < m { t.exp() } else { (-t).exp() };
        let value = Vector::from_fn(2 * m, |k, _| scale(k) * j.value[k]);
        let mut first = Matrix::zeros(2 * m, n + 1);
        let mut second = vec![Matrix::zeros(n + 1, n + 1); 2 * m];
        if order >= 1 {
            for k in 0..2 * m {
                let sg = if k < m { 1.0 } else { -1.0 };
                for i in 0..n {
                    first[(k, i)] = scale(k) * j.first[(k, i)];
                }
                first[(k, n)] = sg * value[k];
                if order >= 2 {
                    for a in 0..n {
                        for b in 0..n {
                            second[k][(a, b)] = scale(k) * j.second[k][(a, b)];
                        }
                        second[k][(a, n)] = sg * first[(k, a)];
                        second[k][(n, a)] = sg * first[(k, a)];
                    }
                    second[k][(n, n)] = value[k];
                }
            }
        }
        Ok(crate::numeric::Jet { value, first, second })
    });
    spec.name = "pseudoflat".into();
    spec.extra = Extra::Pseudoflat(QuadricImmersion::new(chart, sigma.map.kind));
    spec.rays = vec![];
    spec.cone = None;
    spec.manifest.cone = None;
    spec.manifest.harmonic = None;
    Ok(spec)
}

/// The scrambling gauge μ(u) = sin u₀ · cos u_{n−1}.
pub fn scramble_gauge(n: usize) -> ChartMap {
    ChartMap::analytic(n, 1, move |u: &[Dual2]| vec![&u[0].sin() * &u[n - 1].cos()])
}

fn scrambled(n: usize) -> Result<ExampleSpec> {
    let mut spec = titeica(n);
    let sigma = build_sigma(&spec.imm, SigmaKind::Plus, &vec![0.0; n])?;
    let mu = scramble_gauge(n);
    spec.name = "scrambled-titeica".into();
    spec.extra = Extra::Scrambled { lift: gauge_transform(&sigma.map.chart, &mu), mu };
    spec.rays = vec![];
    spec.cone = None;
    spec.manifest.cone = None;
    spec.manifest.harmonic = None;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_dimensions() {
        assert!(matches!(example("hyperbola", 2), Err(Error::BadDimension { .. })));
        assert!(matches!(example("torus", 2), Err(Error::UnknownExample(_))));
        for name in NAMES {
            let n = if name == "hyperbola" || name == "ellipse" { 1 } else { 2 };
            let e = example(name, n).unwrap();
            assert_eq!(e.imm.dim(), n);
        }
    }

    #[test]
    fn titeica_n3_values() {
        let e = example("titeica", 3).unwrap();
        let v = e.imm.f.value(&[0.1, 0.2, 0.3]).unwrap();
        assert!((v[3] - (-0.6f64).exp()).abs() < 1e-15);
        assert_eq!(titeica_directions(2).len(), 6);
    }

    #[test]
    fn pseudoflat_is_flat_on_hyperbolic_quadric() {
        let e = example("pseudoflat", 2).unwrap();
        let Extra::Pseudoflat(map) = &e.extra else { panic!() };
        let (g0, _) = map.induced_metric(&[0.0, 0.0, 0.0]).unwrap();
        let (g1, _) = map.induced_metric(&[0.4, -0.3, 0.7]).unwrap();
        assert!((g0 - g1).amax() < 1e-12);
        let v = map.chart.value(&[0.4, -0.3, 0.7]).unwrap();
        assert!((crate::split::ghat(&v, &v) + 1.0).abs() < 1e-12);
        let fd = map.chart.to_fd(1e-3).jet(&[0.1, 0.2, 0.3], 2).unwrap();
        let ex = map.chart.jet(&[0.1, 0.2, 0.3], 2).unwrap();
        assert!((fd.first - ex.first).amax() < 1e-9);
        for k in 0..6 {
            assert!((&fd.second[k] - &ex.second[k]).amax() < 1e-6);
        }
    }
}
