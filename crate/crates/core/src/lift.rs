//! The inverse problem: from any lift σ_μ = (e^μ ξ, e^{−μ} ν) of a
//! Lagrangian immersion into the quotient, recover the horizontal gauge and
//! the dual centroaffine pair.
//!
//! With α(X) = φ_*(X)(v) for a lift (v, φ), a gauge change Ψ_c sends α to
//! α − dc. The horizontal lift is Ψ_{μ̂}(lift) with dμ̂ = α.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::chart::{fd_partials, Jet};
use crate::numeric::linalg::{Matrix, Vector};
use crate::numeric::ops::integrate_segment;
use crate::numeric::{sup, ChartMap, FD_STEP};
use crate::sigma::{gauge_transform, horizontal_parts, QuadricImmersion};
use crate::split::{ghat, omegahat, QuadricKind, QUADRIC_TOL};

/// Path-agreement tolerance for FD-jet and analytic inputs.
pub const PATH_TOL_FD: f64 = 1e-6;
pub const PATH_TOL_ANALYTIC: f64 = 1e-9;
/// Horizontality required before extracting the centroaffine pair.
pub const HORIZONTAL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct LiftedImmersion {
    pub lift: ChartMap,
    pub kind: QuadricKind,
    pub basepoint: Vec<f64>,
}

/// μ̂ on grid nodes, normalized by μ̂(p₀) = 0.
#[derive(Clone, Debug)]
pub struct GaugeFunction {
    pub nodes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub basepoint: Vec<f64>,
    /// max disagreement of the two staircase paths
    pub path_residual: f64,
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct DualityReport {
    /// |ν(f) − 1|
    pub pairing: f64,
    /// |ν(f_*X)|
    pub tangential: f64,
}

impl LiftedImmersion {
    pub fn new(lift: ChartMap, kind: QuadricKind, basepoint: Vec<f64>) -> Result<Self> {
        let v = lift.value(&basepoint)?;
        let r = (ghat(&v, &v) - kind.sign()).abs();
        if r > QUADRIC_TOL {
            return Err(Error::NotOnQuadric(r));
        }
        Ok(LiftedImmersion { lift, kind, basepoint })
    }

    pub fn dim(&self) -> usize {
        self.lift.domain_dim()
    }

    fn half(&self) -> usize {
        self.lift.target_dim() / 2
    }

    pub fn as_quadric(&self) -> QuadricImmersion {
        QuadricImmersion::new(self.lift.clone(), self.kind)
    }

    /// First slot v and second slot φ as charts.
    pub fn slots(&self) -> (ChartMap, ChartMap) {
        let m = self.half();
        let n = self.dim();
        let part = |off: usize| {
            let c = self.lift.clone();
            ChartMap::from_jet_fn(n, m, FD_STEP, move |p, order| {
                let j = c.jet(p, order)?;
                Ok(Jet {
                    value: j.value.rows(off, m).into_owned(),
                    first: j.first.rows(off, m).into_owned(),
                    second: if j.second.is_empty() { Vec::new() } else { j.second[off..off + m].to_vec() },
                })
            })
        };
        (part(0), part(m))
    }
}

/// α(eᵢ) = ∂ᵢφ(v) at p.
pub fn alpha_form(li: &LiftedImmersion, p: &[f64]) -> Result<Vector> {
    let m = li.half();
    let j = li.lift.jet(p, 1)?;
    let v = j.value.rows(0, m);
    let phi = j.value.rows(m, m);
    if phi.amax() == 0.0 {
        return Err(Error::DegenerateLift);
    }
    Ok(Vector::from_iterator(li.dim(), (0..li.dim()).map(|i| j.first.column(i).rows(m, m).dot(&v))))
}

/// max |ĝ(lift_*eᵢ, lift)|.
pub fn radial_residual(li: &LiftedImmersion, p: &[f64]) -> Result<f64> {
    let j = li.lift.jet(p, 1)?;
    Ok(sup((0..li.dim()).map(|i| ghat(&j.d(i), &j.value))))
}

/// max |∂ᵢαⱼ − ∂ⱼαᵢ| over the points.
pub fn closedness_residual(li: &LiftedImmersion, points: &[Vec<f64>]) -> Result<f64> {
    let n = li.dim();
    let vals: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let da = fd_partials(&|q| alpha_form(li, q), p, FD_STEP)?;
            let mut r = 0.0f64;
            for i in 0..n {
                for j in 0..i {
                    r = r.max((da[i][j] - da[j][i]).abs());
                }
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(sup(vals))
}

/// ∫α along the staircase from p₀ to p visiting axes in `order`.
fn staircase(li: &LiftedImmersion, p: &[f64], order: &[usize]) -> Result<f64> {
    let alpha = |q: &[f64]| alpha_form(li, q);
    let mut cur = li.basepoint.clone();
    let mut total = 0.0;
    for &axis in order {
        if (cur[axis] - p[axis]).abs() == 0.0 {
            continue;
        }
        let mut next = cur.clone();
        next[axis] = p[axis];
        total += integrate_segment(&alpha, &cur, &next)?;
        cur = next;
    }
    Ok(total)
}

/// μ̂(p) along the forward staircase, and the disagreement with the
/// reversed staircase.
pub fn gauge_at(li: &LiftedImmersion, p: &[f64]) -> Result<(f64, f64)> {
    let fwd: Vec<usize> = (0..li.dim()).collect();
    let rev: Vec<usize> = fwd.iter().rev().copied().collect();
    let a = staircase(li, p, &fwd)?;
    let b = staircase(li, p, &rev)?;
    Ok((a, (a - b).abs()))
}

pub fn integrate_gauge(li: &LiftedImmersion, nodes: &[Vec<f64>], path_tol: f64) -> Result<GaugeFunction> {
    let out: Vec<(f64, f64)> = nodes.par_iter().map(|p| gauge_at(li, p)).collect::<Result<_>>()?;
    let path_residual = sup(out.iter().map(|x| x.1));
    if path_residual > path_tol {
        return Err(Error::NotClosed(path_residual));
    }
    Ok(GaugeFunction {
        nodes: nodes.to_vec(),
        values: out.into_iter().map(|x| x.0).collect(),
        basepoint: li.basepoint.clone(),
        path_residual,
    })
}

/// μ̂ as a chart: value by quadrature, dμ̂ = α exactly, second derivatives
/// by differencing α.
pub fn gauge_chart(li: &LiftedImmersion) -> ChartMap {
    let me = li.clone();
    let n = li.dim();
    ChartMap::from_jet_fn(n, 1, FD_STEP, move |p, order| {
        let value = Vector::from_element(1, gauge_at(&me, p)?.0);
        if order == 0 {
            return Ok(Jet { value, first: Matrix::zeros(1, n), second: Vec::new() });
        }
        let a = alpha_form(&me, p)?;
        let first = Matrix::from_row_slice(1, n, a.as_slice());
        let mut second = Vec::new();
        if order >= 2 {
            let da = fd_partials(&|q| alpha_form(&me, q), p, FD_STEP)?;
            let mut h = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] = 0.5 * (da[i][j] + da[j][i]);
                }
            }
            second.push(h);
        }
        Ok(Jet { value, first, second })
    })
}

/// Ψ_{μ̂}(lift), horizontal by construction.
pub fn horizontal_lift(li: &LiftedImmersion) -> LiftedImmersion {
    LiftedImmersion { lift: gauge_transform(&li.lift, &gauge_chart(li)), kind: li.kind, basepoint: li.basepoint.clone() }
}

/// Slots of a horizontal lift, taken as the centroaffine pair (f, ν), with
/// the duality residuals at the given points.
pub fn extract_centroaffine_pair(hl: &LiftedImmersion, points: &[Vec<f64>]) -> Result<(ChartMap, ChartMap, DualityReport)> {
    let hz = hl.as_quadric().horizontality_residual(&hl.basepoint)?;
    if hz > HORIZONTAL_TOL {
        return Err(Error::NotHorizontal(hz));
    }
    let (f, nu) = hl.slots();
    let mut rep = DualityReport { pairing: 0.0, tangential: 0.0 };
    for p in points {
        let jf = f.jet(p, 1)?;
        let nv = nu.value(p)?;
        rep.pairing = rep.pairing.max((nv.dot(&jf.value) - hl.kind.sign()).abs());
        for i in 0..hl.dim() {
            rep.tangential = rep.tangential.max(nv.dot(&jf.d(i)).abs());
        }
    }
    Ok((f, nu, rep))
}

/// ĝ on the horizontal parts of lift_*eᵢ (the metric of the base map).
pub fn base_induced_metric(li: &LiftedImmersion, p: &[f64]) -> Result<Matrix> {
    let j = li.lift.jet(p, 1)?;
    let hor = horizontal_parts(&j.value, &j.first);
    let m = li.half();
    Ok(hor.transpose() * crate::split::ghat_matrix(m) * hor)
}

/// max |ω̂(lift_*eᵢ, lift_*eⱼ)|.
pub fn anti_invariance(li: &LiftedImmersion, p: &[f64]) -> Result<f64> {
    let j = li.lift.jet(p, 1)?;
    let n = li.dim();
    let mut r = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            r = r.max(omegahat(&j.d(i), &j.d(k)).abs());
        }
    }
    Ok(r)
}

/// Variance of a − b after removing the mean.
pub fn centered_variance(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::EquiaffineImmersion;
    use crate::numeric::{box_grid, Dual2};
    use crate::sigma::{build_sigma, SigmaKind};

    fn titeica_sigma() -> crate::sigma::Sigma {
        let f = ChartMap::analytic(2, 3, |u: &[Dual2]| vec![u[0].exp(), u[1].exp(), (-(&u[0] + &u[1])).exp()]);
        build_sigma(&EquiaffineImmersion::centroaffine(f, 1.0), SigmaKind::Plus, &[0.0, 0.0]).unwrap()
    }

    fn mu_true() -> ChartMap {
        ChartMap::analytic(2, 1, |u| vec![&u[0].sin() * &u[1].cos()])
    }

    #[test]
    fn horizontal_input_has_zero_alpha() {
        let s = titeica_sigma();
        let li = LiftedImmersion::new(s.map.chart.clone(), QuadricKind::Sphere, vec![0.0, 0.0]).unwrap();
        assert!(alpha_form(&li, &[0.3, 0.1]).unwrap().amax() < 1e-12);
        let g = integrate_gauge(&li, &box_grid(2, 3, -0.5, 0.5), PATH_TOL_ANALYTIC).unwrap();
        assert!(sup(g.values.iter().copied()) < 1e-12);
    }

    #[test]
    fn scrambled_round_trip() {
        let s = titeica_sigma();
        let mu = mu_true();
        let li = LiftedImmersion::new(gauge_transform(&s.map.chart, &mu), QuadricKind::Sphere, vec![0.0, 0.0]).unwrap();
        let p = [0.4, -0.3];
        let a = alpha_form(&li, &p).unwrap();
        let dm = mu.jet(&p, 1).unwrap().first;
        assert!((a[0] + dm[(0, 0)]).abs() < 1e-12 && (a[1] + dm[(0, 1)]).abs() < 1e-12);
        assert!(radial_residual(&li, &p).unwrap() < 1e-12);
        let nodes = box_grid(2, 5, -0.8, 0.8);
        let g = integrate_gauge(&li, &nodes, PATH_TOL_ANALYTIC).unwrap();
        let truth: Vec<f64> = nodes.iter().map(|p| -mu.value(p).unwrap()[0]).collect();
        assert!(centered_variance(&g.values, &truth) < 1e-12);
        let hl = horizontal_lift(&li);
        assert!(hl.as_quadric().horizontality_residual(&p).unwrap() < 1e-8);
        let (f, _, rep) = extract_centroaffine_pair(&hl, &nodes[..3]).unwrap();
        assert!(rep.pairing < 1e-8 && rep.tangential < 1e-8);
        let c0 = f.value(&p).unwrap()[0] / p[0].exp();
        let c1 = f.value(&[0.1, 0.7]).unwrap()[2] / (-0.8f64).exp();
        assert!((c0 - c1).abs() < 1e-7);
    }

    #[test]
    fn lifts_share_base_metric() {
        let s = titeica_sigma();
        let p = [0.2, 0.5];
        let li0 = LiftedImmersion::new(s.map.chart.clone(), QuadricKind::Sphere, vec![0.0, 0.0]).unwrap();
        let li1 = LiftedImmersion::new(gauge_transform(&s.map.chart, &mu_true()), QuadricKind::Sphere, vec![0.0, 0.0]).unwrap();
        let g0 = base_induced_metric(&li0, &p).unwrap();
        let g1 = base_induced_metric(&li1, &p).unwrap();
        assert!((g0 - g1).amax() < 1e-12);
        assert!(anti_invariance(&li1, &p).unwrap() < 1e-12);
    }

    #[test]
    fn perturbed_lift_is_not_closed() {
        let s = titeica_sigma();
        let c = s.map.chart.clone();
        let bent = ChartMap::sampled(2, 6, FD_STEP, move |p| {
            let mut v = c.value(p)?;
            v[3] += 0.3 * p[1];
            let k = ghat(&v, &v);
            for i in 3..6 {
                v[i] /= k;
            }
            Ok(v)
        });
        let li = LiftedImmersion::new(bent, QuadricKind::Sphere, vec![0.0, 0.0]).unwrap();
        assert!(closedness_residual(&li, &[vec![0.2, 0.1]]).unwrap() > 1e-2);
        assert!(matches!(integrate_gauge(&li, &[vec![0.5, 0.5]], PATH_TOL_FD), Err(Error::NotClosed(_))));
    }
}
