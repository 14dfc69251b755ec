//! The maps σ± = (±ξ, ν) into the unit quadrics, their induced geometry,
//! mean curvature along two independent routes, and projection to the
//! quotient by the ℝ-action.

use crate::affine::{
    affine_jet, conormal_chart, decompose_structure, dual_immersion, dual_pick_intrinsic, is_proper_affine_sphere, EquiaffineImmersion,
};
use crate::error::{Error, Result};
use crate::numeric::chart::Jet;
use crate::numeric::linalg::{metric_inverse, orthonormal_frame, signature_of, singular_range, Matrix, Signature, Vector};
use crate::numeric::{sup, ChartMap};
use crate::split::{anti_isometry_f, ghat, ghat_matrix, omegahat, phat, r_action, tau_project, QuadricKind, TauPoint};

/// Smallest admissible singular value of dσ.
pub const RANK_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SigmaKind {
    Plus,
    Minus,
}

impl SigmaKind {
    pub fn sign(self) -> f64 {
        match self {
            SigmaKind::Plus => 1.0,
            SigmaKind::Minus => -1.0,
        }
    }

    pub fn quadric(self) -> QuadricKind {
        match self {
            SigmaKind::Plus => QuadricKind::Sphere,
            SigmaKind::Minus => QuadricKind::Hyperbolic,
        }
    }
}

/// An immersion of a chart into one of the quadrics ĝ = ±1.
#[derive(Clone, Debug)]
pub struct QuadricImmersion {
    pub chart: ChartMap,
    pub kind: QuadricKind,
}

/// σ± together with the equiaffine data it was built from.
#[derive(Clone, Debug)]
pub struct Sigma {
    pub map: QuadricImmersion,
    pub sign: SigmaKind,
    pub imm: EquiaffineImmersion,
}

/// Pointwise geometry of a quadric immersion.
#[derive(Clone, Debug)]
pub struct SigmaData {
    pub value: Vector,
    /// columns σ_*eᵢ
    pub tangent: Matrix,
    pub g_t: Matrix,
    /// `ii[i][j]` = II(eᵢ,eⱼ)
    pub ii: Vec<Vec<Vector>>,
    pub mean_curvature: Vector,
    pub residuals: SigmaResiduals,
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct SigmaResiduals {
    /// |ĝ(σ,σ) ∓ 1|
    pub norm: f64,
    /// smallest singular value of dσ
    pub rank: f64,
    /// max |ĝ(σ_*eᵢ, P̂σ)|
    pub horizontality: f64,
    /// max |ω̂(σ_*eᵢ, σ_*eⱼ)|
    pub anti_invariance: f64,
    /// max |ĝ(σ_*eᵢ, σ)|
    pub radial: f64,
    /// max P̂σ-component of II
    pub ii_vertical: f64,
}

pub fn build_sigma(imm: &EquiaffineImmersion, sign: SigmaKind, probe: &[f64]) -> Result<Sigma> {
    let d = decompose_structure(imm, probe)?;
    let det = d.s.determinant();
    if det.abs() < 1e-10 {
        return Err(Error::DegenerateShapeOperator(det));
    }
    let chart = ChartMap::stack(vec![imm.xi.scaled(sign.sign()), conormal_chart(imm)]);
    let map = QuadricImmersion { chart, kind: sign.quadric() };
    let jet = map.chart.jet(probe, 1)?;
    let (lo, _) = singular_range(&jet.first);
    if lo < RANK_FLOOR {
        return Err(Error::RankDeficient(lo));
    }
    Ok(Sigma { map, sign, imm: imm.clone() })
}

fn gram(a: &Matrix, b: &Matrix) -> Matrix {
    a.transpose() * ghat_matrix(a.nrows() / 2) * b
}

impl QuadricImmersion {
    pub fn new(chart: ChartMap, kind: QuadricKind) -> Self {
        QuadricImmersion { chart, kind }
    }

    pub fn dim(&self) -> usize {
        self.chart.domain_dim()
    }

    /// Induced metric and its signature.
    pub fn induced_metric(&self, p: &[f64]) -> Result<(Matrix, Signature)> {
        let j = self.chart.jet(p, 1)?;
        let g = gram(&j.first, &j.first);
        let s = signature_of(&g)?;
        Ok((g, s))
    }

    /// Order-1 residuals only (cheap).
    pub fn first_order(&self, p: &[f64]) -> Result<SigmaResiduals> {
        let j = self.chart.jet(p, 1)?;
        Ok(first_order_residuals(&j, self.kind))
    }

    pub fn horizontality_residual(&self, p: &[f64]) -> Result<f64> {
        Ok(self.first_order(p)?.horizontality)
    }

    pub fn anti_invariance_residual(&self, p: &[f64]) -> Result<f64> {
        Ok(self.first_order(p)?.anti_invariance)
    }

    /// Full pointwise data including II and the mean curvature vector.
    pub fn at(&self, p: &[f64]) -> Result<SigmaData> {
        let n = self.dim();
        let j = self.chart.jet(p, 2)?;
        let mut residuals = first_order_residuals(&j, self.kind);
        let t = j.first.clone();
        let g_t = gram(&t, &t);
        let gi = metric_inverse(&g_t).map_err(|_| Error::DegenerateInducedMetric(g_t.determinant()))?;
        let sig = j.value.clone();
        let k = ghat(&sig, &sig);
        let psig = phat(&sig);
        let kp = ghat(&psig, &psig);
        let mut ii = vec![vec![Vector::zeros(sig.len()); n]; n];
        let mut h = Vector::zeros(sig.len());
        for a in 0..n {
            for b in a..n {
                let dd = j.dd(a, b);
                let c = gram(&t, &Matrix::from_column_slice(dd.len(), 1, dd.as_slice()));
                let tangential = &t * (&gi * c.column(0));
                let v = &dd - tangential - &sig * (ghat(&dd, &sig) / k);
                residuals.ii_vertical = residuals.ii_vertical.max((ghat(&v, &psig) / kp).abs());
                ii[a][b] = v.clone();
                ii[b][a] = v;
            }
        }
        for a in 0..n {
            for b in 0..n {
                h += &ii[a][b] * gi[(a, b)];
            }
        }
        h /= n as f64;
        Ok(SigmaData { value: sig, tangent: t, g_t, ii, mean_curvature: h, residuals })
    }

    /// II by ĝ-orthogonal projection onto span{P̂σ_*e_k, P̂σ} via its Gram
    /// matrix (independent of [`QuadricImmersion::at`]).
    pub fn second_fundamental_form_projected(&self, p: &[f64]) -> Result<Vec<Vec<Vector>>> {
        let n = self.dim();
        let j = self.chart.jet(p, 2)?;
        let mut normal = Matrix::zeros(j.value.len(), n + 1);
        for k in 0..n {
            normal.set_column(k, &phat(&j.d(k)));
        }
        normal.set_column(n, &phat(&j.value));
        let gn = gram(&normal, &normal);
        let gni = metric_inverse(&gn)?;
        let mut out = vec![vec![Vector::zeros(j.value.len()); n]; n];
        for a in 0..n {
            for b in 0..n {
                let dd = j.dd(a, b);
                let c = gram(&normal, &Matrix::from_column_slice(dd.len(), 1, dd.as_slice()));
                out[a][b] = &normal * (&gni * c.column(0));
            }
        }
        Ok(out)
    }
}

fn first_order_residuals(j: &Jet, kind: QuadricKind) -> SigmaResiduals {
    let n = j.first.ncols();
    let sig = &j.value;
    let psig = phat(sig);
    let mut r = SigmaResiduals { norm: (ghat(sig, sig) - kind.sign()).abs(), rank: singular_range(&j.first).0, ..Default::default() };
    for i in 0..n {
        let di = j.d(i);
        r.horizontality = r.horizontality.max(ghat(&di, &psig).abs());
        r.radial = r.radial.max(ghat(&di, sig).abs());
        for k in 0..n {
            r.anti_invariance = r.anti_invariance.max(omegahat(&di, &j.d(k)).abs());
        }
    }
    r
}

impl Sigma {
    pub fn dim(&self) -> usize {
        self.imm.dim()
    }

    pub fn value(&self, p: &[f64]) -> Result<Vector> {
        self.map.chart.value(p)
    }

    pub fn at(&self, p: &[f64]) -> Result<SigmaData> {
        self.map.at(p)
    }

    /// ±h(S·,·) at p.
    pub fn expected_metric(&self, p: &[f64]) -> Result<Matrix> {
        Ok(decompose_structure(&self.imm, p)?.h_bar() * self.sign.sign())
    }

    /// max |g_T − ±h(S·,·)|.
    pub fn metric_match(&self, p: &[f64]) -> Result<f64> {
        let (g, _) = self.map.induced_metric(p)?;
        Ok((g - self.expected_metric(p)?).amax())
    }

    /// Mean curvature from dual Pick data: for σ⁺,
    /// 𝐇 = (1/2n) Σ_k ε_k tr(h̄⁻¹C̄(e_k)) P̂σ_*e_k in a g_T-orthonormal frame;
    /// σ⁻ is handled as F(σ⁺).
    pub fn mean_curvature_pick(&self, p: &[f64], frame_start: Option<&Matrix>) -> Result<Vector> {
        let n = self.dim();
        let (cbar, aj) = dual_pick_intrinsic(&self.imm, p)?;
        let hbar = aj.data.h_bar();
        let hbi = metric_inverse(&hbar)?;
        let tr = Vector::from_iterator(n, cbar.iter().map(|c| (&hbi * c).trace()));
        // σ⁺ quantities
        let plus = ChartMap::stack(vec![self.imm.xi.clone(), conormal_chart(&self.imm)]);
        let j = plus.jet(p, 1)?;
        let g_t = gram(&j.first, &j.first);
        let (e, eps) = orthonormal_frame(&g_t, frame_start)?;
        let mut h = Vector::zeros(j.value.len());
        for k in 0..n {
            let ek = e.column(k);
            let push = &j.first * ek;
            h += phat(&push) * (eps[k] * tr.dot(&ek));
        }
        h /= 2.0 * n as f64;
        Ok(match self.sign {
            SigmaKind::Plus => h,
            SigmaKind::Minus => -anti_isometry_f(&h),
        })
    }

    /// max over i,j,k of |h(∇̄_{eᵢ}eⱼ, Se_k) − h(∇_{eᵢ}(Seⱼ), e_k) + C̄(eᵢ,e_k,eⱼ)|.
    pub fn anchor_residual(&self, p: &[f64]) -> Result<f64> {
        let n = self.dim();
        let (cbar, aj) = dual_pick_intrinsic(&self.imm, p)?;
        let d = &aj.data;
        let lc = crate::affine::levi_civita(&aj)?;
        let mut r = 0.0f64;
        for i in 0..n {
            for jj in 0..n {
                // ∇̄_{eᵢ}eⱼ and ∇_{eᵢ}(S eⱼ) as coordinate vectors
                let nb = Vector::from_iterator(n, (0..n).map(|m| 2.0 * lc[m][(i, jj)] - d.gamma[m][(i, jj)]));
                let ns = Vector::from_iterator(
                    n,
                    (0..n).map(|m| aj.ds[i][(m, jj)] + (0..n).map(|l| d.s[(l, jj)] * d.gamma[m][(i, l)]).sum::<f64>()),
                );
                for k in 0..n {
                    let sk = d.s.column(k);
                    let lhs = (nb.transpose() * &d.h * sk)[0] - (ns.transpose() * d.h.column(k))[0];
                    r = r.max((lhs + cbar[i][(k, jj)]).abs());
                }
            }
        }
        Ok(r)
    }

    /// F∘σ: the map into the other quadric.
    pub fn conjugate(&self) -> QuadricImmersion {
        let me = self.map.chart.clone();
        let m = me.target_dim();
        let n = me.domain_dim();
        let mut f = Matrix::identity(m, m);
        for i in 0..m / 2 {
            f[(i, i)] = -1.0;
        }
        let chart = ChartMap::from_jet_fn(n, m, crate::numeric::FD_STEP, move |p, order| {
            let j = me.jet(p, order)?;
            let second = (0..m).map(|a| j.second.get(a).map(|h| h * f[(a, a)])).collect::<Option<Vec<_>>>().unwrap_or_default();
            Ok(Jet { value: &f * j.value, first: &f * j.first, second })
        });
        QuadricImmersion { chart, kind: self.map.kind.flip() }
    }
}

/// The lift p ↦ Ψ_{μ(p)}(σ(p)) for a scalar chart μ, with exact product-rule jets.
pub fn gauge_transform(chart: &ChartMap, mu: &ChartMap) -> ChartMap {
    let c = chart.clone();
    let mu = mu.clone();
    let n = chart.domain_dim();
    let m = chart.target_dim();
    ChartMap::from_jet_fn(n, m, crate::numeric::FD_STEP, move |p, order| {
        let js = c.jet(p, order)?;
        let jm = mu.jet(p, order)?;
        let mut value = Vector::zeros(m);
        let mut first = Matrix::zeros(m, n);
        let mut second = Vec::new();
        for a in 0..m {
            let s = if a < m / 2 { 1.0 } else { -1.0 };
            let e = (s * jm.value[0]).exp();
            value[a] = e * js.value[a];
            for i in 0..n {
                first[(a, i)] = e * (s * jm.first[(0, i)] * js.value[a] + js.first[(a, i)]);
            }
            if order >= 2 {
                let mut h = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let mi = s * jm.first[(0, i)];
                        let mj = s * jm.first[(0, j)];
                        h[(i, j)] = e
                            * ((s * jm.second[0][(i, j)] + mi * mj) * js.value[a]
                                + mi * js.first[(a, j)]
                                + mj * js.first[(a, i)]
                                + js.second[a][(i, j)]);
                    }
                }
                second.push(h);
            }
        }
        Ok(Jet { value, first, second })
    })
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct MaximalityVerdict {
    pub maximal: bool,
    pub sup_h: f64,
    /// proper-affine-sphere verdict of the dual immersion ν
    pub dual_sphere: bool,
    pub dual_sup_tr_c: f64,
}

impl MaximalityVerdict {
    pub fn consistent(&self) -> bool {
        self.maximal == self.dual_sphere
    }
}

/// sup‖𝐇‖ over the grid against `tol`, and the dual proper-sphere test.
pub fn maximality_verdict(sigma: &Sigma, grid: &[Vec<f64>], tol: f64) -> Result<MaximalityVerdict> {
    use rayon::prelude::*;
    let hs: Vec<f64> = grid.par_iter().map(|p| sigma.at(p).map(|d| d.mean_curvature.norm())).collect::<Result<_>>()?;
    let sup_h = sup(hs);
    let dual = is_proper_affine_sphere(&dual_immersion(&sigma.imm), grid, tol)?;
    Ok(MaximalityVerdict { maximal: sup_h <= tol, sup_h, dual_sphere: dual.proper, dual_sup_tr_c: dual.sup_tr_c })
}

/// Gauged representative of π∘σ as a chart (values by projection, jets by
/// finite differences).
pub fn project_to_tau(map: &QuadricImmersion, step: f64) -> ChartMap {
    let me = map.chart.clone();
    ChartMap::sampled(map.dim(), me.target_dim(), step, move |p| Ok(tau_project(&me.value(p)?).flat()))
}

pub fn tau_point(map: &QuadricImmersion, p: &[f64]) -> Result<TauPoint> {
    Ok(tau_project(&map.chart.value(p)?))
}

/// max |ω̂(∂ᵢσ̄, ∂ⱼσ̄)| for the projected map.
pub fn lagrangian_residual(projected: &ChartMap, p: &[f64]) -> Result<f64> {
    let j = projected.jet(p, 1)?;
    let n = j.first.ncols();
    let mut r = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            r = r.max(omegahat(&j.d(i), &j.d(k)).abs());
        }
    }
    Ok(r)
}

/// Base metric of the projected map: ĝ on horizontal parts of ∂ᵢσ̄.
pub fn base_metric(projected: &ChartMap, p: &[f64]) -> Result<Matrix> {
    let j = projected.jet(p, 1)?;
    let q = &j.value;
    let hor = horizontal_parts(q, &j.first);
    Ok(gram(&hor, &hor))
}

/// Columns projected onto H = {w : ĝ(w,q) = ĝ(w,P̂q) = 0}.
pub fn horizontal_parts(q: &Vector, cols: &Matrix) -> Matrix {
    let k = ghat(q, q);
    let pq = phat(q);
    let kp = ghat(&pq, &pq);
    let mut out = cols.clone();
    for mut c in out.column_iter_mut() {
        let v = c.clone_owned();
        let a = ghat(&v, q) / k;
        let b = ghat(&v, &pq) / kp;
        c -= q * a + &pq * b;
    }
    out
}

/// The lift Ψ_t∘σ for constant t.
pub fn flowed(map: &QuadricImmersion, t: f64) -> QuadricImmersion {
    let mu = ChartMap::analytic(map.dim(), 1, move |_| vec![crate::numeric::Dual2::cst(t)]);
    QuadricImmersion { chart: gauge_transform(&map.chart, &mu), kind: map.kind }
}

/// Pointwise quantities of Ψ_t: value of Ψ_t applied to a vector.
pub fn flow_vector(t: f64, v: &Vector) -> Vector {
    r_action(t, v)
}

/// Affine-jet based check that g_T equals ±h̄ and that h̄ is what the dual
/// structure produces, at p.
pub fn metric_report(sigma: &Sigma, p: &[f64]) -> Result<(f64, Signature)> {
    let (g, s) = sigma.map.induced_metric(p)?;
    let aj = affine_jet(&sigma.imm, p)?;
    Ok(((g - aj.data.h_bar() * sigma.sign.sign()).amax(), s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Dual2;

    fn hyperbola() -> EquiaffineImmersion {
        EquiaffineImmersion::centroaffine(ChartMap::analytic(1, 2, |s| vec![s[0].cosh(), s[0].sinh()]), 1.0)
    }

    fn circle() -> EquiaffineImmersion {
        EquiaffineImmersion::centroaffine(ChartMap::analytic(1, 2, |s| vec![s[0].cos(), s[0].sin()]), -1.0)
    }

    fn titeica() -> EquiaffineImmersion {
        let f = ChartMap::analytic(2, 3, |u: &[Dual2]| vec![u[0].exp(), u[1].exp(), (-(&u[0] + &u[1])).exp()]);
        EquiaffineImmersion::centroaffine(f, 1.0)
    }

    #[test]
    fn sigma_values() {
        let s = build_sigma(&hyperbola(), SigmaKind::Minus, &[0.0]).unwrap();
        let v = s.value(&[0.4]).unwrap();
        let (c, sh) = (0.4f64.cosh(), 0.4f64.sinh());
        assert!((v - Vector::from_vec(vec![-c, -sh, c, -sh])).amax() < 1e-15);
        let s = build_sigma(&titeica(), SigmaKind::Plus, &[0.0, 0.0]).unwrap();
        let v = s.value(&[0.0, 0.0]).unwrap();
        assert!((ghat(&v, &v) - 1.0).abs() < 1e-15);
        let s = build_sigma(&circle(), SigmaKind::Minus, &[0.0]).unwrap();
        let v = s.value(&[1.0]).unwrap();
        assert!((ghat(&v, &v) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn induced_metric_signs() {
        let s = build_sigma(&hyperbola(), SigmaKind::Minus, &[0.0]).unwrap();
        let (g, _) = s.map.induced_metric(&[0.3]).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-12);
        let s = build_sigma(&circle(), SigmaKind::Minus, &[0.0]).unwrap();
        let (g, _) = s.map.induced_metric(&[0.3]).unwrap();
        assert!((g[(0, 0)] + 1.0).abs() < 1e-12);
        let s = build_sigma(&titeica(), SigmaKind::Minus, &[0.0, 0.0]).unwrap();
        assert!(s.metric_match(&[0.2, -0.1]).unwrap() < 1e-9);
    }

    #[test]
    fn titeica_is_maximal_and_horizontal() {
        for kind in [SigmaKind::Plus, SigmaKind::Minus] {
            let s = build_sigma(&titeica(), kind, &[0.0, 0.0]).unwrap();
            let d = s.at(&[0.3, -0.2]).unwrap();
            assert!(d.mean_curvature.norm() < 1e-6, "{:?}", d.mean_curvature);
            assert!(d.residuals.horizontality < 1e-12 && d.residuals.anti_invariance < 1e-12);
            assert!(d.residuals.ii_vertical < 1e-8);
        }
    }

    #[test]
    fn projected_ii_matches_subtraction() {
        let s = build_sigma(&titeica(), SigmaKind::Minus, &[0.0, 0.0]).unwrap();
        let a = s.at(&[0.1, 0.2]).unwrap();
        let b = s.map.second_fundamental_form_projected(&[0.1, 0.2]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((&a.ii[i][j] - &b[i][j]).amax() < 1e-8);
            }
        }
    }

    #[test]
    fn scrambled_lift_is_not_horizontal() {
        let s = build_sigma(&titeica(), SigmaKind::Plus, &[0.0, 0.0]).unwrap();
        let mu = ChartMap::analytic(2, 1, |u| vec![u[0].clone()]);
        let lift = QuadricImmersion::new(gauge_transform(&s.map.chart, &mu), QuadricKind::Sphere);
        assert!(lift.horizontality_residual(&[0.1, 0.1]).unwrap() > 1e-2);
    }

    #[test]
    fn flow_preserves_tau_image() {
        let s = build_sigma(&titeica(), SigmaKind::Plus, &[0.0, 0.0]).unwrap();
        let fl = flowed(&s.map, 1.0);
        let a = tau_point(&s.map, &[0.2, 0.3]).unwrap();
        let b = tau_point(&fl, &[0.2, 0.3]).unwrap();
        assert!(a.distance(&b) < 1e-12);
    }

    fn quartic() -> EquiaffineImmersion {
        let f = ChartMap::analytic(2, 3, |u: &[Dual2]| {
            let r = (u[0].powi(4) + u[1].powi(4) + 1.0).powf(-0.25);
            vec![&u[0] * &r, &u[1] * &r, r]
        });
        EquiaffineImmersion::centroaffine(f, -1.0)
    }

    #[test]
    fn mean_curvature_routes_agree_on_quartic() {
        for kind in [SigmaKind::Plus, SigmaKind::Minus] {
            let s = build_sigma(&quartic(), kind, &[0.0, 0.0]).unwrap();
            let p = [0.4, -0.25];
            let direct = s.at(&p).unwrap().mean_curvature;
            let pick = s.mean_curvature_pick(&p, None).unwrap();
            assert!(direct.norm() > 1e-2);
            assert!((&direct - &pick).amax() < 1e-6, "{kind:?} {direct} {pick}");
            assert!(s.anchor_residual(&p).unwrap() < 1e-7);
        }
    }
}
