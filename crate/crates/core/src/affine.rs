//! Equiaffine structure equations, Blaschke normalization, conormal map,
//! dual structure and Pick-tensor invariants.
//!
//! For an immersion f with transversal ξ the Gauss/Weingarten equations
//!
//!   ∂ᵢ∂ⱼf = Γᵏᵢⱼ ∂ₖf + hᵢⱼ ξ,      ∂ᵢξ = −(S eᵢ)ᵏ ∂ₖf + τᵢ ξ
//!
//! are solved pointwise as (n+1)-dimensional linear systems. Tensors are
//! stored in chart coordinates: `gamma[k][(i,j)] = Γᵏᵢⱼ`, `s[(k,i)] = (S eᵢ)ᵏ`,
//! `c[i][(j,k)] = Cᵢⱼₖ`. Quantities involving derivatives of h, S or C are
//! obtained by central differences of the pointwise decomposition with
//! step `field_step`.

use crate::error::{Error, Result};
use crate::numeric::chart::{fd_matrix_partials, fd_partials, Jet};
use crate::numeric::linalg::{equilibrate, metric_inverse, signature_of, solve, solve_many, Matrix, Vector};
use crate::numeric::ops::{christoffel_from, MetricField};
use crate::numeric::{sup, ChartMap};

/// Relative determinant below which f_*, ξ are declared non-transversal.
pub const TRANSVERSAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EquiaffineImmersion {
    pub f: ChartMap,
    pub xi: ChartMap,
    /// Sign of the volume form used for θ.
    pub orientation: f64,
    /// Step used when differentiating derived fields (h, S, C, ν_*).
    pub field_step: f64,
}

impl EquiaffineImmersion {
    pub fn new(f: ChartMap, xi: ChartMap) -> Self {
        assert_eq!(f.target_dim(), f.domain_dim() + 1);
        assert_eq!(xi.target_dim(), f.target_dim());
        EquiaffineImmersion { f, xi, orientation: 1.0, field_step: 1e-3 }
    }

    /// (f, c·f).
    pub fn centroaffine(f: ChartMap, c: f64) -> Self {
        let xi = f.scaled(c);
        EquiaffineImmersion::new(f, xi)
    }

    pub fn with_field_step(mut self, step: f64) -> Self {
        self.field_step = step;
        self
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation = sign.signum();
        self
    }

    pub fn dim(&self) -> usize {
        self.f.domain_dim()
    }

    /// Same immersion with transversal c·ξ.
    pub fn rescaled(&self, c: f64) -> Self {
        EquiaffineImmersion { xi: self.xi.scaled(c), ..self.clone() }
    }

    /// |ξ − proj_f ξ| / |ξ| at p.
    pub fn centroaffine_residual(&self, p: &[f64]) -> Result<f64> {
        let f = self.f.value(p)?;
        let xi = self.xi.value(p)?;
        let along = &f * (xi.dot(&f) / f.norm_squared());
        Ok((&xi - along).norm() / xi.norm())
    }

    /// λ with ξ = λ f at p (meaningful for centroaffine-type transversals).
    pub fn centroaffine_factor(&self, p: &[f64]) -> Result<f64> {
        let f = self.f.value(p)?;
        let xi = self.xi.value(p)?;
        Ok(xi.dot(&f) / f.norm_squared())
    }
}

#[derive(Clone, Debug)]
pub struct AffineData {
    pub gamma: Vec<Matrix>,
    pub h: Matrix,
    pub s: Matrix,
    pub tau: Vector,
    pub theta: f64,
    /// Relative reconstruction residual of the linear solves.
    pub residual: f64,
}

impl AffineData {
    /// h(S·,·) as a matrix.
    pub fn h_bar(&self) -> Matrix {
        self.s.transpose() * &self.h
    }
}

fn frame(jf: &Jet, xi: &Vector) -> Matrix {
    let n = jf.first.ncols();
    let mut a = Matrix::zeros(n + 1, n + 1);
    a.columns_mut(0, n).copy_from(&jf.first);
    a.set_column(n, xi);
    a
}

fn check_transversal(a: &Matrix) -> Result<f64> {
    let det = a.determinant();
    let (r, _) = equilibrate(a);
    let scaled = Matrix::from_fn(a.nrows(), a.ncols(), |i, j| r[i] * a[(i, j)]);
    let sdet: f64 = r.iter().product::<f64>() * det;
    let vol: f64 = scaled.column_iter().map(|c| c.norm()).product();
    if !(sdet.abs() > TRANSVERSAL_TOL * vol) {
        return Err(Error::TransversalityLost(det));
    }
    Ok(det)
}

/// Solve the structure equations at p.
pub fn decompose_structure(imm: &EquiaffineImmersion, p: &[f64]) -> Result<AffineData> {
    let n = imm.dim();
    let jf = imm.f.jet(p, 2)?;
    let jx = imm.xi.jet(p, 1)?;
    decompose_from_jets(&jf, &jx, imm.orientation, n)
}

pub(crate) fn decompose_from_jets(jf: &Jet, jx: &Jet, orientation: f64, n: usize) -> Result<AffineData> {
    let a = frame(jf, &jx.value);
    let det = check_transversal(&a)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut rhs = Matrix::zeros(n + 1, pairs.len() + n);
    for (col, &(i, j)) in pairs.iter().enumerate() {
        rhs.set_column(col, &jf.dd(i, j));
    }
    for i in 0..n {
        rhs.set_column(pairs.len() + i, &jx.d(i));
    }
    let x = solve_many(&a, &rhs).map_err(|_| Error::SingularSystem("structure equations"))?;
    let recon = (&a * &x - &rhs).norm() / (a.norm() * x.norm() + rhs.norm()).max(f64::MIN_POSITIVE);

    let mut gamma = vec![Matrix::zeros(n, n); n];
    let mut h = Matrix::zeros(n, n);
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for k in 0..n {
            gamma[k][(i, j)] = x[(k, col)];
            gamma[k][(j, i)] = x[(k, col)];
        }
        h[(i, j)] = x[(n, col)];
        h[(j, i)] = x[(n, col)];
    }
    let mut s = Matrix::zeros(n, n);
    let mut tau = Vector::zeros(n);
    for i in 0..n {
        for k in 0..n {
            s[(k, i)] = -x[(k, pairs.len() + i)];
        }
        tau[i] = x[(n, pairs.len() + i)];
    }
    Ok(AffineData { gamma, h, s, tau, theta: orientation * det, residual: recon })
}

/// Affine data at p together with partial derivatives of h and S.
#[derive(Clone, Debug)]
pub struct AffineJet {
    pub data: AffineData,
    pub dh: Vec<Matrix>,
    pub ds: Vec<Matrix>,
}

pub fn affine_jet(imm: &EquiaffineImmersion, p: &[f64]) -> Result<AffineJet> {
    let data = decompose_structure(imm, p)?;
    let n = imm.dim();
    let packed = |q: &[f64]| -> Result<Vector> {
        let d = decompose_structure(imm, q)?;
        let mut v = Vec::with_capacity(2 * n * n);
        v.extend(d.h.iter());
        v.extend(d.s.iter());
        Ok(Vector::from_vec(v))
    };
    let parts = fd_partials(&packed, p, imm.field_step)?;
    let mut dh = Vec::with_capacity(n);
    let mut ds = Vec::with_capacity(n);
    for v in parts {
        dh.push(Matrix::from_column_slice(n, n, &v.as_slice()[..n * n]));
        ds.push(Matrix::from_column_slice(n, n, &v.as_slice()[n * n..]));
    }
    Ok(AffineJet { data, dh, ds })
}

/// Codazzi residuals for h and S and the h-symmetry residual of S.
#[derive(Clone, Copy, Debug, Default)]
pub struct CodazziResiduals {
    pub h: f64,
    pub s: f64,
    pub s_symmetry: f64,
}

pub fn codazzi_residuals(aj: &AffineJet) -> CodazziResiduals {
    let d = &aj.data;
    let n = d.h.nrows();
    let c = pick_from(aj);
    let mut rh = 0.0f64;
    let mut rs = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                rh = rh.max((c[i][(j, k)] - c[j][(i, k)]).abs());
            }
            // (∇ᵢS)eⱼ − (∇ⱼS)eᵢ
            for m in 0..n {
                let nab = |a: usize, b: usize| {
                    let mut v = aj.ds[a][(m, b)];
                    for l in 0..n {
                        v += d.gamma[m][(a, l)] * d.s[(l, b)] - d.s[(m, l)] * d.gamma[l][(a, b)];
                    }
                    v
                };
                rs = rs.max((nab(i, j) - nab(j, i)).abs());
            }
        }
    }
    let hs = d.s.transpose() * &d.h - &d.h * &d.s;
    CodazziResiduals { h: rh, s: rs, s_symmetry: sup(hs.iter().copied()) }
}

fn pick_from(aj: &AffineJet) -> Vec<Matrix> {
    let d = &aj.data;
    let n = d.h.nrows();
    let mut c = vec![Matrix::zeros(n, n); n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = aj.dh[i][(j, k)];
                for m in 0..n {
                    v -= d.gamma[m][(i, j)] * d.h[(m, k)] + d.gamma[m][(i, k)] * d.h[(j, m)];
                }
                c[i][(j, k)] = v;
            }
        }
    }
    c
}

#[derive(Clone, Debug)]
pub struct PickData {
    /// `c[i][(j,k)] = Cᵢⱼₖ = (∇ᵢh)ⱼₖ`
    pub c: Vec<Matrix>,
    /// `a[i]` is the endomorphism A(eᵢ)
    pub a: Vec<Matrix>,
    /// Tr_h(C)(eᵢ) = tr(h⁻¹ ∇ᵢh)
    pub tr_c: Vector,
    pub h: Matrix,
}

impl PickData {
    /// Largest deviation of C from total symmetry.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.h.nrows();
        let mut r = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.c[i][(j, k)];
                    for w in [self.c[i][(k, j)], self.c[j][(i, k)], self.c[j][(k, i)], self.c[k][(i, j)], self.c[k][(j, i)]] {
                        r = r.max((v - w).abs());
                    }
                }
            }
        }
        r
    }

    /// C(X,Y,Z) + 2h(A(X)Y,Z), the defining relation of A.
    pub fn cubic_form_residual(&self) -> f64 {
        let n = self.h.nrows();
        let mut r = 0.0f64;
        for i in 0..n {
            let ha = self.a[i].transpose() * &self.h;
            for j in 0..n {
                for k in 0..n {
                    r = r.max((self.c[i][(j, k)] + 2.0 * ha[(j, k)]).abs());
                }
            }
            let asym = &self.h * &self.a[i] - self.a[i].transpose() * &self.h;
            r = r.max(sup(asym.iter().copied()));
        }
        r
    }
}

pub fn pick_from_jet(aj: &AffineJet) -> Result<PickData> {
    let c = pick_from(aj);
    let h = aj.data.h.clone();
    let hi = metric_inverse(&h)?;
    let n = h.nrows();
    let a: Vec<Matrix> = c.iter().map(|ci| &hi * ci * (-0.5)).collect();
    let tr_c = Vector::from_iterator(n, c.iter().map(|ci| (&hi * ci).trace()));
    Ok(PickData { c, a, tr_c, h })
}

pub fn pick_tensor(imm: &EquiaffineImmersion, p: &[f64]) -> Result<PickData> {
    pick_from_jet(&affine_jet(imm, p)?)
}

/// Field of affine metrics as a `MetricField` (for Christoffel symbols).
pub fn metric_field(imm: &EquiaffineImmersion) -> MetricField {
    let me = imm.clone();
    MetricField::new(imm.field_step, move |q| Ok(decompose_structure(&me, q)?.h))
}

/// Christoffel symbols of the affine metric at p from an affine jet.
pub fn levi_civita(aj: &AffineJet) -> Result<Vec<Matrix>> {
    let hi = metric_inverse(&aj.data.h)?;
    Ok(christoffel_from(&hi, &aj.dh, aj.data.h.nrows()))
}

#[derive(Clone, Copy, Debug)]
pub struct SphereReport {
    pub sup_tr_c: f64,
    pub proper: bool,
}

/// Proper-affine-sphere test: sup over `grid` of |Tr_h C| against `tol`.
pub fn is_proper_affine_sphere(imm: &EquiaffineImmersion, grid: &[Vec<f64>], tol: f64) -> Result<SphereReport> {
    use rayon::prelude::*;
    for p in grid.iter().step_by((grid.len() / 16).max(1)) {
        let r = imm.centroaffine_residual(p)?;
        if r > 1e-8 {
            return Err(Error::NotCentroaffine(r));
        }
    }
    let vals: Vec<f64> = grid.par_iter().map(|p| pick_tensor(imm, p).map(|pd| pd.tr_c.amax())).collect::<Result<_>>()?;
    let s = sup(vals);
    Ok(SphereReport { sup_tr_c: s, proper: s <= tol })
}

/// Blaschke normalization by a constant rescale ξ → cξ.
///
/// The first sample is the base point. Returns the normalized immersion
/// and c; fails if h is indefinite or if ω_h/|θ| varies over the samples.
pub fn blaschke_normalize(imm: &EquiaffineImmersion, samples: &[Vec<f64>]) -> Result<(EquiaffineImmersion, f64)> {
    let n = imm.dim() as f64;
    let mut ratios = Vec::with_capacity(samples.len());
    let mut sign = 1.0;
    for (k, p) in samples.iter().enumerate() {
        let d = decompose_structure(imm, p)?;
        let sig = signature_of(&d.h)?;
        if sig.positive != 0 && sig.negative != 0 || sig.zero != 0 {
            return Err(Error::IndefiniteMetric);
        }
        let omega = d.h.determinant().abs().sqrt();
        ratios.push(omega / d.theta.abs());
        if k == 0 {
            sign = d.theta.signum() * imm.orientation;
        }
    }
    let r0 = ratios[0];
    let spread = ratios.iter().fold(0.0f64, |a, r| a.max((r - r0).abs())) / r0;
    if spread > 1e-6 {
        return Err(Error::NonConstantRescale(spread));
    }
    let c = r0.powf(1.0 / (1.0 + n / 2.0));
    let mut out = imm.rescaled(c);
    out.orientation = sign;
    Ok((out, c))
}

/// ν at p: ν(ξ) = 1, ν(f_*eᵢ) = 0.
pub fn conormal(imm: &EquiaffineImmersion, p: &[f64]) -> Result<Vector> {
    let jf = imm.f.jet(p, 1)?;
    let xi = imm.xi.value(p)?;
    conormal_from(&jf, &xi)
}

fn conormal_from(jf: &Jet, xi: &Vector) -> Result<Vector> {
    let n = jf.first.ncols();
    let a = frame(jf, xi);
    check_transversal(&a)?;
    let mut e = Vector::zeros(n + 1);
    e[n] = 1.0;
    solve(&a.transpose(), &e).map_err(|_| Error::SingularSystem("conormal"))
}

/// ν as a chart. Values and first derivatives are exact up to the chart's
/// own jets (ν_*(eⱼ) solves ν_*(eⱼ)(f_*eᵢ) = −hⱼᵢ, ν_*(eⱼ)(ξ) = 0); second
/// derivatives difference the first.
pub fn conormal_chart(imm: &EquiaffineImmersion) -> ChartMap {
    let n = imm.dim();
    let me = imm.clone();
    let step = imm.field_step;
    let first_order = move |p: &[f64]| -> Result<(Vector, Matrix)> {
        let jf = me.f.jet(p, 2)?;
        let jx = me.xi.jet(p, 1)?;
        let nu = conormal_from(&jf, &jx.value)?;
        let d = decompose_from_jets(&jf, &jx, me.orientation, n)?;
        let a = frame(&jf, &jx.value);
        let mut rhs = Matrix::zeros(n + 1, n);
        for j in 0..n {
            for i in 0..n {
                rhs[(i, j)] = -d.h[(j, i)];
            }
        }
        let dnu = solve_many(&a.transpose(), &rhs).map_err(|_| Error::SingularSystem("conormal derivative"))?;
        Ok((nu, dnu))
    };
    ChartMap::from_jet_fn(n, n + 1, step, move |p, order| {
        if order == 0 {
            let jf = me_value_jet(&first_order, p)?;
            return Ok(jf);
        }
        let (value, first) = first_order(p)?;
        let mut second = Vec::new();
        if order >= 2 {
            let flat = |q: &[f64]| -> Result<Vector> { Ok(Vector::from_column_slice(first_order(q)?.1.as_slice())) };
            let parts = fd_partials(&flat, p, step)?;
            second = vec![Matrix::zeros(n, n); n + 1];
            for i in 0..n {
                let di = Matrix::from_column_slice(n + 1, n, parts[i].as_slice());
                for a in 0..=n {
                    for j in 0..n {
                        second[a][(i, j)] += 0.5 * di[(a, j)];
                        second[a][(j, i)] += 0.5 * di[(a, j)];
                    }
                }
            }
        }
        Ok(Jet { value, first, second })
    })
}

fn me_value_jet(first_order: &dyn Fn(&[f64]) -> Result<(Vector, Matrix)>, p: &[f64]) -> Result<Jet> {
    let (value, first) = first_order(p)?;
    Ok(Jet { value, first, second: Vec::new() })
}

/// Duality residuals ν(ξ) − 1, ν(f_*eᵢ) and the derivative relation
/// ν_*(eⱼ)(f_*eᵢ) + hⱼᵢ, the latter with ν_* from plain differences of ν.
#[derive(Clone, Copy, Debug)]
pub struct ConormalResiduals {
    pub duality: f64,
    pub derivative: f64,
}

pub fn conormal_residuals(imm: &EquiaffineImmersion, p: &[f64]) -> Result<ConormalResiduals> {
    let n = imm.dim();
    let jf = imm.f.jet(p, 2)?;
    let jx = imm.xi.jet(p, 1)?;
    let nu = conormal_from(&jf, &jx.value)?;
    let mut dual = (nu.dot(&jx.value) - 1.0).abs();
    for i in 0..n {
        dual = dual.max(nu.dot(&jf.d(i)).abs());
    }
    let d = decompose_from_jets(&jf, &jx, imm.orientation, n)?;
    let val = |q: &[f64]| conormal(imm, q);
    let dnu = fd_partials(&val, p, imm.field_step)?;
    let mut der = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            der = der.max((dnu[j].dot(&jf.d(i)) + d.h[(j, i)]).abs());
        }
    }
    Ok(ConormalResiduals { duality: dual, derivative: der })
}

/// The conormal as a centroaffine immersion (ν, ν) into the dual space.
pub fn dual_immersion(imm: &EquiaffineImmersion) -> EquiaffineImmersion {
    let nu = conormal_chart(imm);
    EquiaffineImmersion { f: nu.clone(), xi: nu, orientation: 1.0, field_step: imm.field_step }
}

#[derive(Clone, Debug)]
pub struct DualData {
    pub gamma_bar: Vec<Matrix>,
    pub h_bar: Matrix,
    /// h̄ − h(S·,·)
    pub res_metric: f64,
    /// X·h(Y,Z) − h(∇_XY,Z) − h(Y,∇̄_XZ)
    pub res_conjugate: f64,
    /// Γʰ − ½(Γ + Γ̄)
    pub res_levi_civita: f64,
}

/// Solve the dual structure equations at p from the conormal's jets and
/// check the three compatibility relations with the primal data.
pub fn dual_structure(imm: &EquiaffineImmersion, p: &[f64]) -> Result<DualData> {
    let n = imm.dim();
    let nu = conormal_chart(imm);
    let jn = nu.jet(p, 2)?;
    // D*ν_*(Y) = ν_*(∇̄Y) − h̄ ν : transversal ν with metric −h̄
    let dd = decompose_from_jets(&jn, &Jet { value: jn.value.clone(), first: jn.first.clone(), second: Vec::new() }, 1.0, n)
        .map_err(|_| Error::SingularSystem("dual structure equations"))?;
    let gamma_bar = dd.gamma;
    let h_bar = -dd.h;
    let aj = affine_jet(imm, p)?;
    let d = &aj.data;
    let res_metric = sup((&h_bar - d.h_bar()).iter().copied());
    let mut res_conj = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = aj.dh[i][(j, k)];
                for m in 0..n {
                    v -= d.gamma[m][(i, j)] * d.h[(m, k)] + gamma_bar[m][(i, k)] * d.h[(j, m)];
                }
                res_conj = res_conj.max(v.abs());
            }
        }
    }
    let lc = levi_civita(&aj)?;
    let mut res_lc = 0.0f64;
    for k in 0..n {
        let diff = &lc[k] - (&d.gamma[k] + &gamma_bar[k]) * 0.5;
        res_lc = res_lc.max(sup(diff.iter().copied()));
    }
    Ok(DualData { gamma_bar, h_bar, res_metric, res_conjugate: res_conj, res_levi_civita: res_lc })
}

/// Dual Pick tensor C̄ = ∇̄h̄ from primal data only, with h̄ = h(S·,·) and
/// ∇̄ = 2∇ʰ − ∇.
pub fn dual_pick_intrinsic(imm: &EquiaffineImmersion, p: &[f64]) -> Result<(Vec<Matrix>, AffineJet)> {
    let n = imm.dim();
    let aj = affine_jet(imm, p)?;
    let lc = levi_civita(&aj)?;
    let gb: Vec<Matrix> = (0..n).map(|k| &lc[k] * 2.0 - &aj.data.gamma[k]).collect();
    let hb = aj.data.h_bar();
    let dhb = fd_matrix_partials(&|q| Ok(decompose_structure(imm, q)?.h_bar()), p, imm.field_step)?;
    let mut c = vec![Matrix::zeros(n, n); n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = dhb[i][(j, k)];
                for m in 0..n {
                    v -= gb[m][(i, j)] * hb[(m, k)] + gb[m][(i, k)] * hb[(j, m)];
                }
                c[i][(j, k)] = v;
            }
        }
    }
    Ok((c, aj))
}

/// ∇ʰC at p: `out[a][b][(c,d)] = (∇ʰₐC)_bcd`.
pub fn pick_covariant_derivative(imm: &EquiaffineImmersion, p: &[f64]) -> Result<(Vec<Vec<Matrix>>, PickData, Vec<Matrix>)> {
    let n = imm.dim();
    let aj = affine_jet(imm, p)?;
    let pd = pick_from_jet(&aj)?;
    let lc = levi_civita(&aj)?;
    let flat = |q: &[f64]| -> Result<Vector> {
        let c = pick_tensor(imm, q)?.c;
        let mut v = Vec::with_capacity(n * n * n);
        for ci in &c {
            v.extend(ci.iter());
        }
        Ok(Vector::from_vec(v))
    };
    let dc = fd_partials(&flat, p, imm.field_step)?;
    let cc = |b: usize, c: usize, d: usize| pd.c[b][(c, d)];
    let mut out = vec![vec![Matrix::zeros(n, n); n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dc[a][b * n * n + d * n + c];
                    for m in 0..n {
                        v -= lc[m][(a, b)] * cc(m, c, d) + lc[m][(a, c)] * cc(b, m, d) + lc[m][(a, d)] * cc(b, c, m);
                    }
                    out[a][b][(c, d)] = v;
                }
            }
        }
    }
    Ok((out, pd, lc))
}

/// Largest asymmetry of T(X,Y,Z,W) = h((∇ʰ_X A)(Y)Z, W) = −½(∇ʰ_X C)(Y,Z,W).
pub fn quartic_symmetry_residual(nabla_c: &[Vec<Matrix>]) -> f64 {
    let n = nabla_c.len();
    let mut r = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let t = nabla_c[a][b][(c, d)];
                    for u in [nabla_c[b][a][(c, d)], nabla_c[c][b][(a, d)], nabla_c[d][b][(c, a)], nabla_c[a][b][(d, c)]] {
                        r = r.max(0.5 * (t - u).abs());
                    }
                }
            }
        }
    }
    r
}

/// tr((∇ʰ_X A)(Y)) by the formula X·tr A(Y) − tr A(∇ʰ_X Y), for constant
/// coefficient fields X, Y.
pub fn pick_trace_derivative(imm: &EquiaffineImmersion, p: &[f64], x: &Vector, y: &Vector) -> Result<f64> {
    let n = imm.dim();
    let aj = affine_jet(imm, p)?;
    let pd = pick_from_jet(&aj)?;
    let lc = levi_civita(&aj)?;
    let tr_a = |q: &[f64]| -> Result<Vector> { Ok(pick_tensor(imm, q)?.tr_c * -0.5) };
    let d_tr = fd_partials(&tr_a, p, imm.field_step)?;
    let mut first = 0.0;
    for l in 0..n {
        first += x[l] * d_tr[l].dot(y);
    }
    let mut nab = Vector::zeros(n);
    for m in 0..n {
        nab[m] = x.dot(&(&lc[m] * y));
    }
    Ok(first - (pd.tr_c * -0.5).dot(&nab))
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
    fn hyperbola_structure() {
        let d = decompose_structure(&hyperbola(), &[0.0]).unwrap();
        assert!(d.gamma[0][(0, 0)].abs() < 1e-15);
        assert!((d.h[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d.s[(0, 0)] + 1.0).abs() < 1e-15);
        assert!(d.tau[0].abs() < 1e-15);
        assert!((d.theta + 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_structure() {
        let d = decompose_structure(&circle(), &[0.7]).unwrap();
        assert!((d.h[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((d.s[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(d.tau[0].abs() < 1e-14);
    }

    #[test]
    fn titeica_structure_at_origin() {
        let d = decompose_structure(&titeica(), &[0.0, 0.0]).unwrap();
        let h = Matrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert!((&d.h - h).amax() < 1e-14);
        assert!((d.gamma[0][(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!((d.gamma[1][(0, 0)] + 2.0 / 3.0).abs() < 1e-14);
        assert!((&d.s + Matrix::identity(2, 2)).amax() < 1e-14);
        assert!((d.theta - 3.0).abs() < 1e-13);
    }

    #[test]
    fn titeica_pick_values() {
        let pd = pick_tensor(&titeica(), &[0.0, 0.0]).unwrap();
        let c = &pd.c;
        assert!(c[0][(0, 0)].abs() < 1e-9);
        assert!((c[0][(0, 1)] - 2.0 / 3.0).abs() < 1e-9);
        assert!((c[0][(1, 1)] - 2.0 / 3.0).abs() < 1e-9);
        assert!(c[1][(1, 1)].abs() < 1e-9);
        assert!(pd.tr_c.amax() < 1e-9);
        assert!(pd.cubic_form_residual() < 1e-8);
    }

    #[test]
    fn blaschke_constants() {
        let (_, c) = blaschke_normalize(&hyperbola(), &[vec![0.0], vec![0.5]]).unwrap();
        assert!((c - 1.0).abs() < 1e-14);
        let samples = vec![vec![0.0, 0.0], vec![0.3, -0.4]];
        let (norm, c) = blaschke_normalize(&titeica(), &samples).unwrap();
        assert!((c - 3f64.powf(-0.75)).abs() < 1e-13);
        let (_, c2) = blaschke_normalize(&norm, &samples).unwrap();
        assert!((c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conormals() {
        let nu = conormal(&hyperbola(), &[0.3]).unwrap();
        assert!((nu[0] - 0.3f64.cosh()).abs() < 1e-14 && (nu[1] + 0.3f64.sinh()).abs() < 1e-14);
        let nu = conormal(&titeica(), &[0.0, 0.0]).unwrap();
        assert!((nu - Vector::from_element(3, 1.0 / 3.0)).amax() < 1e-15);
        let nu = conormal(&circle(), &[1.1]).unwrap();
        assert!((nu[0] + 1.1f64.cos()).abs() < 1e-14 && (nu[1] + 1.1f64.sin()).abs() < 1e-14);
        let r = conormal_residuals(&titeica(), &[0.2, -0.5]).unwrap();
        assert!(r.duality < 1e-12 && r.derivative < 1e-8, "{r:?}");
    }

    #[test]
    fn dual_data() {
        let dd = dual_structure(&hyperbola(), &[0.4]).unwrap();
        assert!((dd.h_bar[(0, 0)] + 1.0).abs() < 1e-7);
        let dd = dual_structure(&circle(), &[0.4]).unwrap();
        assert!((dd.h_bar[(0, 0)] - 1.0).abs() < 1e-7);
        let dd = dual_structure(&titeica(), &[0.1, 0.2]).unwrap();
        assert!(dd.res_metric < 1e-7 && dd.res_conjugate < 1e-7 && dd.res_levi_civita < 1e-7, "{dd:?}");
    }

    #[test]
    fn trace_derivative_vanishes_on_titeica() {
        let x = Vector::from_vec(vec![0.3, -1.0]);
        let y = Vector::from_vec(vec![1.0, 2.0]);
        let v = pick_trace_derivative(&titeica(), &[0.2, 0.1], &x, &y).unwrap();
        assert!(v.abs() < 1e-6);
    }
}
