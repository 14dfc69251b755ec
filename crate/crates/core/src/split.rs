//! The split space V = ℝⁿ⁺¹ ⊕ (ℝⁿ⁺¹)* with
//!
//!   ĝ((v,φ),(w,ψ)) = ½(φ(w) + ψ(v)),   P̂ = (Id, −Id),   ω̂ = ĝ(·, P̂·),
//!
//! its unit quadrics, the ℝ-action Ψ_t, the gauge slice for the quotient by
//! Ψ, and the contact / para-Sasaki data carried by both quadrics.
//!
//! Points of V are handled either as [`SplitVector`] or as flat vectors of
//! length 2n+2 (first the v block, then the φ block).

use crate::error::{Error, Result};
use crate::numeric::chart::fd_partials;
use crate::numeric::linalg::{orthogonal_complement, signature_of, Matrix, Signature, Vector};
use crate::numeric::sup;

/// Tolerance for quadric membership.
pub const QUADRIC_TOL: f64 = 1e-10;
/// Relative tolerance for tangency to a quadric.
pub const TANGENT_TOL: f64 = 1e-10;
/// Step for ambient finite-difference brackets.
pub const BRACKET_STEP: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct SplitVector {
    pub v: Vector,
    pub phi: Vector,
}

impl SplitVector {
    pub fn new(v: Vector, phi: Vector) -> Result<Self> {
        if v.len() != phi.len() {
            return Err(Error::DimMismatch { expected: v.len(), got: phi.len() });
        }
        Ok(SplitVector { v, phi })
    }

    pub fn from_flat(a: &Vector) -> Self {
        let m = a.len() / 2;
        SplitVector { v: a.rows(0, m).into_owned(), phi: a.rows(m, m).into_owned() }
    }

    pub fn flat(&self) -> Vector {
        let mut out = Vector::zeros(2 * self.v.len());
        out.rows_mut(0, self.v.len()).copy_from(&self.v);
        out.rows_mut(self.v.len(), self.v.len()).copy_from(&self.phi);
        out
    }

    /// ĝ(a,a) = φ(v).
    pub fn norm2(&self) -> f64 {
        self.phi.dot(&self.v)
    }
}

fn halves(a: &Vector) -> (usize, f64) {
    (a.len() / 2, 0.0)
}

pub fn ghat(a: &Vector, b: &Vector) -> f64 {
    let (m, mut s) = halves(a);
    for i in 0..m {
        s += a[m + i] * b[i] + b[m + i] * a[i];
    }
    0.5 * s
}

pub fn phat(a: &Vector) -> Vector {
    let m = a.len() / 2;
    let mut out = a.clone();
    out.rows_mut(m, m).neg_mut();
    out
}

/// ω̂(a,b) = ĝ(a, P̂b) = ½(φ(w) − ψ(v)).
pub fn omegahat(a: &Vector, b: &Vector) -> f64 {
    let (m, mut s) = halves(a);
    for i in 0..m {
        s += a[m + i] * b[i] - b[m + i] * a[i];
    }
    0.5 * s
}

/// Matrix G of ĝ on flat vectors.
pub fn ghat_matrix(m: usize) -> Matrix {
    let mut g = Matrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        g[(i, m + i)] = 0.5;
        g[(m + i, i)] = 0.5;
    }
    g
}

pub fn phat_matrix(m: usize) -> Matrix {
    let mut p = Matrix::identity(2 * m, 2 * m);
    for i in m..2 * m {
        p[(i, i)] = -1.0;
    }
    p
}

/// (x, y) ↦ (x+y, x−y): the diagonal form |x|² − |y|² pulled to ĝ.
pub fn model_isometry(x: &Vector, y: &Vector) -> Result<SplitVector> {
    if x.len() != y.len() {
        return Err(Error::DimMismatch { expected: x.len(), got: y.len() });
    }
    SplitVector::new(x + y, x - y)
}

/// F(v,φ) = (−v,φ), an anti-isometry exchanging the two quadrics.
pub fn anti_isometry_f(a: &Vector) -> Vector {
    let m = a.len() / 2;
    let mut out = a.clone();
    out.rows_mut(0, m).neg_mut();
    out
}

/// Ψ_t(v,φ) = (eᵗv, e⁻ᵗφ).
pub fn r_action(t: f64, a: &Vector) -> Vector {
    let m = a.len() / 2;
    let mut out = a.clone();
    out.rows_mut(0, m).scale_mut(t.exp());
    out.rows_mut(m, m).scale_mut((-t).exp());
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum QuadricKind {
    /// φ(v) = 1
    Sphere,
    /// φ(v) = −1
    Hyperbolic,
}

impl QuadricKind {
    pub fn sign(self) -> f64 {
        match self {
            QuadricKind::Sphere => 1.0,
            QuadricKind::Hyperbolic => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            QuadricKind::Sphere => QuadricKind::Hyperbolic,
            QuadricKind::Hyperbolic => QuadricKind::Sphere,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadricPoint {
    pub base: Vector,
    pub kind: QuadricKind,
}

impl QuadricPoint {
    pub fn new(base: Vector, kind: QuadricKind) -> Result<Self> {
        let r = (ghat(&base, &base) - kind.sign()).abs();
        if !(r <= QUADRIC_TOL) {
            return Err(Error::NotOnQuadric(r));
        }
        Ok(QuadricPoint { base, kind })
    }

    /// Rescale an arbitrary non-null vector onto the quadric of its sign.
    pub fn normalize(a: &Vector) -> Result<Self> {
        let q = ghat(a, a);
        if q.abs() < 1e-14 * a.norm_squared() {
            return Err(Error::NotOnQuadric(1.0));
        }
        let kind = if q > 0.0 { QuadricKind::Sphere } else { QuadricKind::Hyperbolic };
        Ok(QuadricPoint { base: a / q.abs().sqrt(), kind })
    }

    pub fn half_dim(&self) -> usize {
        self.base.len() / 2
    }

    /// Euclidean orthonormal basis (2n+1 columns) of the tangent space.
    pub fn tangent_basis(&self) -> Matrix {
        let normal = ghat_matrix(self.half_dim()) * &self.base;
        orthogonal_complement(&[normal], self.base.len())
    }

    /// Relative ĝ-component of w along the point.
    pub fn tangency(&self, w: &Vector) -> f64 {
        ghat(w, &self.base).abs() / (w.norm() * self.base.norm()).max(f64::MIN_POSITIVE)
    }
}

/// Representative of a point of the quotient by Ψ with ‖x‖ = ‖y‖, and the
/// projective sign class (+1 if the first significant entry of x is positive).
#[derive(Clone, Debug, PartialEq)]
pub struct TauPoint {
    pub x: Vector,
    pub y: Vector,
    pub sign: f64,
}

impl TauPoint {
    pub fn flat(&self) -> Vector {
        SplitVector { v: self.x.clone(), phi: self.y.clone() }.flat()
    }

    /// Representative with the sign class removed.
    pub fn projective(&self) -> Vector {
        self.flat() * self.sign
    }

    pub fn distance(&self, other: &TauPoint) -> f64 {
        (self.projective() - other.projective()).amax()
    }
}

/// t* with ‖e^{t*}x‖ = ‖e^{−t*}y‖.
pub fn gauge_time(a: &Vector) -> f64 {
    let s = SplitVector::from_flat(a);
    0.5 * (s.phi.norm() / s.v.norm()).ln()
}

pub fn tau_project(a: &Vector) -> TauPoint {
    let g = r_action(gauge_time(a), a);
    let s = SplitVector::from_flat(&g);
    let lead = s.v.iter().copied().find(|x| x.abs() > 1e-12 * s.v.amax()).unwrap_or(1.0);
    TauPoint { x: s.v, y: s.phi, sign: lead.signum() }
}

/// ĝ(q,q), the level of the quadric through q.
pub fn level(q: &Vector) -> f64 {
    ghat(q, q)
}

/// Ambient covector representing η at q: η(w) = ω̂(q,w)/ĝ(q,q).
pub fn eta_covector(q: &Vector) -> Vector {
    let m = q.len() / 2;
    let k = level(q);
    let mut e = Vector::zeros(2 * m);
    for i in 0..m {
        e[i] = 0.5 * q[m + i] / k;
        e[m + i] = -0.5 * q[i] / k;
    }
    e
}

pub fn contact_eta(q: &QuadricPoint, w: &Vector) -> Result<f64> {
    let t = q.tangency(w);
    if t > TANGENT_TOL {
        return Err(Error::NotTangent(t));
    }
    Ok(eta_covector(&q.base).dot(w))
}

/// ζ = P̂q.
pub fn reeb(q: &Vector) -> Vector {
    phat(q)
}

/// dη(a,b) = 2ω̂(a,b)/ĝ(q,q).
pub fn d_eta(q: &Vector, a: &Vector, b: &Vector) -> f64 {
    2.0 * omegahat(a, b) / level(q)
}

/// Sign-weighted permutations of 0..k (Heap's algorithm).
fn signed_permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    let mut a: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut sign = 1.0;
    let mut out = vec![(a.clone(), sign)];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// (η ∧ (dη)ⁿ)(v₀,…,v₂ₙ) by full antisymmetrization, normalized so that
/// each distinct product appears once.
pub fn contact_condition(q: &QuadricPoint, frame: &[Vector]) -> Result<f64> {
    let dim = q.base.len() - 1;
    if frame.len() != dim {
        return Err(Error::DegenerateFrame(0.0));
    }
    for w in frame {
        let t = q.tangency(w);
        if t > TANGENT_TOL {
            return Err(Error::NotTangent(t));
        }
    }
    let n = dim / 2;
    let eta = eta_covector(&q.base);
    let e: Vec<f64> = frame.iter().map(|w| eta.dot(w)).collect();
    let mut de = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            de[(i, j)] = d_eta(&q.base, &frame[i], &frame[j]);
        }
    }
    let mut total = 0.0;
    for (perm, s) in signed_permutations(dim) {
        let mut term = s * e[perm[0]];
        for k in 0..n {
            term *= de[(perm[1 + 2 * k], perm[2 + 2 * k])];
        }
        total += term;
    }
    let norm: f64 = (1..=n).map(|k| 2.0 * k as f64).product();
    Ok(total / norm)
}

/// Euclidean volume of a frame.
pub fn frame_volume(frame: &[Vector]) -> f64 {
    let m = Matrix::from_columns(frame);
    (m.transpose() * &m).determinant().abs().sqrt()
}

/// |η∧(dη)ⁿ| on a Euclidean orthonormal tangent basis.
pub fn contact_density(q: &QuadricPoint) -> Result<f64> {
    let b = q.tangent_basis();
    let frame: Vec<Vector> = b.column_iter().map(|c| c.into_owned()).collect();
    Ok(contact_condition(q, &frame)?.abs())
}

/// The para-Sasaki tuple at a quadric point, as ambient matrices acting on
/// tangent vectors.
#[derive(Clone, Debug)]
pub struct ParaSasakiFrame {
    pub point: Vector,
    pub eta: Vector,
    pub zeta: Vector,
    /// φ(Y) = P̂Y − η(Y)q
    pub phi: Matrix,
    /// g = 2ĝ(q,q)·ĝ(pr_H·, pr_H·) + η⊗η
    pub g: Matrix,
}

fn frame_at(q: &Vector) -> ParaSasakiFrame {
    let m = q.len() / 2;
    let k = level(q);
    let eta = eta_covector(q);
    let zeta = reeb(q);
    let phi = phat_matrix(m) - q * eta.transpose();
    let pr = Matrix::identity(2 * m, 2 * m) - &zeta * eta.transpose();
    let g = pr.transpose() * ghat_matrix(m) * &pr * (2.0 * k) + &eta * eta.transpose();
    ParaSasakiFrame { point: q.clone(), eta, zeta, phi, g }
}

pub fn para_sasaki_frame(q: &QuadricPoint) -> ParaSasakiFrame {
    frame_at(&q.base)
}

impl ParaSasakiFrame {
    /// Signature of g on the tangent space.
    pub fn signature(&self) -> Result<Signature> {
        let qp = QuadricPoint { base: self.point.clone(), kind: QuadricKind::Sphere };
        let b = qp.tangent_basis();
        signature_of(&(b.transpose() * &self.g * &b))
    }

    /// pr_H(Y) = Y − η(Y)ζ.
    pub fn horizontal(&self, y: &Vector) -> Vector {
        y - &self.zeta * self.eta.dot(y)
    }
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct AxiomResiduals {
    /// φ(ζ), η(ζ) − 1 and η∘φ on the samples
    pub phi_zeta: f64,
    /// φ²X − X + η(X)ζ
    pub phi_squared: f64,
    /// g(φX,φY) + g(X,Y) − η(X)η(Y)
    pub metric: f64,
    /// dη(X,Y) − g(X,φY)
    pub d_eta: f64,
    /// tangency of φX
    pub tangency: f64,
    /// N_φ(X,Y) − dη(X,Y)ζ with brackets from ambient extensions
    pub nijenhuis: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        sup([self.phi_zeta, self.phi_squared, self.metric, self.d_eta, self.tangency, self.nijenhuis])
    }
}

/// Ambient vector field: the constant vector w projected pointwise onto
/// the tangent space of the level quadric through p.
fn tangent_field(w: &Vector) -> impl Fn(&Vector) -> Vector + '_ {
    move |p: &Vector| w - p * (ghat(w, p) / level(p))
}

/// [X,Y](p) for ambient fields by central differences.
fn bracket(x: &dyn Fn(&Vector) -> Vector, y: &dyn Fn(&Vector) -> Vector, p: &Vector) -> Result<Vector> {
    let fx = |s: &[f64]| Ok(x(&Vector::from_column_slice(s)));
    let fy = |s: &[f64]| Ok(y(&Vector::from_column_slice(s)));
    let dx = fd_partials(&fx, p.as_slice(), BRACKET_STEP)?;
    let dy = fd_partials(&fy, p.as_slice(), BRACKET_STEP)?;
    let xv = x(p);
    let yv = y(p);
    let mut out = Vector::zeros(p.len());
    for i in 0..p.len() {
        out += &dy[i] * xv[i] - &dx[i] * yv[i];
    }
    Ok(out)
}

/// N_φ(X,Y) − dη(X,Y)ζ at q for the extensions of two tangent vectors.
pub fn nijenhuis_residual(q: &Vector, x0: &Vector, y0: &Vector) -> Result<f64> {
    let x = tangent_field(x0);
    let y = tangent_field(y0);
    let phi_x = |p: &Vector| &frame_at(p).phi * x(p);
    let phi_y = |p: &Vector| &frame_at(p).phi * y(p);
    let fr = frame_at(q);
    let xy = bracket(&x, &y, q)?;
    let pxpy = bracket(&phi_x, &phi_y, q)?;
    let pxy = bracket(&phi_x, &y, q)?;
    let xpy = bracket(&x, &phi_y, q)?;
    let n = &xy + &pxpy - &fr.phi * pxy - &fr.phi * xpy - &fr.zeta * fr.eta.dot(&xy);
    let r = n - &fr.zeta * d_eta(q, &x(q), &y(q));
    Ok(r.amax())
}

/// Axioms of a para-Sasaki structure at q on pairs of tangent samples.
pub fn axioms_report(q: &QuadricPoint, samples: &[(Vector, Vector)]) -> Result<AxiomResiduals> {
    let fr = para_sasaki_frame(q);
    let mut r = AxiomResiduals { phi_zeta: sup([(&fr.phi * &fr.zeta).amax(), fr.eta.dot(&fr.zeta) - 1.0]), ..Default::default() };
    for (x, y) in samples {
        for w in [x, y] {
            let t = q.tangency(w);
            if t > 1e-9 {
                return Err(Error::NotTangent(t));
            }
        }
        let px = &fr.phi * x;
        let py = &fr.phi * y;
        r.tangency = r.tangency.max(q.tangency(&px));
        r.phi_zeta = r.phi_zeta.max(fr.eta.dot(&px).abs()).max(fr.eta.dot(&py).abs());
        let sq = &fr.phi * &px - x + &fr.zeta * fr.eta.dot(x);
        r.phi_squared = r.phi_squared.max(sq.amax());
        let ex = fr.eta.dot(x);
        let ey = fr.eta.dot(y);
        let gm = (px.transpose() * &fr.g * &py)[0] + (x.transpose() * &fr.g * y)[0] - ex * ey;
        r.metric = r.metric.max(gm.abs());
        let de = d_eta(&q.base, x, y) - (x.transpose() * &fr.g * &py)[0];
        r.d_eta = r.d_eta.max(de.abs());
        r.nijenhuis = r.nijenhuis.max(nijenhuis_residual(&q.base, x, y)?);
    }
    Ok(r)
}

/// Para-Kähler data on the horizontal space at a gauged representative,
/// in a Euclidean orthonormal basis of that space.
#[derive(Clone, Debug)]
pub struct ParaKahlerBase {
    pub basis: Matrix,
    pub g: Matrix,
    pub p: Matrix,
    pub omega: Matrix,
}

impl ParaKahlerBase {
    /// Largest of |g(P·,P·) + g|, |ω − g(·,P·)|, |P² − Id|.
    pub fn compatibility(&self) -> f64 {
        let k = self.p.nrows();
        sup([
            (self.p.transpose() * &self.g * &self.p + &self.g).amax(),
            (&self.omega - &self.g * &self.p).amax(),
            (&self.p * &self.p - Matrix::identity(k, k)).amax(),
        ])
    }

    pub fn signature(&self) -> Result<Signature> {
        signature_of(&self.g)
    }
}

pub fn para_kahler_base(tp: &TauPoint) -> ParaKahlerBase {
    let q = tp.flat();
    let m = q.len() / 2;
    let gm = ghat_matrix(m);
    let pm = phat_matrix(m);
    let basis = orthogonal_complement(&[&gm * &q, &gm * &pm * &q], 2 * m);
    let k = 2.0 * level(&q);
    let g = basis.transpose() * &gm * &basis * k;
    let p = basis.transpose() * &pm * &basis;
    let omega = basis.transpose() * &gm * &pm * &basis * k;
    ParaKahlerBase { basis, g, p, omega }
}

/// dΩ(X,Y,Z) for the 2-form field Ω_p = dη_p = 2ω̂/ĝ(p,p), on the tangent
/// extensions of three vectors at q.
pub fn closedness_residual(q: &Vector, x0: &Vector, y0: &Vector, z0: &Vector) -> Result<f64> {
    let fields: Vec<Box<dyn Fn(&Vector) -> Vector + '_>> =
        vec![Box::new(tangent_field(x0)), Box::new(tangent_field(y0)), Box::new(tangent_field(z0))];
    let omega = |p: &Vector, a: &Vector, b: &Vector| d_eta(p, a, b);
    let deriv = |along: usize, i: usize, j: usize| -> Result<f64> {
        let f = |s: &[f64]| {
            let p = Vector::from_column_slice(s);
            Ok(Vector::from_element(1, omega(&p, &fields[i](&p), &fields[j](&p))))
        };
        let d = fd_partials(&f, q.as_slice(), BRACKET_STEP)?;
        let v = fields[along](q);
        Ok((0..q.len()).map(|l| v[l] * d[l][0]).sum())
    };
    let br = |i: usize, j: usize| bracket(&*fields[i], &*fields[j], q);
    let val = deriv(0, 1, 2)? - deriv(1, 0, 2)? + deriv(2, 0, 1)? - omega(q, &br(0, 1)?, &fields[2](q))
        + omega(q, &br(0, 2)?, &fields[1](q))
        - omega(q, &br(1, 2)?, &fields[0](q));
    Ok(val.abs())
}

/// Random point of the quadric of the given kind (entries from `sample`).
pub fn random_quadric_point(m: usize, kind: QuadricKind, mut sample: impl FnMut() -> f64) -> QuadricPoint {
    loop {
        let a = Vector::from_fn(2 * m, |_, _| sample());
        let g = ghat(&a, &a);
        if g * kind.sign() > 0.05 * a.norm_squared() {
            return QuadricPoint { base: a / g.abs().sqrt(), kind };
        }
    }
}

/// Random tangent vector at q.
pub fn random_tangent(q: &QuadricPoint, mut sample: impl FnMut() -> f64) -> Vector {
    let b = q.tangent_basis();
    let c = Vector::from_fn(b.ncols(), |_, _| sample());
    b * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(m: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(m);
        v[i] = 1.0;
        v
    }

    fn flat(v: Vector, phi: Vector) -> Vector {
        SplitVector::new(v, phi).unwrap().flat()
    }

    #[test]
    fn forms_on_basis_vectors() {
        let a = flat(e(2, 0), e(2, 0));
        assert_eq!(ghat(&a, &a), 1.0);
        let a = flat(e(2, 0), Vector::zeros(2));
        let b = flat(Vector::zeros(2), e(2, 0));
        assert_eq!(ghat(&a, &b), 0.5);
        assert_eq!(omegahat(&a, &b), -0.5);
    }

    #[test]
    fn model_isometry_norms() {
        let s = model_isometry(&e(2, 0), &Vector::zeros(2)).unwrap();
        assert_eq!(s.norm2(), 1.0);
        let s = model_isometry(&Vector::zeros(2), &e(2, 0)).unwrap();
        assert_eq!(s.norm2(), -1.0);
        assert!(model_isometry(&e(2, 0), &e(3, 0)).is_err());
    }

    #[test]
    fn r_action_and_gauge() {
        let a = flat(e(2, 0), e(2, 0));
        let b = r_action(2f64.ln(), &a);
        assert!((b - flat(e(2, 0) * 2.0, e(2, 0) * 0.5)).amax() < 1e-15);
        let tp = tau_project(&flat(e(2, 0) * 2.0, e(2, 0) * 0.5));
        assert!((tp.x[0] - 1.0).abs() < 1e-15 && (tp.y[0] - 1.0).abs() < 1e-15);
        assert_eq!(r_action(0.0, &a), a);
    }

    #[test]
    fn contact_basics() {
        let q = QuadricPoint::new(flat(e(2, 0), e(2, 0)), QuadricKind::Sphere).unwrap();
        assert!((contact_eta(&q, &reeb(&q.base)).unwrap() - 1.0).abs() < 1e-15);
        assert!(contact_eta(&q, &q.base).is_err());
        let frame: Vec<Vector> = q.tangent_basis().column_iter().map(|c| c.into_owned()).collect();
        assert!(contact_condition(&q, &frame).unwrap().abs() > 0.1);
        let mut rep = frame.clone();
        rep[1] = rep[0].clone();
        assert!(contact_condition(&q, &rep).unwrap().abs() < 1e-14);
    }

    #[test]
    fn axioms_hold_on_both_quadrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [QuadricKind::Sphere, QuadricKind::Hyperbolic] {
            let q = random_quadric_point(3, kind, || rng.gen_range(-1.0..1.0));
            let x = random_tangent(&q, || rng.gen_range(-1.0..1.0));
            let y = random_tangent(&q, || rng.gen_range(-1.0..1.0));
            let r = axioms_report(&q, &[(x, y)]).unwrap();
            assert!(r.max() < 1e-7, "{kind:?} {r:?}");
            let sig = para_sasaki_frame(&q).signature().unwrap();
            assert_eq!((sig.positive, sig.negative), (3, 2));
        }
    }

    #[test]
    fn para_kahler_base_signature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_quadric_point(3, QuadricKind::Hyperbolic, || rng.gen_range(-1.0..1.0));
        let pk = para_kahler_base(&tau_project(&q.base));
        assert!(pk.compatibility() < 1e-12);
        let s = pk.signature().unwrap();
        assert_eq!((s.positive, s.negative), (2, 2));
    }

    #[test]
    fn permutations_count_and_sign() {
        let p = signed_permutations(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p.iter().map(|x| x.1).sum::<f64>(), 0.0);
    }
}
