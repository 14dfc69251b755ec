//! Symmetric spaces of SL(n+1,ℝ) and SO₀(n+1,n+1): unit-determinant inner
//! products 𝕏, the space 𝒳 of triples (v, P, q), positive (n+1)-planes 𝕐,
//! the Blaschke lift of a hyperbolic affine sphere and tension fields.
//!
//! The metric on SPD matrices is ⟨A,B⟩_Q = tr(Q⁻¹AQ⁻¹B). Maps into SPD are
//! charts ℝⁿ → ℝ^{N²} holding the matrix column-major.

use crate::affine::{pick_covariant_derivative, EquiaffineImmersion};
use crate::error::{Error, Result};
use crate::numeric::chart::{fd_matrix_partials, Jet};
use crate::numeric::linalg::{inverse, is_positive_definite, metric_inverse, spd_sqrt_pair, Matrix, Vector};
use crate::numeric::ops::christoffel_from;
use crate::numeric::{sup, ChartMap};

/// Tolerance on |det Q − 1|.
pub const DET_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SymPoint {
    pub q: Matrix,
}

impl SymPoint {
    pub fn new(q: Matrix) -> Result<Self> {
        if !is_positive_definite(&q) {
            return Err(Error::NotPositive);
        }
        let d = q.determinant();
        if (d - 1.0).abs() > DET_TOL {
            return Err(Error::FrameNotUnimodular(d));
        }
        Ok(SymPoint { q })
    }

    /// Affine-invariant distance ‖log(Q₁^{-1/2} Q₂ Q₁^{-1/2})‖_F.
    pub fn distance(&self, other: &SymPoint) -> Result<f64> {
        let (_, si) = spd_sqrt_pair(&self.q)?;
        let m = &si * &other.q * &si;
        let eig = nalgebra::SymmetricEigen::new(m);
        Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
    }
}

/// (v, P, q) with P = span(basis) and q a positive form in that basis.
#[derive(Clone, Debug)]
pub struct XPoint {
    pub v: Vector,
    pub basis: Matrix,
    pub q: Matrix,
    /// covector with kernel P and value 1 on v
    pub covector: Vector,
}

impl XPoint {
    pub fn new(v: Vector, basis: Matrix, q: Matrix) -> Result<Self> {
        if !is_positive_definite(&q) {
            return Err(Error::NotPositive);
        }
        let w = adapted(&basis, &v);
        let wi = inverse(&w).map_err(|_| Error::SingularM(w.determinant()))?;
        let covector = wi.row(basis.ncols()).transpose();
        Ok(XPoint { v, basis, q, covector })
    }
}

fn adapted(basis: &Matrix, v: &Vector) -> Matrix {
    let n = basis.ncols();
    let mut w = Matrix::zeros(n + 1, n + 1);
    w.columns_mut(0, n).copy_from(basis);
    w.set_column(n, v);
    w
}

/// Q with Q|_P = q, Q(v,P) = 0 and Q(v,v) = λ fixed by det Q = 1.
pub fn pi_n1(x: &XPoint) -> Result<SymPoint> {
    let n = x.basis.ncols();
    let w = adapted(&x.basis, &x.v);
    let wi = inverse(&w).map_err(|_| Error::SingularM(w.determinant()))?;
    let lambda = w.determinant().powi(2) / x.q.determinant();
    let mut blocks = Matrix::zeros(n + 1, n + 1);
    blocks.view_mut((0, 0), (n, n)).copy_from(&x.q);
    blocks[(n, n)] = lambda;
    let q = wi.transpose() * blocks * &wi;
    SymPoint::new(0.5 * (&q + q.transpose()))
}

/// λ of [`pi_n1`].
pub fn pi_lambda(x: &XPoint) -> f64 {
    adapted(&x.basis, &x.v).determinant().powi(2) / x.q.determinant()
}

/// Blaschke lift of a hyperbolic affine sphere centred at the origin.
///
/// The position vector is rescaled to f̃ = k f with k^{n+1} = ω_h/|θ| for
/// the pair (f, ±f), the sign chosen so that h is positive definite. For an
/// affine sphere (f̃, ±f̃) is then a Blaschke immersion and the frame
/// [f̃_* h^{-1/2} | f̃] is unimodular everywhere; other inputs still give a
/// well defined map into unit-determinant forms.
#[derive(Clone, Debug)]
pub struct BlaschkeLift {
    pub centro: EquiaffineImmersion,
    pub k: f64,
    pub sign: f64,
    pub step: f64,
}

impl BlaschkeLift {
    pub fn new(imm: &EquiaffineImmersion, probe: &[f64]) -> Result<Self> {
        let r = imm.centroaffine_residual(probe)?;
        if r > 1e-8 {
            return Err(Error::NotHyperbolicSphere(format!("transversal is not centroaffine ({r:.1e})")));
        }
        let centro = EquiaffineImmersion { xi: imm.f.clone(), orientation: 1.0, ..imm.clone() };
        let d = crate::affine::decompose_structure(&centro, probe)?;
        let sign = if is_positive_definite(&d.h) {
            1.0
        } else if is_positive_definite(&-&d.h) {
            -1.0
        } else {
            return Err(Error::NotHyperbolicSphere("affine metric is indefinite".into()));
        };
        let n = imm.dim() as f64;
        let k = (d.h.determinant().abs().sqrt() / d.theta.abs()).powf(1.0 / (n + 1.0));
        let f = imm.f.scaled(k);
        let centro = EquiaffineImmersion { f: f.clone(), xi: f.scaled(sign), ..centro };
        Ok(BlaschkeLift { centro, k, sign, step: imm.field_step })
    }

    /// det of the adapted frame at p; ±1 exactly when (f̃, ±f̃) is Blaschke there.
    pub fn frame_det(&self, p: &[f64]) -> Result<f64> {
        Ok(self.frame(p)?.determinant())
    }

    /// Largest ||det g| − 1| at p and at p ± 10·step along each axis.
    pub fn unimodularity_defect(&self, p: &[f64]) -> Result<f64> {
        let mut worst = (self.frame_det(p)?.abs() - 1.0).abs();
        for i in 0..p.len() {
            for s in [-1.0, 1.0] {
                let mut q = p.to_vec();
                q[i] += s * 10.0 * self.step;
                worst = worst.max((self.frame_det(&q)?.abs() - 1.0).abs());
            }
        }
        Ok(worst)
    }

    pub fn dim(&self) -> usize {
        self.centro.dim()
    }

    /// 𝒢̃_f(p) = (f̃(p), f̃_*T_pM, h_p).
    pub fn tilde(&self, p: &[f64]) -> Result<XPoint> {
        let jf = self.centro.f.jet(p, 2)?;
        let jx = self.centro.xi.jet(p, 1)?;
        let d = crate::affine::decompose_from_jets(&jf, &jx, 1.0, self.dim())?;
        XPoint::new(jf.value, jf.first, d.h)
    }

    /// 𝒢_f(p).
    pub fn q(&self, p: &[f64]) -> Result<Matrix> {
        Ok(pi_n1(&self.tilde(p)?)?.q)
    }

    pub fn h(&self, p: &[f64]) -> Result<Matrix> {
        Ok(self.tilde(p)?.q)
    }

    /// g(p) = [f̃_* h^{-1/2} | f̃].
    pub fn frame(&self, p: &[f64]) -> Result<Matrix> {
        let x = self.tilde(p)?;
        let (_, hi) = spd_sqrt_pair(&x.q)?;
        Ok(adapted(&(&x.basis * hi), &x.v))
    }

    /// 𝒢_f as an SPD chart with jets from differences of exact values.
    pub fn q_chart(&self) -> ChartMap {
        let me = self.clone();
        let n1 = self.dim() + 1;
        ChartMap::sampled(self.dim(), n1 * n1, self.step, move |p| Ok(Vector::from_column_slice(me.q(p)?.as_slice())))
    }

    /// Levi-Civita symbols and inverse of h at p.
    pub fn domain_geometry(&self, p: &[f64]) -> Result<(Matrix, Vec<Matrix>)> {
        let h = self.h(p)?;
        let hi = metric_inverse(&h)?;
        let dh = fd_matrix_partials(&|q| self.h(q), p, self.step)?;
        let gamma = christoffel_from(&hi, &dh, self.dim());
        Ok((hi, gamma))
    }

    /// g⁻¹∂ᵢg for each coordinate direction.
    pub fn maurer_cartan(&self, p: &[f64]) -> Result<(Matrix, Vec<Matrix>)> {
        let g = self.frame(p)?;
        let gi = inverse(&g)?;
        let dg = fd_matrix_partials(&|q| self.frame(q), p, self.step)?;
        Ok((g, dg.iter().map(|d| &gi * d).collect()))
    }
}

/// Components of g⁻¹∂_X g relative to ℝⁿ⁺¹ = P ⊕ ℝv.
#[derive(Clone, Debug)]
pub struct MaurerCartanBlocks {
    /// ½(a − b) with a the P-part of the last column, b the last row
    pub k_m: Vector,
    /// ½(a + b)
    pub p_m: Vector,
    /// symmetric part of the P-block
    pub p_h: Matrix,
    /// antisymmetric part of the P-block
    pub k_h: Matrix,
    /// corner entry
    pub corner: f64,
    pub det: f64,
}

pub fn split_blocks(m: &Matrix) -> (Matrix, Vector, Vector, f64) {
    let n = m.nrows() - 1;
    let a = m.view((0, 0), (n, n)).into_owned();
    let col = m.view((0, n), (n, 1)).column(0).into_owned();
    let row = m.view((n, 0), (1, n)).row(0).transpose();
    (a, col, row, m[(n, n)])
}

pub fn maurer_cartan_blocks(lift: &BlaschkeLift, p: &[f64], x: &Vector) -> Result<MaurerCartanBlocks> {
    let (g, ms) = lift.maurer_cartan(p)?;
    let det = g.determinant();
    if (det.abs() - 1.0).abs() > 1e-8 {
        return Err(Error::FrameNotUnimodular(det));
    }
    let m = ms.iter().zip(x.iter()).fold(Matrix::zeros(g.nrows(), g.nrows()), |acc, (mi, xi)| acc + mi * *xi);
    let (a, col, row, corner) = split_blocks(&m);
    Ok(MaurerCartanBlocks {
        k_m: (&col - &row) * 0.5,
        p_m: (&col + &row) * 0.5,
        p_h: (&a + a.transpose()) * 0.5,
        k_h: (&a - a.transpose()) * 0.5,
        corner,
        det,
    })
}

/// Tension of an SPD-valued map from its order-2 jet:
/// Σ hⁱʲ(∂ᵢ∂ⱼψ − Γᵏᵢⱼ∂ₖψ − ½(∂ᵢψ ψ⁻¹ ∂ⱼψ + ∂ⱼψ ψ⁻¹ ∂ᵢψ)).
pub fn spd_tension_from_jet(jet: &Jet, dim: usize, hi: &Matrix, gamma: &[Matrix]) -> Result<Matrix> {
    let n = hi.nrows();
    let psi = Matrix::from_column_slice(dim, dim, jet.value.as_slice());
    if !is_positive_definite(&psi) {
        return Err(Error::NotPositive);
    }
    let pi = inverse(&psi)?;
    let d: Vec<Matrix> = (0..n).map(|i| Matrix::from_column_slice(dim, dim, jet.d(i).as_slice())).collect();
    let mut tau = Matrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            if hi[(i, j)] == 0.0 {
                continue;
            }
            let mut t = Matrix::from_column_slice(dim, dim, jet.dd(i, j).as_slice());
            for k in 0..n {
                t -= &d[k] * gamma[k][(i, j)];
            }
            t -= (&d[i] * &pi * &d[j] + &d[j] * &pi * &d[i]) * 0.5;
            tau += t * hi[(i, j)];
        }
    }
    Ok(tau)
}

pub fn spd_tension(psi: &ChartMap, hi: &Matrix, gamma: &[Matrix], p: &[f64]) -> Result<Matrix> {
    let dim = (psi.target_dim() as f64).sqrt().round() as usize;
    spd_tension_from_jet(&psi.jet(p, 2)?, dim, hi, gamma)
}

/// ‖τ‖_Q = tr(Q⁻¹τQ⁻¹τ)^{1/2}.
pub fn norm_at(q: &Matrix, tau: &Matrix) -> Result<f64> {
    let qi = inverse(q)?;
    let m = &qi * tau;
    Ok((&m * &m).trace().abs().sqrt())
}

/// Tension through a frame field: τ_𝔭 = Σ hⁱʲ(∂ᵢPⱼ + [Kᵢ,Pⱼ] − ΓᵏᵢⱼP_k)
/// with g⁻¹∂g = K + P, transported to Q = (ggᵀ)⁻¹ as −2 g⁻ᵀ τ_𝔭 g⁻¹.
pub fn frame_field_tension(
    frame: &dyn Fn(&[f64]) -> Result<Matrix>,
    hi: &Matrix,
    gamma: &[Matrix],
    p: &[f64],
    step: f64,
) -> Result<(Matrix, Matrix)> {
    let n = hi.nrows();
    let sym = |m: &Matrix| (m + m.transpose()) * 0.5;
    let mc = |q: &[f64]| -> Result<(Matrix, Vec<Matrix>)> {
        let g = frame(q)?;
        let gi = inverse(&g)?;
        let dg = fd_matrix_partials(frame, q, step)?;
        Ok((g, dg.iter().map(|d| &gi * d).collect()))
    };
    let (g, ms) = mc(p)?;
    let ps: Vec<Matrix> = ms.iter().map(sym).collect();
    let ks: Vec<Matrix> = ms.iter().zip(&ps).map(|(m, s)| m - s).collect();
    let mut dps: Vec<Vec<Matrix>> = Vec::with_capacity(n);
    for j in 0..n {
        dps.push(fd_matrix_partials(&|q| Ok(sym(&mc(q)?.1[j])), p, step)?);
    }
    let dim = g.nrows();
    let mut tp = Matrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let mut t = &dps[j][i] + &ks[i] * &ps[j] - &ps[j] * &ks[i];
            for k in 0..n {
                t -= &ps[k] * gamma[k][(i, j)];
            }
            tp += t * hi[(i, j)];
        }
    }
    let gi = inverse(&g)?;
    Ok((tp.clone(), gi.transpose() * tp * gi * -2.0))
}

pub fn frame_tension(lift: &BlaschkeLift, p: &[f64]) -> Result<(Matrix, Matrix)> {
    let (hi, gamma) = lift.domain_geometry(p)?;
    frame_field_tension(&|q| lift.frame(q), &hi, &gamma, p, lift.step)
}

/// X-level block tension h^{ab}(∇ʰ_aC)_{bij} from Pick data of (f̃, f̃).
pub fn pick_block_tension(lift: &BlaschkeLift, p: &[f64]) -> Result<Matrix> {
    let n = lift.dim();
    let (nc, pd, _) = pick_covariant_derivative(&lift.centro, p)?;
    let hi = metric_inverse(&pd.h)?;
    let mut out = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out += &nc[a][b] * hi[(a, b)];
        }
    }
    Ok(out)
}

/// Frames with |det − 1| above this are treated as non-Blaschke.
pub const UNIMODULAR_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct HarmonicityReport {
    /// sup over the grid of ‖τ(𝒢_f)‖_Q
    pub sup_tension: f64,
    /// sup of h^{ab}(∇ʰ_aC)_{b··}
    pub sup_pick_block: f64,
    /// whether the adapted frame was unimodular at every grid point
    pub unimodular: bool,
    /// sup of ‖τ_SPD − τ_frame‖_Q
    pub pipeline_gap: Option<f64>,
    /// sup of the 𝔨∩𝔪 block over coordinate directions
    pub sup_k_m: Option<f64>,
    /// sup of |τ̃ + 2·pick_trace_derivative|
    pub pick_trace_gap: Option<f64>,
    pub harmonic: bool,
}

pub fn harmonicity_report(lift: &BlaschkeLift, grid: &[Vec<f64>], tol: f64) -> Result<HarmonicityReport> {
    use rayon::prelude::*;
    let n = lift.dim();
    let chart = lift.q_chart();
    let unimodular =
        grid.iter().map(|p| Ok(lift.unimodularity_defect(p)? <= UNIMODULAR_TOL)).collect::<Result<Vec<bool>>>()?.into_iter().all(|b| b);
    let rows: Vec<[f64; 5]> = grid
        .par_iter()
        .map(|p| -> Result<[f64; 5]> {
            let (hi, gamma) = lift.domain_geometry(p)?;
            let q = lift.q(p)?;
            let tau = spd_tension(&chart, &hi, &gamma, p)?;
            let block = pick_block_tension(lift, p)?;
            if !unimodular {
                return Ok([norm_at(&q, &tau)?, block.amax(), 0.0, 0.0, 0.0]);
            }
            let (_, tf) = frame_tension(lift, p)?;
            let mut km = 0.0f64;
            let mut trace_gap = 0.0f64;
            for i in 0..n {
                let x = Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
                km = km.max(maurer_cartan_blocks(lift, p, &x)?.k_m.amax());
                for j in 0..n {
                    let y = Vector::from_fn(n, |r, _| if r == j { 1.0 } else { 0.0 });
                    let l = crate::affine::pick_trace_derivative(&lift.centro, p, &x, &y)?;
                    trace_gap = trace_gap.max((block[(i, j)] + 2.0 * l).abs());
                }
            }
            Ok([norm_at(&q, &tau)?, block.amax(), norm_at(&q, &(&tau - tf))?, km, trace_gap])
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| sup(rows.iter().map(|r| r[k]));
    let opt = |k: usize| unimodular.then(|| col(k));
    let sup_tension = col(0);
    Ok(HarmonicityReport {
        sup_tension,
        sup_pick_block: col(1),
        unimodular,
        pipeline_gap: opt(2),
        sup_k_m: opt(3),
        pick_trace_gap: opt(4),
        harmonic: sup_tension <= tol,
    })
}

/// Pull-back of ⟨·,·⟩_Q along 𝒢_f and 4·tr(PᵢPⱼ) from the Maurer–Cartan form.
pub fn pullback_metrics(lift: &BlaschkeLift, p: &[f64]) -> Result<(Matrix, Matrix)> {
    let n = lift.dim();
    let q = lift.q(p)?;
    let qi = inverse(&q)?;
    let dq = fd_matrix_partials(&|x| lift.q(x), p, lift.step)?;
    let (_, ms) = lift.maurer_cartan(p)?;
    let ps: Vec<Matrix> = ms.iter().map(|m| (m + m.transpose()) * 0.5).collect();
    let direct = Matrix::from_fn(n, n, |i, j| (&qi * &dq[i] * &qi * &dq[j]).trace());
    let frame = Matrix::from_fn(n, n, |i, j| 4.0 * (&ps[i] * &ps[j]).trace());
    Ok((direct, frame))
}

/// The split form B = [[0, I], [I, 0]] on ℝⁿ⁺¹ ⊕ (ℝⁿ⁺¹)*.
pub fn split_form(m: usize) -> Matrix {
    crate::split::ghat_matrix(m) * 2.0
}

/// ι(M) = diag(M, M⁻ᵀ).
pub fn iota_embed(m: &Matrix) -> Result<Matrix> {
    let d = m.determinant();
    if d.abs() < 1e-12 {
        return Err(Error::SingularM(d));
    }
    let k = m.nrows();
    let mit = inverse(m)?.transpose();
    let mut x = Matrix::zeros(2 * k, 2 * k);
    x.view_mut((0, 0), (k, k)).copy_from(m);
    x.view_mut((k, k), (k, k)).copy_from(&mit);
    Ok(x)
}

/// A positive (n+1)-plane of V, stored by a basis.
#[derive(Clone, Debug)]
pub struct YPoint {
    pub w: Matrix,
}

impl YPoint {
    pub fn new(w: Matrix) -> Result<Self> {
        let b = split_form(w.nrows() / 2);
        if !is_positive_definite(&(w.transpose() * b * &w)) {
            return Err(Error::NotPositive);
        }
        Ok(YPoint { w })
    }

    /// B-orthogonal projector onto the plane.
    pub fn projector(&self) -> Result<Matrix> {
        let b = split_form(self.w.nrows() / 2);
        let gram = self.w.transpose() * &b * &self.w;
        Ok(&self.w * inverse(&gram)? * self.w.transpose() * b)
    }

    /// Majorant K = B(2Π − I), positive definite.
    pub fn majorant(&self) -> Result<Matrix> {
        let b = split_form(self.w.nrows() / 2);
        let k = self.w.nrows();
        let m = &b * (self.projector()? * 2.0 - Matrix::identity(k, k));
        Ok((&m + m.transpose()) * 0.5)
    }
}

/// Φ(Q) = graph of Q.
pub fn phi_embed(q: &Matrix) -> Result<YPoint> {
    if !is_positive_definite(q) {
        return Err(Error::NotPositive);
    }
    let k = q.nrows();
    let mut w = Matrix::zeros(2 * k, k);
    w.view_mut((0, 0), (k, k)).fill_with_identity();
    w.view_mut((k, 0), (k, k)).copy_from(q);
    YPoint::new(w)
}

/// M∗N = M⁻ᵀNM⁻¹.
pub fn sl_action(m: &Matrix, n: &Matrix) -> Result<Matrix> {
    let mi = inverse(m).map_err(|_| Error::SingularM(m.determinant()))?;
    Ok(mi.transpose() * n * mi)
}

/// |ι(M)ᵀBι(M) − B|.
pub fn b_preservation(m: &Matrix) -> Result<f64> {
    let x = iota_embed(m)?;
    let b = split_form(m.nrows());
    Ok((x.transpose() * &b * &x - b).amax())
}

/// |Π(Φ(M∗Q)) − Π(ι(M)Φ(Q))|.
pub fn equivariance_residual(m: &Matrix, q: &Matrix) -> Result<f64> {
    let lhs = phi_embed(&sl_action(m, q)?)?.projector()?;
    let moved = YPoint::new(iota_embed(m)? * phi_embed(q)?.w)?;
    Ok((lhs - moved.projector()?).amax())
}

/// 𝕐-level tension of Φ∘𝒢_f, computed on the majorant map into SPD(2n+2).
pub fn composed_tension(lift: &BlaschkeLift, p: &[f64]) -> Result<(Matrix, f64)> {
    let me = lift.clone();
    let k = 2 * (lift.dim() + 1);
    let chart = ChartMap::sampled(lift.dim(), k * k, lift.step, move |q| {
        let y = phi_embed(&me.q(q)?)?;
        Ok(Vector::from_column_slice(y.majorant()?.as_slice()))
    });
    let (hi, gamma) = lift.domain_geometry(p)?;
    let tau = spd_tension(&chart, &hi, &gamma, p)?;
    let kv = Matrix::from_column_slice(k, k, chart.value(p)?.as_slice());
    let norm = norm_at(&kv, &tau)?;
    Ok((tau, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Dual2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hyperbola() -> EquiaffineImmersion {
        EquiaffineImmersion::centroaffine(ChartMap::analytic(1, 2, |s| vec![s[0].cosh(), s[0].sinh()]), 1.0)
    }

    fn titeica() -> EquiaffineImmersion {
        let f = ChartMap::analytic(2, 3, |u: &[Dual2]| vec![u[0].exp(), u[1].exp(), (-(&u[0] + &u[1])).exp()]);
        EquiaffineImmersion::centroaffine(f, 1.0)
    }

    #[test]
    fn pi_identity() {
        let x =
            XPoint::new(Vector::from_vec(vec![0.0, 1.0]), Matrix::from_column_slice(2, 1, &[1.0, 0.0]), Matrix::identity(1, 1)).unwrap();
        assert!((pi_n1(&x).unwrap().q - Matrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn hyperbola_lift_at_origin() {
        let bl = BlaschkeLift::new(&hyperbola(), &[0.0]).unwrap();
        assert!((bl.k - 1.0).abs() < 1e-14);
        assert!((bl.q(&[0.0]).unwrap() - Matrix::identity(2, 2)).amax() < 1e-14);
        let q = bl.q(&[0.7]).unwrap();
        assert!((q[(0, 1)] + 1.4f64.sinh()).abs() < 1e-12);
        let (a, _) = pullback_metrics(&bl, &[0.3]).unwrap();
        assert!((a[(0, 0)] - 8.0).abs() < 1e-6);
        let rep = harmonicity_report(&bl, &[vec![-0.5], vec![0.5]], 1e-4).unwrap();
        assert!(rep.harmonic && rep.sup_k_m.unwrap() < 1e-8, "{rep:?}");
    }

    #[test]
    fn titeica_lift_is_unimodular_and_harmonic() {
        let bl = BlaschkeLift::new(&titeica(), &[0.0, 0.0]).unwrap();
        assert!((bl.k - 3f64.powf(-0.5)).abs() < 1e-14);
        let x = bl.tilde(&[0.3, 0.1]).unwrap();
        assert!((pi_lambda(&x) - 1.0).abs() < 1e-9);
        let rep = harmonicity_report(&bl, &[vec![0.2, -0.1]], 1e-4).unwrap();
        assert!(rep.harmonic && rep.unimodular, "{rep:?}");
        assert!(rep.sup_k_m.unwrap() < 1e-8 && rep.pipeline_gap.unwrap() < 1e-4 && rep.pick_trace_gap.unwrap() < 1e-5, "{rep:?}");
        let (a, b) = pullback_metrics(&bl, &[0.2, -0.1]).unwrap();
        assert!((a - b).amax() < 1e-6);
    }

    #[test]
    fn geodesic_has_zero_tension() {
        let a = Matrix::from_row_slice(2, 2, &[0.3, 0.5, 0.5, -0.3]);
        let psi = ChartMap::sampled(1, 4, 1e-3, move |s| Ok(Vector::from_column_slice((&a * s[0]).exp().as_slice())));
        let t = spd_tension(&psi, &Matrix::identity(1, 1), &[Matrix::zeros(1, 1)], &[0.4]).unwrap();
        assert!(t.amax() < 1e-8);
    }

    #[test]
    fn iota_and_phi() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 0.5]));
        assert_eq!(iota_embed(&m).unwrap(), Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 0.5, 0.5, 2.0])));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let mut m = Matrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let d = m.determinant();
            m /= d.cbrt();
            let a = Matrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let q = &a * a.transpose() + Matrix::identity(3, 3) * 0.5;
            assert!(b_preservation(&m).unwrap() < 1e-12);
            assert!(equivariance_residual(&m, &q).unwrap() < 1e-10);
        }
        let y = phi_embed(&Matrix::identity(2, 2)).unwrap();
        assert!((y.majorant().unwrap() - Matrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn majorant_and_composed_tension() {
        let q = Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.6]);
        let k = phi_embed(&q).unwrap().majorant().unwrap();
        let mut expect = Matrix::zeros(4, 4);
        expect.view_mut((0, 0), (2, 2)).copy_from(&q);
        expect.view_mut((2, 2), (2, 2)).copy_from(&inverse(&q).unwrap());
        assert!((k - expect).amax() < 1e-12);
        let bl = BlaschkeLift::new(&titeica(), &[0.0, 0.0]).unwrap();
        let (_, norm) = composed_tension(&bl, &[0.1, 0.2]).unwrap();
        assert!(norm < 1e-3, "{norm}");
    }

    #[test]
    fn quartic_is_not_harmonic() {
        let f = ChartMap::analytic(2, 3, |u: &[Dual2]| {
            let r = (u[0].powi(4) + u[1].powi(4) + 1.0).powf(-0.25);
            vec![&u[0] * &r, &u[1] * &r, r]
        });
        let bl = BlaschkeLift::new(&EquiaffineImmersion::centroaffine(f, -1.0), &[0.3, 0.2]).unwrap();
        assert_eq!(bl.sign, -1.0);
        let rep = harmonicity_report(&bl, &[vec![0.3, 0.2]], 1e-4).unwrap();
        eprintln!("{rep:?}");
        assert!(!rep.harmonic && rep.sup_tension > 1e-2 && !rep.unimodular, "{rep:?}");
    }

    #[test]
    fn frame_and_spd_pipelines_agree() {
        let frame = |p: &[f64]| -> Result<Matrix> {
            let (u, v) = (p[0], p[1]);
            Ok(Matrix::from_row_slice(
                3,
                3,
                &[1.0 + u * u, 0.3 * v.sin(), u * v, 0.2 * u, 1.2 + v.cos() * u, 0.1, (u - v).sin(), 0.4, 1.5 + 0.3 * v * v],
            ))
        };
        let psi = ChartMap::sampled(2, 9, 1e-3, move |p| {
            let g = frame(p)?;
            Ok(Vector::from_column_slice(inverse(&(&g * g.transpose()))?.as_slice()))
        });
        let p = [0.3, -0.2];
        let hi = Matrix::from_row_slice(2, 2, &[1.3, 0.2, 0.2, 0.8]);
        let gamma = vec![Matrix::from_row_slice(2, 2, &[0.1, 0.2, 0.2, -0.3]), Matrix::from_row_slice(2, 2, &[0.0, 0.4, 0.4, 0.1])];
        let tau = spd_tension(&psi, &hi, &gamma, &p).unwrap();
        let (_, tf) = frame_field_tension(&frame, &hi, &gamma, &p, 1e-3).unwrap();
        assert!(tau.amax() > 0.1);
        assert!((tau - tf).amax() < 1e-6);
    }
}
