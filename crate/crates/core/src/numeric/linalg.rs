//! Dense linear algebra with signature bookkeeping.
//!
//! Index conventions used crate-wide: lower indices are chart coordinates,
//! vectors are columns, covectors are rows (stored as `DVector` and applied
//! with a dot product).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative threshold below which a pivot / eigenvalue counts as zero.
pub const SINGULAR_TOL: f64 = 1e-10;
/// Symmetry tolerance for bilinear forms (relative to the largest entry).
pub const SYM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn new(positive: usize, negative: usize, zero: usize) -> Self {
        Signature { positive, negative, zero }
    }

    pub fn is_degenerate(&self) -> bool {
        self.zero > 0
    }
}

/// Symmetric bilinear form together with its signature.
#[derive(Clone, Debug)]
pub struct BilinearForm {
    pub matrix: Matrix,
    pub signature: Signature,
}

impl BilinearForm {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let signature = signature_of(&matrix)?;
        Ok(BilinearForm { matrix, signature })
    }

    pub fn eval(&self, a: &Vector, b: &Vector) -> f64 {
        a.dot(&(&self.matrix * b))
    }
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub fn asymmetry(m: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Eigenvalue sign counts; |λ| < SINGULAR_TOL·max|λ| counts as zero.
pub fn signature_of(m: &Matrix) -> Result<Signature> {
    let asym = asymmetry(m);
    if asym > SYM_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = SymmetricEigen::new(symmetrize(m)).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut s = Signature::new(0, 0, 0);
    for &l in eig.iter() {
        if l.abs() <= SINGULAR_TOL * scale || scale == 0.0 {
            s.zero += 1;
        } else if l > 0.0 {
            s.positive += 1;
        } else {
            s.negative += 1;
        }
    }
    Ok(s)
}

/// Solve `A x = b` by partially pivoted LU.
///
/// A pivot ratio below `SINGULAR_TOL` is reported as `SingularMatrix(det)`.
pub fn solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    if a.nrows() != b.len() {
        return Err(Error::DimMismatch { expected: a.nrows(), got: b.len() });
    }
    let b = Matrix::from_column_slice(b.len(), 1, b.as_slice());
    Ok(solve_many(a, &b)?.column(0).into_owned())
}

/// Solve for several right-hand sides at once (columns of `b`).
///
/// When the plain factorization fails the pivot test, rows and columns are
/// rescaled by powers of two and the scaled system is tried, so badly
/// unbalanced but well-posed systems (far along a ray) still solve.
pub fn solve_many(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let lu = a.clone().lu();
    if check_pivots(&lu.u(), lu.determinant()).is_ok() {
        return lu.solve(b).ok_or(Error::SingularMatrix(0.0));
    }
    let (r, c) = equilibrate(a);
    let scaled = Matrix::from_fn(a.nrows(), a.ncols(), |i, j| r[i] * a[(i, j)] * c[j]);
    let lu = scaled.lu();
    check_pivots(&lu.u(), lu.determinant())?;
    let rb = Matrix::from_fn(b.nrows(), b.ncols(), |i, j| r[i] * b[(i, j)]);
    let z = lu.solve(&rb).ok_or(Error::SingularMatrix(0.0))?;
    Ok(Matrix::from_fn(z.nrows(), z.ncols(), |i, j| c[i] * z[(i, j)]))
}

/// Power-of-two row and column scalings that make log|aᵢⱼ| as close to zero
/// as possible in least squares (alternating geometric means). Entries that
/// are negligible in both their row and their column are treated as zero.
pub fn equilibrate(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = a.shape();
    let row_max: Vec<f64> = (0..m).map(|i| a.row(i).amax()).collect();
    let col_max: Vec<f64> = (0..n).map(|j| a.column(j).amax()).collect();
    let logs = Matrix::from_fn(m, n, |i, j| {
        let x = a[(i, j)].abs();
        let floor = SINGULAR_TOL * row_max[i].min(col_max[j]);
        if x > floor && x.is_finite() {
            x.log2()
        } else {
            f64::NAN
        }
    });
    let mut r = vec![0.0; m];
    let mut c = vec![0.0; n];
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let (s, k) = it.filter(|x| !x.is_nan()).fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
        if k == 0 {
            0.0
        } else {
            s / k as f64
        }
    };
    for _ in 0..50 {
        for i in 0..m {
            r[i] = -mean(&mut (0..n).map(|j| logs[(i, j)] + c[j]));
        }
        for j in 0..n {
            c[j] = -mean(&mut (0..m).map(|i| logs[(i, j)] + r[i]));
        }
    }
    let p2 = |x: &f64| 2f64.powi(x.round() as i32);
    (r.iter().map(p2).collect(), c.iter().map(p2).collect())
}

fn check_pivots(u: &Matrix, det: f64) -> Result<()> {
    let diag = u.diagonal();
    let big = diag.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let small = diag.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    if !det.is_finite() || big == 0.0 || small < SINGULAR_TOL * big {
        return Err(Error::SingularMatrix(det));
    }
    Ok(())
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    solve_many(a, &Matrix::identity(a.nrows(), a.ncols()))
}

/// Inverse of a symmetric form, rejecting degenerate inputs.
pub fn metric_inverse(g: &Matrix) -> Result<Matrix> {
    inverse(g).map_err(|_| Error::DegenerateMetric(g.determinant()))
}

/// Symmetric square root and its inverse of a positive definite matrix.
pub fn spd_sqrt_pair(m: &Matrix) -> Result<(Matrix, Matrix)> {
    let eig = SymmetricEigen::new(symmetrize(m));
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositive);
    }
    let u = &eig.eigenvectors;
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let di = Matrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok((u * d * u.transpose(), u * di * u.transpose()))
}

pub fn is_positive_definite(m: &Matrix) -> bool {
    m.clone().cholesky().is_some() && asymmetry(m) <= 1e-9 * max_abs(m).max(1.0)
}

/// Orthonormal frame for a non-degenerate symmetric form `g`.
///
/// Indefinite Gram–Schmidt with pivoting, started from the columns of
/// `start` (identity when `None`). Returns the frame as columns and the signs
/// ε_i = g(e_i, e_i).
pub fn orthonormal_frame(g: &Matrix, start: Option<&Matrix>) -> Result<(Matrix, Vec<f64>)> {
    let n = g.nrows();
    let scale = max_abs(g).max(f64::MIN_POSITIVE);
    let mut pool: Vec<Vector> = match start {
        Some(s) => (0..s.ncols()).map(|j| s.column(j).into_owned()).collect(),
        None => (0..n).map(|j| Matrix::identity(n, n).column(j).into_owned()).collect(),
    };
    let mut frame: Vec<Vector> = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    while frame.len() < n {
        // orthogonalize the remaining pool against the accepted vectors
        for v in pool.iter_mut() {
            for (e, &s) in frame.iter().zip(&signs) {
                let c = e.dot(&(g * &*v)) * s;
                *v -= e * c;
            }
        }
        let norms: Vec<f64> = pool.iter().map(|v| v.dot(&(g * v))).collect();
        let (best, bn) =
            norms.iter().enumerate().fold((usize::MAX, 0.0f64), |acc, (i, &x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        let size = pool.iter().fold(0.0f64, |a, v| a.max(v.norm_squared()));
        if best != usize::MAX && bn > 1e-8 * scale * size.max(1e-300) {
            let v = pool.swap_remove(best);
            let q = v.dot(&(g * &v));
            frame.push(&v / q.abs().sqrt());
            signs.push(q.signum());
            continue;
        }
        // every remaining vector is null: combine a pair with nonzero product
        let mut mixed = None;
        'outer: for i in 0..pool.len() {
            for j in (i + 1)..pool.len() {
                let c = pool[i].dot(&(g * &pool[j]));
                if c.abs() > 1e-8 * scale * size.max(1e-300) {
                    mixed = Some(i);
                    let w = &pool[i] + &pool[j];
                    pool[i] = w;
                    break 'outer;
                }
            }
        }
        if mixed.is_none() {
            return Err(Error::DegenerateMetric(g.determinant()));
        }
    }
    Ok((Matrix::from_columns(&frame), signs))
}

/// Euclidean orthonormal basis of the complement of `vectors` in ℝ^dim.
pub fn orthogonal_complement(vectors: &[Vector], dim: usize) -> Matrix {
    let mut basis: Vec<Vector> = Vec::new();
    let push = |mut v: Vector, basis: &mut Vec<Vector>| -> bool {
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            basis.push(v / nv);
            true
        } else {
            false
        }
    };
    for v in vectors {
        push(v.clone(), &mut basis);
    }
    let mut out = Vec::new();
    while basis.len() < dim {
        // pivot: standard vector with the largest residual
        let best = (0..dim)
            .map(|i| {
                let mut e = Vector::zeros(dim);
                e[i] = 1.0;
                let r = basis.iter().fold(e.clone(), |acc, b| &acc - b * b.dot(&e));
                (i, r.norm())
            })
            .fold((0, -1.0), |a, x| if x.1 > a.1 { x } else { a });
        let mut e = Vector::zeros(dim);
        e[best.0] = 1.0;
        if push(e, &mut basis) {
            out.push(basis.last().unwrap().clone());
        } else {
            break;
        }
    }
    Matrix::from_columns(&out)
}

/// Smallest and largest singular values.
pub fn singular_range(m: &Matrix) -> (f64, f64) {
    let s = m.clone().svd(false, false).singular_values;
    let lo = s.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let hi = s.iter().fold(0.0f64, |a, &x| a.max(x));
    (lo, hi)
}

pub fn max_abs_entry(m: &Matrix) -> f64 {
    max_abs(m)
}
