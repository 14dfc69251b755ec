//! Parametrized maps with a jet oracle.

use std::fmt;
use std::sync::Arc;

use super::dual::Dual2;
use super::linalg::{Matrix, Vector};
use crate::error::{Error, Result};

/// Default step for finite-difference jets.
pub const FD_STEP: f64 = 1e-3;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> Result<Vector> + Send + Sync>;
pub type DualFn = Arc<dyn Fn(&[Dual2]) -> Vec<Dual2> + Send + Sync>;
pub type JetFn = Arc<dyn Fn(&[f64], usize) -> Result<Jet> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JetMode {
    Analytic,
    FiniteDifference { step: f64 },
}

/// Value, first derivatives (m×n) and optionally second derivatives
/// (`second[a]` is the n×n Hessian of component `a`).
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: Vector,
    pub first: Matrix,
    pub second: Vec<Matrix>,
}

impl Jet {
    /// ∂ᵢ as an m-vector.
    pub fn d(&self, i: usize) -> Vector {
        self.first.column(i).into_owned()
    }

    /// ∂ᵢ∂ⱼ as an m-vector.
    pub fn dd(&self, i: usize, j: usize) -> Vector {
        Vector::from_iterator(self.second.len(), self.second.iter().map(|h| h[(i, j)]))
    }
}

#[derive(Clone)]
enum Kind {
    Analytic(DualFn),
    Sampled { f: ValueFn, step: f64 },
    Scaled { inner: ChartMap, c: f64 },
    Stack(Vec<ChartMap>),
    Custom { f: JetFn, step: f64 },
}

/// A map U ⊂ ℝⁿ → ℝᵐ.
#[derive(Clone)]
pub struct ChartMap {
    n: usize,
    m: usize,
    kind: Arc<Kind>,
    domain: Option<Arc<Vec<(f64, f64)>>>,
}

impl fmt::Debug for ChartMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChartMap({} -> {}, {:?})", self.n, self.m, self.mode())
    }
}

impl ChartMap {
    /// Chart with exact jets from a `Dual2` evaluation.
    pub fn analytic(n: usize, m: usize, f: impl Fn(&[Dual2]) -> Vec<Dual2> + Send + Sync + 'static) -> Self {
        ChartMap { n, m, kind: Arc::new(Kind::Analytic(Arc::new(f))), domain: None }
    }

    /// Chart whose jets come from 4th-order central differences of `f`.
    pub fn sampled(n: usize, m: usize, step: f64, f: impl Fn(&[f64]) -> Result<Vector> + Send + Sync + 'static) -> Self {
        ChartMap { n, m, kind: Arc::new(Kind::Sampled { f: Arc::new(f), step }), domain: None }
    }

    pub fn with_domain(mut self, boxes: Vec<(f64, f64)>) -> Self {
        assert_eq!(boxes.len(), self.n);
        self.domain = Some(Arc::new(boxes));
        self
    }

    /// `c · self`, sharing the underlying jets.
    pub fn scaled(&self, c: f64) -> Self {
        ChartMap { n: self.n, m: self.m, kind: Arc::new(Kind::Scaled { inner: self.clone(), c }), domain: None }
    }

    /// Concatenation of several charts over the same domain.
    pub fn stack(parts: Vec<ChartMap>) -> Self {
        let n = parts[0].n;
        assert!(parts.iter().all(|c| c.n == n));
        let m = parts.iter().map(|c| c.m).sum();
        ChartMap { n, m, kind: Arc::new(Kind::Stack(parts)), domain: None }
    }

    /// Chart with a caller-supplied jet oracle that uses finite differences
    /// of size `step` somewhere inside.
    pub fn from_jet_fn(n: usize, m: usize, step: f64, f: impl Fn(&[f64], usize) -> Result<Jet> + Send + Sync + 'static) -> Self {
        ChartMap { n, m, kind: Arc::new(Kind::Custom { f: Arc::new(f), step }), domain: None }
    }

    /// Same map, jets recomputed by finite differences of its values.
    pub fn to_fd(&self, step: f64) -> Self {
        let me = self.clone();
        let mut out = ChartMap::sampled(self.n, self.m, step, move |p| me.value(p));
        out.domain = self.domain.clone();
        out
    }

    pub fn domain_dim(&self) -> usize {
        self.n
    }

    pub fn target_dim(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> JetMode {
        match &*self.kind {
            Kind::Analytic(_) => JetMode::Analytic,
            Kind::Sampled { step, .. } | Kind::Custom { step, .. } => JetMode::FiniteDifference { step: *step },
            Kind::Scaled { inner, .. } => inner.mode(),
            Kind::Stack(parts) => {
                parts.iter().map(|c| c.mode()).find(|m| matches!(m, JetMode::FiniteDifference { .. })).unwrap_or(JetMode::Analytic)
            }
        }
    }

    fn check_domain(&self, p: &[f64], margin: f64) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::DimMismatch { expected: self.n, got: p.len() });
        }
        if let Some(d) = &self.domain {
            for (x, (lo, hi)) in p.iter().zip(d.iter()) {
                if *x - margin < *lo || *x + margin > *hi {
                    return Err(Error::OutOfDomain { point: p.to_vec(), margin });
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, p: &[f64]) -> Result<Vector> {
        self.check_domain(p, 0.0)?;
        let v = match &*self.kind {
            Kind::Analytic(f) => {
                let xs: Vec<Dual2> = p.iter().map(|&x| Dual2::cst(x)).collect();
                Vector::from_iterator(self.m, f(&xs).into_iter().map(|d| d.v))
            }
            Kind::Sampled { f, .. } => f(p)?,
            Kind::Custom { f, .. } => f(p, 0)?.value,
            Kind::Scaled { inner, c } => inner.value(p)? * *c,
            Kind::Stack(parts) => {
                let mut out = Vec::with_capacity(self.m);
                for c in parts {
                    out.extend(c.value(p)?.iter());
                }
                Vector::from_vec(out)
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteValue("chart value"));
        }
        Ok(v)
    }

    /// Jet of order 1 or 2 at `p`.
    pub fn jet(&self, p: &[f64], order: usize) -> Result<Jet> {
        let jet = match &*self.kind {
            Kind::Analytic(f) => {
                self.check_domain(p, 0.0)?;
                let out = f(&Dual2::seeds(p));
                let n = self.n;
                let value = Vector::from_iterator(self.m, out.iter().map(|d| d.v));
                let mut first = Matrix::zeros(self.m, n);
                let mut second = Vec::new();
                for (a, d) in out.iter().enumerate() {
                    if !d.g.is_empty() {
                        for i in 0..n {
                            first[(a, i)] = d.g[i];
                        }
                    }
                    if order >= 2 {
                        second.push(if d.h.is_empty() { Matrix::zeros(n, n) } else { Matrix::from_row_slice(n, n, &d.h) });
                    }
                }
                Jet { value, first, second }
            }
            Kind::Sampled { f, step } => {
                self.check_domain(p, 2.0 * step)?;
                fd_jet(&|q: &[f64]| f(q), p, *step, order)?
            }
            Kind::Custom { f, step } => {
                self.check_domain(p, 2.0 * step)?;
                f(p, order)?
            }
            Kind::Scaled { inner, c } => {
                let j = inner.jet(p, order)?;
                Jet { value: j.value * *c, first: j.first * *c, second: j.second.into_iter().map(|h| h * *c).collect() }
            }
            Kind::Stack(parts) => {
                let jets: Vec<Jet> = parts.iter().map(|c| c.jet(p, order)).collect::<Result<_>>()?;
                let mut value = Vec::with_capacity(self.m);
                let mut first = Matrix::zeros(self.m, self.n);
                let mut second = Vec::new();
                let mut row = 0;
                for j in jets {
                    value.extend(j.value.iter());
                    first.rows_mut(row, j.first.nrows()).copy_from(&j.first);
                    row += j.first.nrows();
                    second.extend(j.second);
                }
                Jet { value: Vector::from_vec(value), first, second }
            }
        };
        let finite = jet.value.iter().chain(jet.first.iter()).chain(jet.second.iter().flat_map(|h| h.iter())).all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFiniteValue("chart jet"));
        }
        Ok(jet)
    }
}

const W1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(i, d) in moves {
        q[i] += d;
    }
    q
}

/// 4th-order central-difference jet of a vector-valued function.
pub fn fd_jet(f: &dyn Fn(&[f64]) -> Result<Vector>, p: &[f64], step: f64, order: usize) -> Result<Jet> {
    let n = p.len();
    let value = f(p)?;
    let m = value.len();
    let mut first = Matrix::zeros(m, n);
    let mut second = if order >= 2 { vec![Matrix::zeros(n, n); m] } else { Vec::new() };
    for i in 0..n {
        let mut samples = Vec::with_capacity(4);
        for &(k, _) in W1.iter() {
            samples.push(f(&shifted(p, &[(i, k * step)]))?);
        }
        let d1 = W1.iter().zip(&samples).fold(Vector::zeros(m), |acc, ((_, w), s)| acc + s * *w) / step;
        first.set_column(i, &d1);
        if order >= 2 {
            // (-f(-2) + 16 f(-1) - 30 f(0) + 16 f(1) - f(2)) / 12h²
            let d2 = (-&samples[0] + &samples[1] * 16.0 - &value * 30.0 + &samples[2] * 16.0 - &samples[3]) / (12.0 * step * step);
            for a in 0..m {
                second[a][(i, i)] = d2[a];
            }
        }
    }
    if order >= 2 {
        for i in 0..n {
            for j in (i + 1)..n {
                let mut acc = Vector::zeros(m);
                for &(ki, wi) in W1.iter() {
                    for &(kj, wj) in W1.iter() {
                        acc += f(&shifted(p, &[(i, ki * step), (j, kj * step)]))? * (wi * wj);
                    }
                }
                acc /= step * step;
                for a in 0..m {
                    second[a][(i, j)] = acc[a];
                    second[a][(j, i)] = acc[a];
                }
            }
        }
    }
    Ok(Jet { value, first, second })
}

/// 4th-order central-difference partials ∂ᵢF of a vector-valued field.
pub fn fd_partials(f: &dyn Fn(&[f64]) -> Result<Vector>, p: &[f64], step: f64) -> Result<Vec<Vector>> {
    let mut out = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let mut acc: Option<Vector> = None;
        for &(k, w) in W1.iter() {
            let s = f(&shifted(p, &[(i, k * step)]))? * w;
            acc = Some(match acc {
                Some(a) => a + s,
                None => s,
            });
        }
        out.push(acc.unwrap() / step);
    }
    Ok(out)
}

/// Partials of a matrix-valued field.
pub fn fd_matrix_partials(f: &dyn Fn(&[f64]) -> Result<Matrix>, p: &[f64], step: f64) -> Result<Vec<Matrix>> {
    let flat = |q: &[f64]| -> Result<Vector> {
        let m = f(q)?;
        Ok(Vector::from_column_slice(m.as_slice()))
    };
    let m0 = f(p)?;
    let shape = (m0.nrows(), m0.ncols());
    let parts = fd_partials(&flat, p, step)?;
    Ok(parts.into_iter().map(|v| Matrix::from_column_slice(shape.0, shape.1, v.as_slice())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyperbola() -> ChartMap {
        ChartMap::analytic(1, 2, |s| vec![s[0].cosh(), s[0].sinh()])
    }

    #[test]
    fn analytic_hyperbola_jet() {
        let j = hyperbola().jet(&[0.0], 2).unwrap();
        assert_eq!(j.value.as_slice(), &[1.0, 0.0]);
        assert_eq!(j.d(0).as_slice(), &[0.0, 1.0]);
        assert_eq!(j.dd(0, 0).as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn analytic_titeica_first_jet() {
        let t = ChartMap::analytic(2, 3, |u| vec![u[0].exp(), u[1].exp(), (-(&u[0] + &u[1])).exp()]);
        let j = t.jet(&[0.0, 0.0], 1).unwrap();
        assert_eq!(j.value.as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(j.d(0).as_slice(), &[1.0, 0.0, -1.0]);
        assert_eq!(j.d(1).as_slice(), &[0.0, 1.0, -1.0]);
    }

    #[test]
    fn fd_cubic_second_derivative() {
        let c = ChartMap::sampled(1, 1, 1e-3, |s| Ok(Vector::from_vec(vec![s[0].powi(3)])));
        let j = c.jet(&[1.0], 2).unwrap();
        assert!((j.second[0][(0, 0)] - 6.0).abs() < 1e-8);
        assert!((j.first[(0, 0)] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn fd_mixed_partials_match_analytic() {
        let a = ChartMap::analytic(2, 1, |u| vec![(&u[0] * &u[1]).sin() + u[0].exp() * &u[1]]);
        let f = a.to_fd(1e-3);
        let p = [0.3, -0.7];
        let ja = a.jet(&p, 2).unwrap();
        let jf = f.jet(&p, 2).unwrap();
        assert!((&ja.first - &jf.first).norm() < 1e-10);
        assert!((&ja.second[0] - &jf.second[0]).norm() < 1e-8);
    }

    #[test]
    fn domain_margin_enforced() {
        let c = ChartMap::sampled(1, 1, 1e-2, |s| Ok(Vector::from_vec(vec![s[0]]))).with_domain(vec![(0.0, 1.0)]);
        assert!(matches!(c.jet(&[0.01], 1), Err(Error::OutOfDomain { .. })));
        assert!(c.jet(&[0.5], 1).is_ok());
    }

    #[test]
    fn stack_and_scale() {
        let h = hyperbola();
        let s = ChartMap::stack(vec![h.scaled(-1.0), h.clone()]);
        let j = s.jet(&[0.4], 2).unwrap();
        assert_eq!(j.value.len(), 4);
        assert!((j.value[0] + 0.4f64.cosh()).abs() < 1e-15);
        assert!((j.dd(0, 0)[2] - 0.4f64.cosh()).abs() < 1e-15);
    }
}
