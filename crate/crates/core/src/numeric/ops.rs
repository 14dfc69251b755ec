//! Differential operators: brackets, Levi-Civita symbols, line integrals.

use std::sync::Arc;

use super::chart::{fd_matrix_partials, ChartMap};
use super::linalg::{metric_inverse, signature_of, Matrix, Signature, Vector};
use crate::error::{Error, Result};

pub const QUAD_TOL: f64 = 1e-8;

/// A field of symmetric forms over a chart.
#[derive(Clone)]
pub struct MetricField {
    f: Arc<dyn Fn(&[f64]) -> Result<Matrix> + Send + Sync>,
    pub step: f64,
}

impl MetricField {
    pub fn new(step: f64, f: impl Fn(&[f64]) -> Result<Matrix> + Send + Sync + 'static) -> Self {
        MetricField { f: Arc::new(f), step }
    }

    pub fn at(&self, p: &[f64]) -> Result<Matrix> {
        (self.f)(p)
    }

    pub fn signature(&self, p: &[f64]) -> Result<Signature> {
        signature_of(&self.at(p)?)
    }
}

/// `[X,Y](p) = JY·X − JX·Y` for vector fields given as charts ℝⁿ → ℝⁿ.
pub fn lie_bracket(x: &ChartMap, y: &ChartMap, p: &[f64]) -> Result<Vector> {
    let jx = x.jet(p, 1)?;
    let jy = y.jet(p, 1)?;
    Ok(&jy.first * &jx.value - &jx.first * &jy.value)
}

/// Christoffel symbols `gamma[k][(i,j)] = Γᵏᵢⱼ` of the Levi-Civita connection.
pub fn christoffel(metric: &MetricField, p: &[f64]) -> Result<Vec<Matrix>> {
    let g = metric.at(p)?;
    let n = g.nrows();
    let gi = metric_inverse(&g)?;
    let dg = fd_matrix_partials(&|q| metric.at(q), p, metric.step)?;
    Ok(christoffel_from(&gi, &dg, n))
}

/// Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢgₗⱼ + ∂ⱼgₗᵢ − ∂ₗgᵢⱼ) from the inverse metric and partials.
pub fn christoffel_from(gi: &Matrix, dg: &[Matrix], n: usize) -> Vec<Matrix> {
    let mut gamma = vec![Matrix::zeros(n, n); n];
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += gi[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                gamma[k][(i, j)] = 0.5 * s;
                gamma[k][(j, i)] = 0.5 * s;
            }
        }
    }
    gamma
}

fn simpson(f: &dyn Fn(f64) -> Result<f64>, panels: usize) -> Result<f64> {
    let m = panels * 2;
    let h = 1.0 / m as f64;
    let mut s = f(0.0)? + f(1.0)?;
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(k as f64 * h)?;
    }
    Ok(s * h / 3.0)
}

/// ∫ α along a straight segment, composite Simpson refined until two
/// successive halvings differ by less than `QUAD_TOL`.
pub fn integrate_segment(alpha: &dyn Fn(&[f64]) -> Result<Vector>, a: &[f64], b: &[f64]) -> Result<f64> {
    let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let g = |s: f64| -> Result<f64> {
        let p: Vec<f64> = a.iter().zip(&d).map(|(x, dx)| x + s * dx).collect();
        let w = alpha(&p)?;
        Ok(w.iter().zip(&d).map(|(x, y)| x * y).sum())
    };
    let mut panels = 2;
    let mut prev = simpson(&g, panels)?;
    loop {
        panels *= 2;
        let next = simpson(&g, panels)?;
        if (next - prev).abs() < QUAD_TOL || panels >= 1 << 12 {
            return Ok(next);
        }
        prev = next;
    }
}

/// ∫ α along a polyline.
pub fn integrate_1form(alpha: &dyn Fn(&[f64]) -> Result<Vector>, path: &[Vec<f64>]) -> Result<f64> {
    if path.len() < 2 {
        return Ok(0.0);
    }
    let n = path[0].len();
    let mut total = 0.0;
    for w in path.windows(2) {
        if w[1].len() != n {
            return Err(Error::DimMismatch { expected: n, got: w[1].len() });
        }
        total += integrate_segment(alpha, &w[0], &w[1])?;
    }
    Ok(total)
}
