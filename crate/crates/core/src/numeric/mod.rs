//! Linear algebra, jets and differential operators shared by every module.

pub mod chart;
pub mod dual;
pub mod linalg;
pub mod ops;

pub use chart::{fd_jet, fd_matrix_partials, fd_partials, ChartMap, Jet, JetMode, FD_STEP};
pub use dual::Dual2;
pub use linalg::{inverse, metric_inverse, orthonormal_frame, signature_of, solve, BilinearForm, Matrix, Signature, Vector, SINGULAR_TOL};
pub use ops::{christoffel, integrate_1form, lie_bracket, MetricField, QUAD_TOL};

/// Largest absolute entry of a slice of numbers.
pub fn sup(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0f64, |a, x| if x.is_nan() { f64::NAN } else { a.max(x.abs()) })
}

/// Tensor grid with `points` nodes per axis over [lo, hi]ⁿ, first axis slowest.
pub fn box_grid(n: usize, points: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> =
        if points <= 1 { vec![0.5 * (lo + hi)] } else { (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect() };
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}
