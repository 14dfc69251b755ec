use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use conormal::boundary::{ein_membership, ConvexCone, ProjPoint};
use conormal::numeric::linalg::{solve_many, Matrix, Vector};
use conormal::numeric::{ChartMap, Dual2};
use conormal::split::{anti_isometry_f, ghat, phat, r_action};
use conormal::symmetric::{phi_embed, pi_n1, spd_tension, SymPoint, XPoint};

fn mat(k: usize, xs: &[f64]) -> Matrix {
    Matrix::from_row_slice(k, k, &xs[..k * k])
}

fn traceless(k: usize, xs: &[f64]) -> Matrix {
    let mut a = mat(k, xs);
    let t = a.trace() / k as f64;
    for i in 0..k {
        a[(i, i)] -= t;
    }
    a
}

fn spd_unimodular(k: usize, xs: &[f64]) -> Matrix {
    let a = mat(k, xs);
    traceless(k, (&a + a.transpose()).as_slice()).exp()
}

/// u ↦ base + u₀c₀ + u₁c₁ + u₀u₁c₂, flattened column-major.
fn quadratic_field(base: Matrix, c: Vec<Matrix>) -> ChartMap {
    ChartMap::analytic(2, 4, move |u: &[Dual2]| {
        let mut out = Vec::with_capacity(4);
        for col in 0..2 {
            for row in 0..2 {
                let lin = &(&u[0] * c[0][(row, col)]) + &(&u[1] * c[1][(row, col)]);
                let quad = &(&u[0] * &u[1]) * c[2][(row, col)];
                out.push(&(&lin + &quad) + base[(row, col)]);
            }
        }
        out
    })
}

fn entries(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.6..0.6f64, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sym_distance_is_sl_invariant(a in entries(9), b in entries(9), c in entries(9)) {
        let m = traceless(3, &a).exp();
        let q1 = spd_unimodular(3, &b);
        let q2 = spd_unimodular(3, &c);
        let d = SymPoint::new(q1.clone()).unwrap().distance(&SymPoint::new(q2.clone()).unwrap()).unwrap();
        let mv = |q: &Matrix| { let x = m.transpose() * q * &m; SymPoint::new((&x + x.transpose()) * 0.5).unwrap() };
        let dm = mv(&q1).distance(&mv(&q2)).unwrap();
        prop_assert!((d - dm).abs() < 1e-9 * (1.0 + d));
        let back = SymPoint::new(q2).unwrap().distance(&SymPoint::new(q1).unwrap()).unwrap();
        prop_assert!((d - back).abs() < 1e-9 * (1.0 + d));
    }

    #[test]
    fn pi_n1_ignores_the_basis_of_the_plane(b in entries(6), v in entries(3), q in entries(4), g in entries(4)) {
        let basis = Matrix::from_column_slice(3, 2, &b) + Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let v = Vector::from_column_slice(&v) + Vector::from_column_slice(&[0.0, 0.0, 1.5]);
        let qm = mat(2, &q);
        let qf = &qm * qm.transpose() + Matrix::identity(2, 2);
        let gm = mat(2, &g) + Matrix::identity(2, 2) * 2.0;
        let x1 = XPoint::new(v.clone(), basis.clone(), qf.clone()).unwrap();
        let x2 = XPoint::new(v, &basis * &gm, gm.transpose() * &qf * &gm).unwrap();
        let (p1, p2) = (pi_n1(&x1).unwrap().q, pi_n1(&x2).unwrap().q);
        prop_assert!((p1.determinant() - 1.0).abs() < 1e-9);
        prop_assert!((&p1 - &p2).amax() < 1e-9 * p1.amax());
    }

    #[test]
    fn graph_projector_is_idempotent_with_majorant_diag(a in entries(9)) {
        let am = mat(3, &a);
        let q = &am * am.transpose() + Matrix::identity(3, 3) * 0.5;
        let y = phi_embed(&q).unwrap();
        let p = y.projector().unwrap();
        prop_assert!((&p * &p - &p).amax() < 1e-10 * (1.0 + p.amax()));
        let k = y.majorant().unwrap();
        let qi = q.clone().try_inverse().unwrap();
        prop_assert!((k.view((0, 0), (3, 3)) - &q).amax() < 1e-9 * (1.0 + q.amax()));
        prop_assert!((k.view((3, 3), (3, 3)) - &qi).amax() < 1e-9 * (1.0 + qi.amax()));
        prop_assert!(k.view((0, 3), (3, 3)).amax() < 1e-9 * (1.0 + q.amax()));
    }

    #[test]
    fn spd_tension_is_gl_equivariant(coef in entries(12), m in entries(4), h in entries(3), gam in entries(6)) {
        let c: Vec<Matrix> = (0..3).map(|i| { let a = mat(2, &coef[4 * i..]); (&a + a.transpose()) * 0.5 }).collect();
        let hi = Matrix::from_row_slice(2, 2, &[1.0 + h[0].abs(), h[1] * 0.5, h[1] * 0.5, 1.0 + h[2].abs()]);
        let gamma = vec![Matrix::from_row_slice(2, 2, &[gam[0], gam[1], gam[1], gam[2]]), Matrix::from_row_slice(2, 2, &[gam[3], gam[4], gam[4], gam[5]])];
        let mm = mat(2, &m) + Matrix::identity(2, 2) * 1.5;
        let p = [0.1, -0.05];
        let tau = spd_tension(&quadratic_field(Matrix::identity(2, 2), c.clone()), &hi, &gamma, &p).unwrap();
        let conj = c.iter().map(|a| mm.transpose() * a * &mm).collect();
        let tau_m = spd_tension(&quadratic_field(mm.transpose() * &mm, conj), &hi, &gamma, &p).unwrap();
        let expect = mm.transpose() * &tau * &mm;
        prop_assert!((&tau_m - &expect).amax() < 1e-9 * (1.0 + expect.amax()));
    }

    #[test]
    fn split_flow_and_flip(a in entries(6), b in entries(6), t in -3.0..3.0f64) {
        let (x, y) = (Vector::from_column_slice(&a), Vector::from_column_slice(&b));
        let g = ghat(&x, &y);
        prop_assert!((ghat(&r_action(t, &x), &r_action(t, &y)) - g).abs() < 1e-12 * (1.0 + x.norm() * y.norm() * (2.0 * t.abs()).exp()));
        prop_assert!((ghat(&anti_isometry_f(&x), &anti_isometry_f(&y)) + g).abs() < 1e-14);
        prop_assert!((phat(&phat(&x)) - &x).amax() < 1e-15);
    }

    #[test]
    fn ein_residual_is_normalized(a in entries(8), s in 0.1..10.0f64) {
        let x = Vector::from_column_slice(&a) + Vector::from_element(8, 1e-3);
        let p = ProjPoint::new(&x).unwrap();
        let r = ein_membership(&p);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
        let q = ProjPoint::new(&(&x * -s)).unwrap();
        prop_assert!(p.distance(&q) < 1e-7);
        prop_assert!((ein_membership(&q) - r).abs() < 1e-12);
    }

    #[test]
    fn isotropic_pairs_lie_on_ein(v in entries(4), w in entries(4)) {
        let v = Vector::from_column_slice(&v) + Vector::from_element(4, 0.5);
        let w = Vector::from_column_slice(&w);
        let phi = &w - &v * (w.dot(&v) / v.norm_squared());
        prop_assume!(phi.norm() > 1e-3);
        let mut x = Vector::zeros(8);
        x.rows_mut(0, 4).copy_from(&v);
        x.rows_mut(4, 4).copy_from(&phi);
        prop_assert!(ein_membership(&ProjPoint::new(&x).unwrap()) < 1e-12);
    }

    #[test]
    fn badly_scaled_systems_still_solve(w in entries(16), e in prop::collection::vec(-30.0..30.0f64, 8), x in entries(4)) {
        let core = mat(4, &w) * 0.3 + Matrix::identity(4, 4);
        let (r, c): (Vec<f64>, Vec<f64>) = (e[..4].iter().map(|z| z.exp()).collect(), e[4..].iter().map(|z| z.exp()).collect());
        let a = Matrix::from_fn(4, 4, |i, j| r[i] * core[(i, j)] * c[j]);
        let truth = Vector::from_fn(4, |j, _| (x[j] + 1.0) / c[j]);
        let b = &a * &truth;
        let got = solve_many(&a, &Matrix::from_column_slice(4, 1, b.as_slice())).unwrap();
        for j in 0..4 {
            prop_assert!((got[(j, 0)] * c[j] - truth[j] * c[j]).abs() < 1e-9 * (1.0 + (truth[j] * c[j]).abs()));
        }
    }
}

#[test]
fn sampled_lambda_pairs_are_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for cone in [ConvexCone::orthant(3), ConvexCone::lorentz(3), ConvexCone::segment([1.0, 1.0], [1.0, -1.0]).unwrap()] {
        for pair in cone.sample_lambda(&mut rng, 50) {
            let r = cone.lambda_membership(&pair.v.rep, &pair.phi.rep).unwrap();
            assert_abs_diff_eq!(r.max(), 0.0, epsilon = 1e-9);
        }
    }
}
