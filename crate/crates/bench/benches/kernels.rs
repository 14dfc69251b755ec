use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conormal::affine::{affine_jet, codazzi_residuals, decompose_structure};
use conormal::boundary::{projective_limit, S_MAX};
use conormal::sigma::{build_sigma, SigmaKind};
use conormal::split::{axioms_report, random_quadric_point, random_tangent, QuadricKind};
use conormal::symmetric::{frame_tension, spd_tension, BlaschkeLift};
use conormal_bench::{probe, quartic, titeica};

fn structure(c: &mut Criterion) {
    let t = titeica(3);
    let q = quartic(2);
    let p3 = probe(3);
    let p2 = probe(2);
    c.bench_function("decompose titeica n=3", |b| b.iter(|| decompose_structure(&t.imm, black_box(&p3)).unwrap()));
    c.bench_function("decompose quartic n=2 fd", |b| b.iter(|| decompose_structure(&q.imm, black_box(&p2)).unwrap()));
    c.bench_function("codazzi titeica n=3", |b| b.iter(|| codazzi_residuals(&affine_jet(&t.imm, black_box(&p3)).unwrap())));
}

fn lifts(c: &mut Criterion) {
    let t = titeica(2);
    let p = probe(2);
    let sigma = build_sigma(&t.imm, SigmaKind::Minus, &t.center()).unwrap();
    c.bench_function("sigma value titeica n=2", |b| b.iter(|| sigma.value(black_box(&p)).unwrap()));
    let lift = BlaschkeLift::new(&t.imm, &t.center()).unwrap();
    let chart = lift.q_chart();
    c.bench_function("spd tension titeica n=2", |b| {
        b.iter(|| {
            let (hi, gamma) = lift.domain_geometry(black_box(&p)).unwrap();
            spd_tension(&chart, &hi, &gamma, &p).unwrap()
        })
    });
    c.bench_function("frame tension titeica n=2", |b| b.iter(|| frame_tension(&lift, black_box(&p)).unwrap()));
}

fn boundary(c: &mut Criterion) {
    let t = titeica(2);
    let sigma = build_sigma(&t.imm, SigmaKind::Minus, &t.center()).unwrap();
    let eval = |p: &[f64]| sigma.value(p);
    let ray = t.rays[0].clone();
    c.bench_function("projective limit titeica ray", |b| b.iter(|| projective_limit(&eval, black_box(&ray), S_MAX).unwrap()));
}

fn model(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sample = move || rng.gen_range(-1.0..1.0);
    let q = random_quadric_point(3, QuadricKind::Sphere, &mut sample);
    let pair = (random_tangent(&q, &mut sample), random_tangent(&q, &mut sample));
    c.bench_function("para-sasaki axioms m=3", |b| b.iter(|| axioms_report(black_box(&q), std::slice::from_ref(&pair)).unwrap()));
}

criterion_group!(benches, structure, lifts, boundary, model);
criterion_main!(benches);
