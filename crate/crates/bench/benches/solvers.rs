use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use carpet_core::dims::{self, moran_dimension};
use carpet_core::instances::{baranski_example, gl_example};
use carpet_core::oracle::{self, BUDGET};
use carpet_core::{Axis, NonAutoFibre, Scalar, SequenceSpec, Symbolic};

const TOL: f64 = 1e-12;

fn moran(c: &mut Criterion) {
    c.bench_function("moran 3 ratios", |b| {
        b.iter(|| moran_dimension(black_box(&[1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]), TOL).unwrap())
    });
}

fn dimensions(c: &mut Criterion) {
    let gl = gl_example();
    let bar = baranski_example(Scalar::from_ratio(1, 40)).unwrap();
    c.bench_function("dimensions gl example", |b| {
        b.iter(|| dims::dimensions(black_box(&gl), TOL).unwrap())
    });
    c.bench_function("dimensions baranski example", |b| {
        b.iter(|| dims::dimensions(black_box(&bar), 1e-10).unwrap())
    });
}

fn fibre(c: &mut Criterion) {
    let f = NonAutoFibre::from_carpet(
        &gl_example(),
        Axis::Horizontal,
        &SequenceSpec::periodic(vec![2], vec![0, 1, 2]),
    )
    .unwrap();
    c.bench_function("theta n=3 m=64", |b| {
        b.iter(|| f.theta(black_box(3), black_box(64), TOL).unwrap())
    });
    let mut group = c.benchmark_group("fibre assouad");
    for m in [256, 2048] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| f.fibre_assouad(m, TOL).unwrap())
        });
    }
    group.finish();
}

fn symbolic(c: &mut Criterion) {
    let sym = Symbolic::new(&gl_example()).unwrap();
    c.bench_function("section r=0.01", |b| {
        b.iter(|| sym.section_at_scale(black_box(0.01), BUDGET).unwrap())
    });
}

fn box_counting(c: &mut Criterion) {
    let gl = gl_example();
    let mut group = c.benchmark_group("box count");
    for k in [4u32, 7] {
        let delta = 0.5f64.powi(k as i32);
        let depth = oracle::depth_for_diameter(&gl, delta / 2.0);
        group.bench_with_input(BenchmarkId::from_parameter(k), &delta, |b, &d| {
            b.iter(|| oracle::box_count(&gl, d, depth, BUDGET).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, moran, dimensions, fibre, symbolic, box_counting);
criterion_main!(benches);
