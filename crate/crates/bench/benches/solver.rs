use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsfrac_core::solver::{solve_harmonic, solve_penalized};
use qsfrac_core::{build_rect_mesh, CrackSet, PenaltyWeight, Side};
use std::hint::black_box;

fn harmonic(c: &mut Criterion) {
    let mut group = c.benchmark_group("harmonic");
    for n in [16, 32, 64] {
        let mesh = build_rect_mesh(1.0, 1.0, n, n, &[Side::Bottom, Side::Top]).unwrap();
        let g = mesh.nodal(|p| 2.0 * p[1] - 1.0);
        let row = (n / 2) * (n + 1);
        let crack = CrackSet::new(&mesh, (0..n / 4).map(|i| mesh.find_edge(row + i, row + i + 1).unwrap())).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_harmonic(&mesh, black_box(&crack), black_box(&g)).unwrap())
        });
    }
    group.finish();
}

fn penalized(c: &mut Criterion) {
    let mut group = c.benchmark_group("penalized");
    for n in [16, 32, 64] {
        let mesh = build_rect_mesh(1.0, 1.0, n, n, &Side::ALL).unwrap();
        let g = mesh.nodal(|p| p[0] * p[1]);
        let w = solve_harmonic(&mesh, &CrackSet::empty(), &mesh.nodal(|p| p[0])).unwrap();
        let lambda = PenaltyWeight::new(1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_penalized(&mesh, &CrackSet::empty(), black_box(&g), &w, lambda).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, harmonic, penalized);
criterion_main!(benches);
