//! Sequential against rayon execution for operator assembly and one
//! evaluation of the evolution right-hand side.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use muskat_core::solver::{assemble_with, compute_phi_with, Which};
use muskat_core::{Exec, FluidParams, Grid, InterfaceState, Profile, SolverConfig};

fn state(n: usize) -> InterfaceState {
    let g = Grid::new(20.0, n).unwrap();
    let p = FluidParams::new([1.0, 2.0, 3.0], [1.0, 1.6, 2.5], 1.0, 1.0, 1.0).unwrap();
    let f = Profile::from_fn(g, |x| 0.3 * (-(x * x)).exp()).unwrap();
    let h = Profile::from_fn(g, |x| -0.2 * (-((x - 0.7) / 1.5).powi(2)).exp()).unwrap();
    InterfaceState::new(f, h, p).unwrap()
}

fn bench(c: &mut Criterion) {
    let mut asm = c.benchmark_group("assemble_cal_a");
    asm.sample_size(10);
    for n in [128, 256, 512] {
        let x = state(n);
        for exec in [Exec::Sequential, Exec::Parallel] {
            asm.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &x, |b, x| {
                b.iter(|| black_box(assemble_with(Which::CalA, x, exec).unwrap()))
            });
        }
    }
    asm.finish();

    let mut phi = c.benchmark_group("compute_phi");
    phi.sample_size(10);
    for n in [128, 256] {
        let x = state(n);
        for exec in [Exec::Sequential, Exec::Parallel] {
            let cfg = SolverConfig { exec, ..SolverConfig::default() };
            phi.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &x, |b, x| {
                b.iter(|| black_box(compute_phi_with(x, &cfg).unwrap()))
            });
        }
    }
    phi.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
