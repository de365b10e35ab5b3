use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lim1_core::annulus::{annulus_rlim_check, standard_annulus_corpus, AnnulusSpec, Exhaustion};
use lim1_core::derived::{
    build_system, default_grid, lim1_verdict, standard_corpus, Grid, GridPoint, SystemConfig,
    SystemKind,
};
use lim1_core::valuation::{int, rat};
use lim1_core::{Execution, Prime};

const STRATEGIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn wide_grid() -> Vec<GridPoint> {
    let sys = build_system(SystemKind::BidiskOpenDagger, SystemConfig::default()).unwrap();
    let mut out = Vec::new();
    for n in 0..8u32 {
        let e_n = sys.exponent(n as usize).unwrap();
        for m in n..n + 6 {
            for k in 1..=4 {
                for j in 1..=4 {
                    out.push(GridPoint {
                        n,
                        m,
                        e_lambda: rat(-k, 4),
                        e_eta: &e_n * rat(j, 5),
                    });
                }
            }
        }
    }
    out
}

fn bench_grid(c: &mut Criterion) {
    let sys = build_system(SystemKind::BidiskOpenDagger, SystemConfig::default()).unwrap();
    let grids = [
        ("default", default_grid(&sys).unwrap()),
        ("wide", wide_grid()),
    ];
    let mut group = c.benchmark_group("certificate_grid");
    for (name, points) in &grids {
        let grid = Grid::Params(points.clone());
        for (label, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(label, name), &grid, |b, g| {
                b.iter(|| black_box(lim1_verdict(&sys, g, exec)))
            });
        }
    }
    group.finish();
}

fn bench_corpus(c: &mut Criterion) {
    let disk = build_system(SystemKind::OpenDiskStein, SystemConfig::default()).unwrap();
    let corpus = Grid::Corpus(standard_corpus(1));
    let annulus = AnnulusSpec::new(int(1), int(0)).unwrap();
    let annulus_corpus = standard_annulus_corpus(200, Prime::default());
    let mut group = c.benchmark_group("corpus");
    group.sample_size(20);
    for (label, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new("open_disk", label), |b| {
            b.iter(|| black_box(lim1_verdict(&disk, &corpus, exec)))
        });
        group.bench_function(BenchmarkId::new("annulus_d200", label), |b| {
            b.iter(|| {
                black_box(annulus_rlim_check(
                    &annulus,
                    &Exhaustion::Default,
                    200,
                    &annulus_corpus,
                    Prime::default(),
                    exec,
                ))
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_grid, bench_corpus);
criterion_main!(benches);
