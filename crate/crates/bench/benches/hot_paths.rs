use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussmax::fieldsim::circulant::Workspace;
use gaussmax::fieldsim::{FbmSimulator, FieldSimulator};
use gaussmax::limits::limit_cdf_sparse;
use gaussmax::pickands::{estimate_H_alpha, Options};
use gaussmax::rng::{stream, StreamRole};
use gaussmax::{CovarianceModel, Horizon};

fn field_pair(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_pair");
    for (alpha, t, d) in [(1.0, 16.0, 0.125), (2.0, 64.0, 0.25)] {
        let model = CovarianceModel::new(alpha, alpha, 0.0).unwrap();
        let sim = FieldSimulator::new(&model, &Horizon::square(t).unwrap(), d, d).unwrap();
        let (nx, ny) = sim.shape();
        let (mut a, mut b) = (vec![0.0; nx * ny], vec![0.0; nx * ny]);
        let mut ws = Workspace::default();
        let mut pair = 0;
        group.bench_function(BenchmarkId::from_parameter(format!("alpha{alpha}_{nx}x{ny}")), |bench| {
            bench.iter(|| {
                sim.sample_pair_into(1, pair, &mut ws, &mut a, &mut b);
                pair += 1;
                black_box(a[0] + b[0])
            })
        });
    }
    group.finish();
}

fn fbm_pair(c: &mut Criterion) {
    let sim = FbmSimulator::new(0.5, 1 << 14, 1.0 / 1024.0).unwrap();
    let mut buf = Vec::new();
    let mut rep = 0;
    c.bench_function("fbm_pair_16384", |bench| {
        bench.iter(|| {
            let mut rng = stream(1, rep, StreamRole::Fbm);
            rep += 1;
            black_box(sim.sample_pair(&mut rng, &mut buf))
        })
    });
}

fn limit_cdf(c: &mut Criterion) {
    c.bench_function("limit_cdf_sparse_r0.5", |bench| {
        bench.iter(|| limit_cdf_sparse(black_box(0.3), black_box(-0.7), black_box(0.5)).unwrap())
    });
}

fn pickands(c: &mut Criterion) {
    let mut group = c.benchmark_group("pickands");
    group.sample_size(10);
    group.bench_function("H2_lambda16_dt1_64_200reps", |bench| {
        bench.iter(|| estimate_H_alpha(2.0, 16.0, 1.0 / 64.0, 200, 1, &Options::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, field_pair, fbm_pair, limit_cdf, pickands);
criterion_main!(benches);
