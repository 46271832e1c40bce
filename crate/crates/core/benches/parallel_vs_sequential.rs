use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rqc_moments::par::{run_trials, run_trials_seq};
use rqc_moments::phase_walk::mc_moment_aux;

fn bench_trial_runner(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial_runner");
    for &trials in &[256u64, 1024] {
        group.bench_with_input(
            BenchmarkId::new("parallel", trials),
            &trials,
            |b, &trials| {
                b.iter(|| {
                    run_trials(trials, |t| {
                        let mut rng = rqc_moments::rng::stream(7, t, 0);
                        let mut acc = 0.0f64;
                        for _ in 0..200 {
                            acc += rand::Rng::gen::<f64>(&mut rng);
                        }
                        acc
                    })
                })
            },
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", trials),
            &trials,
            |b, &trials| {
                b.iter(|| {
                    run_trials_seq(trials, |t| {
                        let mut rng = rqc_moments::rng::stream(7, t, 0);
                        let mut acc = 0.0f64;
                        for _ in 0..200 {
                            acc += rand::Rng::gen::<f64>(&mut rng);
                        }
                        acc
                    })
                })
            },
        );
    }
    group.finish();
}

fn bench_aux_moment(c: &mut Criterion) {
    let mut group = c.benchmark_group("aux_moment_n6_d200");
    group.sample_size(10);
    group.bench_function("default_backend", |b| {
        b.iter(|| mc_moment_aux(6, 200, 2, 512, 11).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_trial_runner, bench_aux_moment);
criterion_main!(benches);
