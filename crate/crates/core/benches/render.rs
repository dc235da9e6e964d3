use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lensalign::config::SceneConfig;
use lensalign::optics::{render_sequential, RenderParams};

fn render_modes(c: &mut Criterion) {
    let scene = SceneConfig::builtin();
    let system = scene.build_system().unwrap();
    let mut group = c.benchmark_group("render_200x200");
    group.sample_size(10);
    for spp in [16u32, 64] {
        let params = RenderParams {
            samples_per_pixel: spp,
            seed: 1,
        };
        group.bench_with_input(BenchmarkId::new("sequential", spp), &params, |b, p| {
            b.iter(|| render_sequential(&system, p).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", spp), &params, |b, p| {
            b.iter(|| lensalign::optics::render_parallel(&system, p).unwrap())
        });
    }
    group.finish();
}

fn render_posed(c: &mut Criterion) {
    let system = SceneConfig::builtin()
        .build_system()
        .unwrap()
        .apply_pose(&[0.1, -0.05, 0.1, 0.5, -0.5, 0.0]);
    let params = RenderParams {
        samples_per_pixel: 64,
        seed: 2,
    };
    let mut group = c.benchmark_group("render_posed");
    group.sample_size(10);
    group.bench_function("default", |b| {
        b.iter(|| lensalign::optics::render(&system, &params).unwrap())
    });
    group.finish();
}

criterion_group!(benches, render_modes, render_posed);
criterion_main!(benches);
