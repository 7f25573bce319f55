use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use trajprior::fusion::{align_and_fuse, warp, warp_grad, AlignmentParams, OffsetField};
use trajprior::raster::{heatmap_to_feature, rasterize_trajectories};
use trajprior::select::{fps, frechet_dist, kmeans, KMeansConfig};
use trajprior::{FeatureMap, GridSpec};
use trajprior_bench::busy_frame;

fn frechet(c: &mut Criterion) {
    let (set, _) = busy_frame(1);
    let (a, b) = (set.trajectories[0].points(), set.trajectories[30].points());
    c.bench_function("frechet_91x91", |bench| {
        bench.iter(|| frechet_dist(black_box(a), black_box(b)))
    });
    let small = set.trajectories.iter().take(40).cloned().collect();
    let small = trajprior::TrajectorySet::new("bench", 8, small);
    c.bench_function("fps_40_pick_8", |bench| {
        bench.iter(|| fps(black_box(&small), 8, 0).unwrap())
    });
}

fn rasterize(c: &mut Criterion) {
    let (set, _) = busy_frame(2);
    let spec = GridSpec::default();
    c.bench_function("rasterize_200_trajectories", |bench| {
        bench.iter(|| rasterize_trajectories(black_box(&set), &spec).unwrap())
    });
}

fn cluster(c: &mut Criterion) {
    let (set, _) = busy_frame(3);
    let cfg = KMeansConfig::new(8);
    c.bench_function("kmeans_200_k8", |bench| {
        bench.iter(|| kmeans(black_box(&set), &cfg).unwrap())
    });
}

fn fusion(c: &mut Criterion) {
    let (set, _) = busy_frame(4);
    let spec = GridSpec::default();
    let prior = heatmap_to_feature(&rasterize_trajectories(&set, &spec).unwrap());
    let off = OffsetField::from_vec(
        spec,
        (0..spec.len() * 2)
            .map(|i| ((i * 37) % 17) as f64 / 8.0 - 1.0)
            .collect(),
    )
    .unwrap();
    let upstream = FeatureMap::from_fn(spec, 2, |r, col, ch| ((r + col + ch) % 5) as f64 * 0.1);
    c.bench_function("warp_100x200x2", |bench| {
        bench.iter(|| warp(black_box(&prior), &off).unwrap())
    });
    c.bench_function("warp_grad_100x200x2", |bench| {
        bench.iter(|| warp_grad(black_box(&prior), &off, &upstream).unwrap())
    });
    let params = AlignmentParams::random(4, 2, 8).unwrap();
    c.bench_function("align_and_fuse_100x200x2", |bench| {
        bench.iter_batched(
            || prior.clone(),
            |bev| align_and_fuse(&bev, &prior, &params).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, frechet, rasterize, cluster, fusion);
criterion_main!(benches);
