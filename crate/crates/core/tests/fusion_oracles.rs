mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajprior::fusion::{
    compute_logits, confidence_fuse, confidence_weights, predict_offsets, resize, softmax2, warp,
    AlignmentParams, ConfidenceLogits, LogitProjection, OffsetField, OffsetNet, ResizeMode,
};
use trajprior::{FeatureMap, GridSpec};

fn grid(rows: usize, cols: usize) -> GridSpec {
    GridSpec::new(0.0, cols as f64, 0.0, rows as f64, 1.0, 1.0).unwrap()
}

#[test]
fn offsets_match_sliding_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let (h, w, c, hid) = (
            rng.random_range(1..7),
            rng.random_range(1..7),
            rng.random_range(1..4),
            rng.random_range(1..5),
        );
        let spec = grid(h, w);
        let bev = random_feature(&mut rng, spec, c);
        let prior = random_feature(&mut rng, spec, c);
        let net = random_offset_net(&mut rng, 2 * c, hid);
        let got = predict_offsets(&bev, &prior, &net).unwrap();
        for (a, b) in got
            .as_slice()
            .iter()
            .zip(offsets_sliding_window(&bev, &prior, &net))
        {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn offsets_translation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let spec = grid(9, 10);
    let bev = random_feature(&mut rng, spec, 2);
    let prior = random_feature(&mut rng, spec, 2);
    let net = random_offset_net(&mut rng, 4, 3);
    let shift = |f: &FeatureMap| {
        FeatureMap::from_fn(spec, 2, |r, c, ch| {
            if r >= 1 && c >= 2 {
                f.get(r - 1, c - 2, ch)
            } else {
                0.0
            }
        })
    };
    let base = predict_offsets(&bev, &prior, &net).unwrap();
    let moved = predict_offsets(&shift(&bev), &shift(&prior), &net).unwrap();
    // Two stacked 3×3 layers see two cells of padding on each side.
    for r in 3..7 {
        for c in 4..8 {
            let (a, b) = (moved.get(r, c), base.get(r - 1, c - 2));
            assert!((a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);
        }
    }
}

#[test]
fn logits_match_per_cell_affine_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let spec = grid(4, 5);
    let c = 3;
    let bev = random_feature(&mut rng, spec, c);
    let prior = random_feature(&mut rng, spec, c);
    let w: Vec<f64> = (0..4 * c).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bias = [0.25, -0.5];
    let l = compute_logits(
        &bev,
        &prior,
        &LogitProjection::new(2 * c, w.clone(), bias).unwrap(),
    )
    .unwrap();
    for r in 0..4 {
        for col in 0..5 {
            let x: Vec<f64> = bev
                .cell(r, col)
                .iter()
                .chain(prior.cell(r, col))
                .copied()
                .collect();
            for (out, row) in [(&l.lambda_a, 0), (&l.lambda_b, 1)] {
                let expect: f64 =
                    bias[row] + (0..2 * c).map(|j| w[row * 2 * c + j] * x[j]).sum::<f64>();
                assert!((out[spec.index(r, col)] - expect).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn warp_reproduces_affine_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let spec = grid(8, 9);
    for _ in 0..20 {
        let (a, b, c) = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let f = FeatureMap::from_fn(spec, 1, |r, col, _| a + b * r as f64 + c * col as f64);
        // Spatially varying fractional offsets that keep every tap inside the grid.
        let mut data = Vec::new();
        let mut target = Vec::new();
        for r in 0..8 {
            for col in 0..9 {
                let y = rng.random_range(0.0..7.0);
                let x = rng.random_range(0.0..8.0);
                data.extend([y - r as f64, x - col as f64]);
                target.push(a + b * y + c * x);
            }
        }
        let out = warp(&f, &OffsetField::from_vec(spec, data).unwrap()).unwrap();
        for (o, t) in out.as_slice().iter().zip(&target) {
            assert!((o - t).abs() <= 1e-12, "{o} vs {t}");
        }
    }
}

#[test]
fn warp_weights_sum_to_one_inside() {
    let spec = grid(6, 6);
    let ones = FeatureMap::from_fn(spec, 1, |_, _, _| 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..50 {
        let off = OffsetField::constant(
            spec,
            rng.random_range(-0.99..0.99),
            rng.random_range(-0.99..0.99),
        )
        .unwrap();
        let out = warp(&ones, &off).unwrap();
        for r in 1..5 {
            for c in 1..5 {
                assert!((out.get(r, c, 0) - 1.0).abs() <= 4.0 * f64::EPSILON);
            }
        }
    }
}

#[test]
fn adjoints_agree_with_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for _ in 0..5 {
        let errs = adjoint_fd_errors(&mut rng);
        assert!(errs.iter().all(|&e| e < 1e-5), "{errs:?}");
    }
}

#[test]
fn softmax_complementary_and_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..100_000 {
        let s = if rng.random_bool(0.5) { 1e4 } else { 10.0 };
        let (a, b) = (rng.random_range(-s..s), rng.random_range(-s..s));
        let (al, be) = softmax2(a, b);
        assert!(al.is_finite() && be.is_finite());
        assert!((al + be - 1.0).abs() <= f64::EPSILON);
        assert_eq!(softmax2(a, a), (0.5, 0.5));
    }
}

#[test]
fn fused_values_between_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    let spec = grid(5, 7);
    let bev = random_feature(&mut rng, spec, 3);
    let prior = random_feature(&mut rng, spec, 3);
    let la = (0..spec.len())
        .map(|_| rng.random_range(-50.0..50.0))
        .collect();
    let lb = (0..spec.len())
        .map(|_| rng.random_range(-50.0..50.0))
        .collect();
    let logits = ConfidenceLogits::new(spec, la, lb).unwrap();
    let fused = confidence_fuse(&bev, &prior, &logits).unwrap();
    for ((y, b), p) in fused
        .as_slice()
        .iter()
        .zip(bev.as_slice())
        .zip(prior.as_slice())
    {
        assert!(*y >= b.min(*p) && *y <= b.max(*p));
    }
    let (alpha, beta) = confidence_weights(&logits);
    assert!(alpha
        .iter()
        .zip(&beta)
        .all(|(a, b)| (a + b - 1.0).abs() <= f64::EPSILON));
}

#[test]
fn params_shape_checks() {
    let spec = grid(3, 3);
    let params = AlignmentParams::random(1, 2, 2).unwrap();
    let f3 = FeatureMap::zeros(spec, 3);
    assert!(trajprior::fusion::align_and_fuse(&f3, &f3, &params).is_err());
    assert!(OffsetNet::new(
        4,
        2,
        vec![0.0; 72],
        vec![0.0; 2],
        vec![f64::NAN; 36],
        [0.0; 2]
    )
    .is_err());
}

#[test]
fn resize_preserves_constants() {
    let src = FeatureMap::from_fn(GridSpec::default(), 2, |_, _, ch| ch as f64 + 0.5);
    let target = GridSpec::new(-30.0, 30.0, -15.0, 15.0, 0.3, 0.7).unwrap();
    for mode in [ResizeMode::Nearest, ResizeMode::Bilinear] {
        let out = resize(&src, target, mode).unwrap();
        assert_eq!(out.shape(), (target.rows(), target.cols(), 2));
        assert!(out.as_slice().chunks(2).all(|c| c == [0.5, 1.5]));
    }
}
