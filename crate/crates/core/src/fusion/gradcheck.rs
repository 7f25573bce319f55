//! Central finite-difference verification of the analytic adjoints.
//!
//! Each kernel is reduced to the scalar `L = Σ u ⊙ f(θ)` with a random
//! cotangent `u`, and every component of `∂L/∂θ` is compared with
//! `(L(θ + h e_i) - L(θ - h e_i)) / 2h`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::*;
use crate::feature::FeatureMap;
use crate::grid::GridSpec;

pub const FD_STEP: f64 = 1e-6;

/// Denominator floor of the relative error, so components whose true
/// derivative is essentially zero are judged on an absolute scale.
pub const REL_FLOOR: f64 = 1e-3;

/// Maximum relative error per kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub warp: f64,
    pub fuse: f64,
    pub logits: f64,
    pub offsets: f64,
}

impl GradCheckReport {
    pub fn max(&self) -> f64 {
        self.warp.max(self.fuse).max(self.logits).max(self.offsets)
    }

    pub fn merge(self, other: GradCheckReport) -> GradCheckReport {
        GradCheckReport {
            warp: self.warp.max(other.warp),
            fuse: self.fuse.max(other.fuse),
            logits: self.logits.max(other.logits),
            offsets: self.offsets.max(other.offsets),
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Largest relative error between `analytic` and the central difference of `loss` around `theta`.
pub fn compare(theta: &[f64], analytic: &[f64], mut loss: impl FnMut(&[f64]) -> f64) -> f64 {
    assert_eq!(theta.len(), analytic.len());
    let mut x = theta.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let v = x[i];
        x[i] = v + FD_STEP;
        let plus = loss(&x);
        x[i] = v - FD_STEP;
        let minus = loss(&x);
        x[i] = v;
        worst = worst.max(relative_error(
            analytic[i],
            (plus - minus) / (2.0 * FD_STEP),
        ));
    }
    worst
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_map(rng: &mut ChaCha8Rng, spec: GridSpec, chans: usize) -> FeatureMap {
    FeatureMap::from_fn(spec, chans, |_, _, _| rng.random_range(-1.0..1.0))
}

/// Offsets in `(-2, 2)` whose fractional parts stay in `[0.01, 0.99]`.
fn random_offsets(rng: &mut ChaCha8Rng, spec: GridSpec) -> OffsetField {
    let data = (0..spec.len() * 2)
        .map(|_| rng.random_range(-2..2) as f64 + rng.random_range(0.01..0.99))
        .collect();
    OffsetField::from_vec(spec, data).expect("finite offsets")
}

fn with(map: &FeatureMap, data: &[f64]) -> FeatureMap {
    FeatureMap::from_vec(*map.spec(), map.channels(), data.to_vec()).expect("same shape")
}

fn check_warp(rng: &mut ChaCha8Rng, spec: GridSpec, chans: usize) -> f64 {
    let prior = random_map(rng, spec, chans);
    let off = random_offsets(rng, spec);
    let up = random_map(rng, spec, chans);
    let (dp, doff) = warp_grad(&prior, &off, &up).expect("shapes match");
    let e_prior = compare(prior.as_slice(), dp.as_slice(), |x| {
        dot(
            warp(&with(&prior, x), &off).unwrap().as_slice(),
            up.as_slice(),
        )
    });
    let e_off = compare(off.as_slice(), doff.as_slice(), |x| {
        let o = OffsetField::from_vec(spec, x.to_vec()).unwrap();
        dot(warp(&prior, &o).unwrap().as_slice(), up.as_slice())
    });
    e_prior.max(e_off)
}

fn check_fuse(rng: &mut ChaCha8Rng, spec: GridSpec, chans: usize) -> f64 {
    let bev = random_map(rng, spec, chans);
    let prior = random_map(rng, spec, chans);
    let la: Vec<f64> = (0..spec.len())
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    let lb: Vec<f64> = (0..spec.len())
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    let logits = ConfidenceLogits::new(spec, la.clone(), lb.clone()).unwrap();
    let up = random_map(rng, spec, chans);
    let g = confidence_fuse_grad(&bev, &prior, &logits, &up).unwrap();
    let loss = |b: &FeatureMap, p: &FeatureMap, l: &ConfidenceLogits| {
        dot(confidence_fuse(b, p, l).unwrap().as_slice(), up.as_slice())
    };
    let e_b = compare(bev.as_slice(), g.d_bev.as_slice(), |x| {
        loss(&with(&bev, x), &prior, &logits)
    });
    let e_p = compare(prior.as_slice(), g.d_prior.as_slice(), |x| {
        loss(&bev, &with(&prior, x), &logits)
    });
    let e_a = compare(&la, &g.d_lambda_a, |x| {
        loss(
            &bev,
            &prior,
            &ConfidenceLogits::new(spec, x.to_vec(), lb.clone()).unwrap(),
        )
    });
    let e_l = compare(&lb, &g.d_lambda_b, |x| {
        loss(
            &bev,
            &prior,
            &ConfidenceLogits::new(spec, la.clone(), x.to_vec()).unwrap(),
        )
    });
    e_b.max(e_p).max(e_a).max(e_l)
}

fn check_logits(rng: &mut ChaCha8Rng, spec: GridSpec, chans: usize, proj: &LogitProjection) -> f64 {
    let bev = random_map(rng, spec, chans);
    let prior = random_map(rng, spec, chans);
    let ua: Vec<f64> = (0..spec.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let ub: Vec<f64> = (0..spec.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let g = compute_logits_grad(&bev, &prior, proj, &ua, &ub).unwrap();
    let loss = |b: &FeatureMap, p: &FeatureMap, pr: &LogitProjection| {
        let l = compute_logits(b, p, pr).unwrap();
        dot(&l.lambda_a, &ua) + dot(&l.lambda_b, &ub)
    };
    let e_b = compare(bev.as_slice(), g.d_bev.as_slice(), |x| {
        loss(&with(&bev, x), &prior, proj)
    });
    let e_p = compare(prior.as_slice(), g.d_prior.as_slice(), |x| {
        loss(&bev, &with(&prior, x), proj)
    });
    let e_w = compare(proj.weight(), &g.d_weight, |x| {
        loss(
            &bev,
            &prior,
            &LogitProjection::new(proj.in_channels(), x.to_vec(), proj.bias()).unwrap(),
        )
    });
    let e_bias = compare(&proj.bias(), &g.d_bias, |x| {
        loss(
            &bev,
            &prior,
            &LogitProjection::new(proj.in_channels(), proj.weight().to_vec(), [x[0], x[1]])
                .unwrap(),
        )
    });
    e_b.max(e_p).max(e_w).max(e_bias)
}

fn check_offsets(rng: &mut ChaCha8Rng, spec: GridSpec, chans: usize, net: &OffsetNet) -> f64 {
    let bev = random_map(rng, spec, chans);
    let prior = random_map(rng, spec, chans);
    let up = OffsetField::from_vec(
        spec,
        (0..spec.len() * 2)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap();
    let g = predict_offsets_grad(&bev, &prior, net, &up).unwrap();
    let loss = |b: &FeatureMap, p: &FeatureMap, n: &OffsetNet| {
        dot(predict_offsets(b, p, n).unwrap().as_slice(), up.as_slice())
    };
    let rebuild = |w1: &[f64], b1: &[f64], w2: &[f64], b2: &[f64]| {
        OffsetNet::new(
            net.in_channels(),
            net.hidden(),
            w1.to_vec(),
            b1.to_vec(),
            w2.to_vec(),
            [b2[0], b2[1]],
        )
        .unwrap()
    };
    let b2 = net.b2;
    [
        compare(bev.as_slice(), g.d_bev.as_slice(), |x| {
            loss(&with(&bev, x), &prior, net)
        }),
        compare(prior.as_slice(), g.d_prior.as_slice(), |x| {
            loss(&bev, &with(&prior, x), net)
        }),
        compare(&net.w1, &g.d_w1, |x| {
            loss(&bev, &prior, &rebuild(x, &net.b1, &net.w2, &b2))
        }),
        compare(&net.b1, &g.d_b1, |x| {
            loss(&bev, &prior, &rebuild(&net.w1, x, &net.w2, &b2))
        }),
        compare(&net.w2, &g.d_w2, |x| {
            loss(&bev, &prior, &rebuild(&net.w1, &net.b1, x, &b2))
        }),
        compare(&b2, &g.d_b2, |x| {
            loss(&bev, &prior, &rebuild(&net.w1, &net.b1, &net.w2, x))
        }),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Checks every adjoint on one seeded random instance (4×5 grid,
/// `channels` feature channels, 3 hidden units).
pub fn check_gradients(seed: u64, channels: usize) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = GridSpec::new(0.0, 5.0, 0.0, 4.0, 1.0, 1.0).expect("valid grid");
    let params = AlignmentParams::random(rng.random(), channels, 3).expect("positive sizes");
    GradCheckReport {
        warp: check_warp(&mut rng, spec, channels),
        fuse: check_fuse(&mut rng, spec, channels),
        logits: check_logits(&mut rng, spec, channels, &params.logits),
        offsets: check_offsets(&mut rng, spec, channels, &params.offset_net),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_instances_pass() {
        for seed in 0..3 {
            let r = check_gradients(seed, 2);
            assert!(r.max() < 1e-5, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn detects_wrong_gradient() {
        let theta = [0.3, -0.2];
        let e = compare(&theta, &[2.0 * 0.3, 0.0], |x| x[0] * x[0] + x[1] * x[1]);
        assert!(e > 0.1);
    }
}
