//! Brute-force reference implementations and random instance generators
//! shared by the integration tests and the acceptance runner.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trajprior::fusion::{
    compute_logits, compute_logits_grad, confidence_fuse, confidence_fuse_grad, predict_offsets,
    predict_offsets_grad, warp, warp_grad, ConfidenceLogits, LogitProjection, OffsetField,
    OffsetNet,
};
use trajprior::{FeatureMap, GridSpec, Point2, Trajectory, TrajectorySet};

pub fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
    v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Point2> {
    (0..n)
        .map(|_| {
            Point2::new(
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
            )
        })
        .collect()
}

pub fn set_of(polys: Vec<Vec<Point2>>) -> TrajectorySet {
    let ts = polys
        .into_iter()
        .enumerate()
        .map(|(i, p)| Trajectory::new(format!("t{i}"), p).unwrap())
        .collect();
    TrajectorySet::new("test", 0, ts)
}

/// Minimum over every monotone coupling of the largest coupled distance,
/// enumerating the couplings explicitly.
pub fn frechet_brute(a: &[Point2], b: &[Point2]) -> f64 {
    fn walk(a: &[Point2], b: &[Point2], i: usize, j: usize, worst: f64, best: &mut f64) {
        let worst = worst.max(a[i].distance(&b[j]));
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(worst);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, worst, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, worst, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, worst, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cost of a labeling: summed squared distance of each vector to its group mean.
pub fn partition_cost(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let dim = data[0].len();
    let mut cost = 0.0;
    for g in 0..k {
        let members: Vec<&Vec<f64>> = data
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == g)
            .map(|(x, _)| x)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..dim)
            .map(|d| members.iter().map(|x| x[d]).sum::<f64>() / members.len() as f64)
            .collect();
        cost += members.iter().map(|x| sq(x, &mean)).sum::<f64>();
    }
    cost
}

/// Optimal split into two nonempty groups, by exhaustive search.
pub fn best_two_partition(data: &[Vec<f64>]) -> Vec<usize> {
    let m = data.len();
    let mut best = (f64::INFINITY, vec![]);
    // Element 0 always in group 0; masks over the rest, excluding all-zero.
    for mask in 1u32..(1 << (m - 1)) {
        let labels: Vec<usize> = (0..m)
            .map(|i| {
                if i == 0 {
                    0
                } else {
                    ((mask >> (i - 1)) & 1) as usize
                }
            })
            .collect();
        let c = partition_cost(data, &labels, 2);
        if c < best.0 {
            best = (c, labels);
        }
    }
    best.1
}

/// Equal as partitions, ignoring group names.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len()
        && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// Greedy max-min selection recomputing every min-distance from a full
/// pairwise distance matrix at each step.
pub fn fps_matrix(set: &TrajectorySet, count: usize, start: usize) -> (Vec<usize>, Vec<f64>) {
    let ts = &set.trajectories;
    let m = ts.len();
    let d: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| trajprior::select::frechet_dist(ts[i].points(), ts[j].points()))
                .collect()
        })
        .collect();
    let mut chosen = vec![start];
    let mut mins = vec![];
    while chosen.len() < count {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            if chosen.contains(&i) {
                continue;
            }
            let md = chosen
                .iter()
                .map(|&s| d[i][s])
                .fold(f64::INFINITY, f64::min);
            if best.is_none() || md > best.unwrap().1 {
                best = Some((i, md));
            }
        }
        let (i, md) = best.unwrap();
        chosen.push(i);
        mins.push(md);
    }
    (chosen, mins)
}

/// Symmetric mean nearest-neighbour distance by double loop.
pub fn chamfer_brute(a: &[Point2], b: &[Point2]) -> f64 {
    let directed = |from: &[Point2], to: &[Point2]| {
        let mut total = 0.0;
        for p in from {
            let mut best = f64::INFINITY;
            for q in to {
                best = best.min(p.distance(q));
            }
            total += best;
        }
        total / from.len() as f64
    };
    0.5 * (directed(a, b) + directed(b, a))
}

/// Direct sliding-window evaluation of the offset head on an explicitly
/// zero-padded input.
pub fn offsets_sliding_window(bev: &FeatureMap, prior: &FeatureMap, net: &OffsetNet) -> Vec<f64> {
    let (h, w, c) = bev.shape();
    let cin = 2 * c;
    let hid = net.hidden();
    let padded = |src: &dyn Fn(usize, usize, usize) -> f64, ch: usize| {
        let mut p = vec![vec![vec![0.0; ch]; w + 2]; h + 2];
        for r in 0..h {
            for col in 0..w {
                for k in 0..ch {
                    p[r + 1][col + 1][k] = src(r, col, k);
                }
            }
        }
        p
    };
    let x = padded(
        &|r, col, k| {
            if k < c {
                bev.get(r, col, k)
            } else {
                prior.get(r, col, k - c)
            }
        },
        cin,
    );
    let mut hidden = vec![vec![vec![0.0; hid]; w]; h];
    for r in 0..h {
        for col in 0..w {
            for o in 0..hid {
                let mut z = net.b1[o];
                for i in 0..cin {
                    for ky in 0..3 {
                        for kx in 0..3 {
                            z += net.w1[((o * cin + i) * 3 + ky) * 3 + kx] * x[r + ky][col + kx][i];
                        }
                    }
                }
                hidden[r][col][o] = z.tanh();
            }
        }
    }
    let hp = padded(&|r, col, k| hidden[r][col][k], hid);
    let mut out = Vec::with_capacity(h * w * 2);
    for r in 0..h {
        for col in 0..w {
            for o in 0..2 {
                let mut z = net.b2[o];
                for i in 0..hid {
                    for ky in 0..3 {
                        for kx in 0..3 {
                            z +=
                                net.w2[((o * hid + i) * 3 + ky) * 3 + kx] * hp[r + ky][col + kx][i];
                        }
                    }
                }
                out.push(z);
            }
        }
    }
    out
}

pub fn random_feature(rng: &mut ChaCha8Rng, spec: GridSpec, channels: usize) -> FeatureMap {
    FeatureMap::from_fn(spec, channels, |_, _, _| rng.random_range(-1.0..1.0))
}

pub fn random_offset_net(rng: &mut ChaCha8Rng, in_channels: usize, hidden: usize) -> OffsetNet {
    let mut v = |n: usize, s: f64| {
        (0..n)
            .map(|_| rng.random_range(-s..s))
            .collect::<Vec<f64>>()
    };
    let w1 = v(hidden * in_channels * 9, 0.3);
    let b1 = v(hidden, 0.3);
    let w2 = v(2 * hidden * 9, 0.3);
    let b2 = v(2, 0.3);
    OffsetNet::new(in_channels, hidden, w1, b1, w2, [b2[0], b2[1]]).unwrap()
}

/// Relative error with a denominator floor of 1e-3.
pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-3)
}

pub const FD_H: f64 = 1e-6;

/// Largest relative error between `analytic` and central differences of `f`.
pub fn fd_max_err(theta: &[f64], analytic: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[i] += FD_H;
        dn[i] -= FD_H;
        worst = worst.max(rel_err(analytic[i], (f(&up) - f(&dn)) / (2.0 * FD_H)));
    }
    worst
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remap(f: &FeatureMap, d: &[f64]) -> FeatureMap {
    FeatureMap::from_vec(*f.spec(), f.channels(), d.to_vec()).unwrap()
}

/// Finite-difference errors of the four adjoints (warp, fuse, logits,
/// offsets) on one random 3-channel instance over a 4×6 grid.
pub fn adjoint_fd_errors(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let spec = GridSpec::new(0.0, 6.0, 0.0, 4.0, 1.0, 1.0).unwrap();
    let c = 3;
    let n = spec.len();

    // warp: fractional parts held inside [0.01, 0.99]
    let prior = random_feature(rng, spec, c);
    let off_v: Vec<f64> = (0..2 * n)
        .map(|_| rng.random_range(-3i32..3) as f64 + rng.random_range(0.01..0.99))
        .collect();
    let off = OffsetField::from_vec(spec, off_v.clone()).unwrap();
    let up = random_feature(rng, spec, c);
    let (dp, doff) = warp_grad(&prior, &off, &up).unwrap();
    let e_warp = fd_max_err(prior.as_slice(), dp.as_slice(), |x| {
        inner(
            warp(&remap(&prior, x), &off).unwrap().as_slice(),
            up.as_slice(),
        )
    })
    .max(fd_max_err(&off_v, doff.as_slice(), |x| {
        inner(
            warp(&prior, &OffsetField::from_vec(spec, x.to_vec()).unwrap())
                .unwrap()
                .as_slice(),
            up.as_slice(),
        )
    }));

    // confidence fusion
    let bev = random_feature(rng, spec, c);
    let la: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let lb: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let logits = ConfidenceLogits::new(spec, la.clone(), lb.clone()).unwrap();
    let g = confidence_fuse_grad(&bev, &prior, &logits, &up).unwrap();
    let fuse_loss = |b: &FeatureMap, p: &FeatureMap, a: &[f64], bb: &[f64]| {
        let l = ConfidenceLogits::new(spec, a.to_vec(), bb.to_vec()).unwrap();
        inner(confidence_fuse(b, p, &l).unwrap().as_slice(), up.as_slice())
    };
    let e_fuse = [
        fd_max_err(bev.as_slice(), g.d_bev.as_slice(), |x| {
            fuse_loss(&remap(&bev, x), &prior, &la, &lb)
        }),
        fd_max_err(prior.as_slice(), g.d_prior.as_slice(), |x| {
            fuse_loss(&bev, &remap(&prior, x), &la, &lb)
        }),
        fd_max_err(&la, &g.d_lambda_a, |x| fuse_loss(&bev, &prior, x, &lb)),
        fd_max_err(&lb, &g.d_lambda_b, |x| fuse_loss(&bev, &prior, &la, x)),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    // logit projection
    let w: Vec<f64> = (0..4 * c).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bias = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let proj = LogitProjection::new(2 * c, w.clone(), bias).unwrap();
    let ua: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ub: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let lg = compute_logits_grad(&bev, &prior, &proj, &ua, &ub).unwrap();
    let logit_loss = |b: &FeatureMap, p: &FeatureMap, w: &[f64], bias: [f64; 2]| {
        let l = compute_logits(
            b,
            p,
            &LogitProjection::new(2 * c, w.to_vec(), bias).unwrap(),
        )
        .unwrap();
        inner(&l.lambda_a, &ua) + inner(&l.lambda_b, &ub)
    };
    let e_logits = [
        fd_max_err(bev.as_slice(), lg.d_bev.as_slice(), |x| {
            logit_loss(&remap(&bev, x), &prior, &w, bias)
        }),
        fd_max_err(prior.as_slice(), lg.d_prior.as_slice(), |x| {
            logit_loss(&bev, &remap(&prior, x), &w, bias)
        }),
        fd_max_err(&w, &lg.d_weight, |x| logit_loss(&bev, &prior, x, bias)),
        fd_max_err(&bias, &lg.d_bias, |x| {
            logit_loss(&bev, &prior, &w, [x[0], x[1]])
        }),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    // offset head
    let net = random_offset_net(rng, 2 * c, 2);
    let d_off: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let og = predict_offsets_grad(
        &bev,
        &prior,
        &net,
        &OffsetField::from_vec(spec, d_off.clone()).unwrap(),
    )
    .unwrap();
    let net_with = |w1: &[f64], b1: &[f64], w2: &[f64], b2: &[f64]| {
        OffsetNet::new(
            2 * c,
            2,
            w1.to_vec(),
            b1.to_vec(),
            w2.to_vec(),
            [b2[0], b2[1]],
        )
        .unwrap()
    };
    let off_loss = |b: &FeatureMap, p: &FeatureMap, nn: &OffsetNet| {
        inner(predict_offsets(b, p, nn).unwrap().as_slice(), &d_off)
    };
    let e_off = [
        fd_max_err(bev.as_slice(), og.d_bev.as_slice(), |x| {
            off_loss(&remap(&bev, x), &prior, &net)
        }),
        fd_max_err(prior.as_slice(), og.d_prior.as_slice(), |x| {
            off_loss(&bev, &remap(&prior, x), &net)
        }),
        fd_max_err(&net.w1, &og.d_w1, |x| {
            off_loss(&bev, &prior, &net_with(x, &net.b1, &net.w2, &net.b2))
        }),
        fd_max_err(&net.b1, &og.d_b1, |x| {
            off_loss(&bev, &prior, &net_with(&net.w1, x, &net.w2, &net.b2))
        }),
        fd_max_err(&net.w2, &og.d_w2, |x| {
            off_loss(&bev, &prior, &net_with(&net.w1, &net.b1, x, &net.b2))
        }),
        fd_max_err(&net.b2, &og.d_b2, |x| {
            off_loss(&bev, &prior, &net_with(&net.w1, &net.b1, &net.w2, x))
        }),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    [e_warp, e_fuse, e_logits, e_off]
}
