use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::resample::{resample, ResampledTrajectory, DEFAULT_RESAMPLE};
use crate::error::{Error, Result};
use crate::trajectory::TrajectorySet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    /// Points per resampled trajectory.
    pub resample: usize,
    pub max_iter: usize,
    /// Stop once no center moves by this much or more.
    pub tol: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        KMeansConfig {
            k,
            resample: DEFAULT_RESAMPLE,
            max_iter: 100,
            tol: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub centers: Vec<ResampledTrajectory>,
    /// Cluster index of every input trajectory.
    pub assignment: Vec<usize>,
    /// Sum of squared flattened distances to the assigned centers.
    pub inertia: f64,
    /// Lloyd iterations performed.
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after each assignment step; the last entry equals `inertia`.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.chunks_exact(2)
        .zip(b.chunks_exact(2))
        .map(|(p, q)| {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            dx * dx + dy * dy
        })
        .sum()
}

/// Nearest center per point (lowest index on ties) and its squared distance.
fn assign(data: &[Vec<f64>], centers: &[Vec<f64>]) -> Vec<(usize, f64)> {
    data.par_iter()
        .map(|x| {
            let mut best = (0, sq_dist(x, &centers[0]));
            for (j, c) in centers.iter().enumerate().skip(1) {
                let d = sq_dist(x, c);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .collect()
}

/// Lloyd's algorithm on trajectories resampled to `cfg.resample` points and
/// flattened into `2R`-vectors.
///
/// The initial centers are `k` distinct member trajectories drawn by a seeded
/// shuffle. A cluster that loses all members is reseeded with the point
/// farthest from its current center.
pub fn kmeans(set: &TrajectorySet, cfg: &KMeansConfig) -> Result<ClusterResult> {
    let m = set.len();
    if cfg.k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if cfg.k > m {
        return Err(Error::invalid(format!(
            "k = {} exceeds the {m} trajectories",
            cfg.k
        )));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::invalid(format!(
            "tol must be positive, got {}",
            cfg.tol
        )));
    }
    if cfg.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }

    let data: Vec<Vec<f64>> = set
        .trajectories
        .iter()
        .map(|t| resample(t, cfg.resample).map(|r| r.flat()))
        .collect::<Result<_>>()?;
    let dim = data[0].len();

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut centers: Vec<Vec<f64>> = order[..cfg.k].iter().map(|&i| data[i].clone()).collect();

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let assigned = assign(&data, &centers);
        trace.push(assigned.iter().map(|a| a.1).sum());

        let mut sums = vec![vec![0.0; dim]; cfg.k];
        let mut counts = vec![0usize; cfg.k];
        for (x, &(j, _)) in data.iter().zip(&assigned) {
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(x) {
                *s += v;
            }
        }

        let mut taken = vec![false; m];
        let mut shift = 0.0f64;
        for j in 0..cfg.k {
            let new_center = if counts[j] > 0 {
                let n = counts[j] as f64;
                sums[j].iter().map(|s| s / n).collect()
            } else {
                let far = (0..m)
                    .filter(|&i| !taken[i])
                    .fold(None, |best: Option<(usize, f64)>, i| match best {
                        Some((_, d)) if assigned[i].1 <= d => best,
                        _ => Some((i, assigned[i].1)),
                    })
                    .map(|(i, _)| i)
                    .expect("k <= m leaves an untaken point");
                taken[far] = true;
                data[far].clone()
            };
            shift = shift.max(sq_dist(&centers[j], &new_center).sqrt());
            centers[j] = new_center;
        }
        if shift < cfg.tol {
            converged = true;
            break;
        }
    }

    let assigned = assign(&data, &centers);
    let inertia: f64 = assigned.iter().map(|a| a.1).sum();
    trace.push(inertia);
    Ok(ClusterResult {
        centers: centers
            .iter()
            .map(|c| ResampledTrajectory::from_flat(c))
            .collect(),
        assignment: assigned.iter().map(|a| a.0).collect(),
        inertia,
        iterations,
        converged,
        inertia_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::trajectory::Trajectory;

    fn line(id: &str, y: f64) -> Trajectory {
        Trajectory::new(id, vec![Point2::new(-10.0, y), Point2::new(10.0, y)]).unwrap()
    }

    #[test]
    fn k_equal_m_is_exact() {
        let set = TrajectorySet::new("f", 0, (0..5).map(|i| line("t", i as f64 * 2.0)).collect());
        let res = kmeans(&set, &KMeansConfig::new(5)).unwrap();
        assert_eq!(res.inertia, 0.0);
        let mut seen = res.assignment.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn separated_bundles() {
        let mut ts: Vec<Trajectory> = (0..4).map(|_| line("a", 0.0)).collect();
        ts.extend((0..3).map(|_| line("b", 20.0)));
        let set = TrajectorySet::new("f", 0, ts);
        for seed in 0..20 {
            let res = kmeans(
                &set,
                &KMeansConfig {
                    seed,
                    ..KMeansConfig::new(2)
                },
            )
            .unwrap();
            let a = res.assignment[0];
            assert!(res.assignment[..4].iter().all(|&c| c == a));
            assert!(res.assignment[4..].iter().all(|&c| c != a));
            assert_eq!(res.inertia, 0.0);
            assert!(res.converged);
            let ca = resample(&line("a", 0.0), 20).unwrap();
            assert_eq!(res.centers[a], ca);
        }
    }

    #[test]
    fn errors() {
        let set = TrajectorySet::new("f", 0, vec![line("a", 0.0)]);
        assert!(kmeans(&set, &KMeansConfig::new(2)).is_err());
        assert!(kmeans(&set, &KMeansConfig::new(0)).is_err());
        assert!(kmeans(
            &set,
            &KMeansConfig {
                tol: 0.0,
                ..KMeansConfig::new(1)
            }
        )
        .is_err());
        assert!(kmeans(
            &set,
            &KMeansConfig {
                max_iter: 0,
                ..KMeansConfig::new(1)
            }
        )
        .is_err());
    }
}
