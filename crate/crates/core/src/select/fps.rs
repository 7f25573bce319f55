use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::frechet::frechet_dist;
use crate::error::{Error, Result};
use crate::trajectory::TrajectorySet;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    /// Selected trajectory indices in selection order.
    pub indices: Vec<usize>,
    /// For every selection after the first, its Frechet distance to the
    /// nearest previously selected trajectory at the time it was picked.
    pub min_dists: Vec<f64>,
}

/// Farthest-point sampling with a seeded, uniformly drawn first pick.
pub fn fps(set: &TrajectorySet, count: usize, seed: u64) -> Result<SampleResult> {
    if set.is_empty() {
        return Err(Error::invalid("cannot sample from an empty trajectory set"));
    }
    let start = ChaCha8Rng::seed_from_u64(seed).random_range(0..set.len());
    fps_from(set, count, start)
}

/// Greedy max–min selection under the discrete Frechet distance.
///
/// Each step adds the unselected trajectory whose distance to its nearest
/// selected trajectory is largest, preferring the lowest index on ties.
pub fn fps_from(set: &TrajectorySet, count: usize, start: usize) -> Result<SampleResult> {
    let m = set.len();
    if count == 0 || count > m {
        return Err(Error::invalid(format!(
            "sample count {count} must be in 1..={m}"
        )));
    }
    if start >= m {
        return Err(Error::invalid(format!(
            "start index {start} out of range for {m} trajectories"
        )));
    }
    let ts = &set.trajectories;
    let mut selected = vec![false; m];
    let mut nearest = vec![f64::INFINITY; m];
    let mut indices = Vec::with_capacity(count);
    let mut min_dists = Vec::with_capacity(count.saturating_sub(1));

    let mut latest = start;
    selected[start] = true;
    indices.push(start);
    while indices.len() < count {
        let anchor = ts[latest].points();
        nearest.par_iter_mut().enumerate().for_each(|(i, d)| {
            if !selected[i] {
                *d = d.min(frechet_dist(ts[i].points(), anchor));
            }
        });
        let mut best: Option<usize> = None;
        for i in (0..m).filter(|&i| !selected[i]) {
            if best.is_none_or(|b| nearest[i] > nearest[b]) {
                best = Some(i);
            }
        }
        let pick = best.expect("count <= m leaves an unselected trajectory");
        selected[pick] = true;
        indices.push(pick);
        min_dists.push(nearest[pick]);
        latest = pick;
    }
    Ok(SampleResult { indices, min_dists })
}
