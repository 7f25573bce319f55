use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::grid::GridSpec;
use crate::trajectory::{CenterlineMap, Trajectory, TrajectorySet};

const X_EXTENT: f64 = 45.0;
const SAMPLE_STEP: f64 = 1.0;
const MAX_SPACING: f64 = 3.5;
const LATERAL_BUDGET: f64 = 40.0;

/// Seeded synthetic frame inside the default region of interest.
///
/// Even-indexed lanes are straight, odd-indexed lanes bend along a gentle
/// parabola, and every other pair of lanes runs in the opposite direction.
/// Each lane gets `per_lane` trajectories: the lane's centerline vertices
/// with independent isotropic Gaussian jitter of standard deviation
/// `noise_sigma` meters on every point.
pub fn synth_scene(
    seed: u64,
    lanes: usize,
    per_lane: usize,
    noise_sigma: f64,
) -> Result<(TrajectorySet, CenterlineMap)> {
    if lanes == 0 || per_lane == 0 {
        return Err(Error::invalid(
            "synthetic scene needs at least one lane and one trajectory per lane",
        ));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "noise_sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = MAX_SPACING.min(LATERAL_BUDGET / lanes as f64);
    let shift: f64 = rng.random_range(-1.0..1.0);
    let bend: f64 = rng.random_range(-2.0..2.0);

    let xs: Vec<f64> = {
        let n = (2.0 * X_EXTENT / SAMPLE_STEP).round() as usize;
        (0..=n)
            .map(|k| -X_EXTENT + k as f64 * SAMPLE_STEP)
            .collect()
    };

    let mut centerlines = Vec::with_capacity(lanes);
    for j in 0..lanes {
        let offset = shift + (j as f64 - (lanes as f64 - 1.0) / 2.0) * spacing;
        let mut pts: Vec<Point2> = xs
            .iter()
            .map(|&x| {
                let y = if j % 2 == 1 {
                    let s = x / X_EXTENT;
                    offset + bend * (s * s - 0.5)
                } else {
                    offset
                };
                Point2::new(x, y)
            })
            .collect();
        if j % 4 >= 2 {
            pts.reverse();
        }
        centerlines.push(Trajectory::new(format!("lane{j}"), pts)?);
    }

    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut trajectories = Vec::with_capacity(lanes * per_lane);
    for (j, lane) in centerlines.iter().enumerate() {
        for i in 0..per_lane {
            let pts = lane
                .points()
                .iter()
                .map(|p| {
                    if noise_sigma == 0.0 {
                        *p
                    } else {
                        Point2::new(p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng))
                    }
                })
                .collect();
            trajectories.push(Trajectory::new(format!("lane{j}-{i}"), pts)?);
        }
    }

    let frame_id = format!("synth-{seed}");
    Ok((
        TrajectorySet::new(frame_id, lanes, trajectories),
        CenterlineMap::new(GridSpec::default(), centerlines),
    ))
}
