//! Trajectory ingestion: file parsing, length filtering, smoothing and the
//! frame retention rule, plus a seeded synthetic scene generator.

mod parse;
mod synth;

pub use parse::{
    parse_centerlines, parse_polylines, parse_trajectories, write_centerlines, write_trajectories,
    Format, PolylineFile,
};
pub use synth::synth_scene;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::trajectory::{Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestConfig {
    /// Trajectories with a shorter arc length are dropped.
    pub min_length_m: f64,
    /// Width of the centered moving average. Must be odd.
    pub smooth_window: usize,
    /// A frame is retained when it holds more than `retention_ratio × centerlines` trajectories.
    pub retention_ratio: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            min_length_m: 5.0,
            smooth_window: 5,
            retention_ratio: 5.0,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_length_m.is_nan() || self.min_length_m < 0.0 {
            return Err(Error::invalid(format!(
                "min_length_m must be >= 0, got {}",
                self.min_length_m
            )));
        }
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "smooth_window must be odd and >= 1, got {}",
                self.smooth_window
            )));
        }
        if self.retention_ratio.is_nan() || self.retention_ratio <= 0.0 {
            return Err(Error::invalid(format!(
                "retention_ratio must be > 0, got {}",
                self.retention_ratio
            )));
        }
        Ok(())
    }
}

/// Keep trajectories whose arc length is at least `min_length_m`, in order.
pub fn filter_by_length(set: &TrajectorySet, cfg: &IngestConfig) -> TrajectorySet {
    let trajectories = set
        .trajectories
        .iter()
        .filter(|t| t.arc_length() >= cfg.min_length_m)
        .cloned()
        .collect();
    TrajectorySet {
        frame_id: set.frame_id.clone(),
        centerline_count: set.centerline_count,
        trajectories,
    }
}

/// Centered moving average of each coordinate.
///
/// Near the ends the window radius shrinks to the number of available
/// neighbours on the shorter side, so the window stays symmetric and the
/// endpoints themselves are never moved.
pub fn smooth(t: &Trajectory, cfg: &IngestConfig) -> Trajectory {
    let radius = cfg.smooth_window / 2;
    if radius == 0 {
        return t.clone();
    }
    let pts = t.points();
    let n = pts.len();
    let smoothed = (0..n)
        .map(|i| {
            let r = radius.min(i).min(n - 1 - i);
            let window = &pts[i - r..=i + r];
            let k = window.len() as f64;
            let (sx, sy) = window
                .iter()
                .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
            Point2::new(sx / k, sy / k)
        })
        .collect();
    t.with_points(smoothed)
}

pub fn smooth_set(set: &TrajectorySet, cfg: &IngestConfig) -> TrajectorySet {
    TrajectorySet {
        frame_id: set.frame_id.clone(),
        centerline_count: set.centerline_count,
        trajectories: set.trajectories.iter().map(|t| smooth(t, cfg)).collect(),
    }
}

/// True when the frame has strictly more than `retention_ratio × centerline_count` trajectories.
pub fn retention_check(set: &TrajectorySet, cfg: &IngestConfig) -> bool {
    set.len() as f64 > cfg.retention_ratio * set.centerline_count as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(pts: &[(f64, f64)]) -> Trajectory {
        Trajectory::new("t", pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn cfg(min_length_m: f64, smooth_window: usize) -> IngestConfig {
        IngestConfig {
            min_length_m,
            smooth_window,
            ..Default::default()
        }
    }

    #[test]
    fn filter_lengths() {
        let set = TrajectorySet::new(
            "f",
            0,
            vec![
                traj(&[(0.0, 0.0), (2.0, 0.0)]),
                traj(&[(0.0, 0.0), (3.0, 0.0), (3.0, 3.0)]),
                traj(&[(0.0, 0.0), (6.0, 8.0)]),
            ],
        );
        assert_eq!(filter_by_length(&set, &cfg(0.0, 1)), set);
        let kept = filter_by_length(&set, &cfg(5.0, 1));
        assert_eq!(kept.len(), 2);
        assert_eq!(kept.trajectories[0].arc_length(), 6.0);
        assert_eq!(kept.trajectories[1].arc_length(), 10.0);

        let short = TrajectorySet::new("f", 0, vec![traj(&[(0.0, 0.0), (3.0, 0.0)])]);
        assert!(filter_by_length(&short, &cfg(5.0, 1)).is_empty());
    }

    #[test]
    fn smoothing_examples() {
        let t = traj(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        assert_eq!(smooth(&t, &cfg(0.0, 1)), t);
        let s = smooth(&t, &cfg(0.0, 3));
        assert_eq!(s.points()[0], Point2::new(0.0, 0.0));
        assert_eq!(s.points()[1], Point2::new(1.0, 1.0 / 3.0));
        assert_eq!(s.points()[2], Point2::new(2.0, 0.0));

        let line = traj(
            &(0..12)
                .map(|i| (0.5 * i as f64, -1.0 + 0.25 * i as f64))
                .collect::<Vec<_>>(),
        );
        let s = smooth(&line, &cfg(0.0, 5));
        for (a, b) in line.points().iter().zip(s.points()) {
            assert!(a.distance(b) < 1e-12);
        }
    }

    #[test]
    fn retention_is_strict() {
        let c = IngestConfig::default();
        let mk = |m: usize, centerlines: usize| {
            TrajectorySet::new("f", centerlines, vec![traj(&[(0.0, 0.0), (1.0, 0.0)]); m])
        };
        assert!(retention_check(&mk(51, 10), &c));
        assert!(!retention_check(&mk(50, 10), &c));
        assert!(!retention_check(&mk(0, 0), &c));
    }

    #[test]
    fn config_validation() {
        assert!(IngestConfig::default().validate().is_ok());
        assert!(cfg(0.0, 4).validate().is_err());
        assert!(cfg(0.0, 0).validate().is_err());
        assert!(cfg(-1.0, 3).validate().is_err());
    }
}
