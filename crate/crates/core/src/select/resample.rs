use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::trajectory::Trajectory;

pub const DEFAULT_RESAMPLE: usize = 20;

/// A polyline with a fixed number of points spaced uniformly in arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledTrajectory {
    points: Vec<Point2>,
}

impl ResampledTrajectory {
    pub fn from_points(points: Vec<Point2>) -> Self {
        ResampledTrajectory { points }
    }

    pub(crate) fn from_flat(flat: &[f64]) -> Self {
        ResampledTrajectory {
            points: flat
                .chunks_exact(2)
                .map(|c| Point2::new(c[0], c[1]))
                .collect(),
        }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `[x0, y0, x1, y1, ...]`
    pub fn flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p.x, p.y]).collect()
    }
}

/// Sample `r` points at arc-length fractions `k / (r − 1)`.
///
/// A polyline of zero length collapses onto its first point.
pub fn resample(t: &Trajectory, r: usize) -> Result<ResampledTrajectory> {
    if r < 2 {
        return Err(Error::invalid(format!(
            "resample count must be >= 2, got {r}"
        )));
    }
    let pts = t.points();
    let total = t.arc_length();
    if total == 0.0 {
        return Ok(ResampledTrajectory {
            points: vec![pts[0]; r],
        });
    }
    let mut out = Vec::with_capacity(r);
    out.push(pts[0]);
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut seg_len = pts[0].distance(&pts[1]);
    for k in 1..r - 1 {
        let target = total * k as f64 / (r - 1) as f64;
        while seg + 2 < pts.len() && seg_start + seg_len < target {
            seg_start += seg_len;
            seg += 1;
            seg_len = pts[seg].distance(&pts[seg + 1]);
        }
        let frac = if seg_len > 0.0 {
            ((target - seg_start) / seg_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(pts[seg].lerp(&pts[seg + 1], frac));
    }
    out.push(pts[pts.len() - 1]);
    Ok(ResampledTrajectory { points: out })
}

/// Euclidean norm of the difference of the flattened `2R` coordinate vectors.
pub fn euclid_flat_dist(a: &ResampledTrajectory, b: &ResampledTrajectory) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "resampled lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| p.distance_sq(q))
        .sum::<f64>()
        .sqrt())
}
