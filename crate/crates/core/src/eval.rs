//! Prior quality metrics: mask IoU, attribute mismatch rate and symmetric
//! Chamfer distance.

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::grid::{BinaryMask, GridSpec};
use crate::raster::rasterize_polylines;
use crate::trajectory::Trajectory;

/// Arc-length step used when turning polylines into point sets.
pub const DEFAULT_SAMPLE_STEP_M: f64 = 0.5;

/// |A ∩ B| / |A ∪ B|. Two empty masks agree perfectly (1.0).
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::shape(format!(
            "iou of {}×{} and {}×{} masks",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// IoU between a prior polyline set and ground-truth centerlines, both
/// rasterized at `width_m`.
pub fn prior_iou(
    prior: &[Trajectory],
    gt: &[Trajectory],
    spec: &GridSpec,
    width_m: f64,
) -> Result<f64> {
    let a = rasterize_polylines(prior, spec, width_m)?;
    let b = rasterize_polylines(gt, spec, width_m)?;
    iou(&a, &b)
}

/// Fraction of positions where the labels differ. Empty inputs give 0.
pub fn ae_type<T: PartialEq>(pred: &[T], gt: &[T]) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::shape(format!(
            "ae_type of {} and {} labels",
            pred.len(),
            gt.len()
        )));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let mismatched = pred.iter().zip(gt).filter(|(p, g)| p != g).count();
    Ok(mismatched as f64 / pred.len() as f64)
}

fn mean_nearest(from: &[Point2], to: &[Point2]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| {
            to.iter()
                .map(|q| p.distance_sq(q))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / from.len() as f64
}

/// Mean of the two directed mean nearest-neighbour distances.
pub fn ae_dist(pred: &[Point2], gt: &[Point2]) -> Result<f64> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::invalid("ae_dist needs two nonempty point sets"));
    }
    Ok(0.5 * (mean_nearest(pred, gt) + mean_nearest(gt, pred)))
}

/// Points every `step_m` of arc length along each polyline, plus each
/// polyline's final vertex.
pub fn sample_polylines(polylines: &[Trajectory], step_m: f64) -> Result<Vec<Point2>> {
    if !(step_m > 0.0 && step_m.is_finite()) {
        return Err(Error::invalid(format!(
            "sample step must be positive, got {step_m}"
        )));
    }
    let mut out = Vec::new();
    for line in polylines {
        let pts = line.points();
        out.push(pts[0]);
        let mut next = step_m;
        let mut travelled = 0.0;
        for seg in pts.windows(2) {
            let len = seg[0].distance(&seg[1]);
            while len > 0.0 && next <= travelled + len {
                out.push(seg[0].lerp(&seg[1], (next - travelled) / len));
                next += step_m;
            }
            travelled += len;
        }
        let last = pts[pts.len() - 1];
        if out.last() != Some(&last) {
            out.push(last);
        }
    }
    Ok(out)
}
