//! Trajectory heatmaps and centerline masks.
//!
//! Each trajectory segment marks every grid cell that contains at least one
//! point of the segment (a supercover traversal under the half-open cell
//! convention of [`GridSpec`]). A cell's count is the number of distinct
//! trajectories touching it; its direction is the circular mean of the unit
//! vectors of all touching segments, folded to an orientation in
//! (−π/2, π/2] by default or kept as a heading in (−π, π] (see
//! [`DirectionFold`]).
//!
//! Unit-vector components are accumulated as 2⁻⁹⁶ fixed-point integers.
//! Integer sums are exact, so the result does not depend on trajectory order
//! or on how the work is split across threads, and reversing every
//! trajectory negates the sums exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::geom::{fold_orientation, point_segment_distance, wrap_angle, Point2};
use crate::grid::{BinaryMask, GridSpec};
use crate::trajectory::{CenterlineMap, Trajectory, TrajectorySet};

const FIXED_SCALE: f64 = 79_228_162_514_264_337_593_543_950_336.0; // 2^96

/// Centerline mask width used when scoring priors.
pub const DEFAULT_LINE_WIDTH_M: f64 = 0.75;

/// How the mean travel angle of a cell is reported.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DirectionFold {
    /// Undirected orientation in (−π/2, π/2]; opposite headings coincide.
    #[default]
    Orientation,
    /// Heading in (−π, π].
    Heading,
}

impl DirectionFold {
    pub fn apply(self, theta: f64) -> f64 {
        match self {
            DirectionFold::Orientation => fold_orientation(theta),
            DirectionFold::Heading => wrap_angle(theta),
        }
    }

    /// Upper end of the reported interval.
    pub fn half_range(self) -> f64 {
        match self {
            DirectionFold::Orientation => std::f64::consts::FRAC_PI_2,
            DirectionFold::Heading => std::f64::consts::PI,
        }
    }
}

impl std::str::FromStr for DirectionFold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orientation" => Ok(DirectionFold::Orientation),
            "heading" => Ok(DirectionFold::Heading),
            other => Err(Error::invalid(format!(
                "unknown direction fold {other:?} (expected orientation or heading)"
            ))),
        }
    }
}

/// Rasterized trajectory prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub spec: GridSpec,
    /// `count / n_max`, 0 where nothing passed.
    pub density: Vec<f64>,
    /// Mean direction folded per `fold`, 0 where nothing passed.
    pub direction: Vec<f64>,
    pub fold: DirectionFold,
    /// Distinct trajectories per cell.
    pub count: Vec<u32>,
    /// Largest cell count, or 1 for an empty heatmap.
    pub n_max: u32,
}

impl Heatmap {
    pub fn rows(&self) -> usize {
        self.spec.rows()
    }

    pub fn cols(&self) -> usize {
        self.spec.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.count.iter().all(|&c| c == 0)
    }
}

#[derive(Clone, Copy)]
struct Crossing {
    t: f64,
    u: Option<f64>,
    v: Option<f64>,
}

/// Flat indices of the cells containing some point of segment `a`–`b`,
/// sorted and deduplicated, clipped to the grid.
///
/// The endpoints are put in a canonical order first so a segment and its
/// reverse produce identical cell sets.
pub fn segment_cells(spec: &GridSpec, a: Point2, b: Point2) -> Vec<usize> {
    let (a, b) = if (a.x, a.y) > (b.x, b.y) {
        (b, a)
    } else {
        (a, b)
    };
    let (u0, v0) = spec.to_grid(a);
    let (u1, v1) = spec.to_grid(b);
    let (du, dv) = (u1 - u0, v1 - v0);
    let (w, h) = (spec.cols() as f64, spec.rows() as f64);

    // Liang–Barsky clip against the closed box [0, W] × [0, H].
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-du, u0), (du, w - u0), (-dv, v0), (dv, h - v0)] {
        if p == 0.0 {
            if q < 0.0 {
                return Vec::new();
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return Vec::new();
    }

    let mut crossings = vec![
        Crossing {
            t: t0,
            u: None,
            v: None,
        },
        Crossing {
            t: t1,
            u: None,
            v: None,
        },
    ];
    for (start, delta, is_u) in [(u0, du, true), (v0, dv, false)] {
        if delta == 0.0 {
            continue;
        }
        let (ea, eb) = (start + t0 * delta, start + t1 * delta);
        let (lo, hi) = (ea.min(eb).ceil(), ea.max(eb).floor());
        let mut k = lo;
        while k <= hi {
            let t = (k - start) / delta;
            if t >= t0 && t <= t1 {
                let (u, v) = if is_u {
                    (Some(k), None)
                } else {
                    (None, Some(k))
                };
                crossings.push(Crossing { t, u, v });
            }
            k += 1.0;
        }
    }
    crossings.sort_by(|p, q| p.t.total_cmp(&q.t));

    // Merge crossings that coincide (grid corners, endpoints on grid lines).
    let mut merged: Vec<Crossing> = Vec::with_capacity(crossings.len());
    for c in crossings {
        match merged.last_mut() {
            Some(last) if c.t - last.t <= 1e-12 => {
                last.u = last.u.or(c.u);
                last.v = last.v.or(c.v);
            }
            _ => merged.push(c),
        }
    }

    let (rows, cols) = (spec.rows() as i64, spec.cols() as i64);
    let mut out = Vec::with_capacity(2 * merged.len());
    let mut push = |u: f64, v: f64| {
        let (col, row) = (u.floor() as i64, v.floor() as i64);
        if (0..rows).contains(&row) && (0..cols).contains(&col) {
            out.push(row as usize * cols as usize + col as usize);
        }
    };
    for (i, c) in merged.iter().enumerate() {
        push(c.u.unwrap_or(u0 + c.t * du), c.v.unwrap_or(v0 + c.t * dv));
        if let Some(next) = merged.get(i + 1) {
            let tm = 0.5 * (c.t + next.t);
            push(u0 + tm * du, v0 + tm * dv);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

struct Accum {
    count: Vec<u32>,
    sum_cos: Vec<i128>,
    sum_sin: Vec<i128>,
    stamp: Vec<usize>,
}

impl Accum {
    fn new(n: usize) -> Self {
        Accum {
            count: vec![0; n],
            sum_cos: vec![0; n],
            sum_sin: vec![0; n],
            stamp: vec![usize::MAX; n],
        }
    }

    fn add_trajectory(&mut self, spec: &GridSpec, idx: usize, t: &Trajectory) {
        for seg in t.points().windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            let len = (dx * dx + dy * dy).sqrt();
            let c = ((dx / len) * FIXED_SCALE) as i128;
            let s = ((dy / len) * FIXED_SCALE) as i128;
            for cell in segment_cells(spec, a, b) {
                self.sum_cos[cell] += c;
                self.sum_sin[cell] += s;
                if self.stamp[cell] != idx {
                    self.stamp[cell] = idx;
                    self.count[cell] += 1;
                }
            }
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        for i in 0..self.count.len() {
            self.count[i] += other.count[i];
            self.sum_cos[i] += other.sum_cos[i];
            self.sum_sin[i] += other.sum_sin[i];
        }
        self
    }
}

/// Build the density/orientation heatmap of a frame.
///
/// An empty frame yields an all-zero heatmap with `n_max = 1`.
pub fn rasterize_trajectories(set: &TrajectorySet, spec: &GridSpec) -> Result<Heatmap> {
    rasterize_trajectories_with(set, spec, DirectionFold::Orientation)
}

pub fn rasterize_trajectories_with(
    set: &TrajectorySet,
    spec: &GridSpec,
    fold: DirectionFold,
) -> Result<Heatmap> {
    spec.validate()?;
    let n = spec.len();
    let acc = set
        .trajectories
        .par_iter()
        .enumerate()
        .fold(
            || Accum::new(n),
            |mut acc, (i, t)| {
                acc.add_trajectory(spec, i, t);
                acc
            },
        )
        .reduce(|| Accum::new(n), Accum::merge);

    let n_max = acc.count.iter().copied().max().unwrap_or(0).max(1);
    let density = acc.count.iter().map(|&c| c as f64 / n_max as f64).collect();
    let direction = (0..n)
        .map(|i| {
            if acc.count[i] == 0 {
                0.0
            } else {
                fold.apply((acc.sum_sin[i] as f64).atan2(acc.sum_cos[i] as f64))
            }
        })
        .collect();
    Ok(Heatmap {
        spec: *spec,
        density,
        direction,
        fold,
        count: acc.count,
        n_max,
    })
}

/// Cells whose center lies within `width_m / 2` of any of the polylines.
pub fn rasterize_polylines(
    polylines: &[Trajectory],
    spec: &GridSpec,
    width_m: f64,
) -> Result<BinaryMask> {
    spec.validate()?;
    if !(width_m > 0.0 && width_m.is_finite()) {
        return Err(Error::invalid(format!(
            "line width must be positive, got {width_m}"
        )));
    }
    let radius = width_m / 2.0;
    let (rows, cols) = (spec.rows(), spec.cols());
    let mut mask = BinaryMask::new(rows, cols);
    let index_range = |lo: f64, hi: f64, origin: f64, step: f64, n: usize| {
        // Centers sit at origin + (i + 0.5)·step.
        let first = ((lo - origin) / step - 0.5).ceil().max(0.0);
        let last = ((hi - origin) / step - 0.5).floor().min(n as f64 - 1.0);
        if first > last {
            None
        } else {
            Some((first as usize, last as usize))
        }
    };
    for line in polylines {
        let pts = line.points();
        for seg in pts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let Some((c0, c1)) = index_range(
                a.x.min(b.x) - radius,
                a.x.max(b.x) + radius,
                spec.x_min,
                spec.cell_dx,
                cols,
            ) else {
                continue;
            };
            let Some((r0, r1)) = index_range(
                a.y.min(b.y) - radius,
                a.y.max(b.y) + radius,
                spec.y_min,
                spec.cell_dy,
                rows,
            ) else {
                continue;
            };
            for r in r0..=r1 {
                for c in c0..=c1 {
                    if !mask.get(r, c)
                        && point_segment_distance(spec.cell_center(r, c), a, b) <= radius
                    {
                        mask.set(r, c, true);
                    }
                }
            }
        }
    }
    Ok(mask)
}

pub fn rasterize_centerlines(
    map: &CenterlineMap,
    spec: &GridSpec,
    width_m: f64,
) -> Result<BinaryMask> {
    rasterize_polylines(&map.polylines, spec, width_m)
}

/// Two-channel prior feature: density, and direction divided by the fold's
/// half range into (−1, 1].
pub fn heatmap_to_feature(h: &Heatmap) -> FeatureMap {
    let scale = 1.0 / h.fold.half_range();
    let mut data = Vec::with_capacity(h.density.len() * 2);
    for (d, theta) in h.density.iter().zip(&h.direction) {
        data.push(*d);
        data.push(theta * scale);
    }
    FeatureMap::from_vec(h.spec, 2, data)
        .expect("heatmap channels are finite and sized to the grid")
}
