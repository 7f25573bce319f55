use crate::error::{Error, Result};
use crate::geom::{arc_length, Point2};
use crate::grid::GridSpec;

/// An ordered polyline of at least two finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    points: Vec<Point2>,
    /// Optional discrete attribute (lane type etc.) carried through file round trips.
    pub label: Option<String>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, points: Vec<Point2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("trajectory shorter than 2 points"));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("point {i} is not finite")));
        }
        Ok(Trajectory {
            id: id.into(),
            points,
            label: None,
        })
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
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

    pub fn arc_length(&self) -> f64 {
        arc_length(&self.points)
    }

    pub fn reversed(&self) -> Trajectory {
        let mut points = self.points.clone();
        points.reverse();
        Trajectory {
            id: self.id.clone(),
            points,
            label: self.label.clone(),
        }
    }

    /// Same id and label, new geometry. The point count is preserved by callers.
    pub(crate) fn with_points(&self, points: Vec<Point2>) -> Trajectory {
        debug_assert!(points.len() >= 2);
        Trajectory {
            id: self.id.clone(),
            points,
            label: self.label.clone(),
        }
    }
}

/// The trajectories observed in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub frame_id: String,
    /// Number of ground-truth centerlines in the frame, used by the retention rule.
    pub centerline_count: usize,
    pub trajectories: Vec<Trajectory>,
}

impl TrajectorySet {
    pub fn new(
        frame_id: impl Into<String>,
        centerline_count: usize,
        trajectories: Vec<Trajectory>,
    ) -> Self {
        let frame_id = frame_id.into();
        TrajectorySet {
            frame_id: if frame_id.is_empty() {
                "unknown".to_string()
            } else {
                frame_id
            },
            centerline_count,
            trajectories,
        }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// Ground-truth lane centerlines of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterlineMap {
    pub spec: GridSpec,
    pub polylines: Vec<Trajectory>,
}

impl CenterlineMap {
    pub fn new(spec: GridSpec, polylines: Vec<Trajectory>) -> Self {
        CenterlineMap { spec, polylines }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_nonfinite() {
        let e = Trajectory::new("a", vec![Point2::new(0.0, 0.0)]).unwrap_err();
        assert!(e.to_string().contains("trajectory shorter than 2 points"));
        assert!(Trajectory::new(
            "a",
            vec![Point2::new(0.0, 0.0), Point2::new(f64::INFINITY, 0.0)]
        )
        .is_err());
    }

    #[test]
    fn empty_frame_id_defaults() {
        assert_eq!(TrajectorySet::new("", 0, vec![]).frame_id, "unknown");
    }
}
