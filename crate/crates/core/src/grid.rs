//! BEV grid coordinate system.
//!
//! Cells are half-open: cell `(row, col)` covers
//! `[x_min + col·dx, x_min + (col+1)·dx) × [y_min + row·dy, y_min + (row+1)·dy)`,
//! so every point in the region of interest belongs to exactly one cell and
//! the upper boundary belongs to none.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub cell_dx: f64,
    pub cell_dy: f64,
}

impl Default for GridSpec {
    /// 100 m × 50 m around the ego vehicle at 0.5 m resolution (100 × 200 cells).
    fn default() -> Self {
        GridSpec {
            x_min: -50.0,
            x_max: 50.0,
            y_min: -25.0,
            y_max: 25.0,
            cell_dx: 0.5,
            cell_dy: 0.5,
        }
    }
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        cell_dx: f64,
        cell_dy: f64,
    ) -> Result<Self> {
        let spec = GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            cell_dx,
            cell_dy,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.x_min,
            self.x_max,
            self.y_min,
            self.y_max,
            self.cell_dx,
            self.cell_dy,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite bound or cell size".into()));
        }
        if self.x_min >= self.x_max {
            return Err(Error::InvalidSpec(format!(
                "x_min {} >= x_max {}",
                self.x_min, self.x_max
            )));
        }
        if self.y_min >= self.y_max {
            return Err(Error::InvalidSpec(format!(
                "y_min {} >= y_max {}",
                self.y_min, self.y_max
            )));
        }
        if self.cell_dx <= 0.0 || self.cell_dy <= 0.0 {
            return Err(Error::InvalidSpec("cell sizes must be positive".into()));
        }
        // Guard against absurd allocations.
        if (self.rows() as u128) * (self.cols() as u128) > 1 << 32 {
            return Err(Error::InvalidSpec("grid has more than 2^32 cells".into()));
        }
        Ok(())
    }

    /// Number of rows, H.
    pub fn rows(&self) -> usize {
        (((self.y_max - self.y_min) / self.cell_dy).ceil() as usize).max(1)
    }

    /// Number of columns, W.
    pub fn cols(&self) -> usize {
        (((self.x_max - self.x_min) / self.cell_dx).ceil() as usize).max(1)
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Continuous grid coordinates `(u, v)` = (column, row) of a world point.
    #[inline]
    pub fn to_grid(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.x_min) / self.cell_dx,
            (p.y - self.y_min) / self.cell_dy,
        )
    }

    /// The cell containing `p`, or `None` outside `[x_min, x_max) × [y_min, y_max)`.
    pub fn world_to_cell(&self, p: Point2) -> Option<(usize, usize)> {
        if !p.is_finite()
            || p.x < self.x_min
            || p.x >= self.x_max
            || p.y < self.y_min
            || p.y >= self.y_max
        {
            return None;
        }
        let (u, v) = self.to_grid(p);
        // Rounding can push a point just below the upper bound onto index H or W.
        let row = (v.floor() as usize).min(self.rows() - 1);
        let col = (u.floor() as usize).min(self.cols() - 1);
        Some((row, col))
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.x_min + (col as f64 + 0.5) * self.cell_dx,
            self.y_min + (row as f64 + 0.5) * self.cell_dy,
        )
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols() + col
    }
}

/// Binary H×W mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(rows: usize, cols: usize) -> Self {
        BinaryMask {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn for_spec(spec: &GridSpec) -> Self {
        Self::new(spec.rows(), spec.cols())
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "mask data has {} cells, expected {rows}×{cols}",
                data.len()
            )));
        }
        Ok(BinaryMask { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}
