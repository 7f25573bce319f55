use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Dense H×W×C float64 tensor on a BEV grid, channel-minor row-major layout:
/// element `(row, col, ch)` lives at `(row·W + col)·C + ch`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    spec: GridSpec,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(spec: GridSpec, channels: usize) -> Self {
        assert!(channels > 0, "feature map needs at least one channel");
        FeatureMap {
            spec,
            channels,
            data: vec![0.0; spec.len() * channels],
        }
    }

    pub fn from_vec(spec: GridSpec, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::shape("feature map needs at least one channel"));
        }
        let expected = spec.len() * channels;
        if data.len() != expected {
            return Err(Error::shape(format!(
                "feature data has {} values, expected {}×{}×{channels} = {expected}",
                data.len(),
                spec.rows(),
                spec.cols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature map contains non-finite values"));
        }
        Ok(FeatureMap {
            spec,
            channels,
            data,
        })
    }

    pub fn from_fn(
        spec: GridSpec,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let (h, w) = (spec.rows(), spec.cols());
        let mut data = Vec::with_capacity(h * w * channels);
        for r in 0..h {
            for c in 0..w {
                for ch in 0..channels {
                    data.push(f(r, c, ch));
                }
            }
        }
        FeatureMap {
            spec,
            channels,
            data,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.spec.rows()
    }

    pub fn cols(&self) -> usize {
        self.spec.cols()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.rows(), self.cols(), self.channels)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[(row * self.cols() + col) * self.channels + ch]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, value: f64) {
        let w = self.cols();
        self.data[(row * w + col) * self.channels + ch] = value;
    }

    /// The C values of one cell.
    pub fn cell(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.cols() + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Errors unless `other` has the same grid and channel count.
    pub fn check_same_shape(&self, other: &FeatureMap, what: &str) -> Result<()> {
        if self.shape() != other.shape() || self.spec != other.spec {
            return Err(Error::shape(format!(
                "{what}: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }
}
