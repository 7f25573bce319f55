//! Map priors from crowdsourced vehicle trajectories.
//!
//! The crate turns raw trajectories into two prior encodings used by BEV
//! lane perception models:
//!
//! * a rasterized heatmap with per-cell visit density and mean travel
//!   orientation ([`raster`]),
//! * a small set of representative trajectories picked by K-means over
//!   resampled polylines or by Frechet farthest-point sampling ([`select`]).
//!
//! It also carries the alignment kernels used to fuse a prior feature map
//! into a BEV feature map (offset warp, softmax confidence fusion) with
//! analytic adjoints ([`fusion`]), and the metrics used to score priors
//! against ground-truth centerlines ([`eval`]).
//!
//! All H×W products are row-major with row 0 at `y_min` and column 0 at
//! `x_min`.

pub mod error;
pub mod eval;
pub mod fusion;
pub mod geom;
pub mod grid;
pub mod ingest;
pub mod raster;
pub mod select;
pub mod tensor_io;
pub mod trajectory;

mod feature;

pub use error::{Error, Result};
pub use feature::FeatureMap;
pub use geom::{segment_angle, Point2};
pub use grid::{BinaryMask, GridSpec};
pub use raster::Heatmap;
pub use trajectory::{CenterlineMap, Trajectory, TrajectorySet};
