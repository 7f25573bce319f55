//! Representative-trajectory extraction.
//!
//! Two schemes pick a handful of trajectories that summarize a frame:
//! K-means over arc-length resampled polylines ([`kmeans`]) and greedy
//! farthest-point sampling under the discrete Frechet distance ([`fps`]).

mod fps;
mod frechet;
mod kmeans;
mod resample;

pub use fps::{fps, fps_from, SampleResult};
pub use frechet::frechet_dist;
pub use kmeans::{kmeans, ClusterResult, KMeansConfig};
pub use resample::{euclid_flat_dist, resample, ResampledTrajectory, DEFAULT_RESAMPLE};
