//! Shared inputs for the criterion benches.

use trajprior::ingest::synth_scene;
use trajprior::{CenterlineMap, TrajectorySet};

/// A moderately busy synthetic frame: 8 lanes, 25 trajectories each.
pub fn busy_frame(seed: u64) -> (TrajectorySet, CenterlineMap) {
    synth_scene(seed, 8, 25, 0.5).expect("valid synthetic scene parameters")
}
