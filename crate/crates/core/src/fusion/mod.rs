//! Prior alignment and fusion kernels.
//!
//! The prior feature map is first warped by a per-cell offset field predicted
//! from the concatenated BEV and prior features ([`predict_offsets`],
//! [`warp`]). A per-cell 1×1 projection of the concatenated features yields
//! two logits whose two-way softmax weights a convex combination of the BEV
//! feature and the aligned prior ([`compute_logits`], [`confidence_fuse`]).
//!
//! Every kernel has an analytic adjoint (`*_grad`). Offsets are in cell
//! units: component 0 moves along rows (y), component 1 along columns (x).
//! Everything is float64.

mod confidence;
pub mod gradcheck;
mod offsets;
mod params;
mod resize;
mod warp;

pub use confidence::{
    compute_logits, compute_logits_grad, confidence_fuse, confidence_fuse_grad, confidence_weights,
    softmax2, ConfidenceLogits, FuseGrad, LogitGrad, LogitProjection,
};
pub use offsets::{predict_offsets, predict_offsets_grad, OffsetNet, OffsetNetGrad};
pub use params::AlignmentParams;
pub use resize::{resize, ResizeMode};
pub use warp::{warp, warp_grad, OffsetField};

use crate::error::Result;
use crate::feature::FeatureMap;

/// Elementwise sum of the BEV feature and a prior feature of identical shape.
pub fn add_prior(bev: &FeatureMap, prior: &FeatureMap) -> Result<FeatureMap> {
    bev.check_same_shape(prior, "add_prior")?;
    let data = bev
        .as_slice()
        .iter()
        .zip(prior.as_slice())
        .map(|(a, b)| a + b)
        .collect();
    FeatureMap::from_vec(*bev.spec(), bev.channels(), data)
}

/// Intermediate and final products of [`align_and_fuse`].
#[derive(Debug, Clone)]
pub struct FusionOutput {
    pub offsets: OffsetField,
    pub aligned: FeatureMap,
    pub logits: ConfidenceLogits,
    pub alpha: Vec<f64>,
    pub fused: FeatureMap,
}

/// Offset prediction, warp, logit projection and confidence fusion in sequence.
pub fn align_and_fuse(
    bev: &FeatureMap,
    prior: &FeatureMap,
    params: &AlignmentParams,
) -> Result<FusionOutput> {
    bev.check_same_shape(prior, "bev vs prior")?;
    let offsets = predict_offsets(bev, prior, &params.offset_net)?;
    let aligned = warp(prior, &offsets)?;
    let logits = compute_logits(bev, &aligned, &params.logits)?;
    let (alpha, _) = confidence_weights(&logits);
    let fused = confidence_fuse(bev, &aligned, &logits)?;
    Ok(FusionOutput {
        offsets,
        aligned,
        logits,
        alpha,
        fused,
    })
}
