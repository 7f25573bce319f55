use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::confidence::LogitProjection;
use super::offsets::OffsetNet;
use crate::error::{Error, Result};
use crate::tensor_io::{Tensor, TensorFile};

pub const PARAMS_KIND: &str = "fusion-params";

/// Learnable parameters of the alignment and fusion stage for `channels`
/// feature channels per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentParams {
    pub offset_net: OffsetNet,
    pub logits: LogitProjection,
}

impl AlignmentParams {
    /// All-zero parameters: zero offsets and equal confidence everywhere.
    pub fn zeros(channels: usize, hidden: usize) -> Self {
        AlignmentParams {
            offset_net: OffsetNet::zeros(2 * channels, hidden),
            logits: LogitProjection::zeros(2 * channels),
        }
    }

    /// Gaussian initialization scaled by fan-in, reproducible from `seed`.
    pub fn random(seed: u64, channels: usize, hidden: usize) -> Result<Self> {
        if channels == 0 || hidden == 0 {
            return Err(Error::invalid("channels and hidden must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_in = 2 * channels;
        let mut draw = |n: usize, fan_in: usize| {
            let normal = Normal::new(0.0, 0.5 / (fan_in as f64).sqrt()).expect("positive std");
            (0..n)
                .map(|_| normal.sample(&mut rng))
                .collect::<Vec<f64>>()
        };
        let w1 = draw(hidden * n_in * 9, n_in * 9);
        let b1 = draw(hidden, n_in * 9);
        let w2 = draw(2 * hidden * 9, hidden * 9);
        let b2 = draw(2, hidden * 9);
        let lw = draw(2 * n_in, n_in);
        let lb = draw(2, n_in);
        Ok(AlignmentParams {
            offset_net: OffsetNet::new(n_in, hidden, w1, b1, w2, [b2[0], b2[1]])?,
            logits: LogitProjection::new(n_in, lw, [lb[0], lb[1]])?,
        })
    }

    pub fn channels(&self) -> usize {
        self.logits.in_channels() / 2
    }

    pub fn to_file(&self) -> TensorFile {
        let net = &self.offset_net;
        let (n_in, hid) = (net.in_channels(), net.hidden());
        let mut file = TensorFile::new(PARAMS_KIND, None);
        file.attrs.insert("channels".into(), self.channels() as f64);
        file.attrs.insert("hidden".into(), hid as f64);
        let tensors = [
            ("offset.conv1.weight", vec![hid, n_in, 3, 3], net.w1.clone()),
            ("offset.conv1.bias", vec![hid], net.b1.clone()),
            ("offset.conv2.weight", vec![2, hid, 3, 3], net.w2.clone()),
            ("offset.conv2.bias", vec![2], net.b2.to_vec()),
            ("logit.weight", vec![2, n_in], self.logits.weight().to_vec()),
            ("logit.bias", vec![2], self.logits.bias().to_vec()),
        ];
        for (name, shape, data) in tensors {
            file.tensors
                .push(Tensor::new(name, shape, data).expect("shapes are consistent"));
        }
        file
    }

    pub fn from_file(file: &TensorFile) -> Result<Self> {
        if file.kind != PARAMS_KIND {
            return Err(Error::Format(format!(
                "expected {PARAMS_KIND:?} file, found {:?}",
                file.kind
            )));
        }
        let w1 = file.require("offset.conv1.weight")?;
        let [hid, n_in, 3, 3] = w1.shape[..] else {
            return Err(Error::Format(format!(
                "offset.conv1.weight has shape {:?}",
                w1.shape
            )));
        };
        let pair = |name: &str| -> Result<[f64; 2]> {
            let t = file.require(name)?;
            <[f64; 2]>::try_from(&t.data[..])
                .map_err(|_| Error::Format(format!("{name} must hold 2 values")))
        };
        let offset_net = OffsetNet::new(
            n_in,
            hid,
            w1.data.clone(),
            file.require("offset.conv1.bias")?.data.clone(),
            file.require("offset.conv2.weight")?.data.clone(),
            pair("offset.conv2.bias")?,
        )?;
        let logits = LogitProjection::new(
            n_in,
            file.require("logit.weight")?.data.clone(),
            pair("logit.bias")?,
        )?;
        if n_in % 2 != 0 {
            return Err(Error::Format("input channel count must be even".into()));
        }
        Ok(AlignmentParams { offset_net, logits })
    }
}
