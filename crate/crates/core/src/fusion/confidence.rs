use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::grid::GridSpec;

/// Per-cell logits of the BEV (`lambda_a`) and prior (`lambda_b`) branches.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceLogits {
    pub spec: GridSpec,
    pub lambda_a: Vec<f64>,
    pub lambda_b: Vec<f64>,
}

impl ConfidenceLogits {
    pub fn new(spec: GridSpec, lambda_a: Vec<f64>, lambda_b: Vec<f64>) -> Result<Self> {
        if lambda_a.len() != spec.len() || lambda_b.len() != spec.len() {
            return Err(Error::shape(format!(
                "logits have {} and {} cells, grid has {}",
                lambda_a.len(),
                lambda_b.len(),
                spec.len()
            )));
        }
        if lambda_a.iter().chain(&lambda_b).any(|v| !v.is_finite()) {
            return Err(Error::invalid("logits contain non-finite values"));
        }
        Ok(ConfidenceLogits {
            spec,
            lambda_a,
            lambda_b,
        })
    }
}

/// Two-way softmax `(e^a, e^b) / (e^a + e^b)`.
///
/// The smaller weight is computed from the non-positive exponent difference
/// and the larger one as its complement, so nothing overflows, equal logits
/// give exactly one half each, and the two weights sum to one within one ulp.
#[inline]
pub fn softmax2(a: f64, b: f64) -> (f64, f64) {
    if a >= b {
        let e = (b - a).exp();
        let beta = e / (1.0 + e);
        (1.0 - beta, beta)
    } else {
        let e = (a - b).exp();
        let alpha = e / (1.0 + e);
        (alpha, 1.0 - alpha)
    }
}

/// Cellwise `(alpha, beta)` weights.
pub fn confidence_weights(logits: &ConfidenceLogits) -> (Vec<f64>, Vec<f64>) {
    logits
        .lambda_a
        .iter()
        .zip(&logits.lambda_b)
        .map(|(&a, &b)| softmax2(a, b))
        .unzip()
}

fn check_logits(f: &FeatureMap, logits: &ConfidenceLogits) -> Result<()> {
    if *f.spec() != logits.spec || logits.lambda_a.len() != f.spec().len() {
        return Err(Error::shape("logit grid does not match feature grid"));
    }
    Ok(())
}

/// `alpha ⊙ bev + beta ⊙ prior`, one weight pair per cell shared by all channels.
///
/// The result is clamped to the interval spanned by the two inputs, which
/// the exact convex combination never leaves; this only removes rounding
/// overshoot.
pub fn confidence_fuse(
    bev: &FeatureMap,
    prior_aligned: &FeatureMap,
    logits: &ConfidenceLogits,
) -> Result<FeatureMap> {
    bev.check_same_shape(prior_aligned, "confidence_fuse")?;
    check_logits(bev, logits)?;
    let chans = bev.channels();
    let (alpha, beta) = confidence_weights(logits);
    let mut data = Vec::with_capacity(bev.as_slice().len());
    for (cell, (b_cell, p_cell)) in bev
        .as_slice()
        .chunks_exact(chans)
        .zip(prior_aligned.as_slice().chunks_exact(chans))
        .enumerate()
    {
        let (a, bt) = (alpha[cell], beta[cell]);
        for (&b, &p) in b_cell.iter().zip(p_cell) {
            data.push((a * b + bt * p).clamp(b.min(p), b.max(p)));
        }
    }
    FeatureMap::from_vec(*bev.spec(), chans, data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseGrad {
    pub d_bev: FeatureMap,
    pub d_prior: FeatureMap,
    pub d_lambda_a: Vec<f64>,
    pub d_lambda_b: Vec<f64>,
}

/// Adjoint of [`confidence_fuse`] for upstream cotangent `upstream`.
pub fn confidence_fuse_grad(
    bev: &FeatureMap,
    prior_aligned: &FeatureMap,
    logits: &ConfidenceLogits,
    upstream: &FeatureMap,
) -> Result<FuseGrad> {
    bev.check_same_shape(prior_aligned, "confidence_fuse")?;
    bev.check_same_shape(upstream, "confidence_fuse upstream")?;
    check_logits(bev, logits)?;
    let chans = bev.channels();
    let cells = bev.spec().len();
    let (alpha, beta) = confidence_weights(logits);
    let mut d_bev = Vec::with_capacity(cells * chans);
    let mut d_prior = Vec::with_capacity(cells * chans);
    let mut d_lambda_a = Vec::with_capacity(cells);
    for cell in 0..cells {
        let (a, bt) = (alpha[cell], beta[cell]);
        let mut dl = 0.0;
        for k in cell * chans..(cell + 1) * chans {
            let g = upstream.as_slice()[k];
            d_bev.push(a * g);
            d_prior.push(bt * g);
            dl += g * (bev.as_slice()[k] - prior_aligned.as_slice()[k]);
        }
        d_lambda_a.push(dl * a * bt);
    }
    let d_lambda_b = d_lambda_a.iter().map(|v| -v).collect();
    Ok(FuseGrad {
        d_bev: FeatureMap::from_vec(*bev.spec(), chans, d_bev)?,
        d_prior: FeatureMap::from_vec(*bev.spec(), chans, d_prior)?,
        d_lambda_a,
        d_lambda_b,
    })
}

/// Per-cell affine map (1×1 convolution) from the concatenated
/// `[bev; prior]` channel vector of length `2C` to the two logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitProjection {
    in_channels: usize,
    /// Row-major `[2, 2C]`: row 0 produces `lambda_a`, row 1 `lambda_b`.
    weight: Vec<f64>,
    bias: [f64; 2],
}

impl LogitProjection {
    pub fn new(in_channels: usize, weight: Vec<f64>, bias: [f64; 2]) -> Result<Self> {
        if in_channels == 0 || weight.len() != 2 * in_channels {
            return Err(Error::shape(format!(
                "logit projection weight has {} values, expected 2×{in_channels}",
                weight.len()
            )));
        }
        if weight.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::invalid("logit projection has non-finite parameters"));
        }
        Ok(LogitProjection {
            in_channels,
            weight,
            bias,
        })
    }

    pub fn zeros(in_channels: usize) -> Self {
        LogitProjection {
            in_channels,
            weight: vec![0.0; 2 * in_channels],
            bias: [0.0; 2],
        }
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn bias(&self) -> [f64; 2] {
        self.bias
    }
}

fn check_projection(bev: &FeatureMap, prior: &FeatureMap, proj: &LogitProjection) -> Result<()> {
    bev.check_same_shape(prior, "compute_logits")?;
    if proj.in_channels != 2 * bev.channels() {
        return Err(Error::shape(format!(
            "logit projection expects {} input channels, features give 2×{}",
            proj.in_channels,
            bev.channels()
        )));
    }
    Ok(())
}

pub fn compute_logits(
    bev: &FeatureMap,
    prior_aligned: &FeatureMap,
    proj: &LogitProjection,
) -> Result<ConfidenceLogits> {
    check_projection(bev, prior_aligned, proj)?;
    let chans = bev.channels();
    let (w_a, w_b) = proj.weight.split_at(proj.in_channels);
    let mut lambda_a = Vec::with_capacity(bev.spec().len());
    let mut lambda_b = Vec::with_capacity(bev.spec().len());
    for (b_cell, p_cell) in bev
        .as_slice()
        .chunks_exact(chans)
        .zip(prior_aligned.as_slice().chunks_exact(chans))
    {
        let x = b_cell.iter().chain(p_cell);
        let (mut la, mut lb) = (proj.bias[0], proj.bias[1]);
        for ((v, wa), wb) in x.zip(w_a).zip(w_b) {
            la += wa * v;
            lb += wb * v;
        }
        lambda_a.push(la);
        lambda_b.push(lb);
    }
    ConfidenceLogits::new(*bev.spec(), lambda_a, lambda_b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogitGrad {
    pub d_bev: FeatureMap,
    pub d_prior: FeatureMap,
    /// Same layout as the projection weight.
    pub d_weight: Vec<f64>,
    pub d_bias: [f64; 2],
}

/// Adjoint of [`compute_logits`] for logit cotangents `d_lambda_a`, `d_lambda_b`.
pub fn compute_logits_grad(
    bev: &FeatureMap,
    prior_aligned: &FeatureMap,
    proj: &LogitProjection,
    d_lambda_a: &[f64],
    d_lambda_b: &[f64],
) -> Result<LogitGrad> {
    check_projection(bev, prior_aligned, proj)?;
    let cells = bev.spec().len();
    if d_lambda_a.len() != cells || d_lambda_b.len() != cells {
        return Err(Error::shape("logit cotangents do not match the grid"));
    }
    let chans = bev.channels();
    let n_in = proj.in_channels;
    let mut d_bev = FeatureMap::zeros(*bev.spec(), chans);
    let mut d_prior = FeatureMap::zeros(*bev.spec(), chans);
    let mut d_weight = vec![0.0; 2 * n_in];
    let mut d_bias = [0.0; 2];
    for cell in 0..cells {
        let (ga, gb) = (d_lambda_a[cell], d_lambda_b[cell]);
        d_bias[0] += ga;
        d_bias[1] += gb;
        for j in 0..n_in {
            let (src, dst, ch) = if j < chans {
                (bev, &mut d_bev, j)
            } else {
                (prior_aligned, &mut d_prior, j - chans)
            };
            let x = src.as_slice()[cell * chans + ch];
            d_weight[j] += ga * x;
            d_weight[n_in + j] += gb * x;
            dst.as_mut_slice()[cell * chans + ch] =
                ga * proj.weight[j] + gb * proj.weight[n_in + j];
        }
    }
    Ok(LogitGrad {
        d_bev,
        d_prior,
        d_weight,
        d_bias,
    })
}
