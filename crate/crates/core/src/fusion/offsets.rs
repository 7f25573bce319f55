use rayon::prelude::*;

use super::warp::OffsetField;
use crate::error::{Error, Result};
use crate::feature::FeatureMap;

/// Two-layer 3×3 convolutional head (zero padding, tanh in between) that maps
/// the concatenated `[bev; prior]` features to a two-channel offset field.
///
/// Weights are row-major `[out][in][3][3]`; tap `(ky, kx)` reads the input at
/// `(row + ky - 1, col + kx - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetNet {
    in_channels: usize,
    hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: [f64; 2],
}

impl OffsetNet {
    pub fn new(
        in_channels: usize,
        hidden: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: [f64; 2],
    ) -> Result<Self> {
        if in_channels == 0 || hidden == 0 {
            return Err(Error::invalid(
                "offset net needs at least one input and one hidden channel",
            ));
        }
        if w1.len() != hidden * in_channels * 9 || b1.len() != hidden || w2.len() != 2 * hidden * 9
        {
            return Err(Error::shape(format!(
                "offset net parameters do not match {in_channels} inputs and {hidden} hidden channels"
            )));
        }
        if w1
            .iter()
            .chain(&b1)
            .chain(&w2)
            .chain(&b2)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("offset net has non-finite parameters"));
        }
        Ok(OffsetNet {
            in_channels,
            hidden,
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn zeros(in_channels: usize, hidden: usize) -> Self {
        OffsetNet {
            in_channels,
            hidden,
            w1: vec![0.0; hidden * in_channels * 9],
            b1: vec![0.0; hidden],
            w2: vec![0.0; 2 * hidden * 9],
            b2: [0.0; 2],
        }
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetNetGrad {
    pub d_bev: FeatureMap,
    pub d_prior: FeatureMap,
    pub d_w1: Vec<f64>,
    pub d_b1: Vec<f64>,
    pub d_w2: Vec<f64>,
    pub d_b2: [f64; 2],
}

fn neighbor(r: usize, c: usize, ky: usize, kx: usize, rows: usize, cols: usize) -> Option<usize> {
    let rr = (r + ky).checked_sub(1)?;
    let cc = (c + kx).checked_sub(1)?;
    (rr < rows && cc < cols).then_some(rr * cols + cc)
}

/// Zero-padded 3×3 convolution on an HWC buffer.
fn conv3x3(
    input: &[f64],
    rows: usize,
    cols: usize,
    cin: usize,
    weight: &[f64],
    bias: &[f64],
) -> Vec<f64> {
    let cout = bias.len();
    let mut out = vec![0.0; rows * cols * cout];
    out.par_chunks_mut(cols * cout)
        .enumerate()
        .for_each(|(r, row_out)| {
            for c in 0..cols {
                let o_cell = &mut row_out[c * cout..(c + 1) * cout];
                o_cell.copy_from_slice(bias);
                for ky in 0..3 {
                    for kx in 0..3 {
                        let Some(n) = neighbor(r, c, ky, kx, rows, cols) else {
                            continue;
                        };
                        let x = &input[n * cin..(n + 1) * cin];
                        for (o, acc) in o_cell.iter_mut().enumerate() {
                            for (i, xi) in x.iter().enumerate() {
                                *acc += weight[((o * cin + i) * 3 + ky) * 3 + kx] * xi;
                            }
                        }
                    }
                }
            }
        });
    out
}

/// Adjoint of [`conv3x3`]: returns `(d_input, d_weight, d_bias)`.
fn conv3x3_back(
    input: &[f64],
    rows: usize,
    cols: usize,
    cin: usize,
    weight: &[f64],
    d_out: &[f64],
    cout: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut d_in = vec![0.0; input.len()];
    let mut d_w = vec![0.0; weight.len()];
    let mut d_b = vec![0.0; cout];
    for r in 0..rows {
        for c in 0..cols {
            let g = &d_out[(r * cols + c) * cout..(r * cols + c + 1) * cout];
            for (db, gv) in d_b.iter_mut().zip(g) {
                *db += gv;
            }
            for ky in 0..3 {
                for kx in 0..3 {
                    let Some(n) = neighbor(r, c, ky, kx, rows, cols) else {
                        continue;
                    };
                    for (o, &go) in g.iter().enumerate() {
                        for i in 0..cin {
                            let k = ((o * cin + i) * 3 + ky) * 3 + kx;
                            d_w[k] += go * input[n * cin + i];
                            d_in[n * cin + i] += go * weight[k];
                        }
                    }
                }
            }
        }
    }
    (d_in, d_w, d_b)
}

fn concat(bev: &FeatureMap, prior: &FeatureMap, net: &OffsetNet) -> Result<Vec<f64>> {
    bev.check_same_shape(prior, "predict_offsets")?;
    let chans = bev.channels();
    if net.in_channels != 2 * chans {
        return Err(Error::shape(format!(
            "offset net expects {} input channels, features give 2×{chans}",
            net.in_channels
        )));
    }
    let mut x = Vec::with_capacity(bev.as_slice().len() * 2);
    for (b, p) in bev
        .as_slice()
        .chunks_exact(chans)
        .zip(prior.as_slice().chunks_exact(chans))
    {
        x.extend_from_slice(b);
        x.extend_from_slice(p);
    }
    Ok(x)
}

struct Forward {
    x: Vec<f64>,
    hidden: Vec<f64>,
    out: Vec<f64>,
}

fn forward(bev: &FeatureMap, prior: &FeatureMap, net: &OffsetNet) -> Result<Forward> {
    let x = concat(bev, prior, net)?;
    let (rows, cols) = (bev.rows(), bev.cols());
    let mut hidden = conv3x3(&x, rows, cols, net.in_channels, &net.w1, &net.b1);
    hidden.iter_mut().for_each(|v| *v = v.tanh());
    let out = conv3x3(&hidden, rows, cols, net.hidden, &net.w2, &net.b2);
    Ok(Forward { x, hidden, out })
}

pub fn predict_offsets(
    bev: &FeatureMap,
    prior: &FeatureMap,
    net: &OffsetNet,
) -> Result<OffsetField> {
    let f = forward(bev, prior, net)?;
    OffsetField::from_vec(*bev.spec(), f.out)
}

/// Adjoint of [`predict_offsets`] for the offset cotangent `d_off`.
pub fn predict_offsets_grad(
    bev: &FeatureMap,
    prior: &FeatureMap,
    net: &OffsetNet,
    d_off: &OffsetField,
) -> Result<OffsetNetGrad> {
    if d_off.spec() != bev.spec() {
        return Err(Error::shape(
            "offset cotangent grid does not match feature grid",
        ));
    }
    let f = forward(bev, prior, net)?;
    let (rows, cols, chans) = bev.shape();
    let (mut d_hidden, d_w2, d_b2) = conv3x3_back(
        &f.hidden,
        rows,
        cols,
        net.hidden,
        &net.w2,
        d_off.as_slice(),
        2,
    );
    for (d, h) in d_hidden.iter_mut().zip(&f.hidden) {
        *d *= 1.0 - h * h;
    }
    let (d_x, d_w1, d_b1) = conv3x3_back(
        &f.x,
        rows,
        cols,
        net.in_channels,
        &net.w1,
        &d_hidden,
        net.hidden,
    );
    let mut d_bev = Vec::with_capacity(rows * cols * chans);
    let mut d_prior = Vec::with_capacity(rows * cols * chans);
    for cell in d_x.chunks_exact(2 * chans) {
        d_bev.extend_from_slice(&cell[..chans]);
        d_prior.extend_from_slice(&cell[chans..]);
    }
    Ok(OffsetNetGrad {
        d_bev: FeatureMap::from_vec(*bev.spec(), chans, d_bev)?,
        d_prior: FeatureMap::from_vec(*bev.spec(), chans, d_prior)?,
        d_w1,
        d_b1,
        d_w2,
        d_b2: [d_b2[0], d_b2[1]],
    })
}
