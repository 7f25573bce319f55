use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::grid::GridSpec;

/// Per-cell sampling offsets in cell units, H×W×2 (row offset, column offset).
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetField {
    spec: GridSpec,
    data: Vec<f64>,
}

impl OffsetField {
    pub fn zeros(spec: GridSpec) -> Self {
        OffsetField {
            spec,
            data: vec![0.0; spec.len() * 2],
        }
    }

    pub fn from_vec(spec: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != spec.len() * 2 {
            return Err(Error::shape(format!(
                "offset field has {} values, expected {}×{}×2",
                data.len(),
                spec.rows(),
                spec.cols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("offset field contains non-finite values"));
        }
        Ok(OffsetField { spec, data })
    }

    pub fn constant(spec: GridSpec, d_row: f64, d_col: f64) -> Result<Self> {
        Self::from_vec(spec, [d_row, d_col].repeat(spec.len()))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn get(&self, row: usize, col: usize) -> (f64, f64) {
        let i = 2 * (row * self.spec.cols() + col);
        (self.data[i], self.data[i + 1])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// The four bilinear taps around a fractional position. Taps outside the
/// grid are `None`.
struct Taps {
    cells: [Option<(usize, usize)>; 4],
    weights: [f64; 4],
    fy: f64,
    fx: f64,
}

fn taps(y: f64, x: f64, rows: usize, cols: usize) -> Taps {
    let (y0, x0) = (y.floor(), x.floor());
    let (fy, fx) = (y - y0, x - x0);
    let inside = |r: f64, c: f64| {
        if r >= 0.0 && c >= 0.0 && r < rows as f64 && c < cols as f64 {
            Some((r as usize, c as usize))
        } else {
            None
        }
    };
    Taps {
        cells: [
            inside(y0, x0),
            inside(y0, x0 + 1.0),
            inside(y0 + 1.0, x0),
            inside(y0 + 1.0, x0 + 1.0),
        ],
        weights: [
            (1.0 - fy) * (1.0 - fx),
            (1.0 - fy) * fx,
            fy * (1.0 - fx),
            fy * fx,
        ],
        fy,
        fx,
    }
}

fn check_grid(prior: &FeatureMap, off: &OffsetField) -> Result<()> {
    if prior.spec() != off.spec() {
        return Err(Error::shape(format!(
            "offset grid {}×{} does not match feature grid {}×{}",
            off.spec().rows(),
            off.spec().cols(),
            prior.rows(),
            prior.cols()
        )));
    }
    Ok(())
}

/// Bilinear resampling of `prior` at `(h + Δrow, w + Δcol)` for every cell.
///
/// Out-of-grid taps read zero. Taps with zero weight are skipped, so a zero
/// offset field reproduces the input bit for bit.
pub fn warp(prior: &FeatureMap, off: &OffsetField) -> Result<FeatureMap> {
    check_grid(prior, off)?;
    let (rows, cols, chans) = prior.shape();
    let mut out = FeatureMap::zeros(*prior.spec(), chans);
    for r in 0..rows {
        for c in 0..cols {
            let (dy, dx) = off.get(r, c);
            let t = taps(r as f64 + dy, c as f64 + dx, rows, cols);
            for ch in 0..chans {
                let mut acc: Option<f64> = None;
                for (cell, &w) in t.cells.iter().zip(&t.weights) {
                    if let (Some((rr, cc)), true) = (cell, w != 0.0) {
                        let term = w * prior.get(*rr, *cc, ch);
                        acc = Some(acc.map_or(term, |a| a + term));
                    }
                }
                out.set(r, c, ch, acc.unwrap_or(0.0));
            }
        }
    }
    Ok(out)
}

/// Adjoint of [`warp`]: gradients of `Σ upstream ⊙ warp(prior, off)` with
/// respect to the prior values and the offsets.
///
/// At integer sample positions the offset gradient is the one-sided
/// derivative from above, matching the floor used by the forward pass.
pub fn warp_grad(
    prior: &FeatureMap,
    off: &OffsetField,
    upstream: &FeatureMap,
) -> Result<(FeatureMap, OffsetField)> {
    check_grid(prior, off)?;
    prior.check_same_shape(upstream, "warp upstream")?;
    let (rows, cols, chans) = prior.shape();
    let mut d_prior = FeatureMap::zeros(*prior.spec(), chans);
    let mut d_off = vec![0.0; rows * cols * 2];
    for r in 0..rows {
        for c in 0..cols {
            let (dy, dx) = off.get(r, c);
            let t = taps(r as f64 + dy, c as f64 + dx, rows, cols);
            let (mut gy, mut gx) = (0.0, 0.0);
            for ch in 0..chans {
                let g = upstream.get(r, c, ch);
                let v: [f64; 4] = std::array::from_fn(|k| {
                    t.cells[k].map_or(0.0, |(rr, cc)| prior.get(rr, cc, ch))
                });
                for (cell, &w) in t.cells.iter().zip(&t.weights) {
                    if let Some((rr, cc)) = *cell {
                        let cur = d_prior.get(rr, cc, ch);
                        d_prior.set(rr, cc, ch, cur + w * g);
                    }
                }
                gy += g * ((1.0 - t.fx) * (v[2] - v[0]) + t.fx * (v[3] - v[1]));
                gx += g * ((1.0 - t.fy) * (v[1] - v[0]) + t.fy * (v[3] - v[2]));
            }
            let i = 2 * (r * cols + c);
            d_off[i] = gy;
            d_off[i + 1] = gx;
        }
    }
    Ok((
        d_prior,
        OffsetField {
            spec: *off.spec(),
            data: d_off,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(rows: usize, cols: usize) -> GridSpec {
        GridSpec::new(0.0, cols as f64, 0.0, rows as f64, 1.0, 1.0).unwrap()
    }

    fn field(rows: usize, cols: usize) -> FeatureMap {
        FeatureMap::from_fn(spec(rows, cols), 2, |r, c, ch| {
            ((r * 7 + c * 3 + ch) % 5) as f64 - 1.5
        })
    }

    #[test]
    fn zero_offsets_identity() {
        let mut f = field(4, 5);
        f.set(0, 0, 0, -0.0);
        let out = warp(&f, &OffsetField::zeros(*f.spec())).unwrap();
        let bits = |m: &FeatureMap| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&out), bits(&f));
    }

    #[test]
    fn integer_shift() {
        let f = field(5, 5);
        let out = warp(&f, &OffsetField::constant(*f.spec(), 1.0, 0.0).unwrap()).unwrap();
        for r in 0..4 {
            for c in 0..5 {
                assert_eq!(out.cell(r, c), f.cell(r + 1, c));
            }
        }
        // The last row samples outside the grid.
        assert!(out.cell(4, 2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_cell_on_linear_field() {
        let s = spec(6, 4);
        let f = FeatureMap::from_fn(s, 1, |r, c, _| 0.3 + 1.25 * r as f64 - 0.5 * c as f64);
        let out = warp(&f, &OffsetField::constant(s, 0.5, 0.0).unwrap()).unwrap();
        for r in 0..5 {
            for c in 0..4 {
                let expect = 0.3 + 1.25 * (r as f64 + 0.5) - 0.5 * c as f64;
                assert!((out.get(r, c, 0) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_identities() {
        let f = field(3, 4);
        let zero_up = FeatureMap::zeros(*f.spec(), 2);
        let off = OffsetField::constant(*f.spec(), 0.3, -0.6).unwrap();
        let (dp, doff) = warp_grad(&f, &off, &zero_up).unwrap();
        assert!(dp
            .as_slice()
            .iter()
            .chain(doff.as_slice())
            .all(|&v| v == 0.0));

        let up = field(3, 4);
        let (dp, _) = warp_grad(&f, &OffsetField::zeros(*f.spec()), &up).unwrap();
        assert_eq!(dp, up);
    }

    #[test]
    fn mismatched_grid() {
        let f = field(3, 4);
        assert!(warp(&f, &OffsetField::zeros(spec(4, 3))).is_err());
    }
}
