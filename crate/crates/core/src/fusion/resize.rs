use std::str::FromStr;

use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResizeMode {
    Nearest,
    Bilinear,
}

impl FromStr for ResizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(ResizeMode::Nearest),
            "bilinear" => Ok(ResizeMode::Bilinear),
            other => Err(Error::invalid(format!("unknown resize mode {other:?}"))),
        }
    }
}

/// Resamples `src` onto `target` by evaluating it at the world position of
/// every target cell center. Positions outside the source are clamped to its
/// border cells.
pub fn resize(src: &FeatureMap, target: GridSpec, mode: ResizeMode) -> Result<FeatureMap> {
    target.validate()?;
    let (rows, cols, chans) = src.shape();
    let s = src.spec();
    let mut out = FeatureMap::zeros(target, chans);
    for r in 0..target.rows() {
        for c in 0..target.cols() {
            // Continuous source coordinates with cell centers at integers.
            let (gx, gy) = s.to_grid(target.cell_center(r, c));
            let (y, x) = (
                (gy - 0.5).clamp(0.0, (rows - 1) as f64),
                (gx - 0.5).clamp(0.0, (cols - 1) as f64),
            );
            match mode {
                ResizeMode::Nearest => {
                    // Ties round up, consistent with the half-open cell convention.
                    let (rr, cc) = ((y + 0.5).floor() as usize, (x + 0.5).floor() as usize);
                    let (rr, cc) = (rr.min(rows - 1), cc.min(cols - 1));
                    for ch in 0..chans {
                        out.set(r, c, ch, src.get(rr, cc, ch));
                    }
                }
                ResizeMode::Bilinear => {
                    let (y0, x0) = (y.floor() as usize, x.floor() as usize);
                    let (y1, x1) = ((y0 + 1).min(rows - 1), (x0 + 1).min(cols - 1));
                    let (fy, fx) = (y - y0 as f64, x - x0 as f64);
                    for ch in 0..chans {
                        let top = src.get(y0, x0, ch) * (1.0 - fx) + src.get(y0, x1, ch) * fx;
                        let bot = src.get(y1, x0, ch) * (1.0 - fx) + src.get(y1, x1, ch) * fx;
                        out.set(r, c, ch, top * (1.0 - fy) + bot * fy);
                    }
                }
            }
        }
    }
    Ok(out)
}
