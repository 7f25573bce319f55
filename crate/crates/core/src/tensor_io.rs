//! Self-describing tensor container and grayscale image export.
//!
//! Layout:
//!
//! ```text
//! magic    8 bytes  "TRJPTNSR"
//! version  u32 LE   1
//! hlen     u64 LE   length of the JSON header in bytes
//! header   hlen bytes of UTF-8 JSON:
//!          {"kind": str, "spec": GridSpec|null, "attrs": {str: f64},
//!           "tensors": [{"name": str, "shape": [usize]}]}
//! payload  f64 LE values of each tensor in header order, row-major
//! ```
//!
//! Heatmaps are stored with kind `"heatmap"` and `[H, W]` tensors `density`,
//! `direction` and `count`, plus attribute `heading` set to 1 when directions
//! are headings rather than orientations. Feature maps use kind `"feature"`
//! and one `[H, W, C]` tensor `features`. Row 0 is `y_min`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::grid::GridSpec;
use crate::raster::{heatmap_to_feature, DirectionFold, Heatmap};

pub const MAGIC: &[u8; 8] = b"TRJPTNSR";
pub const VERSION: u32 = 1;
const MAX_HEADER: u64 = 16 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::shape(format!(
                "tensor {name}: shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { name, shape, data })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub kind: String,
    pub spec: Option<GridSpec>,
    pub attrs: BTreeMap<String, f64>,
    pub tensors: Vec<Tensor>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    spec: Option<GridSpec>,
    attrs: BTreeMap<String, f64>,
    tensors: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    name: String,
    shape: Vec<usize>,
}

impl TensorFile {
    pub fn new(kind: impl Into<String>, spec: Option<GridSpec>) -> Self {
        TensorFile {
            kind: kind.into(),
            spec,
            attrs: BTreeMap::new(),
            tensors: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Tensor> {
        self.get(name)
            .ok_or_else(|| Error::Format(format!("missing tensor {name:?}")))
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = Header {
            kind: self.kind.clone(),
            spec: self.spec,
            attrs: self.attrs.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|t| Entry {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf =
            Vec::with_capacity(8 * self.tensors.iter().map(|t| t.data.len()).sum::<usize>());
        for t in &self.tensors {
            for v in &t.data {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut fixed = [0u8; 20];
        r.read_exact(&mut fixed)
            .map_err(|_| Error::Format("truncated preamble".into()))?;
        if &fixed[..8] != MAGIC {
            return Err(Error::Format("bad magic (not a tensor file)".into()));
        }
        let version = u32::from_le_bytes(fixed[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let hlen = u64::from_le_bytes(fixed[12..20].try_into().unwrap());
        if hlen > MAX_HEADER {
            return Err(Error::Format(format!("header length {hlen} too large")));
        }
        let mut json = vec![0u8; hlen as usize];
        r.read_exact(&mut json)
            .map_err(|_| Error::Format("truncated header".into()))?;
        let header: Header =
            serde_json::from_slice(&json).map_err(|e| Error::Format(format!("header: {e}")))?;
        if let Some(spec) = &header.spec {
            spec.validate()?;
        }

        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        let mut offset = 0usize;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for e in header.tensors {
            let n = e
                .shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| Error::Format(format!("tensor {}: shape overflows", e.name)))?;
            let bytes = n
                .checked_mul(8)
                .filter(|b| offset + b <= payload.len())
                .ok_or_else(|| Error::Format(format!("tensor {}: payload truncated", e.name)))?;
            let data: Vec<f64> = payload[offset..offset + bytes]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            offset += bytes;
            tensors.push(Tensor {
                name: e.name,
                shape: e.shape,
                data,
            });
        }
        if offset != payload.len() {
            return Err(Error::Format(format!(
                "{} trailing payload bytes",
                payload.len() - offset
            )));
        }
        Ok(TensorFile {
            kind: header.kind,
            spec: header.spec,
            attrs: header.attrs,
            tensors,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }
}

fn grid_dims(file: &TensorFile) -> Result<(GridSpec, usize, usize)> {
    let spec = file
        .spec
        .ok_or_else(|| Error::Format(format!("{} file has no grid spec", file.kind)))?;
    Ok((spec, spec.rows(), spec.cols()))
}

pub fn heatmap_to_file(h: &Heatmap) -> TensorFile {
    let (rows, cols) = (h.rows(), h.cols());
    let mut f = TensorFile::new("heatmap", Some(h.spec));
    f.attrs.insert("rows".into(), rows as f64);
    f.attrs.insert("cols".into(), cols as f64);
    f.attrs.insert("channels".into(), 2.0);
    f.attrs.insert("n_max".into(), h.n_max as f64);
    let heading = matches!(h.fold, DirectionFold::Heading);
    f.attrs
        .insert("heading".into(), if heading { 1.0 } else { 0.0 });
    let shape = vec![rows, cols];
    f.tensors.push(Tensor {
        name: "density".into(),
        shape: shape.clone(),
        data: h.density.clone(),
    });
    f.tensors.push(Tensor {
        name: "direction".into(),
        shape: shape.clone(),
        data: h.direction.clone(),
    });
    f.tensors.push(Tensor {
        name: "count".into(),
        shape,
        data: h.count.iter().map(|&c| c as f64).collect(),
    });
    f
}

pub fn heatmap_from_file(file: &TensorFile) -> Result<Heatmap> {
    if file.kind != "heatmap" {
        return Err(Error::Format(format!(
            "expected a heatmap file, found kind {:?}",
            file.kind
        )));
    }
    let (spec, rows, cols) = grid_dims(file)?;
    let take = |name: &str| -> Result<Vec<f64>> {
        let t = file.require(name)?;
        if t.shape != [rows, cols] {
            return Err(Error::shape(format!(
                "{name}: shape {:?}, grid is {rows}×{cols}",
                t.shape
            )));
        }
        Ok(t.data.clone())
    };
    let density = take("density")?;
    let direction = take("direction")?;
    let count = take("count")?
        .into_iter()
        .map(|c| {
            if c >= 0.0 && c.fract() == 0.0 && c <= u32::MAX as f64 {
                Ok(c as u32)
            } else {
                Err(c)
            }
        })
        .collect::<std::result::Result<Vec<u32>, f64>>()
        .map_err(|c| Error::Format(format!("count value {c} is not a nonnegative integer")))?;
    let n_max = count.iter().copied().max().unwrap_or(0).max(1);
    let fold = match file.attrs.get("heading") {
        Some(1.0) => DirectionFold::Heading,
        _ => DirectionFold::Orientation,
    };
    Ok(Heatmap {
        spec,
        density,
        direction,
        fold,
        count,
        n_max,
    })
}

pub fn feature_to_file(f: &FeatureMap) -> TensorFile {
    let (rows, cols, channels) = f.shape();
    let mut file = TensorFile::new("feature", Some(*f.spec()));
    file.attrs.insert("rows".into(), rows as f64);
    file.attrs.insert("cols".into(), cols as f64);
    file.attrs.insert("channels".into(), channels as f64);
    file.tensors.push(Tensor {
        name: "features".into(),
        shape: vec![rows, cols, channels],
        data: f.as_slice().to_vec(),
    });
    file
}

/// Read a feature map. Heatmap files are accepted and converted with
/// [`heatmap_to_feature`].
pub fn feature_from_file(file: &TensorFile) -> Result<FeatureMap> {
    match file.kind.as_str() {
        "heatmap" => Ok(heatmap_to_feature(&heatmap_from_file(file)?)),
        "feature" => {
            let (spec, rows, cols) = grid_dims(file)?;
            let t = file.require("features")?;
            match t.shape.as_slice() {
                &[r, c, ch] if r == rows && c == cols && ch > 0 => {
                    FeatureMap::from_vec(spec, ch, t.data.clone())
                }
                other => Err(Error::shape(format!(
                    "features: shape {other:?}, grid is {rows}×{cols}"
                ))),
            }
        }
        other => Err(Error::Format(format!(
            "expected a feature or heatmap file, found kind {other:?}"
        ))),
    }
}

/// Binary PGM (P5) of the density channel, 8-bit, north up: the first image
/// row is the grid's highest-y row.
pub fn write_density_pgm(h: &Heatmap, mut w: impl Write) -> Result<()> {
    let (rows, cols) = (h.rows(), h.cols());
    write!(w, "P5\n{cols} {rows}\n255\n")?;
    let mut pixels = Vec::with_capacity(rows * cols);
    for r in (0..rows).rev() {
        for c in 0..cols {
            let d = h.density[r * cols + c].clamp(0.0, 1.0);
            pixels.push((d * 255.0).round() as u8);
        }
    }
    w.write_all(&pixels)?;
    Ok(())
}
