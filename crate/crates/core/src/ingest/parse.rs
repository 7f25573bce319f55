//! Trajectory and centerline file formats.
//!
//! JSONL: an optional first-line header `{"frame_id": str, "centerline_count": int}`
//! followed by one polyline per line, `{"id": str, "points": [[x, y], ...]}`.
//! Centerline files use the key `"centerlines"` in place of `"points"`. An
//! optional `"label"` field carries a discrete attribute.
//!
//! CSV: columns `traj_id,seq,x,y` (header row optional), rows grouped by
//! `traj_id` and ordered by strictly increasing `seq`.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::grid::GridSpec;
use crate::trajectory::{CenterlineMap, Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(Error::invalid(format!(
                "unknown format {other:?} (expected jsonl or csv)"
            ))),
        }
    }
}

/// Polylines read from a file together with the optional header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineFile {
    pub frame_id: Option<String>,
    pub centerline_count: Option<usize>,
    pub polylines: Vec<Trajectory>,
}

#[derive(Deserialize)]
struct JsonLine {
    id: Option<String>,
    points: Option<Vec<[f64; 2]>>,
    centerlines: Option<Vec<[f64; 2]>>,
    label: Option<serde_json::Value>,
    frame_id: Option<String>,
    centerline_count: Option<usize>,
}

#[derive(Serialize)]
struct HeaderOut<'a> {
    frame_id: &'a str,
    centerline_count: usize,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    centerlines: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn build(id: String, pts: Vec<[f64; 2]>, line: usize) -> Result<Trajectory> {
    if pts.len() < 2 {
        return Err(parse_err(line, "trajectory shorter than 2 points"));
    }
    let points: Vec<Point2> = pts.into_iter().map(Point2::from).collect();
    Trajectory::new(id, points).map_err(|e| parse_err(line, e.to_string()))
}

fn parse_jsonl(reader: impl BufRead) -> Result<PolylineFile> {
    let mut out = PolylineFile {
        frame_id: None,
        centerline_count: None,
        polylines: Vec::new(),
    };
    let mut seen_record = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonLine =
            serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
        let coords = match (rec.points, rec.centerlines) {
            (Some(_), Some(_)) => {
                return Err(parse_err(
                    lineno,
                    "record has both \"points\" and \"centerlines\"",
                ))
            }
            (Some(p), None) | (None, Some(p)) => Some(p),
            (None, None) => None,
        };
        let Some(coords) = coords else {
            if seen_record || out.frame_id.is_some() || out.centerline_count.is_some() {
                return Err(parse_err(lineno, "record without \"points\""));
            }
            if rec.frame_id.is_none() && rec.centerline_count.is_none() {
                return Err(parse_err(lineno, "record without \"points\""));
            }
            out.frame_id = rec.frame_id;
            out.centerline_count = rec.centerline_count;
            seen_record = true;
            continue;
        };
        seen_record = true;
        let id = rec.id.unwrap_or_else(|| out.polylines.len().to_string());
        let label = rec.label.map(|v| match v {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        });
        out.polylines
            .push(build(id, coords, lineno)?.with_label(label));
    }
    Ok(out)
}

fn parse_csv(reader: impl BufRead) -> Result<PolylineFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    struct Group {
        id: String,
        line: usize,
        last_seq: i64,
        pts: Vec<[f64; 2]>,
    }

    let mut polylines = Vec::new();
    let mut finished: HashSet<String> = HashSet::new();
    let mut current: Option<Group> = None;

    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
            parse_err(line, e.to_string())
        })?;
        let lineno = rec.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        if idx == 0 && rec.get(0) == Some("traj_id") {
            continue;
        }
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != 4 {
            return Err(parse_err(
                lineno,
                format!("expected 4 columns (traj_id,seq,x,y), found {}", rec.len()),
            ));
        }
        let id = rec[0].to_string();
        let seq: i64 = rec[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad seq {:?}", &rec[1])))?;
        let x: f64 = rec[2]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad x {:?}", &rec[2])))?;
        let y: f64 = rec[3]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad y {:?}", &rec[3])))?;

        match current.as_mut() {
            Some(g) if g.id == id => {
                if seq <= g.last_seq {
                    return Err(parse_err(
                        lineno,
                        format!("seq {seq} does not increase for trajectory {id:?}"),
                    ));
                }
                g.last_seq = seq;
                g.pts.push([x, y]);
            }
            _ => {
                if finished.contains(&id) {
                    return Err(parse_err(
                        lineno,
                        format!("rows for trajectory {id:?} are not contiguous"),
                    ));
                }
                if let Some(g) = current.take() {
                    finished.insert(g.id.clone());
                    polylines.push(build(g.id, g.pts, g.line)?);
                }
                current = Some(Group {
                    id,
                    line: lineno,
                    last_seq: seq,
                    pts: vec![[x, y]],
                });
            }
        }
    }
    if let Some(g) = current.take() {
        polylines.push(build(g.id, g.pts, g.line)?);
    }
    Ok(PolylineFile {
        frame_id: None,
        centerline_count: None,
        polylines,
    })
}

/// Read polylines in either format without interpreting them.
pub fn parse_polylines(reader: impl BufRead, format: Format) -> Result<PolylineFile> {
    match format {
        Format::Jsonl => parse_jsonl(reader),
        Format::Csv => parse_csv(reader),
    }
}

/// Parse a trajectory file. Missing header fields default to frame `"unknown"`
/// and zero centerlines.
pub fn parse_trajectories(reader: impl BufRead, format: Format) -> Result<TrajectorySet> {
    let file = parse_polylines(reader, format)?;
    Ok(TrajectorySet::new(
        file.frame_id.unwrap_or_default(),
        file.centerline_count.unwrap_or(0),
        file.polylines,
    ))
}

pub fn parse_centerlines(reader: impl BufRead, spec: GridSpec) -> Result<CenterlineMap> {
    let file = parse_jsonl(reader)?;
    Ok(CenterlineMap::new(spec, file.polylines))
}

fn coords(t: &Trajectory) -> Vec<[f64; 2]> {
    t.points().iter().map(|&p| p.into()).collect()
}

fn write_header(w: &mut impl Write, frame_id: &str, centerline_count: usize) -> Result<()> {
    serde_json::to_writer(
        &mut *w,
        &HeaderOut {
            frame_id,
            centerline_count,
        },
    )
    .map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_trajectories(set: &TrajectorySet, mut w: impl Write, format: Format) -> Result<()> {
    match format {
        Format::Jsonl => {
            write_header(&mut w, &set.frame_id, set.centerline_count)?;
            for t in &set.trajectories {
                let rec = RecordOut {
                    id: &t.id,
                    points: Some(coords(t)),
                    centerlines: None,
                    label: t.label.as_deref(),
                };
                serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(["traj_id", "seq", "x", "y"])
                .map_err(csv_io)?;
            for t in &set.trajectories {
                for (seq, p) in t.points().iter().enumerate() {
                    csv.write_record([
                        t.id.clone(),
                        seq.to_string(),
                        p.x.to_string(),
                        p.y.to_string(),
                    ])
                    .map_err(csv_io)?;
                }
            }
            csv.flush()?;
        }
    }
    Ok(())
}

pub fn write_centerlines(map: &CenterlineMap, frame_id: &str, mut w: impl Write) -> Result<()> {
    write_header(&mut w, frame_id, map.polylines.len())?;
    for t in &map.polylines {
        let rec = RecordOut {
            id: &t.id,
            points: None,
            centerlines: Some(coords(t)),
            label: t.label.as_deref(),
        };
        serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}
