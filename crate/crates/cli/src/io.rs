use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use trajprior::ingest::{parse_centerlines, parse_polylines, Format, PolylineFile};
use trajprior::tensor_io::TensorFile;
use trajprior::{CenterlineMap, GridSpec, TrajectorySet};

use super::args::GridArgs;
use super::{CliError, CliResult};

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn context(path: &Path) -> impl Fn(trajprior::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

pub fn resolve_format(path: &Path, flag: Option<&str>) -> CliResult<Format> {
    match flag {
        Some(f) => Ok(f.parse()?),
        None => match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Ok(Format::Csv),
            _ => Ok(Format::Jsonl),
        },
    }
}

pub fn read_polylines(path: &Path, format: Option<&str>) -> CliResult<PolylineFile> {
    let format = resolve_format(path, format)?;
    parse_polylines(open(path)?, format).map_err(context(path))
}

pub fn read_trajectories(path: &Path, format: Option<&str>) -> CliResult<TrajectorySet> {
    let file = read_polylines(path, format)?;
    Ok(TrajectorySet::new(
        file.frame_id.unwrap_or_default(),
        file.centerline_count.unwrap_or(0),
        file.polylines,
    ))
}

pub fn read_centerlines(path: &Path, spec: GridSpec) -> CliResult<CenterlineMap> {
    parse_centerlines(open(path)?, spec).map_err(context(path))
}

pub fn read_tensor(path: &Path) -> CliResult<TensorFile> {
    TensorFile::read_from(open(path)?).map_err(context(path))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Runs `body` against a buffered writer for `path` and flushes it.
pub fn write_with(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> trajprior::Result<()>,
) -> CliResult {
    let mut w = create(path)?;
    body(&mut w).map_err(context(path))?;
    w.flush()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn write_tensor(path: &Path, file: &TensorFile) -> CliResult {
    write_with(path, |w| file.write_to(w))
}

fn parse_list(raw: &str, what: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("{what}: cannot parse {s:?} as a number")))
        })
        .collect()
}

pub fn parse_grid(args: &GridArgs) -> CliResult<GridSpec> {
    let roi = parse_list(&args.roi, "--roi")?;
    let [x0, x1, y0, y1] = roi[..] else {
        return Err(CliError::Input(format!(
            "--roi expects x0,x1,y0,y1, got {:?}",
            args.roi
        )));
    };
    let cell = parse_list(&args.cell, "--cell")?;
    let (dx, dy) = match cell[..] {
        [d] => (d, d),
        [dx, dy] => (dx, dy),
        _ => {
            return Err(CliError::Input(format!(
                "--cell expects DX or DX,DY, got {:?}",
                args.cell
            )))
        }
    };
    Ok(GridSpec::new(x0, x1, y0, y1, dx, dy)?)
}
