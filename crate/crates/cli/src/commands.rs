use std::path::{Path, PathBuf};

use serde::Serialize;
use trajprior::eval::{ae_dist, ae_type, prior_iou, sample_polylines};
use trajprior::fusion::gradcheck::{check_gradients, GradCheckReport};
use trajprior::fusion::{align_and_fuse, AlignmentParams};
use trajprior::ingest::{
    filter_by_length, retention_check, smooth_set, synth_scene, write_centerlines,
    write_trajectories, Format, IngestConfig,
};
use trajprior::raster::{
    heatmap_to_feature, rasterize_trajectories, rasterize_trajectories_with, DirectionFold,
};
use trajprior::select::{fps, fps_from, kmeans, resample, KMeansConfig};
use trajprior::tensor_io::{
    feature_from_file, feature_to_file, heatmap_to_file, write_density_pgm,
};
use trajprior::{Point2, Trajectory, TrajectorySet};

use super::args::*;
use super::io::*;
use super::{CliError, CliResult};

/// Gradient checks fail above this relative error.
const GRAD_TOLERANCE: f64 = 1e-4;

pub fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Rasterize(a) => rasterize(a),
        Command::Cluster(a) => cluster(a),
        Command::Sample(a) => sample(a),
        Command::Fuse(a) => fuse(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
        Command::FusionFixture(a) => fixture(a),
    }
}

fn ingest(a: &IngestArgs) -> CliResult {
    let cfg = IngestConfig {
        min_length_m: a.min_length,
        smooth_window: a.smooth_window,
        retention_ratio: a.retention_ratio,
    };
    cfg.validate()?;
    let raw = read_trajectories(&a.input, a.format.as_deref())?;
    let kept = smooth_set(&filter_by_length(&raw, &cfg), &cfg);
    write_with(&a.out, |w| write_trajectories(&kept, w, Format::Jsonl))?;
    let retained = retention_check(&kept, &cfg);
    println!("frame: {}", kept.frame_id);
    println!("trajectories read: {}", raw.len());
    println!(
        "trajectories kept: {} (min length {} m)",
        kept.len(),
        cfg.min_length_m
    );
    println!("centerlines: {}", kept.centerline_count);
    println!(
        "retained: {} (needs more than {} trajectories)",
        if retained { "yes" } else { "no" },
        cfg.retention_ratio * kept.centerline_count as f64
    );
    Ok(())
}

fn rasterize(a: &RasterizeArgs) -> CliResult {
    let spec = parse_grid(&a.grid)?;
    let fold: DirectionFold = a.direction.parse()?;
    let set = read_trajectories(&a.input, a.format.as_deref())?;
    if set.is_empty() {
        eprintln!(
            "warning: {} holds no trajectories; writing an empty heatmap",
            a.input.display()
        );
    }
    let heat = rasterize_trajectories_with(&set, &spec, fold)?;
    write_tensor(&a.out, &heatmap_to_file(&heat))?;
    if let Some(path) = &a.pgm {
        write_with(path, |w| write_density_pgm(&heat, w))?;
    }
    println!(
        "heatmap {}x{} from {} trajectories, max count {}",
        heat.rows(),
        heat.cols(),
        set.len(),
        heat.n_max
    );
    Ok(())
}

type Coords = Vec<[f64; 2]>;

fn coords(points: &[Point2]) -> Coords {
    points.iter().map(|&p| p.into()).collect()
}

#[derive(Serialize)]
struct Query {
    id: String,
    points: Coords,
}

#[derive(Serialize)]
struct QuerySeeds {
    source: &'static str,
    frame_id: String,
    resample: usize,
    queries: Vec<Query>,
}

#[derive(Serialize)]
struct ClusterReport {
    k: usize,
    resample: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    iterations: usize,
    converged: bool,
    inertia: f64,
    inertia_trace: Vec<f64>,
    assignment: Vec<usize>,
    centers: Vec<Coords>,
}

fn cluster(a: &ClusterArgs) -> CliResult {
    let set = read_trajectories(&a.input, a.format.as_deref())?;
    let cfg = KMeansConfig {
        k: a.k,
        resample: a.resample,
        max_iter: a.max_iter,
        tol: a.tol,
        seed: a.seed,
    };
    let res = kmeans(&set, &cfg)?;
    let centers: Vec<Coords> = res.centers.iter().map(|c| coords(c.points())).collect();
    if let Some(path) = &a.queries {
        let queries = centers
            .iter()
            .enumerate()
            .map(|(i, c)| Query {
                id: format!("center{i}"),
                points: c.clone(),
            })
            .collect();
        write_json(
            path,
            &QuerySeeds {
                source: "kmeans",
                frame_id: set.frame_id.clone(),
                resample: a.resample,
                queries,
            },
        )?;
    }
    println!(
        "k={} over {} trajectories: inertia {} after {} iterations ({})",
        a.k,
        set.len(),
        res.inertia,
        res.iterations,
        if res.converged {
            "converged"
        } else {
            "iteration cap reached"
        }
    );
    write_json(
        &a.out,
        &ClusterReport {
            k: a.k,
            resample: a.resample,
            tol: a.tol,
            max_iter: a.max_iter,
            seed: a.seed,
            iterations: res.iterations,
            converged: res.converged,
            inertia: res.inertia,
            inertia_trace: res.inertia_trace,
            assignment: res.assignment,
            centers,
        },
    )
}

#[derive(Serialize)]
struct SampleReport {
    count: usize,
    seed: u64,
    start_index: usize,
    indices: Vec<usize>,
    ids: Vec<String>,
    min_dists: Vec<f64>,
}

fn sample(a: &SampleArgs) -> CliResult {
    let set = read_trajectories(&a.input, a.format.as_deref())?;
    let res = match a.start_index {
        Some(start) => fps_from(&set, a.count, start)?,
        None => fps(&set, a.count, a.seed)?,
    };
    let picked: Vec<&Trajectory> = res.indices.iter().map(|&i| &set.trajectories[i]).collect();
    if let Some(path) = &a.queries {
        let queries = picked
            .iter()
            .map(|t| {
                Ok(Query {
                    id: t.id.clone(),
                    points: coords(resample(t, a.resample)?.points()),
                })
            })
            .collect::<trajprior::Result<_>>()?;
        write_json(
            path,
            &QuerySeeds {
                source: "fps",
                frame_id: set.frame_id.clone(),
                resample: a.resample,
                queries,
            },
        )?;
    }
    println!(
        "selected {} of {} trajectories",
        res.indices.len(),
        set.len()
    );
    write_json(
        &a.out,
        &SampleReport {
            count: a.count,
            seed: a.seed,
            start_index: res.indices[0],
            ids: picked.iter().map(|t| t.id.clone()).collect(),
            indices: res.indices,
            min_dists: res.min_dists,
        },
    )
}

#[derive(Serialize)]
struct Stats {
    mean: f64,
    min: f64,
    max: f64,
}

impl Stats {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Stats {
        let n = values.clone().count().max(1) as f64;
        Stats {
            mean: values.clone().sum::<f64>() / n,
            min: values.clone().fold(f64::INFINITY, f64::min),
            max: values.fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Serialize)]
struct FuseReport {
    rows: usize,
    cols: usize,
    channels: usize,
    offset_row: Stats,
    offset_col: Stats,
    offset_max_abs: f64,
    alpha: Stats,
    grad_check: Option<GradCheckSummary>,
}

#[derive(Serialize)]
struct GradCheckSummary {
    seed: u64,
    instances: u64,
    per_kernel: GradCheckReport,
    max_relative_error: f64,
    tolerance: f64,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn fuse(a: &FuseArgs) -> CliResult {
    let bev = feature_from_file(&read_tensor(&a.bev)?)?;
    let prior = feature_from_file(&read_tensor(&a.prior)?)?;
    bev.check_same_shape(&prior, "bev vs prior")?;
    let params = AlignmentParams::from_file(&read_tensor(&a.params)?)?;
    if params.channels() != bev.channels() {
        return Err(CliError::Input(format!(
            "parameters expect {} channels per branch, features have {}",
            params.channels(),
            bev.channels()
        )));
    }
    let out = align_and_fuse(&bev, &prior, &params)?;
    write_tensor(&a.out, &feature_to_file(&out.fused))?;

    let offs = out.offsets.as_slice();
    let grad_check = a.check_grads.then(|| {
        let per_kernel = (0..a.grad_instances)
            .map(|i| check_gradients(a.seed.wrapping_add(i), bev.channels()))
            .fold(GradCheckReport::default(), GradCheckReport::merge);
        GradCheckSummary {
            seed: a.seed,
            instances: a.grad_instances,
            max_relative_error: per_kernel.max(),
            per_kernel,
            tolerance: GRAD_TOLERANCE,
        }
    });
    let report = FuseReport {
        rows: bev.rows(),
        cols: bev.cols(),
        channels: bev.channels(),
        offset_row: Stats::of(offs.iter().step_by(2).copied()),
        offset_col: Stats::of(offs.iter().skip(1).step_by(2).copied()),
        offset_max_abs: offs.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        alpha: Stats::of(out.alpha.iter().copied()),
        grad_check,
    };
    write_json(
        &a.report.clone().unwrap_or_else(|| sidecar_path(&a.out)),
        &report,
    )?;
    println!(
        "fused {}x{}x{}, mean alpha {}",
        report.rows, report.cols, report.channels, report.alpha.mean
    );
    if let Some(g) = &report.grad_check {
        println!("max relative gradient error: {:.3e}", g.max_relative_error);
        if g.max_relative_error.is_nan() || g.max_relative_error > GRAD_TOLERANCE {
            return Err(CliError::Verification(format!(
                "gradient check failed: relative error {:.3e} exceeds {GRAD_TOLERANCE:e}",
                g.max_relative_error
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    iou: f64,
    ae_dist: Option<f64>,
    ae_type: Option<f64>,
    pred_polylines: usize,
    gt_polylines: usize,
    width_m: f64,
    step_m: f64,
    rows: usize,
    cols: usize,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn labels(ts: &[Trajectory]) -> Option<Vec<&str>> {
    ts.iter().map(|t| t.label.as_deref()).collect()
}

fn eval(a: &EvalArgs) -> CliResult {
    let spec = parse_grid(&a.grid)?;
    if a.width.is_nan() || a.width <= 0.0 || a.step.is_nan() || a.step <= 0.0 {
        return Err(CliError::Input(
            "--width and --step must be positive".into(),
        ));
    }
    let pred = read_polylines(&a.pred, a.format.as_deref())?.polylines;
    let gt = read_centerlines(&a.gt, spec)?.polylines;
    let iou = prior_iou(&pred, &gt, &spec, a.width)?;
    let ae_dist = if pred.is_empty() || gt.is_empty() {
        eprintln!("warning: distance metric undefined for an empty polyline set");
        None
    } else {
        Some(ae_dist(
            &sample_polylines(&pred, a.step)?,
            &sample_polylines(&gt, a.step)?,
        )?)
    };
    let ae_type = match (labels(&pred), labels(&gt)) {
        (Some(p), Some(g)) if !(p.is_empty() && g.is_empty()) => Some(ae_type(&p, &g)?),
        _ => None,
    };
    let report = EvalReport {
        iou,
        ae_dist,
        ae_type,
        pred_polylines: pred.len(),
        gt_polylines: gt.len(),
        width_m: a.width,
        step_m: a.step,
        rows: spec.rows(),
        cols: spec.cols(),
    };
    write_json(&a.out, &report)?;
    if let Some(path) = &a.csv {
        write_with(path, |w| {
            use std::io::Write;
            writeln!(
                w,
                "iou,ae_dist,ae_type,pred_polylines,gt_polylines,width_m,step_m"
            )?;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                iou,
                opt(ae_dist),
                opt(ae_type),
                pred.len(),
                gt.len(),
                a.width,
                a.step
            )?;
            Ok(())
        })?;
    }
    println!(
        "iou {} ae_dist {} ae_type {}",
        iou,
        opt(ae_dist),
        opt(ae_type)
    );
    Ok(())
}

fn synth(a: &SynthArgs) -> CliResult {
    let (set, map) = synth_scene(a.seed, a.lanes, a.per_lane, a.noise)?;
    write_with(&a.out_dir.join("trajectories.jsonl"), |w| {
        write_trajectories(&set, w, Format::Jsonl)
    })?;
    write_with(&a.out_dir.join("centerlines.jsonl"), |w| {
        write_centerlines(&map, &set.frame_id, w)
    })?;
    println!(
        "wrote {} trajectories and {} centerlines to {}",
        set.len(),
        map.polylines.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn fixture(a: &FixtureArgs) -> CliResult {
    let spec = parse_grid(&a.grid)?;
    let (set, map) = synth_scene(a.seed, 4, 10, a.noise)?;
    let lanes = TrajectorySet::new(
        set.frame_id.clone(),
        map.polylines.len(),
        map.polylines.clone(),
    );
    let bev = heatmap_to_feature(&rasterize_trajectories(&lanes, &spec)?);
    let prior = heatmap_to_feature(&rasterize_trajectories(&set, &spec)?);
    let params = AlignmentParams::random(a.seed, bev.channels(), a.hidden)?;
    write_tensor(&a.out_dir.join("bev.tensor"), &feature_to_file(&bev))?;
    write_tensor(&a.out_dir.join("prior.tensor"), &feature_to_file(&prior))?;
    write_tensor(&a.out_dir.join("params.tensor"), &params.to_file())?;
    println!(
        "wrote bev, prior and params tensors ({}x{}x{}) to {}",
        bev.rows(),
        bev.cols(),
        bev.channels(),
        a.out_dir.display()
    );
    Ok(())
}
