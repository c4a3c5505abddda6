use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use segerr::bench::{run_bench, BenchConfig, BenchMethod, DEFAULT_BRUTE_CAP};
use segerr::io::{
    format_metric, read_groups, read_json, read_pred_labels, read_scene, write_json,
    write_labels, write_mask, write_report, write_scene, PlyFormat,
};
use segerr::{
    compute_boundary_mask_with, corrupt_labels, evaluate_scene_with, generate_scene,
    validate_scene, ClassGroups, CorruptionMode, DerrSamples, Error, ErrorKind, EvalConfig,
    MetricsReport, SceneSpec, Workers, DEFAULT_IGNORE_LABEL, DEFAULT_IOU_THRESHOLD,
    DEFAULT_MIN_COMPONENT_SIZE, DEFAULT_RADIUS_M,
};

/// Segmentation error analysis for labeled point clouds.
#[derive(Parser, Debug)]
#[command(name = "segerr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute boundary pseudo-labels of a labeled scene.
    Boundaries {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RADIUS_M)]
        radius: f64,
        /// Mask file, one 0/1 per point.
        #[arg(long)]
        output: PathBuf,
        /// Worker threads (default: all hardware threads).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate a prediction against a labeled scene.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        /// Predicted labels, one integer per line.
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RADIUS_M)]
        radius: f64,
        /// IoU threshold as a fraction.
        #[arg(long = "iou-thresh", default_value_t = DEFAULT_IOU_THRESHOLD)]
        iou_thresh: f64,
        /// JSON object mapping group names to class id lists.
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long = "derr-samples", value_enum, default_value_t = SamplesArg::Class)]
        derr_samples: SamplesArg,
        #[arg(long = "min-component-size", default_value_t = DEFAULT_MIN_COMPONENT_SIZE)]
        min_component_size: usize,
        /// Class count; inferred from the labels when omitted.
        #[arg(long = "num-classes")]
        num_classes: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// Report file (JSON).
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate a synthetic scene, optionally with a corrupted prediction.
    Synth {
        /// Scene spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// region-swap, dilate, erode, merge or speckle.
        #[arg(long, requires_all = ["magnitude", "out_pred"])]
        corrupt: Option<String>,
        /// Corruption size in meters.
        #[arg(long, requires = "corrupt")]
        magnitude: Option<f64>,
        /// Corruption seed.
        #[arg(long, default_value_t = 0, requires = "corrupt")]
        seed: u64,
        #[arg(long = "out-pred", requires = "corrupt")]
        out_pred: Option<PathBuf>,
        /// Number of speckle patches.
        #[arg(long, requires = "corrupt")]
        patches: Option<usize>,
        /// Write ASCII instead of binary PLY.
        #[arg(long)]
        ascii: bool,
    },
    /// Time boundary computation on a seeded random scene.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_RADIUS_M)]
        radius: f64,
        /// grid, brute, or both separated by a comma.
        #[arg(long, value_delimiter = ',', default_value = "grid")]
        method: Vec<String>,
        #[arg(long, default_value_t = 5)]
        repeat: usize,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The brute method is skipped above this many points.
        #[arg(long = "brute-cap", default_value_t = DEFAULT_BRUTE_CAP)]
        brute_cap: usize,
        /// Results file (JSON array).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplesArg {
    Class,
    Component,
}

fn workers(w: Option<usize>) -> Result<Workers, Error> {
    match w {
        None => Ok(Workers::default()),
        Some(0) => Err(Error::InvalidParameter("--workers must be at least 1".into())),
        Some(w) => Ok(Workers::new(w)),
    }
}

fn check_radius(r: f64) -> Result<(), Error> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("--radius must be positive, got {r}")))
    }
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), format_metric)
}

fn print_summary(report: &MetricsReport) {
    let m = &report.metrics;
    let theta = report.config.iou_threshold;
    println!("mIoU        {}", show(m.miou));
    println!("mAcc        {}", show(m.macc));
    println!("oAcc        {}", show(m.oacc));
    println!("FErr        {}", show(m.ferr));
    println!("MErr        {}", show(m.merr));
    println!("RErr@{theta:<6} {}", show(m.rerr));
    println!("DErr@{theta:<6} {}", show(m.derr));
    for (name, v) in &m.group_iou {
        println!("{:<11} {}", format!("IoU[{name}]"), show(*v));
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Boundaries {
            input,
            radius,
            output,
            workers: w,
        } => {
            check_radius(radius)?;
            let w = workers(w)?;
            let (cloud, labels) = read_scene(&input)?;
            let t = Instant::now();
            let mask = compute_boundary_mask_with(&cloud, &labels, radius, w)?;
            let ms = t.elapsed().as_secs_f64() * 1000.0;
            write_mask(&output, &mask)?;
            println!(
                "points {} boundary {} elapsed_ms {ms:.3}",
                cloud.len(),
                mask.count()
            );
        }
        Command::Eval {
            gt,
            pred,
            radius,
            iou_thresh,
            groups,
            derr_samples,
            min_component_size,
            num_classes,
            workers: w,
            output,
        } => {
            check_radius(radius)?;
            let w = workers(w)?;
            let (cloud, gt_labels) = read_scene(&gt)?;
            let pred_labels = read_pred_labels(&pred, cloud.len(), DEFAULT_IGNORE_LABEL)?;
            let groups = match groups {
                Some(p) => read_groups(p)?,
                None => ClassGroups::default(),
            };
            let inferred = gt_labels
                .max_class_bound()
                .max(pred_labels.max_class_bound())
                .max(1);
            let cfg = EvalConfig {
                radius_m: radius,
                iou_threshold: iou_thresh,
                min_component_size,
                num_classes: num_classes.unwrap_or(inferred),
                ignore_label: DEFAULT_IGNORE_LABEL,
                derr_samples: match derr_samples {
                    SamplesArg::Class => DerrSamples::Class,
                    SamplesArg::Component => DerrSamples::Component,
                },
            };
            let scene = validate_scene(&cloud, &gt_labels, &pred_labels, &cfg)?;
            let report = evaluate_scene_with(&scene, &groups, w)?;
            write_report(&output, &report)?;
            print_summary(&report);
        }
        Command::Synth {
            spec,
            out,
            corrupt,
            magnitude,
            seed,
            out_pred,
            patches,
            ascii,
        } => {
            let spec: SceneSpec = read_json(&spec)?;
            let (cloud, labels) = generate_scene(&spec)?;
            let format = if ascii {
                PlyFormat::Ascii
            } else {
                PlyFormat::BinaryLittleEndian
            };
            write_scene(&out, &cloud, &labels, format)?;
            println!(
                "points {} classes {}",
                cloud.len(),
                labels.max_class_bound()
            );
            if let (Some(mode), Some(magnitude), Some(out_pred)) = (corrupt, magnitude, out_pred) {
                let mut mode: CorruptionMode = mode.parse()?;
                match (&mut mode, patches) {
                    (CorruptionMode::Speckle { patches: p }, Some(k)) => *p = k,
                    (_, Some(_)) => {
                        return Err(Error::InvalidParameter(
                            "--patches only applies to speckle".into(),
                        ))
                    }
                    _ => {}
                }
                let pred = corrupt_labels(&labels, &cloud, mode, magnitude, seed)?;
                write_labels(&out_pred, pred.labels())?;
                let changed = pred
                    .labels()
                    .iter()
                    .zip(labels.labels())
                    .filter(|(a, b)| a != b)
                    .count();
                println!("changed {changed}");
            }
        }
        Command::Bench {
            n,
            radius,
            method,
            repeat,
            workers: w,
            seed,
            brute_cap,
            out,
        } => {
            check_radius(radius)?;
            let methods = method
                .iter()
                .map(|m| m.parse::<BenchMethod>())
                .collect::<Result<Vec<_>, _>>()?;
            let mut cfg = BenchConfig::new(n, radius, repeat);
            cfg.workers = workers(w)?;
            cfg.seed = seed;
            cfg.brute_cap = brute_cap;
            let results = run_bench(&cfg, &methods)?;
            for m in &methods {
                if !results.iter().any(|r| r.method == *m) {
                    eprintln!("skipped {m}: {n} points exceeds --brute-cap {brute_cap}");
                }
            }
            for r in &results {
                println!(
                    "{} points {} mean_ms {:.3} median_ms {:.3} throughput {:.0}",
                    r.method, r.points, r.mean_ms, r.median_ms, r.throughput_points_per_s
                );
            }
            write_json(&out, &results)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 1,
                ErrorKind::Io => 2,
                ErrorKind::Internal => 3,
            })
        }
    }
}
