//! Timing harness for boundary pseudo-label computation: grid versus the
//! quadratic scan, on seeded random-blob scenes of fixed point density.
//!
//! Before anything is timed, both methods must produce identical masks on a
//! smaller scene of the same kind.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boundary::{compute_boundary_mask_brute, compute_boundary_mask_with};
use crate::error::{Error, Result};
use crate::parallel::Workers;
use crate::synth::{generate_scene, SceneSpec};
use crate::types::{LabelField, PointCloud};

/// Points per cubic metre in bench scenes.
pub const BENCH_DENSITY: f64 = 30_000.0;
/// Size of the scene used for the oracle-equality gate.
pub const ORACLE_GATE_N: usize = 5_000;
pub const DEFAULT_BRUTE_CAP: usize = 200_000;
pub const MIN_REPETITIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMethod {
    Grid,
    Brute,
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMethod::Grid => "grid",
            BenchMethod::Brute => "brute",
        })
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(BenchMethod::Grid),
            "brute" => Ok(BenchMethod::Brute),
            _ => Err(Error::InvalidParameter(format!(
                "unknown bench method {s:?} (expected grid or brute)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n: usize,
    pub radius: f64,
    pub repetitions: usize,
    pub workers: Workers,
    pub seed: u64,
    /// The quadratic method is skipped for larger scenes.
    pub brute_cap: usize,
}

impl BenchConfig {
    pub fn new(n: usize, radius: f64, repetitions: usize) -> Self {
        Self {
            n,
            radius,
            repetitions,
            workers: Workers::default(),
            seed: 0,
            brute_cap: DEFAULT_BRUTE_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("bench needs at least one point".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if self.repetitions < MIN_REPETITIONS {
            return Err(Error::InvalidParameter(format!(
                "at least {MIN_REPETITIONS} repetitions are required, got {}",
                self.repetitions
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchResult {
    pub method: BenchMethod,
    pub points: usize,
    pub radius_m: f64,
    pub workers: usize,
    pub repetitions: usize,
    pub times_ms: Vec<f64>,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub throughput_points_per_s: f64,
}

impl BenchResult {
    fn from_times(method: BenchMethod, cfg: &BenchConfig, times_ms: Vec<f64>) -> Self {
        let mean_ms = times_ms.iter().sum::<f64>() / times_ms.len() as f64;
        let mut sorted = times_ms.clone();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median_ms = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        Self {
            method,
            points: cfg.n,
            radius_m: cfg.radius,
            workers: cfg.workers.effective(),
            repetitions: times_ms.len(),
            times_ms,
            mean_ms,
            median_ms,
            throughput_points_per_s: cfg.n as f64 / (mean_ms / 1000.0),
        }
    }
}

/// Seeded random-blob scene of `n` points in a cube sized for
/// [`BENCH_DENSITY`].
pub fn bench_scene(n: usize, seed: u64) -> Result<(PointCloud, LabelField)> {
    let extent = (n as f64 / BENCH_DENSITY).cbrt();
    generate_scene(&SceneSpec::random_blobs(n, extent, seed))
}

fn run_method(
    method: BenchMethod,
    cloud: &PointCloud,
    labels: &LabelField,
    r: f64,
    workers: Workers,
) -> Result<crate::types::BoundaryMask> {
    match method {
        BenchMethod::Grid => compute_boundary_mask_with(cloud, labels, r, workers),
        BenchMethod::Brute => compute_boundary_mask_brute(cloud, labels, r, workers),
    }
}

/// Fails with an internal error if grid and quadratic masks differ on a
/// gate scene of `min(n, ORACLE_GATE_N)` points.
pub fn oracle_gate(n: usize, r: f64, seed: u64, workers: Workers) -> Result<()> {
    let (cloud, labels) = bench_scene(n.min(ORACLE_GATE_N), seed)?;
    let grid = compute_boundary_mask_with(&cloud, &labels, r, workers)?;
    let brute = compute_boundary_mask_brute(&cloud, &labels, r, workers)?;
    if grid != brute {
        return Err(Error::Internal(format!(
            "grid and quadratic boundary masks differ on the {}-point gate scene",
            cloud.len()
        )));
    }
    Ok(())
}

/// Times each requested method: one untimed warm-up, then
/// `cfg.repetitions` timed runs. The quadratic method is left out when
/// `cfg.n` exceeds `cfg.brute_cap`.
pub fn run_bench(cfg: &BenchConfig, methods: &[BenchMethod]) -> Result<Vec<BenchResult>> {
    cfg.validate()?;
    oracle_gate(cfg.n, cfg.radius, cfg.seed, cfg.workers)?;
    let (cloud, labels) = bench_scene(cfg.n, cfg.seed)?;
    let mut out = Vec::new();
    for &method in methods {
        if method == BenchMethod::Brute && cfg.n > cfg.brute_cap {
            continue;
        }
        run_method(method, &cloud, &labels, cfg.radius, cfg.workers)?;
        let mut times = Vec::with_capacity(cfg.repetitions);
        for _ in 0..cfg.repetitions {
            let t = Instant::now();
            let mask = run_method(method, &cloud, &labels, cfg.radius, cfg.workers)?;
            times.push(t.elapsed().as_secs_f64() * 1000.0);
            std::hint::black_box(mask);
        }
        out.push(BenchResult::from_times(method, cfg, times));
    }
    Ok(out)
}
