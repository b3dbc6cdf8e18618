//! One function per subcommand. Each writes its files under `cfg.out_dir` and
//! returns the computed results so callers (and tests) can inspect them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use ks_core::{
    density_from_slices, evolve, growth_rate, lyapunov1, mode_table, random_initial, track, unstable_modes,
    DensityReport64, LyapunovEstimate64, RealField64, SolverParams64, SpectralField64, Tracking64, Trajectory64,
};
use num_complex::Complex;
use rayon::prelude::*;

use crate::config::{InitialData, RunConfig};
use crate::output::{self, LinearCheckRow, SweepRun, SweepSummary};
use crate::render::{self, HeatmapSpec, Image};
use crate::trajfile;

pub const TRAJECTORY_FILE: &str = "trajectory.kstraj";

fn ensure_out_dir(cfg: &RunConfig) -> anyhow::Result<()> {
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))
}

fn write_image(cfg: &RunConfig, name: &str, img: &Image) -> anyhow::Result<PathBuf> {
    let path = cfg.path(name);
    fs::write(&path, img.to_ppm(&cfg.to_text())).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn initial_field(cfg: &RunConfig) -> anyhow::Result<RealField64> {
    let grid = cfg.grid()?;
    Ok(match cfg.initial {
        InitialData::Random => random_initial(&grid, cfg.seed),
        InitialData::Zero => RealField64::zeros(grid),
    })
}

pub fn run(cfg: &RunConfig) -> anyhow::Result<Trajectory64> {
    Ok(evolve(&initial_field(cfg)?, &cfg.solver_params()?)?)
}

pub fn heatmap_spec(cfg: &RunConfig) -> HeatmapSpec {
    HeatmapSpec {
        scale: (cfg.color_scale > 0.0).then_some(cfg.color_scale),
        width: (cfg.image_width > 0).then_some(cfg.image_width),
        height: (cfg.image_height > 0).then_some(cfg.image_height),
        overlay: false,
    }
}

/// Plain heatmap, or the stripe overlay when `mask` is given.
pub fn heatmap(cfg: &RunConfig, traj: &Trajectory64, mask: Option<&[Vec<bool>]>) -> Image {
    let rows: Vec<&[f64]> = traj.snapshots().iter().map(|s| s.values()).collect();
    let spec = HeatmapSpec {
        overlay: mask.is_some(),
        ..heatmap_spec(cfg)
    };
    render::heatmap(&rows, &spec, mask)
}

#[derive(Debug)]
pub struct SimulateReport {
    pub trajectory: Trajectory64,
    pub trajectory_path: PathBuf,
    pub heatmap_path: PathBuf,
}

/// Writes `trajectory.kstraj` and `heatmap.ppm`, plus `trajectory.csv`
/// with `csv_export`.
pub fn simulate(cfg: &RunConfig, csv_export: bool) -> anyhow::Result<SimulateReport> {
    ensure_out_dir(cfg)?;
    let trajectory = run(cfg)?;
    let trajectory_path = cfg.path(TRAJECTORY_FILE);
    trajfile::write(&trajectory_path, cfg, &trajectory)?;
    if csv_export {
        output::trajectory_csv(cfg, &trajectory).write(&cfg.path("trajectory.csv"))?;
    }
    let heatmap_path = write_image(cfg, "heatmap.ppm", &heatmap(cfg, &trajectory, None))?;
    Ok(SimulateReport {
        trajectory,
        trajectory_path,
        heatmap_path,
    })
}

#[derive(Debug)]
pub struct StripesReport {
    pub tracking: Tracking64,
    pub density: DensityReport64,
}

/// Stripe analysis of a saved trajectory. The run parameters come from the
/// file; the analysis and output settings come from `cfg`.
pub fn stripes(cfg: &RunConfig, trajectory_path: &Path) -> anyhow::Result<StripesReport> {
    let (header, traj) =
        trajfile::read(trajectory_path).with_context(|| format!("reading {}", trajectory_path.display()))?;
    let recorded = header.config().context("config embedded in trajectory file")?;
    let cfg = &RunConfig {
        sigma: cfg.sigma,
        t_transient: cfg.t_transient,
        min_stripe_width: cfg.min_stripe_width,
        image_width: cfg.image_width,
        image_height: cfg.image_height,
        color_scale: cfg.color_scale,
        out_dir: cfg.out_dir.clone(),
        ..recorded
    };
    ensure_out_dir(cfg)?;
    let opts = cfg.stripe_options();
    let tracking = track(&traj, &opts)?;
    let density = density_from_slices(traj.grid().length(), &tracking.slices, &opts)?;

    output::events_csv(cfg, &tracking.events).write(&cfg.path("events.csv"))?;
    output::density_csv(cfg, &density).write(&cfg.path("density.csv"))?;
    output::stripe_summary_csv(cfg, &density, &tracking.transient, &tracking.settled)
        .write(&cfg.path("stripe_summary.csv"))?;
    let mask: Vec<Vec<bool>> = tracking.slices.iter().map(|s| s.mask()).collect();
    write_image(cfg, "stripes_overlay.ppm", &heatmap(cfg, &traj, Some(&mask)))?;
    write_image(cfg, "stripe_mask.ppm", &render::mask_image(&mask))?;
    let mask_path = cfg.path("stripe_mask.bin");
    fs::write(&mask_path, trajfile::encode_mask(cfg, &mask))
        .with_context(|| format!("writing {}", mask_path.display()))?;
    Ok(StripesReport { tracking, density })
}

/// Modes checked by `linear-check`: every unstable mode plus the two next
/// stable ones (at least `n = 1, 2`), kept inside the dealiased band.
pub fn linear_check_modes(cfg: &RunConfig) -> anyhow::Result<Vec<i64>> {
    let grid = cfg.grid()?;
    let top = unstable_modes(&grid).iter().map(|m| m.n.abs()).max().unwrap_or(0);
    Ok((1..=(top + 2)).filter(|&n| n <= grid.dealias_cutoff()).collect())
}

pub fn linear_check_rows(cfg: &RunConfig) -> anyhow::Result<Vec<LinearCheckRow>> {
    let grid = cfg.grid()?;
    let mut rows = Vec::new();
    for n in linear_check_modes(cfg)? {
        let k = grid.wavenumber(n);
        let theory = growth_rate(k);
        // keep fast-decaying modes well above underflow
        let mut steps = (cfg.linear_time / cfg.dt).round() as usize;
        if theory < 0.0 {
            steps = steps.min((30.0 / (-theory * cfg.dt)).floor() as usize);
        }
        let steps = steps.max(1);
        let t = steps as f64 * cfg.dt;
        let params = SolverParams64::new(grid.clone(), cfg.dt, t, steps)?;
        let u0 = SpectralField64::single_mode(grid.clone(), n, Complex::new(cfg.linear_amplitude, 0.0))?;
        let a0 = u0.mode(n).norm();
        let end = evolve(&u0.to_real(), &params)?
            .last()
            .ok_or_else(|| anyhow!("empty trajectory"))?
            .to_spectral();
        let measured = (end.mode(n).norm() / a0).ln() / t;
        let abs_err = (measured - theory).abs();
        rows.push(LinearCheckRow {
            n,
            k,
            theory,
            measured,
            rel_err: if theory != 0.0 { abs_err / theory.abs() } else { f64::NAN },
            abs_err,
        });
    }
    Ok(rows)
}

impl LinearCheckRow {
    /// 1% relative for growing modes; 1e-3 absolute (or 1% relative) otherwise.
    pub fn within_tolerance(&self) -> bool {
        if self.theory > 0.0 {
            self.rel_err <= 0.01
        } else {
            self.abs_err <= 1e-3 || self.rel_err <= 0.01
        }
    }
}

/// Writes `linear_check.csv`.
pub fn linear_check(cfg: &RunConfig) -> anyhow::Result<Vec<LinearCheckRow>> {
    ensure_out_dir(cfg)?;
    let rows = linear_check_rows(cfg)?;
    output::linear_check_csv(cfg, &rows).write(&cfg.path("linear_check.csv"))?;
    Ok(rows)
}

#[derive(Debug)]
pub struct SweepFailure {
    pub length: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
    pub summary: Vec<SweepSummary>,
    pub failures: Vec<SweepFailure>,
}

fn sweep_one(cfg: &RunConfig, length: f64, seed: u64) -> anyhow::Result<SweepRun> {
    let run_cfg = RunConfig {
        seed,
        ..cfg.with_length(length)
    };
    let traj = run(&run_cfg)?;
    let report = ks_core::density(&traj, &run_cfg.stripe_options())?;
    Ok(SweepRun {
        length,
        points: run_cfg.points,
        seed,
        density: report.density,
        mean_count: report.mean_count,
    })
}

/// Density for every `(length, seed)` pair, run on `jobs` threads (0 = all
/// cores). Failed runs are reported, not fatal. Writes `sweep_runs.csv` and
/// `sweep_summary.csv`.
pub fn density_sweep(cfg: &RunConfig, jobs: usize) -> anyhow::Result<SweepReport> {
    ensure_out_dir(cfg)?;
    let pairs: Vec<(f64, u64)> = cfg
        .sweep_lengths_pi
        .iter()
        .flat_map(|&l| cfg.sweep_seeds.iter().map(move |&s| (l * std::f64::consts::PI, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<_> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(l, s)| (l, s, sweep_one(cfg, l, s)))
            .collect()
    });
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (length, seed, r) in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => failures.push(SweepFailure {
                length,
                seed,
                error: format!("{e:#}"),
            }),
        }
    }
    let summary = output::summarize(&runs);
    output::sweep_runs_csv(cfg, &runs).write(&cfg.path("sweep_runs.csv"))?;
    output::sweep_summary_csv(cfg, &summary).write(&cfg.path("sweep_summary.csv"))?;
    Ok(SweepReport {
        runs,
        summary,
        failures,
    })
}

/// Leading exponent over `[t_transient, t_transient + lyapunov_window]`.
/// Writes `lyapunov.csv` and `lyapunov_summary.txt`.
pub fn lyapunov(cfg: &RunConfig) -> anyhow::Result<LyapunovEstimate64> {
    ensure_out_dir(cfg)?;
    let mut params = SolverParams64::new(cfg.grid()?, cfg.dt, cfg.t_transient + cfg.lyapunov_window, 1)?;
    params.project_zero_mean = cfg.project_zero_mean;
    let est = lyapunov1(&initial_field(cfg)?, &params, &cfg.lyapunov_options())?;
    output::lyapunov_csv(cfg, &est).write(&cfg.path("lyapunov.csv"))?;
    let summary = cfg.path("lyapunov_summary.txt");
    fs::write(&summary, output::lyapunov_summary(cfg, &est))
        .with_context(|| format!("writing {}", summary.display()))?;
    Ok(est)
}

/// Unstable modes, fastest first, or every mode `n > 0` with `all`.
pub fn modes(cfg: &RunConfig, all: bool) -> anyhow::Result<output::Csv> {
    let grid = cfg.grid()?;
    let table = if all { mode_table(&grid) } else { unstable_modes(&grid) };
    Ok(output::modes_csv(cfg, &table))
}
