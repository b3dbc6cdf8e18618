//! Run configuration: a flat `key = value` file with `#` comments (TOML subset).

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ks_core::{Grid64, LyapunovOptions, SolverParams64, StripeOptions};
use serde::{Deserialize, Serialize};

/// Seed of the pinned reference run.
pub const REFERENCE_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    /// Independent uniform samples on `[-1, 1]`.
    Random,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Domain length `L`.
    pub length: f64,
    /// Grid points `N`.
    pub points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub save_stride: usize,
    pub seed: u64,
    pub initial: InitialData,
    pub project_zero_mean: bool,

    pub sigma: f64,
    pub t_transient: f64,
    /// Stripes narrower than this are ignored; 0 disables the filter.
    pub min_stripe_width: f64,

    pub delta0: f64,
    pub renorm_interval: f64,
    /// Accumulation time after `t_transient` for the Lyapunov estimate.
    pub lyapunov_window: f64,

    /// Amplitude of the single-mode runs in `linear-check`.
    pub linear_amplitude: f64,
    /// Duration of those runs (shortened for fast-decaying modes).
    pub linear_time: f64,

    /// Domain lengths for `density-sweep`, in units of pi.
    pub sweep_lengths_pi: Vec<f64>,
    pub sweep_seeds: Vec<u64>,

    /// Heatmap size in pixels; 0 keeps one pixel per sample.
    pub image_width: usize,
    pub image_height: usize,
    /// Symmetric color range `[-scale, scale]`; 0 uses the data's max |u|.
    pub color_scale: f64,

    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    /// The reference run: `L = 32 pi`, `N = 256`, `dt = 0.05`, saves every 0.25.
    fn default() -> Self {
        Self {
            length: 32.0 * PI,
            points: 256,
            dt: 0.05,
            t_end: 200.0,
            save_stride: 5,
            seed: REFERENCE_SEED,
            initial: InitialData::Random,
            project_zero_mean: true,
            sigma: 2.0,
            t_transient: 50.0,
            min_stripe_width: 0.0,
            delta0: 1e-7,
            renorm_interval: 1.0,
            lyapunov_window: 500.0,
            linear_amplitude: 1e-8,
            linear_time: 10.0,
            sweep_lengths_pi: vec![16.0, 32.0, 64.0],
            sweep_seeds: vec![REFERENCE_SEED],
            image_width: 0,
            image_height: 0,
            color_scale: 0.0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        fs::write(path, self.to_text()).with_context(|| format!("writing {}", path.display()))
    }

    /// The config as `# `-prefixed lines, for embedding in text outputs.
    pub fn as_comment(&self) -> String {
        self.to_text()
            .lines()
            .map(|l| format!("# {l}\n"))
            .collect()
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let positive = [
            ("length", self.length),
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("sigma", self.sigma),
            ("delta0", self.delta0),
            ("renorm_interval", self.renorm_interval),
            ("lyapunov_window", self.lyapunov_window),
            ("linear_amplitude", self.linear_amplitude),
            ("linear_time", self.linear_time),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                bail!("{name} must be positive, got {v}");
            }
        }
        let non_negative = [
            ("t_transient", self.t_transient),
            ("min_stripe_width", self.min_stripe_width),
            ("color_scale", self.color_scale),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                bail!("{name} must be non-negative, got {v}");
            }
        }
        if self.sweep_lengths_pi.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            bail!("sweep_lengths_pi must all be positive");
        }
        self.solver_params()?;
        Ok(())
    }

    pub fn grid(&self) -> anyhow::Result<Grid64> {
        Ok(Grid64::new(self.length, self.points)?)
    }

    pub fn solver_params(&self) -> anyhow::Result<SolverParams64> {
        let p = SolverParams64::new(self.grid()?, self.dt, self.t_end, self.save_stride)?;
        Ok(if self.project_zero_mean {
            p
        } else {
            p.without_projection()
        })
    }

    pub fn stripe_options(&self) -> StripeOptions<f64> {
        StripeOptions {
            sigma: self.sigma,
            t_transient: self.t_transient,
            min_width: (self.min_stripe_width > 0.0).then_some(self.min_stripe_width),
        }
    }

    pub fn lyapunov_options(&self) -> LyapunovOptions<f64> {
        LyapunovOptions {
            direction_seed: self.seed ^ 0x9e37_79b9_7f4a_7c15,
            ..LyapunovOptions::new(self.delta0, self.renorm_interval, self.t_transient)
        }
    }

    /// Same run on a domain of length `length`, with `N` scaled to keep the
    /// grid spacing no coarser than the reference (rounded up to a power of two).
    pub fn with_length(&self, length: f64) -> Self {
        let wanted = (self.points as f64 * length / self.length).ceil() as usize;
        Self {
            length,
            points: wanted.max(16).next_power_of_two(),
            ..self.clone()
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}
