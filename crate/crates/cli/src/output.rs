//! CSV tables. Every file starts with the run config as `#` comment lines,
//! followed by a header row. Floats use Rust's shortest round-trip format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use ks_core::{DensityReport64, EventCounts, LyapunovEstimate64, ModeInfo, StripeEvent, Trajectory64};

use crate::config::RunConfig;

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(cfg: &RunConfig, header: &[&str]) -> Self {
        let mut csv = Self { text: cfg.as_comment() };
        csv.record(header);
        csv
    }

    fn record<S: AsRef<[u8]>>(&mut self, fields: &[S]) {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(fields).expect("in-memory write");
        let bytes = w.into_inner().expect("in-memory flush");
        self.text.push_str(std::str::from_utf8(&bytes).expect("utf-8 fields"));
    }

    pub fn row(&mut self, fields: &[String]) {
        self.record(fields);
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        fs::write(path, &self.text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Long format, one row per sample.
pub fn trajectory_csv(cfg: &RunConfig, traj: &Trajectory64) -> Csv {
    let mut csv = Csv::new(cfg, &["t", "x", "u"]);
    for (t, s) in traj.iter() {
        for (j, u) in s.values().iter().enumerate() {
            csv.row(&[t.to_string(), traj.grid().x(j).to_string(), u.to_string()]);
        }
    }
    csv
}

/// Arc bounds as `start:end` grid indices (end exclusive, mod N), `;`-joined.
fn arc_list(arcs: &[ks_core::ArcRef]) -> String {
    arcs.iter()
        .map(|a| format!("{}:{}", a.start, a.end))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn events_csv(cfg: &RunConfig, events: &[StripeEvent<f64>]) -> Csv {
    let mut csv = Csv::new(cfg, &["t_before", "t_after", "kind", "before", "after"]);
    for e in events {
        csv.row(&[
            e.t_before.to_string(),
            e.t_after.to_string(),
            e.kind.to_string(),
            arc_list(&e.before),
            arc_list(&e.after),
        ]);
    }
    csv
}

pub fn density_csv(cfg: &RunConfig, report: &DensityReport64) -> Csv {
    let mut csv = Csv::new(cfg, &["t", "stripes"]);
    for (t, c) in &report.counts {
        csv.row(&[t.to_string(), c.to_string()]);
    }
    csv
}

pub fn stripe_summary_csv(cfg: &RunConfig, report: &DensityReport64, transient: &EventCounts, settled: &EventCounts) -> Csv {
    let mut csv = Csv::new(
        cfg,
        &[
            "length", "t_transient", "mean_count", "density", "phase", "continued", "births", "deaths", "merges", "splits",
        ],
    );
    for (phase, c) in [("transient", transient), ("settled", settled)] {
        csv.row(&[
            report.length.to_string(),
            report.t_transient.to_string(),
            report.mean_count.to_string(),
            report.density.to_string(),
            phase.to_string(),
            c.continued.to_string(),
            c.births.to_string(),
            c.deaths.to_string(),
            c.merges.to_string(),
            c.splits.to_string(),
        ]);
    }
    csv
}

pub fn modes_csv(cfg: &RunConfig, modes: &[ModeInfo<f64>]) -> Csv {
    let mut csv = Csv::new(cfg, &["n", "k", "rate"]);
    for m in modes {
        csv.row(&[m.n.to_string(), m.k.to_string(), m.rate.to_string()]);
    }
    csv
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearCheckRow {
    pub n: i64,
    pub k: f64,
    pub theory: f64,
    pub measured: f64,
    pub rel_err: f64,
    pub abs_err: f64,
}

pub fn linear_check_csv(cfg: &RunConfig, rows: &[LinearCheckRow]) -> Csv {
    let mut csv = Csv::new(cfg, &["n", "k", "theory", "measured", "rel_err", "abs_err"]);
    for r in rows {
        csv.row(&[
            r.n.to_string(),
            r.k.to_string(),
            r.theory.to_string(),
            r.measured.to_string(),
            r.rel_err.to_string(),
            r.abs_err.to_string(),
        ]);
    }
    csv
}

pub fn lyapunov_csv(cfg: &RunConfig, est: &LyapunovEstimate64) -> Csv {
    let mut csv = Csv::new(cfg, &["t", "log_growth", "running_mean"]);
    let mut sum = 0.0;
    for (i, (t, g)) in est.log_growth.iter().enumerate() {
        sum += g;
        csv.row(&[t.to_string(), g.to_string(), (sum / ((i + 1) as f64 * est.renorm_interval)).to_string()]);
    }
    csv
}

pub fn lyapunov_summary(cfg: &RunConfig, est: &LyapunovEstimate64) -> String {
    let mut s = cfg.as_comment();
    let _ = writeln!(s, "lambda1 = {}", est.lambda1);
    let _ = writeln!(s, "std_error = {}", est.std_error);
    let _ = writeln!(s, "renorm_interval = {}", est.renorm_interval);
    let _ = writeln!(s, "n_renorms = {}", est.n_renorms);
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRun {
    pub length: f64,
    pub points: usize,
    pub seed: u64,
    pub density: f64,
    pub mean_count: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub length: f64,
    pub runs: usize,
    pub mean_density: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std_density: f64,
}

pub fn summarize(runs: &[SweepRun]) -> Vec<SweepSummary> {
    let mut lengths: Vec<f64> = runs.iter().map(|r| r.length).collect();
    lengths.sort_by(f64::total_cmp);
    lengths.dedup();
    lengths
        .into_iter()
        .map(|l| {
            let d: Vec<f64> = runs.iter().filter(|r| r.length == l).map(|r| r.density).collect();
            let m = d.len() as f64;
            let mean = d.iter().sum::<f64>() / m;
            let var = if d.len() > 1 {
                d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            SweepSummary {
                length: l,
                runs: d.len(),
                mean_density: mean,
                std_density: var.sqrt(),
            }
        })
        .collect()
}

pub fn sweep_runs_csv(cfg: &RunConfig, runs: &[SweepRun]) -> Csv {
    let mut csv = Csv::new(cfg, &["length", "points", "seed", "mean_count", "density"]);
    for r in runs {
        csv.row(&[
            r.length.to_string(),
            r.points.to_string(),
            r.seed.to_string(),
            r.mean_count.to_string(),
            r.density.to_string(),
        ]);
    }
    csv
}

pub fn sweep_summary_csv(cfg: &RunConfig, summary: &[SweepSummary]) -> Csv {
    let mut csv = Csv::new(cfg, &["length", "runs", "mean_density", "std_density"]);
    for s in summary {
        csv.row(&[
            s.length.to_string(),
            s.runs.to_string(),
            s.mean_density.to_string(),
            s.std_density.to_string(),
        ]);
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_follows_config_comments() {
        let cfg = RunConfig::default();
        let mut csv = Csv::new(&cfg, &["a", "b"]);
        csv.row(&["1".into(), "0.1".into()]);
        csv.row(&["x,y".into(), "".into()]);
        let text = csv.as_str();
        let body: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, ["a,b", "1,0.1", "\"x,y\","]);
        let config: String = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(RunConfig::parse(&config).unwrap(), cfg);
    }

    #[test]
    fn sweep_statistics() {
        let run = |length, density| SweepRun { length, points: 16, seed: 0, density, mean_count: 0.0 };
        let s = summarize(&[run(2.0, 0.1), run(1.0, 0.3), run(2.0, 0.3)]);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].length, s[0].runs, s[0].std_density), (1.0, 1, 0.0));
        assert!((s[1].mean_density - 0.2).abs() < 1e-15);
        assert!((s[1].std_density - 0.02f64.sqrt()).abs() < 1e-15);
    }
}
