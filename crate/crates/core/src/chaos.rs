//! Leading Lyapunov exponent by two-trajectory renormalization, and raw
//! separation-growth curves.
//!
//! Distances are the discrete L2 norm `sqrt(dx * sum_j d_j^2)`, evaluated in
//! Fourier space through Parseval.

use num_complex::Complex;

use crate::dynamics::{random_initial, KsStepper, SolverParams};
use crate::error::{KsError, Result};
use crate::scalar::Real;
use crate::spectral::{Grid, RealField, SpectralField};

pub const DEFAULT_DELTA0: f64 = 1e-7;
pub const DEFAULT_RENORM_INTERVAL: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovOptions<T: Real> {
    /// Size of the perturbation after every renormalization.
    pub delta0: T,
    /// Time between renormalizations; a whole number of steps.
    pub renorm_interval: T,
    /// Time the fiducial trajectory runs alone before the perturbation is added.
    pub t_transient: T,
    /// Seed for the initial perturbation direction.
    pub direction_seed: u64,
}

impl<T: Real> LyapunovOptions<T> {
    pub fn new(delta0: T, renorm_interval: T, t_transient: T) -> Self {
        Self {
            delta0,
            renorm_interval,
            t_transient,
            direction_seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovEstimate<T: Real> {
    pub lambda1: T,
    pub renorm_interval: T,
    pub n_renorms: usize,
    /// `(t, ln(|delta| / delta0))` at the end of every renormalization interval.
    pub log_growth: Vec<(T, T)>,
    /// Standard error of the per-interval rates.
    pub std_error: T,
}

/// Discrete L2 norm of a real field given by its normalized coefficients.
pub fn l2_norm<T: Real>(grid: &Grid<T>, coeffs: &[Complex<T>]) -> T {
    let sum = coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
    (grid.length() * sum).sqrt()
}

fn whole_steps<T: Real>(span: T, dt: T, what: &str) -> Result<usize> {
    let steps = (span / dt).round();
    let tol = T::lit(1e-6) * span.abs().max(T::one());
    if span < T::zero() || (steps * dt - span).abs() > tol {
        return Err(KsError::InvalidParameter(format!(
            "{what} = {span} is not a whole number of steps of dt = {dt}"
        )));
    }
    Ok(steps.to_usize().unwrap_or(0))
}

/// Perturbation of L2 size `delta0` in the solver's admissible subspace.
fn perturbation<T: Real>(params: &SolverParams<T>, delta0: T, seed: u64) -> Result<Vec<Complex<T>>> {
    let mut dir = random_initial(&params.grid, seed).to_spectral().dealias();
    if params.project_zero_mean {
        dir = dir.project_zero_mean();
    }
    let mut coeffs = dir.into_coeffs();
    let norm = l2_norm(&params.grid, &coeffs);
    if !(norm > T::zero()) {
        return Err(KsError::DegeneratePerturbation("zero perturbation direction".into()));
    }
    let scale = delta0 / norm;
    for c in coeffs.iter_mut() {
        *c = *c * scale;
    }
    Ok(coeffs)
}

fn stepper_for<T: Real>(params: &SolverParams<T>) -> Result<KsStepper<T>> {
    KsStepper::new(&SolverParams {
        t_end: params.dt,
        save_stride: 1,
        ..params.clone()
    })
}

fn prepared_state<T: Real>(initial: &RealField<T>, params: &SolverParams<T>) -> Result<SpectralField<T>> {
    if initial.grid() != &params.grid {
        return Err(KsError::GridMismatch);
    }
    let s = initial.to_spectral().dealias();
    Ok(if params.project_zero_mean {
        s.project_zero_mean()
    } else {
        s
    })
}

fn separation<T: Real>(grid: &Grid<T>, fid: &[Complex<T>], pert: &[Complex<T>], diff: &mut [Complex<T>]) -> T {
    for ((d, p), f) in diff.iter_mut().zip(pert).zip(fid) {
        *d = *p - *f;
    }
    l2_norm(grid, diff)
}

/// Two-trajectory estimate of the leading exponent with periodic renormalization.
///
/// The fiducial trajectory runs alone until `opts.t_transient`; from there to
/// `params.t_end` the perturbed copy is advanced in lockstep and rescaled back to
/// `opts.delta0` every `opts.renorm_interval`.
pub fn lyapunov1<T: Real>(
    initial: &RealField<T>,
    params: &SolverParams<T>,
    opts: &LyapunovOptions<T>,
) -> Result<LyapunovEstimate<T>> {
    if !(opts.delta0 > T::zero() && opts.delta0.is_finite()) {
        return Err(KsError::DegeneratePerturbation(format!(
            "delta0 must be positive, got {}",
            opts.delta0
        )));
    }
    let dt = params.dt;
    let per_interval = whole_steps(opts.renorm_interval, dt, "renorm_interval")?;
    let transient_steps = whole_steps(opts.t_transient, dt, "t_transient")?;
    let total_steps = whole_steps(params.t_end, dt, "t_end")?;
    if per_interval == 0 || total_steps <= transient_steps {
        return Err(KsError::InvalidParameter(
            "need a positive renorm interval and t_end > t_transient".into(),
        ));
    }
    let n_renorms = (total_steps - transient_steps) / per_interval;
    if n_renorms == 0 {
        return Err(KsError::InvalidParameter(
            "accumulation window shorter than one renorm interval".into(),
        ));
    }

    let grid = params.grid.clone();
    let mut fid_stepper = stepper_for(params)?;
    let mut pert_stepper = stepper_for(params)?;
    let mut fid = prepared_state(initial, params)?.into_coeffs();
    for _ in 0..transient_steps {
        fid_stepper.step_in_place(&mut fid)?;
    }

    let offset = perturbation(params, opts.delta0, opts.direction_seed)?;
    let mut pert: Vec<Complex<T>> = fid.iter().zip(&offset).map(|(f, o)| *f + *o).collect();
    let mut diff = vec![Complex::new(T::zero(), T::zero()); grid.points()];
    let start = separation(&grid, &fid, &pert, &mut diff);
    if !(start > T::zero()) {
        return Err(KsError::DegeneratePerturbation(
            "perturbation lost to rounding; increase delta0".into(),
        ));
    }

    let mut log_growth = Vec::with_capacity(n_renorms);
    let mut step = transient_steps;
    for _ in 0..n_renorms {
        for _ in 0..per_interval {
            fid_stepper.step_in_place(&mut fid)?;
            pert_stepper.step_in_place(&mut pert)?;
        }
        step += per_interval;
        let t = T::from_usize_lossy(step) * dt;
        let norm = separation(&grid, &fid, &pert, &mut diff);
        let growth = (norm / opts.delta0).ln();
        if !(norm > T::zero() && growth.is_finite()) {
            return Err(KsError::SeparationOutOfRange {
                time: t.to_f64_lossy(),
                norm: norm.to_f64_lossy(),
            });
        }
        log_growth.push((t, growth));
        let scale = opts.delta0 / norm;
        for ((p, f), d) in pert.iter_mut().zip(&fid).zip(&diff) {
            *p = *f + *d * scale;
        }
    }

    let n = T::from_usize_lossy(n_renorms);
    let interval = T::from_usize_lossy(per_interval) * dt;
    let total = log_growth.iter().fold(T::zero(), |acc, &(_, g)| acc + g);
    let lambda1 = total / (n * interval);
    let var = if n_renorms > 1 {
        log_growth.iter().fold(T::zero(), |acc, &(_, g)| {
            let r = g / interval - lambda1;
            acc + r * r
        }) / (n - T::one())
    } else {
        T::zero()
    };
    Ok(LyapunovEstimate {
        lambda1,
        renorm_interval: interval,
        n_renorms,
        log_growth,
        std_error: (var / n).sqrt(),
    })
}

/// `(t, ln |delta(t)|)` without renormalization, sampled every step, starting at
/// `t = 0` with `|delta| = delta0` and stopping once `|delta| > 1` or at `t_end`.
pub fn separation_curve<T: Real>(
    initial: &RealField<T>,
    params: &SolverParams<T>,
    delta0: T,
    direction_seed: u64,
) -> Result<Vec<(T, T)>> {
    if !(delta0 > T::zero() && delta0.is_finite()) {
        return Err(KsError::DegeneratePerturbation(format!(
            "delta0 must be positive, got {delta0}"
        )));
    }
    let grid = params.grid.clone();
    let total_steps = whole_steps(params.t_end, params.dt, "t_end")?;
    let mut fid_stepper = stepper_for(params)?;
    let mut pert_stepper = stepper_for(params)?;
    let mut fid = prepared_state(initial, params)?.into_coeffs();
    let offset = perturbation(params, delta0, direction_seed)?;
    let mut pert: Vec<Complex<T>> = fid.iter().zip(&offset).map(|(f, o)| *f + *o).collect();
    let mut diff = vec![Complex::new(T::zero(), T::zero()); grid.points()];

    let mut curve = Vec::with_capacity(total_steps + 1);
    curve.push((T::zero(), separation(&grid, &fid, &pert, &mut diff).ln()));
    for step in 1..=total_steps {
        fid_stepper.step_in_place(&mut fid)?;
        pert_stepper.step_in_place(&mut pert)?;
        let norm = separation(&grid, &fid, &pert, &mut diff);
        curve.push((T::from_usize_lossy(step) * params.dt, norm.ln()));
        if norm > T::one() {
            break;
        }
    }
    Ok(curve)
}

/// Least-squares slope of `y` against `t`.
pub fn fit_slope<T: Real>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(points.len());
    let (st, sy) = points
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (mut num, mut den) = (T::zero(), T::zero());
    for &(t, y) in points {
        num = num + (t - mt) * (y - my);
        den = den + (t - mt) * (t - mt);
    }
    (den > T::zero()).then(|| num / den)
}
