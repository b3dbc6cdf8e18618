//! Time integration of `u_t = -u_xx - u_xxxx - u u_x` and the Galilei group action.
//!
//! The stepper is fourth-order exponential time differencing (ETDRK4). The
//! linear symbol `k^2 - k^4` is integrated exactly; the nonlinearity is
//! evaluated pseudospectrally as `-(1/2) d/dx (u^2)` with 2/3 dealiasing.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KsError, Result};
use crate::linear::growth_rate;
use crate::scalar::Real;
use crate::spectral::{Grid, RealField, SpectralField};

/// Spectral magnitude treated as numerical blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Largest admissible step.
pub const MAX_DT: f64 = 0.5;

/// Points on the contour used to evaluate the ETD coefficients.
const CONTOUR_POINTS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams<T: Real> {
    pub grid: Grid<T>,
    pub dt: T,
    pub t_end: T,
    /// A snapshot is kept every `save_stride` steps.
    pub save_stride: usize,
    /// Remove the mean after every step. Only the Galilei boost check turns this off.
    pub project_zero_mean: bool,
}

impl<T: Real> SolverParams<T> {
    pub fn new(grid: Grid<T>, dt: T, t_end: T, save_stride: usize) -> Result<Self> {
        let params = Self {
            grid,
            dt,
            t_end,
            save_stride,
            project_zero_mean: true,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn without_projection(mut self) -> Self {
        self.project_zero_mean = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > T::zero() && self.dt <= T::lit(MAX_DT)) {
            return Err(KsError::InvalidParameter(format!(
                "dt must lie in (0, {MAX_DT}], got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > T::zero()) {
            return Err(KsError::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.save_stride == 0 {
            return Err(KsError::InvalidParameter("save_stride must be >= 1".into()));
        }
        let steps = self.steps();
        if steps == 0 {
            return Err(KsError::InvalidParameter("t_end shorter than one step".into()));
        }
        let reach = T::from_usize_lossy(steps) * self.dt;
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) * self.t_end;
        if (reach - self.t_end).abs() > tol {
            return Err(KsError::InvalidParameter(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        if !steps.is_multiple_of(self.save_stride) {
            return Err(KsError::InvalidParameter(format!(
                "{steps} steps are not a multiple of save_stride = {}",
                self.save_stride
            )));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// Saved snapshots of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Real> {
    grid: Grid<T>,
    times: Vec<T>,
    snapshots: Vec<RealField<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Assembles a trajectory, checking that times increase and every snapshot lives on `grid`.
    pub fn new(grid: Grid<T>, times: Vec<T>, snapshots: Vec<RealField<T>>) -> Result<Self> {
        if times.len() != snapshots.len() {
            return Err(KsError::LengthMismatch {
                expected: times.len(),
                got: snapshots.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(KsError::InvalidParameter(
                "snapshot times must be strictly increasing".into(),
            ));
        }
        if snapshots.iter().any(|s| s.grid() != &grid) {
            return Err(KsError::GridMismatch);
        }
        Ok(Self {
            grid,
            times,
            snapshots,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn snapshots(&self) -> &[RealField<T>] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, &RealField<T>)> {
        self.times.iter().copied().zip(self.snapshots.iter())
    }

    pub fn last(&self) -> Option<&RealField<T>> {
        self.snapshots.last()
    }

    /// Applies `f` to every snapshot, keeping the times.
    pub fn map_snapshots(&self, f: impl Fn(&RealField<T>) -> RealField<T>) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.times.clone(),
            self.snapshots.iter().map(f).collect(),
        )
    }
}

/// ETDRK4 integrator with coefficients precomputed for one grid and step.
pub struct KsStepper<T: Real> {
    grid: Grid<T>,
    project_zero_mean: bool,
    e: Vec<T>,
    e2: Vec<T>,
    q: Vec<T>,
    f1: Vec<T>,
    f2: Vec<T>,
    f3: Vec<T>,
    /// `-(i k / 2)` inside the dealias band, zero outside.
    g: Vec<Complex<T>>,
    phys: Vec<T>,
    buf: Vec<Complex<T>>,
    fft_scratch: Vec<Complex<T>>,
    nv: Vec<Complex<T>>,
    a: Vec<Complex<T>>,
    na: Vec<Complex<T>>,
    b: Vec<Complex<T>>,
    nb: Vec<Complex<T>>,
    c: Vec<Complex<T>>,
    nc: Vec<Complex<T>>,
    steps_taken: usize,
}

/// ETD coefficients for one value of `h * L`, computed in double precision by
/// averaging over a unit circle around `h L` so that `h L -> 0` does not cancel.
struct EtdCoefficients {
    e: f64,
    e2: f64,
    q: f64,
    f1: f64,
    f2: f64,
    f3: f64,
}

fn etd_coefficients(h: f64, lin: f64) -> EtdCoefficients {
    let hl = h * lin;
    let m = CONTOUR_POINTS as f64;
    let zero = Complex::new(0.0, 0.0);
    let (mut q, mut f1, mut f2, mut f3) = (zero, zero, zero, zero);
    for j in 1..=CONTOUR_POINTS {
        let theta = std::f64::consts::PI * (j as f64 - 0.5) / (m / 2.0);
        let r = Complex::new(hl, 0.0) + Complex::from_polar(1.0, theta);
        let er = r.exp();
        let r3 = r * r * r;
        q += ((r / 2.0).exp() - 1.0) / r;
        f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        f2 += (2.0 + r + er * (r - 2.0)) / r3;
        f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
    }
    EtdCoefficients {
        e: hl.exp(),
        e2: (hl / 2.0).exp(),
        q: h * q.re / m,
        f1: h * f1.re / m,
        f2: h * f2.re / m,
        f3: h * f3.re / m,
    }
}

impl<T: Real> KsStepper<T> {
    pub fn new(params: &SolverParams<T>) -> Result<Self> {
        params.validate()?;
        let grid = params.grid.clone();
        let n = grid.points();
        let h = params.dt.to_f64_lossy();
        let cutoff = grid.dealias_cutoff();
        let zero = Complex::new(T::zero(), T::zero());

        let mut e = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        let mut f3 = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        for slot in 0..n {
            let mode = grid.mode_of_slot(slot);
            let k = grid.wavenumber(mode).to_f64_lossy();
            let c = etd_coefficients(h, growth_rate(k));
            e.push(T::lit(c.e));
            e2.push(T::lit(c.e2));
            q.push(T::lit(c.q));
            f1.push(T::lit(c.f1));
            f2.push(T::lit(c.f2));
            f3.push(T::lit(c.f3));
            g.push(if mode.abs() > cutoff {
                zero
            } else {
                Complex::new(T::zero(), T::lit(-0.5 * k))
            });
        }

        Ok(Self {
            project_zero_mean: params.project_zero_mean,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            g,
            phys: vec![T::zero(); n],
            buf: vec![zero; n],
            fft_scratch: grid.scratch(),
            nv: vec![zero; n],
            a: vec![zero; n],
            na: vec![zero; n],
            b: vec![zero; n],
            nb: vec![zero; n],
            c: vec![zero; n],
            nc: vec![zero; n],
            grid,
            steps_taken: 0,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// `out = -(1/2) d/dx (u^2)`, dealiased.
    fn nonlinear(
        grid: &Grid<T>,
        g: &[Complex<T>],
        v: &[Complex<T>],
        out: &mut [Complex<T>],
        phys: &mut [T],
        buf: &mut [Complex<T>],
        scratch: &mut [Complex<T>],
    ) {
        buf.copy_from_slice(v);
        grid.inverse_real(buf, phys, scratch);
        for u in phys.iter_mut() {
            *u = *u * *u;
        }
        grid.forward_real(phys, out, scratch);
        for (o, gk) in out.iter_mut().zip(g) {
            *o = *o * *gk;
        }
    }

    /// Advances the coefficients in `v` by one step.
    pub fn step_in_place(&mut self, v: &mut [Complex<T>]) -> Result<()> {
        let n = self.grid.points();
        if v.len() != n {
            return Err(KsError::LengthMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let two = T::lit(2.0);

        Self::nonlinear(&self.grid, &self.g, v, &mut self.nv, &mut self.phys, &mut self.buf, &mut self.fft_scratch);
        for i in 0..n {
            self.a[i] = v[i] * self.e2[i] + self.nv[i] * self.q[i];
        }
        Self::nonlinear(&self.grid, &self.g, &self.a, &mut self.na, &mut self.phys, &mut self.buf, &mut self.fft_scratch);
        for i in 0..n {
            self.b[i] = v[i] * self.e2[i] + self.na[i] * self.q[i];
        }
        Self::nonlinear(&self.grid, &self.g, &self.b, &mut self.nb, &mut self.phys, &mut self.buf, &mut self.fft_scratch);
        for i in 0..n {
            self.c[i] = self.a[i] * self.e2[i] + (self.nb[i] * two - self.nv[i]) * self.q[i];
        }
        Self::nonlinear(&self.grid, &self.g, &self.c, &mut self.nc, &mut self.phys, &mut self.buf, &mut self.fft_scratch);

        let cutoff = self.grid.dealias_cutoff();
        for i in 0..n {
            if self.grid.mode_of_slot(i).abs() > cutoff {
                v[i] = Complex::new(T::zero(), T::zero());
                continue;
            }
            v[i] = v[i] * self.e[i]
                + self.nv[i] * self.f1[i]
                + (self.na[i] + self.nb[i]) * (two * self.f2[i])
                + self.nc[i] * self.f3[i];
        }
        // Roundoff leaves an anti-Hermitian residue that the unstable band would amplify.
        enforce_hermitian(v);
        if self.project_zero_mean {
            v[0] = Complex::new(T::zero(), T::zero());
        }
        self.steps_taken += 1;

        let limit = T::lit(BLOWUP_THRESHOLD);
        for (slot, c) in v.iter().enumerate() {
            let m = c.norm();
            if !(m <= limit) {
                return Err(KsError::BlowUp {
                    step: self.steps_taken,
                    mode: self.grid.mode_of_slot(slot),
                    magnitude: m.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    pub fn step(&mut self, state: &SpectralField<T>) -> Result<SpectralField<T>> {
        if state.grid() != &self.grid {
            return Err(KsError::GridMismatch);
        }
        let mut out = state.clone();
        self.step_in_place(out.coeffs_mut())?;
        Ok(out)
    }
}

/// Replaces `c_n` by `(c_n + conj(c_{-n})) / 2`, zeroing the imaginary part of
/// the mean and Nyquist modes.
pub(crate) fn enforce_hermitian<T: Real>(v: &mut [Complex<T>]) {
    let n = v.len();
    let half = T::lit(0.5);
    for slot in 1..n / 2 {
        let avg = (v[slot] + v[n - slot].conj()) * half;
        v[slot] = avg;
        v[n - slot] = avg.conj();
    }
    v[0].im = T::zero();
    v[n / 2].im = T::zero();
}

/// One ETDRK4 step. Builds the coefficient tables on every call; use
/// [`KsStepper`] directly when stepping repeatedly.
pub fn ks_step<T: Real>(state: &SpectralField<T>, params: &SolverParams<T>) -> Result<SpectralField<T>> {
    let one_step = SolverParams {
        t_end: params.dt,
        save_stride: 1,
        ..params.clone()
    };
    KsStepper::new(&one_step)?.step(state)
}

/// Integrates from `initial` to `params.t_end`, saving every `save_stride` steps
/// (including `t = 0` and `t_end`).
pub fn evolve<T: Real>(initial: &RealField<T>, params: &SolverParams<T>) -> Result<Trajectory<T>> {
    if initial.grid() != &params.grid {
        return Err(KsError::GridMismatch);
    }
    let mut stepper = KsStepper::new(params)?;
    let mut state = initial.to_spectral();
    if params.project_zero_mean {
        state = state.project_zero_mean();
    }
    let steps = params.steps();
    let saves = steps / params.save_stride + 1;
    let mut times = Vec::with_capacity(saves);
    let mut snapshots = Vec::with_capacity(saves);
    times.push(T::zero());
    snapshots.push(state.to_real());

    let coeffs = state.coeffs_mut();
    for step in 1..=steps {
        stepper.step_in_place(coeffs)?;
        if step % params.save_stride == 0 {
            times.push(T::from_usize_lossy(step) * params.dt);
            snapshots.push(
                SpectralField::from_coeffs(params.grid.clone(), coeffs.to_vec())?.to_real(),
            );
        }
    }
    Trajectory::new(params.grid.clone(), times, snapshots)
}

/// Exact solution of the linearized equation: mode `n` is multiplied by
/// `exp((k_n^2 - k_n^4) t)`. Negative `t` is accepted but amplifies high modes
/// and fails once any factor overflows.
pub fn linear_evolve_exact<T: Real>(initial: &SpectralField<T>, t: T) -> Result<SpectralField<T>> {
    let grid = initial.grid().clone();
    let mut coeffs = initial.coeffs().to_vec();
    for (slot, c) in coeffs.iter_mut().enumerate() {
        if c.norm() == T::zero() {
            continue;
        }
        let k = grid.slot_wavenumber(slot);
        let exponent = growth_rate(k) * t;
        let factor = exponent.exp();
        let next = *c * factor;
        if !(factor.is_finite() && next.re.is_finite() && next.im.is_finite()) {
            return Err(KsError::PropagatorOverflow {
                mode: grid.mode_of_slot(slot),
                exponent: exponent.to_f64_lossy(),
            });
        }
        *c = next;
    }
    SpectralField::from_coeffs(grid, coeffs)
}

/// Galilei boost `u(x) -> u(x - t v) + v`. The result has mean `mean(u) + v`.
pub fn boost<T: Real>(f: &RealField<T>, v: T, t: T) -> RealField<T> {
    translate(f, t * v).offset(v)
}

/// Spatial reflection `u(x) -> -u(-x)`.
pub fn reflect<T: Real>(f: &RealField<T>) -> RealField<T> {
    let n = f.grid().points();
    let src = f.values();
    let values = (0..n).map(|j| -src[(n - j) % n]).collect();
    RealField::new(f.grid().clone(), values).expect("negation keeps samples finite")
}

/// Translation `u(x) -> u(x - a)` by spectral phase shift.
pub fn translate<T: Real>(f: &RealField<T>, a: T) -> RealField<T> {
    f.to_spectral().shift(a).to_real()
}

/// Independent uniform samples on `[-1, 1]`, one per grid point.
///
/// Samples are drawn in double precision so `f32` and `f64` runs with the same
/// seed start from the same data up to rounding.
pub fn random_initial<T: Real>(grid: &Grid<T>, seed: u64) -> RealField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.points())
        .map(|_| T::lit(rng.gen_range(-1.0..=1.0)))
        .collect();
    RealField::new(grid.clone(), values).expect("uniform samples are finite")
}
