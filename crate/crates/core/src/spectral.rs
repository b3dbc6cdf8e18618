//! Periodic grid fields and their Fourier representation.
//!
//! Coefficients are stored in FFT slot order: slot `j < N/2` holds mode `j`,
//! slot `j >= N/2` holds mode `j - N`, so the Nyquist slot `N/2` carries mode
//! `-N/2`. The forward transform is normalized by `1/N`, which makes
//! `cos(2 pi x / L)` come out as `1/2` in modes `+1` and `-1`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{KsError, Result};
use crate::scalar::Real;

struct Plans<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

/// Uniform periodic grid `x_j = j L / N`, `j = 0..N`.
///
/// Cloning is cheap; FFT plans are shared.
#[derive(Clone)]
pub struct Grid<T: Real> {
    length: T,
    n: usize,
    plans: Arc<Plans<T>>,
}

impl<T: Real> Grid<T> {
    pub const MIN_POINTS: usize = 16;

    pub fn new(length: T, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > T::zero()) {
            return Err(KsError::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n < Self::MIN_POINTS || !n.is_multiple_of(2) {
            return Err(KsError::InvalidGrid(format!(
                "point count must be even and >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            length,
            n,
            plans: Arc::new(plans),
        })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> T {
        self.length / T::from_usize_lossy(self.n)
    }

    pub fn x(&self, j: usize) -> T {
        T::from_usize_lossy(j) * self.dx()
    }

    /// Signed mode index stored in FFT slot `slot`.
    pub fn mode_of_slot(&self, slot: usize) -> i64 {
        debug_assert!(slot < self.n);
        if slot < self.n / 2 {
            slot as i64
        } else {
            slot as i64 - self.n as i64
        }
    }

    /// FFT slot holding mode `mode`, if the grid represents it.
    pub fn slot_of_mode(&self, mode: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if mode >= -half && mode < half {
            Some(mode.rem_euclid(self.n as i64) as usize)
        } else {
            None
        }
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n / 2
    }

    /// `k_n = 2 pi n / L`.
    pub fn wavenumber(&self, mode: i64) -> T {
        T::TAU() * T::from_i64(mode).expect("mode index fits in scalar") / self.length
    }

    pub fn slot_wavenumber(&self, slot: usize) -> T {
        self.wavenumber(self.mode_of_slot(slot))
    }

    /// Largest |n| kept by the 2/3 dealiasing rule (`3|n| <= N`).
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.plans.forward.process_with_scratch(buf, scratch);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.plans.inverse.process_with_scratch(buf, scratch);
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.plans
            .forward
            .get_inplace_scratch_len()
            .max(self.plans.inverse.get_inplace_scratch_len())
    }

    pub(crate) fn scratch(&self) -> Vec<Complex<T>> {
        vec![Complex::new(T::zero(), T::zero()); self.scratch_len()]
    }

    /// Physical samples to normalized coefficients.
    pub(crate) fn forward_real(&self, values: &[T], out: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        let inv_n = T::one() / T::from_usize_lossy(self.n);
        for (o, &v) in out.iter_mut().zip(values) {
            *o = Complex::new(v * inv_n, T::zero());
        }
        self.fft_forward(out, scratch);
    }

    /// Normalized coefficients to physical samples (real part).
    pub(crate) fn inverse_real(&self, coeffs: &mut [Complex<T>], out: &mut [T], scratch: &mut [Complex<T>]) {
        self.fft_inverse(coeffs, scratch);
        for (o, c) in out.iter_mut().zip(coeffs.iter()) {
            *o = c.re;
        }
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

/// Samples of a real field on a [`Grid`]. Values are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField<T: Real> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> RealField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(KsError::LengthMismatch {
                expected: grid.points(),
                got: values.len(),
            });
        }
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(KsError::NonFinite {
                index,
                value: v.to_f64_lossy(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        let values = vec![T::zero(); grid.points()];
        Self { grid, values }
    }

    /// Samples `f(x_j)` at every grid point.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..grid.points()).map(|j| f(grid.x(j))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn mean(&self) -> T {
        let sum = self.values.iter().fold(T::zero(), |acc, &v| acc + v);
        sum / T::from_usize_lossy(self.values.len())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Maximum pointwise difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }

    /// Adds a constant to every sample.
    pub fn offset(&self, c: T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v + c).collect(),
        }
    }

    pub fn to_spectral(&self) -> SpectralField<T> {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); self.grid.points()];
        let mut scratch = self.grid.scratch();
        self.grid.forward_real(&self.values, &mut coeffs, &mut scratch);
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }
}

/// Fourier coefficients `u_n` of a real field, in FFT slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T: Real> {
    grid: Grid<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        let coeffs = vec![Complex::new(T::zero(), T::zero()); grid.points()];
        Self { grid, coeffs }
    }

    /// Wraps raw coefficients. Hermitian symmetry is the caller's contract.
    pub fn from_coeffs(grid: Grid<T>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.points() {
            return Err(KsError::LengthMismatch {
                expected: grid.points(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Real field with a single conjugate pair of modes: `u_n = c`, `u_{-n} = conj(c)`.
    pub fn single_mode(grid: Grid<T>, mode: i64, c: Complex<T>) -> Result<Self> {
        let mut s = Self::zeros(grid);
        s.set_mode(mode, c)?;
        Ok(s)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient of mode `n`, zero when the grid does not represent it.
    pub fn mode(&self, mode: i64) -> Complex<T> {
        self.grid
            .slot_of_mode(mode)
            .map(|s| self.coeffs[s])
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Sets mode `n` and its Hermitian partner `-n`.
    pub fn set_mode(&mut self, mode: i64, c: Complex<T>) -> Result<()> {
        let half = (self.grid.points() / 2) as i64;
        if mode.abs() >= half {
            return Err(KsError::InvalidParameter(format!(
                "mode {mode} outside the represented band |n| < {half}"
            )));
        }
        let slot = self.grid.slot_of_mode(mode).expect("checked above");
        let partner = self.grid.slot_of_mode(-mode).expect("checked above");
        if mode == 0 {
            self.coeffs[slot] = Complex::new(c.re, T::zero());
        } else {
            self.coeffs[slot] = c;
            self.coeffs[partner] = c.conj();
        }
        Ok(())
    }

    pub fn to_real(&self) -> RealField<T> {
        let mut buf = self.coeffs.clone();
        let mut values = vec![T::zero(); self.grid.points()];
        let mut scratch = self.grid.scratch();
        self.grid.inverse_real(&mut buf, &mut values, &mut scratch);
        RealField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Largest imaginary part of the inverse transform; zero for an exactly Hermitian spectrum.
    pub fn max_imag_residual(&self) -> T {
        let mut buf = self.coeffs.clone();
        let mut scratch = self.grid.scratch();
        self.grid.fft_inverse(&mut buf, &mut scratch);
        buf.iter().fold(T::zero(), |acc, c| acc.max(c.im.abs()))
    }

    /// Largest coefficient magnitude, together with the mode that attains it.
    pub fn max_mode(&self) -> (i64, T) {
        let mut best = (0, T::zero());
        for (slot, c) in self.coeffs.iter().enumerate() {
            let m = c.norm();
            if m > best.1 {
                best = (self.grid.mode_of_slot(slot), m);
            }
        }
        best
    }

    /// Sets the mean mode to zero; everything else untouched.
    pub fn project_zero_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex::new(T::zero(), T::zero());
        out
    }

    /// Multiplies mode `n` by `(i k_n)^order`. The Nyquist mode is zeroed,
    /// since it has no partner to keep an odd derivative real.
    pub fn derivative(&self, order: u32) -> Self {
        let mut out = self.clone();
        apply_derivative(&self.grid, &mut out.coeffs, order);
        out
    }

    /// Zeroes every mode with `|n| > N/3`.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        apply_dealias(&self.grid, &mut out.coeffs);
        out
    }

    /// Periodic convolution with a normalized Gaussian of standard deviation `sigma`.
    pub fn gaussian_smooth(&self, sigma: T) -> Result<Self> {
        if !(sigma.is_finite() && sigma > T::zero()) {
            return Err(KsError::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let mut out = self.clone();
        for (slot, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.slot_wavenumber(slot);
            *c = *c * gaussian_symbol(sigma, k);
        }
        Ok(out)
    }

    /// Multiplies mode `n` by `exp(-i k_n a)`, i.e. `u(x) -> u(x - a)`.
    ///
    /// The Nyquist mode is multiplied by `cos(k a)`, which keeps the field real
    /// and is exact for shifts by whole grid cells.
    pub fn shift(&self, a: T) -> Self {
        let mut out = self.clone();
        let nyq = self.grid.nyquist_slot();
        for (slot, c) in out.coeffs.iter_mut().enumerate() {
            let phase = self.grid.slot_wavenumber(slot) * a;
            if slot == nyq {
                *c = *c * phase.cos();
            } else {
                *c = *c * Complex::new(phase.cos(), -phase.sin());
            }
        }
        out
    }
}

pub(crate) fn gaussian_symbol<T: Real>(sigma: T, k: T) -> T {
    (-(sigma * sigma) * k * k / T::lit(2.0)).exp()
}

pub(crate) fn apply_dealias<T: Real>(grid: &Grid<T>, coeffs: &mut [Complex<T>]) {
    let cutoff = grid.dealias_cutoff();
    for (slot, c) in coeffs.iter_mut().enumerate() {
        if grid.mode_of_slot(slot).abs() > cutoff {
            *c = Complex::new(T::zero(), T::zero());
        }
    }
}

pub(crate) fn apply_derivative<T: Real>(grid: &Grid<T>, coeffs: &mut [Complex<T>], order: u32) {
    let nyq = grid.nyquist_slot();
    for (slot, c) in coeffs.iter_mut().enumerate() {
        if slot == nyq {
            *c = Complex::new(T::zero(), T::zero());
            continue;
        }
        let k = grid.slot_wavenumber(slot);
        *c = *c * i_pow(order) * k.powi(order as i32);
    }
}

/// `i^order`.
fn i_pow<T: Real>(order: u32) -> Complex<T> {
    let (o, z) = (T::one(), T::zero());
    match order % 4 {
        0 => Complex::new(o, z),
        1 => Complex::new(z, o),
        2 => Complex::new(-o, z),
        _ => Complex::new(z, -o),
    }
}
