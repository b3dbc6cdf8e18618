//! Closed-form facts about the linearized equation `u_t = -u_xx - u_xxxx`.

use crate::scalar::Real;
use crate::spectral::Grid;

/// Growth rate `k^2 - k^4` of a Fourier mode with wavenumber `k`.
pub fn growth_rate<T: Real>(k: T) -> T {
    let k2 = k * k;
    k2 - k2 * k2
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeInfo<T: Real> {
    pub n: i64,
    pub k: T,
    pub rate: T,
}

impl<T: Real> ModeInfo<T> {
    pub fn new(grid: &Grid<T>, n: i64) -> Self {
        let k = grid.wavenumber(n);
        Self {
            n,
            k,
            rate: growth_rate(k),
        }
    }
}

/// Every represented mode `0 < |n| < N/2` with strictly positive growth rate,
/// fastest first. Equal rates are ordered by `|n|`, then positive `n` first.
pub fn unstable_modes<T: Real>(grid: &Grid<T>) -> Vec<ModeInfo<T>> {
    let half = (grid.points() / 2) as i64;
    let mut modes: Vec<_> = (1..half)
        .flat_map(|m| [m, -m])
        .map(|n| ModeInfo::new(grid, n))
        .filter(|m| m.rate > T::zero())
        .collect();
    modes.sort_by(|a, b| {
        b.rate
            .partial_cmp(&a.rate)
            .expect("finite rates")
            .then(a.n.abs().cmp(&b.n.abs()))
            .then(b.n.cmp(&a.n))
    });
    modes
}

/// All represented modes with `n > 0`, in order of `n`.
pub fn mode_table<T: Real>(grid: &Grid<T>) -> Vec<ModeInfo<T>> {
    let half = (grid.points() / 2) as i64;
    (1..half).map(|n| ModeInfo::new(grid, n)).collect()
}

/// The fastest-growing mode on a grid alongside the continuum optimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastestMode<T: Real> {
    /// Discrete maximizer with `n > 0`; its mirror `-n` grows equally fast.
    pub mode: ModeInfo<T>,
    /// `1 / sqrt(2)`, where `k^2 - k^4` peaks at `1/4`.
    pub continuum_k: T,
    /// `2^(3/2) pi`.
    pub continuum_wavelength: T,
    /// `(2^(3/2) pi)^-1`, about 0.1125.
    pub continuum_inverse_wavelength: T,
}

pub fn continuum_fastest_k<T: Real>() -> T {
    T::FRAC_1_SQRT_2()
}

pub fn continuum_fastest_wavelength<T: Real>() -> T {
    T::TAU() / continuum_fastest_k::<T>()
}

/// Fastest discrete mode; ties go to the smaller `|n|`.
pub fn fastest_mode<T: Real>(grid: &Grid<T>) -> FastestMode<T> {
    let mut best = ModeInfo::new(grid, 1);
    for m in mode_table(grid).into_iter().skip(1) {
        if m.rate > best.rate {
            best = m;
        }
    }
    let wavelength = continuum_fastest_wavelength::<T>();
    FastestMode {
        mode: best,
        continuum_k: continuum_fastest_k(),
        continuum_wavelength: wavelength,
        continuum_inverse_wavelength: T::one() / wavelength,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn growth_rate_values() {
        assert_eq!(growth_rate(0.0), 0.0);
        assert_eq!(growth_rate(1.0), 0.0);
        assert!((growth_rate(std::f64::consts::FRAC_1_SQRT_2) - 0.25).abs() < 1e-16);
        assert_eq!(growth_rate(0.3), growth_rate(-0.3));
    }

    #[test]
    fn no_unstable_modes_on_small_domains() {
        assert!(unstable_modes(&Grid::new(2.0 * PI, 16).unwrap()).is_empty());
        assert!(unstable_modes(&Grid::new(4.0, 16).unwrap()).is_empty());
    }

    #[test]
    fn unstable_census_matches_enumeration() {
        let g = Grid::new(32.0 * PI, 256).unwrap();
        let modes = unstable_modes(&g);
        // brute force: every n in the band whose rate is positive
        let mut brute: Vec<i64> = (-127..128)
            .filter(|&n| n != 0)
            .filter(|&n| {
                let k = 2.0 * PI * n as f64 / (32.0 * PI);
                k * k - k.powi(4) > 0.0
            })
            .collect();
        brute.sort();
        let mut got: Vec<i64> = modes.iter().map(|m| m.n).collect();
        got.sort();
        assert_eq!(got, brute);
        assert_eq!(got.len(), 30);
        assert!(modes.windows(2).all(|w| w[0].rate >= w[1].rate));
        assert_eq!(modes[0].n, 11);
        assert_eq!(modes[1].n, -11);
    }

    #[test]
    fn fastest_mode_cases() {
        let g = Grid::new(32.0 * PI, 256).unwrap();
        let f = fastest_mode(&g);
        assert_eq!(f.mode.n, 11);
        assert!((f.mode.k - 0.6875).abs() < 1e-15);
        assert!((f.continuum_inverse_wavelength - 1.0 / (2f64.powf(1.5) * PI)).abs() < 1e-15);

        for m in 1..6 {
            let l = 2f64.powf(1.5) * PI * m as f64;
            let g = Grid::new(l, 64).unwrap();
            let f = fastest_mode(&g);
            assert_eq!(f.mode.n, m);
            assert!((f.mode.rate - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn census_non_decreasing_in_length() {
        let mut last = 0;
        for i in 1..200 {
            let g = Grid::new(i as f64, 512).unwrap();
            let count = unstable_modes(&g).len();
            assert!(count >= last);
            last = count;
        }
    }
}
