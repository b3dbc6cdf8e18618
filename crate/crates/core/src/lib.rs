//! Pseudospectral solver and analysis toolkit for the Kuramoto-Sivashinsky
//! equation `u_t = -u_xx - u_xxxx - u u_x` on a periodic domain.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the scalar type.

pub mod chaos;
pub mod dynamics;
pub mod error;
pub mod linear;
pub mod scalar;
pub mod spectral;
pub mod stripes;

pub use chaos::{fit_slope, l2_norm, lyapunov1, separation_curve, LyapunovEstimate, LyapunovOptions};
pub use dynamics::{
    boost, evolve, ks_step, linear_evolve_exact, random_initial, reflect, translate, KsStepper,
    SolverParams, Trajectory,
};
pub use error::{KsError, Result};
pub use linear::{fastest_mode, growth_rate, mode_table, unstable_modes, FastestMode, ModeInfo};
pub use scalar::Real;
pub use spectral::{Grid, RealField, SpectralField};
pub use stripes::{
    density, density_from_slices, extract_stripes, match_slices, slice_at, smoothed_slope, track,
    ArcRef, DensityReport, EventCounts, EventKind, SmoothedSlope, StripeArc, StripeEvent, StripeOptions,
    StripeSlice, Tracking,
};

pub type Grid64 = Grid<f64>;
pub type RealField64 = RealField<f64>;
pub type SpectralField64 = SpectralField<f64>;
pub type SolverParams64 = SolverParams<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type StripeSlice64 = StripeSlice<f64>;
pub type Tracking64 = Tracking<f64>;
pub type DensityReport64 = DensityReport<f64>;
pub type LyapunovEstimate64 = LyapunovEstimate<f64>;

pub type Grid32 = Grid<f32>;
pub type RealField32 = RealField<f32>;
pub type SpectralField32 = SpectralField<f32>;
pub type SolverParams32 = SolverParams<f32>;
pub type Trajectory32 = Trajectory<f32>;
