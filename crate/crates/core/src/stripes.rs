//! Stripes: maximal circular arcs where the Gaussian-smoothed slope `v = G_sigma * u_x`
//! is strictly negative, tracked between consecutive saved slices.

use std::fmt;

use crate::dynamics::Trajectory;
use crate::error::{KsError, Result};
use crate::scalar::Real;
use crate::spectral::{Grid, RealField};

/// Default smoothing width, in the same length units as `x`.
pub const DEFAULT_SIGMA: f64 = 2.0;

/// `v = G_sigma * u_x` sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedSlope<T: Real> {
    grid: Grid<T>,
    sigma: T,
    values: Vec<T>,
}

impl<T: Real> SmoothedSlope<T> {
    /// Wraps precomputed samples of `v`; mostly useful for exercising stripe extraction directly.
    pub fn from_values(grid: Grid<T>, sigma: T, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(KsError::LengthMismatch {
                expected: grid.points(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            sigma,
            values,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Spectral derivative followed by Gaussian smoothing.
pub fn smoothed_slope<T: Real>(u: &RealField<T>, sigma: T) -> Result<SmoothedSlope<T>> {
    let v = u.to_spectral().derivative(1).gaussian_smooth(sigma)?.to_real();
    SmoothedSlope::from_values(u.grid().clone(), sigma, v.into_values())
}

/// A maximal run of grid samples with `v < 0`, read circularly.
///
/// Covers indices `start, start+1, ..., start+len-1` (mod N); `end = (start + len) mod N`
/// is exclusive. A full-circle arc has `start = end = 0` and `len = N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripeArc<T: Real> {
    pub start: usize,
    pub end: usize,
    pub len: usize,
    /// Midpoint of the arc in length units, in `[0, L)`.
    pub centroid: T,
    pub width: T,
}

impl<T: Real> StripeArc<T> {
    fn new(grid: &Grid<T>, start: usize, len: usize) -> Self {
        let n = grid.points();
        let dx = grid.dx();
        let mid = T::from_usize_lossy(start) + T::from_usize_lossy(len - 1) / T::lit(2.0);
        let mut centroid = mid * dx;
        if centroid >= grid.length() {
            centroid = centroid - grid.length();
        }
        Self {
            start,
            end: (start + len) % n,
            len,
            centroid,
            width: T::from_usize_lossy(len) * dx,
        }
    }

    pub fn is_full_circle(&self, n: usize) -> bool {
        self.len == n
    }

    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> {
        let start = self.start;
        (0..self.len).map(move |i| (start + i) % n)
    }
}

/// Stripes at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct StripeSlice<T: Real> {
    pub t: T,
    grid: Grid<T>,
    /// Ordered by `start`.
    pub arcs: Vec<StripeArc<T>>,
}

impl<T: Real> StripeSlice<T> {
    /// Builds a slice from `(start, len)` pairs.
    pub fn from_runs(grid: Grid<T>, t: T, runs: &[(usize, usize)]) -> Result<Self> {
        let n = grid.points();
        let mut covered = vec![false; n];
        let mut arcs = Vec::with_capacity(runs.len());
        for &(start, len) in runs {
            if start >= n || len == 0 || len > n {
                return Err(KsError::InvalidParameter(format!(
                    "arc ({start}, {len}) does not fit a {n}-point grid"
                )));
            }
            let arc = StripeArc::new(&grid, if len == n { 0 } else { start }, len);
            for j in arc.indices(n) {
                if covered[j] {
                    return Err(KsError::InvalidParameter("arcs overlap".into()));
                }
                covered[j] = true;
            }
            arcs.push(arc);
        }
        arcs.sort_by_key(|a| a.start);
        Ok(Self { t, grid, arcs })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn count(&self) -> usize {
        self.arcs.len()
    }

    pub fn total_width(&self) -> T {
        self.arcs.iter().fold(T::zero(), |acc, a| acc + a.width)
    }

    /// Drops arcs narrower than `min_width`.
    pub fn filter_min_width(&self, min_width: T) -> Self {
        Self {
            t: self.t,
            grid: self.grid.clone(),
            arcs: self.arcs.iter().copied().filter(|a| a.width >= min_width).collect(),
        }
    }

    /// Shifts every arc by `m` grid cells.
    pub fn rotated(&self, m: usize) -> Self {
        let n = self.grid.points();
        let runs: Vec<_> = self.arcs.iter().map(|a| ((a.start + m) % n, a.len)).collect();
        Self::from_runs(self.grid.clone(), self.t, &runs).expect("rotation preserves disjointness")
    }

    /// Mirrors every arc through index 0 (`j -> -j mod N`).
    pub fn reflected(&self) -> Self {
        let n = self.grid.points();
        let runs: Vec<_> = self
            .arcs
            .iter()
            .map(|a| ((n + n - (a.start + a.len - 1) % n) % n, a.len))
            .collect();
        Self::from_runs(self.grid.clone(), self.t, &runs).expect("reflection preserves disjointness")
    }

    /// Per-sample membership mask.
    pub fn mask(&self) -> Vec<bool> {
        let n = self.grid.points();
        let mut mask = vec![false; n];
        for a in &self.arcs {
            for j in a.indices(n) {
                mask[j] = true;
            }
        }
        mask
    }
}

/// Maximal circular runs of strictly negative samples.
pub fn extract_stripes<T: Real>(v: &SmoothedSlope<T>, t: T) -> StripeSlice<T> {
    let n = v.grid.points();
    let negative: Vec<bool> = v.values.iter().map(|&x| x < T::zero()).collect();
    let Some(anchor) = negative.iter().position(|&neg| !neg) else {
        return StripeSlice {
            t,
            grid: v.grid.clone(),
            arcs: vec![StripeArc::new(&v.grid, 0, n)],
        };
    };

    let mut arcs = Vec::new();
    let mut run_start = None;
    // Start just past a non-negative sample so no run straddles the scan boundary.
    for step in 1..=n {
        let j = (anchor + step) % n;
        match (negative[j], run_start) {
            (true, None) => run_start = Some((j, step)),
            (false, Some((start, first))) => {
                arcs.push(StripeArc::new(&v.grid, start, step - first));
                run_start = None;
            }
            _ => {}
        }
    }
    arcs.sort_by_key(|a| a.start);
    StripeSlice {
        t,
        grid: v.grid.clone(),
        arcs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Continue,
    Birth,
    Death,
    Merge,
    Split,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Continue => "continue",
            EventKind::Birth => "birth",
            EventKind::Death => "death",
            EventKind::Merge => "merge",
            EventKind::Split => "split",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An arc as referenced by an event: its position in the slice plus its bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcRef {
    pub id: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripeEvent<T: Real> {
    pub t_before: T,
    pub t_after: T,
    pub kind: EventKind,
    pub before: Vec<ArcRef>,
    pub after: Vec<ArcRef>,
}

fn arc_ref<T: Real>(slice: &StripeSlice<T>, id: usize) -> ArcRef {
    let a = &slice.arcs[id];
    ArcRef {
        id,
        start: a.start,
        end: a.end,
    }
}

/// Links arcs of consecutive slices that share at least one grid index and
/// classifies the links.
pub fn match_slices<T: Real>(a: &StripeSlice<T>, b: &StripeSlice<T>) -> Result<Vec<StripeEvent<T>>> {
    if a.grid != b.grid {
        return Err(KsError::GridMismatch);
    }
    let n = a.grid.points();
    let mut owner = vec![usize::MAX; n];
    for (id, arc) in a.arcs.iter().enumerate() {
        for j in arc.indices(n) {
            owner[j] = id;
        }
    }
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); b.arcs.len()];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); a.arcs.len()];
    for (bid, arc) in b.arcs.iter().enumerate() {
        for j in arc.indices(n) {
            let aid = owner[j];
            if aid != usize::MAX && !preds[bid].contains(&aid) {
                preds[bid].push(aid);
            }
        }
        preds[bid].sort_unstable();
        for &aid in &preds[bid] {
            succs[aid].push(bid);
        }
    }

    let event = |kind, before: Vec<usize>, after: Vec<usize>| StripeEvent {
        t_before: a.t,
        t_after: b.t,
        kind,
        before: before.into_iter().map(|id| arc_ref(a, id)).collect(),
        after: after.into_iter().map(|id| arc_ref(b, id)).collect(),
    };

    let mut events = Vec::new();
    for (aid, s) in succs.iter().enumerate() {
        if let [bid] = s[..] {
            if preds[bid].len() == 1 {
                events.push(event(EventKind::Continue, vec![aid], vec![bid]));
            }
        }
    }
    for (bid, p) in preds.iter().enumerate() {
        if p.is_empty() {
            events.push(event(EventKind::Birth, vec![], vec![bid]));
        }
    }
    for (aid, s) in succs.iter().enumerate() {
        if s.is_empty() {
            events.push(event(EventKind::Death, vec![aid], vec![]));
        }
    }
    for (bid, p) in preds.iter().enumerate() {
        if p.len() >= 2 {
            events.push(event(EventKind::Merge, p.clone(), vec![bid]));
        }
    }
    for (aid, s) in succs.iter().enumerate() {
        if s.len() >= 2 {
            events.push(event(EventKind::Split, vec![aid], s.clone()));
        }
    }
    Ok(events)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub continued: usize,
    pub births: usize,
    pub deaths: usize,
    pub merges: usize,
    pub splits: usize,
}

impl EventCounts {
    pub fn add(&mut self, kind: EventKind) {
        match kind {
            EventKind::Continue => self.continued += 1,
            EventKind::Birth => self.births += 1,
            EventKind::Death => self.deaths += 1,
            EventKind::Merge => self.merges += 1,
            EventKind::Split => self.splits += 1,
        }
    }

    pub fn tally<'a, T: Real + 'a>(events: impl IntoIterator<Item = &'a StripeEvent<T>>) -> Self {
        let mut c = Self::default();
        for e in events {
            c.add(e.kind);
        }
        c
    }
}

/// Stripe definition and bookkeeping knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripeOptions<T: Real> {
    pub sigma: T,
    /// Slices and transitions starting before this time count as transient.
    pub t_transient: T,
    /// Arcs narrower than this are dropped; `None` keeps everything.
    pub min_width: Option<T>,
}

impl<T: Real> StripeOptions<T> {
    pub fn new(sigma: T, t_transient: T) -> Self {
        Self {
            sigma,
            t_transient,
            min_width: None,
        }
    }

    fn is_post_transient(&self, t: T) -> bool {
        let slack = T::lit(1e-9) * self.t_transient.abs().max(T::one());
        t >= self.t_transient - slack
    }
}

impl Default for StripeOptions<f64> {
    fn default() -> Self {
        Self::new(DEFAULT_SIGMA, 50.0)
    }
}

/// Stripes of one snapshot under `opts`.
pub fn slice_at<T: Real>(u: &RealField<T>, t: T, opts: &StripeOptions<T>) -> Result<StripeSlice<T>> {
    let slice = extract_stripes(&smoothed_slope(u, opts.sigma)?, t);
    Ok(match opts.min_width {
        Some(w) => slice.filter_min_width(w),
        None => slice,
    })
}

/// Slices, events and event tallies of a whole trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Tracking<T: Real> {
    pub slices: Vec<StripeSlice<T>>,
    pub events: Vec<StripeEvent<T>>,
    /// Transitions with `t_before < t_transient`.
    pub transient: EventCounts,
    /// Transitions with `t_before >= t_transient`.
    pub settled: EventCounts,
}

impl<T: Real> Tracking<T> {
    /// Events other than `continue`.
    pub fn notable_events(&self) -> impl Iterator<Item = &StripeEvent<T>> {
        self.events.iter().filter(|e| e.kind != EventKind::Continue)
    }
}

pub fn track<T: Real>(trajectory: &Trajectory<T>, opts: &StripeOptions<T>) -> Result<Tracking<T>> {
    if trajectory.is_empty() {
        return Err(KsError::EmptyTrajectory);
    }
    let slices = trajectory
        .iter()
        .map(|(t, u)| slice_at(u, t, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut events = Vec::new();
    let mut transient = EventCounts::default();
    let mut settled = EventCounts::default();
    for pair in slices.windows(2) {
        let step = match_slices(&pair[0], &pair[1])?;
        let bucket = if opts.is_post_transient(pair[0].t) {
            &mut settled
        } else {
            &mut transient
        };
        for e in &step {
            bucket.add(e.kind);
        }
        events.extend(step);
    }
    Ok(Tracking {
        slices,
        events,
        transient,
        settled,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport<T: Real> {
    pub length: T,
    pub t_transient: T,
    /// `(t, stripe count)` for every slice.
    pub counts: Vec<(T, usize)>,
    /// Mean count over slices with `t >= t_transient`.
    pub mean_count: T,
    /// `mean_count / L`.
    pub density: T,
}

/// Density from already-extracted slices.
pub fn density_from_slices<T: Real>(
    length: T,
    slices: &[StripeSlice<T>],
    opts: &StripeOptions<T>,
) -> Result<DensityReport<T>> {
    let counts: Vec<(T, usize)> = slices.iter().map(|s| (s.t, s.count())).collect();
    let settled: Vec<usize> = counts
        .iter()
        .filter(|(t, _)| opts.is_post_transient(*t))
        .map(|&(_, c)| c)
        .collect();
    if settled.is_empty() {
        return Err(KsError::NoPostTransientSlices {
            t_transient: opts.t_transient.to_f64_lossy(),
        });
    }
    let total: usize = settled.iter().sum();
    let mean_count = T::from_usize_lossy(total) / T::from_usize_lossy(settled.len());
    Ok(DensityReport {
        length,
        t_transient: opts.t_transient,
        counts,
        mean_count,
        density: mean_count / length,
    })
}

pub fn density<T: Real>(trajectory: &Trajectory<T>, opts: &StripeOptions<T>) -> Result<DensityReport<T>> {
    let slices = trajectory
        .iter()
        .map(|(t, u)| slice_at(u, t, opts))
        .collect::<Result<Vec<_>>>()?;
    density_from_slices(trajectory.grid().length(), &slices, opts)
}
