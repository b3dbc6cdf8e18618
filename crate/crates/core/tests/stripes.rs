use std::f64::consts::PI;

use ks_core::*;
use proptest::prelude::*;

fn sign_pattern(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(-1.0), Just(0.0), Just(1.0), -1.0..1.0f64], n)
}

fn slice_of(g: &Grid64, t: f64, v: Vec<f64>) -> StripeSlice64 {
    extract_stripes(&SmoothedSlope::from_values(g.clone(), 2.0, v).unwrap(), t)
}

proptest! {
    #[test]
    fn arcs_are_maximal_negative_runs(v in sign_pattern(48)) {
        let g = Grid::new(48.0, 48).unwrap();
        let s = slice_of(&g, 0.0, v.clone());
        let mask = s.mask();
        for (j, &x) in v.iter().enumerate() {
            prop_assert_eq!(mask[j], x < 0.0);
        }
        let mut covered = 0;
        for a in &s.arcs {
            prop_assert!(a.width > 0.0);
            covered += a.len;
            if !a.is_full_circle(48) {
                prop_assert!(v[(a.start + 47) % 48] >= 0.0);
                prop_assert!(v[a.end] >= 0.0);
            }
        }
        prop_assert_eq!(covered, mask.iter().filter(|m| **m).count());
        prop_assert!(s.total_width() <= g.length() + 1e-12);
        prop_assert!(s.arcs.windows(2).all(|w| w[0].start < w[1].start));
    }

    #[test]
    fn event_accounting_balances(a in sign_pattern(40), b in sign_pattern(40)) {
        let g = Grid::new(40.0, 40).unwrap();
        let sa = slice_of(&g, 0.0, a);
        let sb = slice_of(&g, 0.25, b);
        let events = match_slices(&sa, &sb).unwrap();
        let c = EventCounts::tally(&events);
        let merge_loss: usize = events.iter().filter(|e| e.kind == EventKind::Merge).map(|e| e.before.len() - 1).sum();
        let split_gain: usize = events.iter().filter(|e| e.kind == EventKind::Split).map(|e| e.after.len() - 1).sum();
        prop_assert_eq!(
            sb.count() as i64,
            sa.count() as i64 + c.births as i64 - c.deaths as i64 - merge_loss as i64 + split_gain as i64
        );
        // every arc is referenced on each side; only merge+split overlap may double count
        for id in 0..sa.count() {
            let uses = events.iter().filter(|e| e.before.iter().any(|r| r.id == id)).count();
            prop_assert!(uses >= 1);
            if uses > 1 {
                prop_assert!(events.iter().any(|e| e.kind == EventKind::Split && e.before[0].id == id));
            }
        }
        for id in 0..sb.count() {
            let uses = events.iter().filter(|e| e.after.iter().any(|r| r.id == id)).count();
            prop_assert!(uses >= 1);
            if uses > 1 {
                prop_assert!(events.iter().any(|e| e.kind == EventKind::Merge && e.after[0].id == id));
            }
        }
    }

    #[test]
    fn stripes_follow_grid_translations(seed in 0u64..1000, m in 0usize..64) {
        let g = Grid::new(50.0, 64).unwrap();
        let u = random_initial(&g, seed);
        let shifted = translate(&u, m as f64 * g.dx());
        let a = extract_stripes(&smoothed_slope(&shifted, 2.0).unwrap(), 0.0);
        let b = extract_stripes(&smoothed_slope(&u, 2.0).unwrap(), 0.0).rotated(m);
        prop_assert_eq!(runs(&a), runs(&b));
    }

    #[test]
    fn stripes_follow_reflection(seed in 0u64..1000) {
        let g = Grid::new(50.0, 64).unwrap();
        let u = random_initial(&g, seed);
        let a = extract_stripes(&smoothed_slope(&reflect(&u), 2.0).unwrap(), 0.0);
        let b = extract_stripes(&smoothed_slope(&u, 2.0).unwrap(), 0.0).reflected();
        prop_assert_eq!(runs(&a), runs(&b));
    }
}

fn runs(s: &StripeSlice64) -> Vec<(usize, usize)> {
    s.arcs.iter().map(|a| (a.start, a.len)).collect()
}

#[test]
fn smoothed_slope_of_sine() {
    let l = 60.0;
    let g = Grid::new(l, 64).unwrap();
    let k = 4.0 * 2.0 * PI / l;
    let u = RealField::from_fn(g, |x| (k * x).sin()).unwrap();
    let v = smoothed_slope(&u, 2.0).unwrap();
    for (j, vj) in v.values().iter().enumerate() {
        let x = u.grid().x(j);
        assert!((vj - k * (-2.0 * k * k).exp() * (k * x).cos()).abs() < 1e-14);
    }
    let zero = smoothed_slope(&RealField::zeros(u.grid().clone()), 2.0).unwrap();
    assert!(zero.values().iter().all(|x| *x == 0.0));
}

/// Independent route: eighth-order finite differences on a 16x refined grid,
/// then a direct periodic sum against the wrapped Gaussian.
#[test]
fn smoothed_slope_matches_refined_spatial_convolution() {
    let l = 30.0;
    let n = 64;
    let refine = 16;
    let sigma = 2.0;
    let g = Grid::new(l, n).unwrap();
    // band-limited random field, evaluated analytically on any grid
    let modes: Vec<(f64, f64, f64)> = (1..=10)
        .map(|m| {
            let a = ((m * 7919) % 101) as f64 / 101.0 - 0.5;
            let b = ((m * 104729) % 97) as f64 / 97.0 - 0.5;
            (2.0 * PI * m as f64 / l, a, b)
        })
        .collect();
    let u_at = |x: f64| -> f64 { modes.iter().map(|&(k, a, b)| a * (k * x).cos() + b * (k * x).sin()).sum() };
    let u = RealField::from_fn(g.clone(), u_at).unwrap();
    let v = smoothed_slope(&u, sigma).unwrap();

    let fine_n = n * refine;
    let h = l / fine_n as f64;
    let fine: Vec<f64> = (0..fine_n).map(|i| u_at(i as f64 * h)).collect();
    let c = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let ux: Vec<f64> = (0..fine_n)
        .map(|i| {
            c.iter()
                .enumerate()
                .map(|(m, cm)| {
                    let d = m + 1;
                    cm * (fine[(i + d) % fine_n] - fine[(i + fine_n - d) % fine_n])
                })
                .sum::<f64>()
                / h
        })
        .collect();
    let kernel = |d: f64| -> f64 {
        (-10..=10)
            .map(|m| {
                let y = d + m as f64 * l;
                (-(y * y) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
            })
            .sum()
    };
    for j in 0..n {
        let xj = j as f64 * l / n as f64;
        let direct: f64 = (0..fine_n).map(|i| kernel(xj - i as f64 * h) * ux[i] * h).sum();
        assert!((v.values()[j] - direct).abs() < 1e-6, "j={j}: {} vs {direct}", v.values()[j]);
    }
}

#[test]
fn zero_trajectory_has_no_stripes() {
    let g = Grid::new(32.0 * PI, 64).unwrap();
    let p = SolverParams::new(g.clone(), 0.25, 10.0, 1).unwrap();
    let traj = evolve(&RealField::zeros(g), &p).unwrap();
    let opts = StripeOptions::new(2.0, 5.0);
    let tr = track(&traj, &opts).unwrap();
    assert!(tr.events.is_empty());
    assert_eq!(density(&traj, &opts).unwrap().density, 0.0);
}

#[test]
fn density_is_translation_invariant() {
    let g = Grid::new(32.0 * PI, 256).unwrap();
    let p = SolverParams::new(g.clone(), 0.05, 60.0, 20).unwrap();
    let traj = evolve(&random_initial(&g, 5), &p).unwrap();
    let shifted = traj.map_snapshots(|s| translate(s, 77.0 * g.dx())).unwrap();
    let opts = StripeOptions::new(2.0, 30.0);
    assert_eq!(
        density(&traj, &opts).unwrap().density,
        density(&shifted, &opts).unwrap().density
    );
}

#[test]
fn min_width_filter_only_removes_stripes() {
    let g = Grid::new(32.0 * PI, 256).unwrap();
    let p = SolverParams::new(g.clone(), 0.05, 60.0, 20).unwrap();
    let traj = evolve(&random_initial(&g, 6), &p).unwrap();
    let plain = StripeOptions::new(2.0, 30.0);
    let filtered = StripeOptions {
        min_width: Some(3.0),
        ..plain
    };
    assert!(density(&traj, &filtered).unwrap().density <= density(&traj, &plain).unwrap().density);
}

#[test]
fn empty_trajectory_rejected_by_track() {
    let g = Grid::new(10.0, 16).unwrap();
    let t = Trajectory::new(g, vec![], vec![]).unwrap();
    assert_eq!(track(&t, &StripeOptions::default()), Err(KsError::EmptyTrajectory));
}
