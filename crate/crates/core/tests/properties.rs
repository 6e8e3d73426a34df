//! Property tests for the spec-level invariants that hold over whole input
//! domains rather than single examples.

use proptest::prelude::*;
use std::collections::BTreeSet;
use uavguard_core::config::ScenarioConfig;
use uavguard_core::game::{thomas_solve, Tridiagonal};
use uavguard_core::graph::{dedup_pd, AttackPath, AttackStep};
use uavguard_core::metrics::{from_csv, to_csv, MetricsRow};
use uavguard_core::perception::{fuse_position, residual_to_probability};
use uavguard_core::swarm::{update_topology, Role, UavState};
use uavguard_core::threat::{SpoofAttack, Stealth};
use uavguard_core::trust::{bayes_update, update_local_trust, Outcome, TypeBelief};
use uavguard_core::Vec3;

fn uav(id: usize, x: f64, y: f64, z: f64) -> UavState {
    let p = Vec3::new(x, y, z);
    UavState {
        id,
        pos_true: p,
        pos_gps: p,
        velocity: Vec3::zeros(),
        role: Role::Legitimate,
        energy: 1.0,
        cdi: 0.0,
        admitted: true,
    }
}

proptest! {
    #[test]
    fn topology_symmetric_and_nested(coords in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64, 0.0..50.0f64), 2..24)) {
        let uavs: Vec<UavState> = coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z))| uav(i, x, y, z))
            .collect();
        let topo = update_topology(&uavs, 10.0, 50.0, 0);
        // comm_edges form a subset of sense_edges; stored pairs are ordered.
        for &(i, j) in &topo.comm_edges {
            prop_assert!(i < j);
            prop_assert!(topo.sense_edges.contains(&(i, j)));
        }
        // Symmetry: neighbor lists agree with the edge set in both roles.
        for i in 0..uavs.len() {
            for j in topo.sense_neighbors(i, uavs.len()) {
                prop_assert!(topo.sense_neighbors(j, uavs.len()).contains(&i));
            }
        }
    }

    #[test]
    fn spoof_bias_zero_at_start_monotone_inside(
        rate in 0.0..30.0f64,
        dir in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        t in 0.0..10.0f64,
    ) {
        prop_assume!(Vec3::new(dir.0, dir.1, dir.2).norm() > 1e-3);
        let attack = SpoofAttack::new(0, 2.0, 5.0, rate, Vec3::new(dir.0, dir.1, dir.2), Stealth::High).unwrap();
        prop_assert!((attack.bias(2.0)).abs() < 1e-12);
        if !(2.0..=5.0).contains(&t) {
            prop_assert_eq!(attack.bias(t), 0.0);
        } else {
            prop_assert!(attack.bias(t) >= 0.0);
            prop_assert!(attack.bias(t) <= attack.bias(5.0) + 1e-12);
        }
    }

    #[test]
    fn probability_in_unit_interval_and_monotone(k1 in 0.0..100.0f64, k2 in 0.0..100.0f64) {
        let p1 = residual_to_probability(k1, 1.0, 0.5);
        let p2 = residual_to_probability(k2, 1.0, 0.5);
        prop_assert!((0.0..=1.0).contains(&p1));
        if k1 < k2 {
            prop_assert!(p1 <= p2);
        }
    }

    #[test]
    fn fusion_stays_on_segment(
        gx in -50.0..50.0f64, gy in -50.0..50.0f64, gz in -50.0..50.0f64,
        rx in -50.0..50.0f64, ry in -50.0..50.0f64, rz in -50.0..50.0f64,
        prob in 0.0..=1.0f64,
    ) {
        let gps = Vec3::new(gx, gy, gz);
        let recon = Vec3::new(rx, ry, rz);
        let fused = fuse_position(gps, recon, prob);
        let d_total = (gps - recon).norm();
        prop_assert!((fused - gps).norm() <= d_total + 1e-9);
        prop_assert!((fused - recon).norm() <= d_total + 1e-9);
    }

    #[test]
    fn thomas_solves_random_dominant_systems(
        seed_rows in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64, -5.0..5.0f64), 2..40)
    ) {
        let n = seed_rows.len();
        let lower: Vec<f64> = seed_rows.iter().skip(1).map(|r| r.0).collect();
        let upper: Vec<f64> = seed_rows.iter().take(n - 1).map(|r| r.1).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let l: f64 = if i > 0 { lower[i - 1].abs() } else { 0.0 };
                let u: f64 = if i + 1 < n { upper[i].abs() } else { 0.0 };
                l + u + seed_rows[i].2
            })
            .collect();
        let rhs: Vec<f64> = seed_rows.iter().map(|r| r.3).collect();
        let sys = Tridiagonal::new(lower.clone(), diag.clone(), upper.clone(), rhs.clone()).unwrap();
        let x = thomas_solve(&sys).unwrap();
        // Residual check: A x = rhs.
        for i in 0..n {
            let mut lhs = diag[i] * x[i];
            if i > 0 {
                lhs += lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                lhs += upper[i] * x[i + 1];
            }
            prop_assert!((lhs - rhs[i]).abs() < 1e-8, "row {} residual {}", i, lhs - rhs[i]);
        }
    }

    #[test]
    fn trust_clamped_and_directional(t0 in -1.0..1.0f64, lambda in 0.05..0.95f64, eta in 1.0..5.0f64) {
        let good = update_local_trust(t0, Outcome::Good, lambda, eta);
        let bad = update_local_trust(t0, Outcome::Betrayal, lambda, eta);
        prop_assert!((-1.0..=1.0).contains(&good));
        prop_assert!((-1.0..=1.0).contains(&bad));
        prop_assert!(good >= t0 - 1e-12);
        prop_assert!(bad <= t0 + 1e-12);
    }

    #[test]
    fn type_belief_stays_in_open_interval(p0 in 0.0..=1.0f64, ll in 0.0..10.0f64, lm in 0.0..10.0f64) {
        let b = bayes_update(TypeBelief { p_legit: p0 }, ll, lm);
        if ll + lm > 0.0 {
            prop_assert!(b.p_legit >= 1e-6 && b.p_legit <= 1.0 - 1e-6);
        }
    }

    #[test]
    fn dedup_idempotent_and_shrinking(n_dups in 1..4usize, n_paths in 0..6usize) {
        let paths: Vec<AttackPath> = (0..n_paths)
            .map(|i| AttackPath {
                steps: vec![AttackStep {
                    src: format!("n{i}"),
                    priv_before: "user".into(),
                    vuln: format!("v{i}"),
                    dst: format!("m{i}"),
                    priv_after: "root".into(),
                }],
            })
            .collect();
        let mut duplicated = Vec::new();
        for _ in 0..n_dups {
            duplicated.extend(paths.clone());
        }
        let once = dedup_pd(duplicated.clone());
        prop_assert!(once.len() <= duplicated.len());
        prop_assert_eq!(once.len(), paths.len());
        let twice = dedup_pd(once.clone());
        prop_assert_eq!(once, twice);
        let set: BTreeSet<_> = paths.iter().cloned().collect();
        prop_assert_eq!(set.len(), paths.len());
    }

    #[test]
    fn csv_roundtrip_exact(
        vals in prop::collection::vec((0.0..1e6f64, 0.0..1e3f64, 0.0..1e4f64), 1..20)
    ) {
        let rows: Vec<MetricsRow> = vals
            .iter()
            .enumerate()
            .map(|(i, &(a, b, c))| MetricsRow {
                t: i as f64 * 0.1,
                mean_cost: a / 7.0,
                hardening_overhead: b * 3.0,
                mean_cdi: c / 13.0,
                victim_deviation: a.sqrt(),
                spoof_belief: (b / 1e3).clamp(0.0, 1.0),
                joint_trust_min: (c / 1e4) * 2.0 - 1.0,
                paths_open: (a as usize) % 17,
                recon_fallbacks: (b as usize) % 5,
                policy: "proposed".into(),
                seed: 42,
            })
            .collect();
        let text = to_csv(&ScenarioConfig::default(), &rows);
        let parsed = from_csv(&text).unwrap();
        prop_assert_eq!(parsed, rows);
    }
}
