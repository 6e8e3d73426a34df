//! Acceptance suite: property-based checks plus qualitative-ordering
//! reproduction on the reference 500-UAV scenario. One pass/fail line per
//! criterion (run with `--nocapture` to see them).
//!
//! Criteria 1-3 share a single (policy x seed) batch of the default
//! scenario; expect the full suite to take several minutes on two cores.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeSet;
use std::sync::OnceLock;
use uavguard_core::baselines::{fls_harden, Policy};
use uavguard_core::config::{GameSection, ScenarioConfig};
use uavguard_core::game::{
    fictitious_play, solve_fpk, solve_hjb, solve_mfg, thomas_solve, MfgParams, OuterGame,
    Tridiagonal,
};
use uavguard_core::graph::{
    compile_facts, default_rules, engine::fixpoint, engine::naive_fixpoint, explore_spe,
    patch::patch_removals, trace_paths_pr, verify_path_rv, AttackPath, DeterministicBackend,
    Fact, FlipBackend, Verdict,
};
use uavguard_core::harness::{run_batch, run_scenario, window_mean, BatchOutput, RunOutput};
use uavguard_core::metrics::MetricsRow;
use uavguard_core::perception::{
    fuse_position, reconstruct_position, residual_to_probability, AnchorSet,
};
use uavguard_core::plot::{plot, PlotKind};
use uavguard_core::trust::{
    bayes_update, signal_likelihoods, simulate_task_execution, update_local_trust, Outcome,
    ProbeTask, TrustLedger, TypeBelief,
};
use uavguard_core::Vec3;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn batch() -> &'static BatchOutput {
    static BATCH: OnceLock<BatchOutput> = OnceLock::new();
    BATCH.get_or_init(|| {
        let cfg = ScenarioConfig::default();
        run_batch(&cfg, &Policy::all(), &SEEDS).expect("reference batch runs")
    })
}

fn runs_of(policy: Policy) -> Vec<&'static RunOutput> {
    batch()
        .runs
        .iter()
        .filter(|r| r.policy == policy)
        .collect()
}

fn mean_over_seeds(policy: Policy, t0: f64, t1: f64, f: impl Fn(&MetricsRow) -> f64 + Copy) -> f64 {
    let rs = runs_of(policy);
    rs.iter().map(|r| window_mean(&r.rows, t0, t1, f)).sum::<f64>() / rs.len() as f64
}

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_fig4_cost_ordering() {
    let p = mean_over_seeds(Policy::Proposed, 2.0, 5.0, |r| r.mean_cost);
    let gs = mean_over_seeds(Policy::Gs, 2.0, 5.0, |r| r.mean_cost);
    let lfs = mean_over_seeds(Policy::Lfs, 2.0, 5.0, |r| r.mean_cost);
    let cos = mean_over_seeds(Policy::Cos, 2.0, 5.0, |r| r.mean_cost);
    let ordering = p < gs && gs < lfs && lfs < cos;

    // COS is the per-slot maximum in at least 95% of slots, every seed.
    let mut worst_fraction: f64 = 1.0;
    for &seed in &SEEDS {
        let by = |pol: Policy| -> &RunOutput {
            batch()
                .runs
                .iter()
                .find(|r| r.policy == pol && r.seed == seed)
                .unwrap()
        };
        let cos_rows = &by(Policy::Cos).rows;
        let others = [Policy::Proposed, Policy::Gs, Policy::Lfs].map(by);
        let mut cos_max = 0usize;
        for (idx, row) in cos_rows.iter().enumerate() {
            if others.iter().all(|o| o.rows[idx].mean_cost <= row.mean_cost) {
                cos_max += 1;
            }
        }
        worst_fraction = worst_fraction.min(cos_max as f64 / cos_rows.len() as f64);
    }
    verdict(
        "1 fig4-cost-ordering",
        ordering && worst_fraction >= 0.95,
        &format!(
            "proposed {p:.5} < gs {gs:.5} < lfs {lfs:.5} < cos {cos:.5}; \
             COS per-slot max fraction >= {worst_fraction:.3}"
        ),
    );
}

#[test]
fn criterion_2_recovery_after_spoof() {
    // Within 2 s after the attack ends the proposed cost is back within 10%
    // of its pre-attack level; check the window starting at t = 7.
    let mut worst_ratio: f64 = 0.0;
    for r in runs_of(Policy::Proposed) {
        let pre = window_mean(&r.rows, 0.0, 2.0, |x| x.mean_cost);
        let post = window_mean(&r.rows, 7.0, 8.0, |x| x.mean_cost);
        worst_ratio = worst_ratio.max((post / pre - 1.0).abs());
    }
    verdict(
        "2 recovery",
        worst_ratio <= 0.10,
        &format!("max |post/pre - 1| over seeds = {worst_ratio:.4}"),
    );
}

fn slot_cov(rows: &[MetricsRow], t0: f64, t1: f64) -> f64 {
    let w: Vec<f64> = rows
        .iter()
        .filter(|r| r.t >= t0 && r.t < t1)
        .map(|r| r.hardening_overhead)
        .collect();
    let m = w.iter().sum::<f64>() / w.len() as f64;
    if m <= 0.0 {
        return 0.0;
    }
    let var = w.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / w.len() as f64;
    var.sqrt() / m
}

#[test]
fn criterion_3_fig5_overhead_ordering() {
    let p = mean_over_seeds(Policy::Proposed, 10.0, 30.0, |r| r.hardening_overhead);
    let fls = mean_over_seeds(Policy::Fls, 10.0, 30.0, |r| r.hardening_overhead);
    let sas = mean_over_seeds(Policy::Sas, 10.0, 30.0, |r| r.hardening_overhead);
    let gp = mean_over_seeds(Policy::Gp, 10.0, 30.0, |r| r.hardening_overhead);
    let ordering = p < fls.min(sas).min(gp);

    // FLS exhaustive reasoning grows geometrically with depth on a
    // branching-factor-3 instance.
    let facts = branching_instance(3, 6);
    let mut prev = 0u64;
    let mut min_ratio = f64::INFINITY;
    for depth in 2..=6 {
        let out = fls_harden(&facts, depth, 100_000_000);
        assert!(!out.truncated);
        if prev > 0 {
            min_ratio = min_ratio.min(out.firings as f64 / prev as f64);
        }
        prev = out.firings;
    }

    // SAS slot-overhead dispersion at least doubles the proposed pipeline's.
    let cov_p = SEEDS
        .iter()
        .map(|&s| {
            slot_cov(
                &batch()
                    .runs
                    .iter()
                    .find(|r| r.policy == Policy::Proposed && r.seed == s)
                    .unwrap()
                    .rows,
                10.0,
                30.0,
            )
        })
        .sum::<f64>()
        / SEEDS.len() as f64;
    let cov_s = SEEDS
        .iter()
        .map(|&s| {
            slot_cov(
                &batch()
                    .runs
                    .iter()
                    .find(|r| r.policy == Policy::Sas && r.seed == s)
                    .unwrap()
                    .rows,
                10.0,
                30.0,
            )
        })
        .sum::<f64>()
        / SEEDS.len() as f64;

    // Greedy patching spikes: every disruptive slot bills at least one full
    // 50-unit patch, and arrivals show up on plenty of slots.
    let mut gp_spikes_ok = true;
    let mut min_spike_slots = usize::MAX;
    for r in runs_of(Policy::Gp) {
        let spikes: Vec<f64> = r
            .rows
            .iter()
            .filter(|x| x.t >= 10.0 && x.t < 30.0 && x.hardening_overhead > 0.0)
            .map(|x| x.hardening_overhead)
            .collect();
        gp_spikes_ok &= spikes.iter().all(|&v| v >= 50.0);
        min_spike_slots = min_spike_slots.min(spikes.len());
    }

    verdict(
        "3 fig5-overhead-ordering",
        ordering && min_ratio >= 2.5 && cov_s >= 2.0 * cov_p && gp_spikes_ok && min_spike_slots >= 10,
        &format!(
            "proposed {p:.2} < min(fls {fls:.2}, sas {sas:.2}, gp {gp:.2}); \
             FLS depth ratio >= {min_ratio:.2}; CoV sas {cov_s:.3} vs proposed {cov_p:.3}; \
             GP spikes >= 50 on {min_spike_slots}+ arrival slots"
        ),
    );
}

fn branching_instance(branching: usize, depth: usize) -> BTreeSet<Fact> {
    let mut lines = vec!["entry t0".to_string()];
    let mut nodes = vec!["t0".to_string()];
    let mut frontier = vec!["t0".to_string()];
    let mut counter = 1usize;
    for _ in 0..depth {
        let mut next = Vec::new();
        for parent in &frontier {
            for _ in 0..branching {
                let id = format!("t{counter}");
                counter += 1;
                lines.push(format!("link {parent} {id}"));
                nodes.push(id.clone());
                next.push(id);
            }
        }
        frontier = next;
    }
    for n in &nodes {
        lines.push(format!("node {n}"));
        lines.push(format!("service {n} s0 1.0"));
    }
    for leaf in &frontier {
        lines.push(format!("asset {leaf}"));
    }
    lines.push("vuln b0 s0 1.0 user user".to_string());
    lines.push("vuln b1 s0 1.0 user root".to_string());
    compile_facts(&lines.join("\n"), "").unwrap().facts
}

/// Dense Gaussian elimination with partial pivoting (independent oracle).
fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x
}

/// Markov-chain dynamic-programming oracle for the HJB solve: explicit
/// backward Bellman recursion with binomial diffusion and linear
/// interpolation on the same lattice.
fn dp_value(params: &MfgParams, a_eff: f64, p_max: f64, np: usize) -> DMatrix<f64> {
    let ns = params.ns;
    let nt = params.nt;
    let ds = params.ds();
    let dt = params.dt();
    let s_axis = params.s_axis();
    let mut v = DMatrix::zeros(ns, nt);
    for i in 0..ns {
        v[(i, nt - 1)] = params.c_risk * s_axis[i] * s_axis[i];
    }
    let interp = |v: &DMatrix<f64>, n: usize, s: f64| -> f64 {
        let s = s.clamp(0.0, params.s_max);
        let x = s / ds;
        let i = (x.floor() as usize).min(ns - 2);
        let w = x - i as f64;
        v[(i, n)] * (1.0 - w) + v[(i + 1, n)] * w
    };
    let sig_step = params.sigma * dt.sqrt();
    for n in (0..nt - 1).rev() {
        for i in 0..ns {
            let s = s_axis[i];
            let mut best = f64::INFINITY;
            for k in 0..=np {
                let p = p_max * k as f64 / np as f64;
                let drift = a_eff - params.gamma * p * s;
                let s_next = s + drift * dt;
                let expected = 0.5 * interp(&v, n + 1, s_next + sig_step)
                    + 0.5 * interp(&v, n + 1, s_next - sig_step);
                best = best.min(params.running_cost(s, p, 0.0) * dt + expected);
            }
            v[(i, n)] = best;
        }
    }
    v
}

#[test]
fn criterion_4_numerical_kernels() {
    // Thomas vs dense solve, n up to 200.
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for &n in &[3usize, 20, 100, 200] {
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let l: f64 = if i > 0 { lower[i - 1].abs() } else { 0.0 };
                let u: f64 = if i + 1 < n { upper[i].abs() } else { 0.0 };
                l + u + rng.gen_range(0.2..1.0)
            })
            .collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let sys = Tridiagonal::new(lower.clone(), diag.clone(), upper.clone(), rhs.clone()).unwrap();
        let x = thomas_solve(&sys).unwrap();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i > 0 {
                dense[i][i - 1] = lower[i - 1];
            }
            if i + 1 < n {
                dense[i][i + 1] = upper[i];
            }
        }
        let y = dense_solve(&dense, &rhs);
        for (a, b) in x.iter().zip(y.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    let thomas_ok = worst <= 1e-10;

    // FPK mass conservation per step.
    let params = MfgParams::from_config(&GameSection::default());
    let p_star = DMatrix::from_element(params.ns, params.nt, 25.0);
    let mut m0 = vec![0.0; params.ns];
    m0[params.ns / 2] = 1.0;
    let fpk = solve_fpk(&params, &p_star, 6.0, &m0).unwrap();
    let mass_ok = fpk.max_mass_drift <= 1e-6;

    // Pure-diffusion variance growth within 10% of sigma^2 t.
    let mut diff = MfgParams::from_config(&GameSection::default());
    diff.ns = 301;
    diff.nt = 81;
    diff.gamma = 0.0;
    let mut d0 = vec![0.0; diff.ns];
    d0[diff.ns / 2] = 1.0;
    let dm = solve_fpk(&diff, &DMatrix::zeros(diff.ns, diff.nt), 0.0, &d0).unwrap().m;
    let var_at = |n: usize| -> f64 {
        let ds = diff.ds();
        let mean: f64 = (0..diff.ns).map(|i| i as f64 * ds * dm[(i, n)] * ds).sum();
        (0..diff.ns)
            .map(|i| {
                let s = i as f64 * ds;
                (s - mean).powi(2) * dm[(i, n)] * ds
            })
            .sum()
    };
    let grown = var_at(diff.nt - 1) - var_at(0);
    let expected = diff.sigma * diff.sigma * diff.t_horizon;
    let variance_ok = (grown - expected).abs() <= 0.1 * expected;

    // HJB vs the DP oracle on a coarse 21x21 grid, <= 5% relative.
    let mut coarse = MfgParams::from_config(&GameSection::default());
    coarse.ns = 21;
    coarse.nt = 21;
    coarse.s_max = 10.0;
    coarse.t_horizon = 1.0;
    coarse.c_cong = 0.0;
    let m_u = DMatrix::from_element(coarse.ns, coarse.nt, 1.0 / coarse.s_max);
    let zero = DMatrix::zeros(coarse.ns, coarse.nt);
    let (v_fd, _) = solve_hjb(&coarse, 6.0, 10.0, &m_u, &zero).unwrap();
    let v_dp = dp_value(&coarse, 6.0, 10.0, 40);
    let mut max_diff = 0.0f64;
    let mut max_mag = 0.0f64;
    for n in 0..coarse.nt {
        for i in 0..coarse.ns {
            max_diff = max_diff.max((v_fd[(i, n)] - v_dp[(i, n)]).abs());
            max_mag = max_mag.max(v_dp[(i, n)].abs());
        }
    }
    let hjb_rel = max_diff / max_mag;
    let hjb_ok = hjb_rel <= 0.05;

    // MFG fixed point on defaults.
    let defaults = MfgParams::from_config(&GameSection::default());
    let sol = solve_mfg(&defaults, 6.0, 40.0, &vec![1.0; defaults.ns]).unwrap();
    let mfg_ok = sol.converged && sol.iterations <= 20 && sol.last_change < 1e-4;

    verdict(
        "4 numerical-kernels",
        thomas_ok && mass_ok && variance_ok && hjb_ok && mfg_ok,
        &format!(
            "thomas-vs-dense {worst:.2e}; mass drift {:.2e}; variance {grown:.4} vs {expected:.4}; \
             HJB-vs-DP rel {hjb_rel:.4}; MFG {} iters (converged {})",
            fpk.max_mass_drift, sol.iterations, sol.converged
        ),
    );
}

/// Exhaustive mixture-grid minimax value for the column player (minimizer)
/// at the given simplex resolution; LP-free oracle.
fn grid_minimax(payoff: &DMatrix<f64>, steps: usize) -> f64 {
    let cols = payoff.ncols();
    let mut best = f64::INFINITY;
    // Enumerate the column mixture simplex at resolution 1/steps.
    let mut stack = vec![(Vec::<usize>::new(), steps)];
    while let Some((prefix, remaining)) = stack.pop() {
        if prefix.len() == cols - 1 {
            let mut weights: Vec<f64> = prefix.iter().map(|&k| k as f64 / steps as f64).collect();
            weights.push(remaining as f64 / steps as f64);
            // Row player responds with a pure best reply (maximizer).
            let worst = (0..payoff.nrows())
                .map(|i| {
                    (0..cols)
                        .map(|j| payoff[(i, j)] * weights[j])
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.min(worst);
            continue;
        }
        for k in 0..=remaining {
            let mut next = prefix.clone();
            next.push(k);
            stack.push((next, remaining - k));
        }
    }
    best
}

#[test]
fn criterion_5_game_layer() {
    // Matching pennies via fictitious play.
    let pennies = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
    let game = OuterGame::new(vec![0.0, 1.0], vec![0.0, 1.0], pennies);
    let fp = fictitious_play(&game, 10_000, 0.0);
    let pennies_ok = (fp.attacker[0] - 0.5).abs() <= 0.05
        && (fp.defender[0] - 0.5).abs() <= 0.05
        && fp.value.abs() <= 0.05;

    // 3x3 zero-sum matrices: FP value within eps of the grid minimax.
    let matrices = [
        DMatrix::from_row_slice(3, 3, &[0.0, 2.0, -1.0, -1.0, 0.0, 1.0, 1.0, -1.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[3.0, -1.0, 0.5, -2.0, 4.0, 1.0, 0.0, 2.0, -3.0]),
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 2.0, 0.5, 1.5, -0.5, -1.0, 2.5, 0.0]),
    ];
    let mut worst_gap = 0.0f64;
    for m in &matrices {
        let oracle = grid_minimax(m, 100);
        let game = OuterGame::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], m.clone());
        let fp = fictitious_play(&game, 50_000, 0.0);
        worst_gap = worst_gap.max((fp.value - oracle).abs());
    }
    let zero_sum_ok = worst_gap <= 0.05;

    verdict(
        "5 game-layer",
        pennies_ok && zero_sum_ok,
        &format!(
            "pennies mixtures ({:.3}, {:.3}), value {:.3}; max |FP - grid minimax| = {worst_gap:.4}",
            fp.attacker[0], fp.defender[0], fp.value
        ),
    );
}

#[test]
fn criterion_6_perception() {
    // Noiseless 4-anchor reconstruction.
    let anchors = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(10.0, 0.0, 0.0),
        Vec3::new(0.0, 10.0, 0.0),
        Vec3::new(0.0, 0.0, 10.0),
    ];
    let target = Vec3::new(3.0, 2.0, 4.0);
    let set = AnchorSet {
        anchors: (0..4).collect(),
        positions: anchors.to_vec(),
        ranges: anchors.iter().map(|a| (target - a).norm()).collect(),
    };
    let exact_err = (reconstruct_position(&set).unwrap().estimate - target).norm();

    // 0.1 m range noise, 6 anchors, 95th percentile over 200 trials.
    let mut errors = Vec::new();
    for seed in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let target = Vec3::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        let base = [
            Vec3::new(20.0, 0.0, 0.0),
            Vec3::new(-20.0, 5.0, 0.0),
            Vec3::new(0.0, 20.0, 5.0),
            Vec3::new(0.0, -20.0, -5.0),
            Vec3::new(5.0, 0.0, 20.0),
            Vec3::new(-5.0, 5.0, -20.0),
        ];
        let positions: Vec<Vec3> = base
            .iter()
            .map(|b| {
                b + Vec3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                )
            })
            .collect();
        let set = AnchorSet {
            anchors: (0..6).collect(),
            positions: positions.clone(),
            ranges: positions
                .iter()
                .map(|p| (target - p).norm() + rng.gen_range(-0.1..0.1))
                .collect(),
        };
        errors.push((reconstruct_position(&set).unwrap().estimate - target).norm());
    }
    errors.sort_by(f64::total_cmp);
    let p95 = errors[(0.95 * errors.len() as f64) as usize];

    // Monotonicity of the residual-probability map over a 1000-point sweep.
    let mut monotone = true;
    let mut prev = -1.0;
    for i in 0..1000 {
        let p = residual_to_probability(i as f64 * 0.01, 1.0, 0.5);
        monotone &= p > prev;
        prev = p;
    }
    // Fusion is the exact convex combination.
    let fused = fuse_position(Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0), 0.5);

    verdict(
        "6 perception",
        exact_err <= 1e-6 && p95 <= 0.5 && monotone && fused == Vec3::new(1.0, 0.0, 0.0),
        &format!("noiseless error {exact_err:.2e}; noisy p95 {p95:.3} m; monotone {monotone}"),
    );
}

#[test]
fn criterion_7_trust() {
    // Insider detection: p_legit < 0.1 after 20 probes in >= 90% of runs.
    let params = uavguard_core::config::TrustSection::default();
    let task = ProbeTask {
        target_pos: Vec3::new(50.0, 0.0, 0.0),
        deadline: 10.0,
        is_probe: true,
    };
    let mut detected = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut belief = TypeBelief::default();
        for _ in 0..20 {
            let sig = simulate_task_execution(
                &params,
                uavguard_core::swarm::Role::Insider,
                false,
                Vec3::zeros(),
                &task,
                10.0,
                &mut rng,
            );
            let (l_l, l_m) = signal_likelihoods(&params, &sig, task.deadline);
            belief = bayes_update(belief, l_l, l_m);
        }
        if belief.p_legit < 0.1 {
            detected += 1;
        }
    }

    // Camouflage cycle (10 Good, 1 Betrayal) stays below the anchor floor.
    let floor = uavguard_core::config::PerceptionSection::default().anchor_trust_floor;
    let mut ledger = TrustLedger::new(10);
    let mut peak: f64 = -1.0;
    for slot in 0..1000u64 {
        let outcome = if slot % 11 == 10 {
            Outcome::Betrayal
        } else {
            Outcome::Good
        };
        ledger.record(0, outcome, 0.9, 3.0);
        ledger.close_slot();
        if slot > 200 {
            peak = peak.max(ledger.aggregate());
        }
    }

    // Betrayal/good asymmetry, exact arithmetic.
    let t1 = update_local_trust(0.0, Outcome::Good, 0.9, 3.0);
    let after_three = update_local_trust(
        update_local_trust(t1, Outcome::Good, 0.9, 3.0),
        Outcome::Good,
        0.9,
        3.0,
    );
    let gain = after_three;
    let loss = after_three - update_local_trust(after_three, Outcome::Betrayal, 0.9, 3.0);

    verdict(
        "7 trust",
        detected >= 180 && peak < floor && loss >= gain,
        &format!(
            "insiders detected {detected}/200; camouflage peak {peak:.3} < floor {floor}; \
             one betrayal ({loss:.3}) erases three goods ({gain:.3})"
        ),
    );
}

#[test]
fn criterion_8_attack_graph() {
    let rules = default_rules();
    let mut all_equal = true;
    let mut complete = true;
    for seed in 0..20u64 {
        let facts = random_instance(seed);
        let semi = fixpoint(&facts, &rules);
        let (naive, _) = naive_fixpoint(&facts, &rules);
        all_equal &= semi.facts == naive;
        let pr: BTreeSet<AttackPath> = trace_paths_pr(&semi, 8, 100_000).into_iter().collect();
        let spe: BTreeSet<AttackPath> =
            explore_spe(&pr.iter().cloned().collect::<Vec<_>>(), &semi, &rules, 8, 100_000)
                .into_iter()
                .collect();
        let oracle = oracle_paths(&facts, 8);
        complete &= pr == oracle && spe == oracle;
    }

    // Monotone path-set shrinkage under patching.
    let mut facts = diamond();
    let mut prev: BTreeSet<AttackPath> =
        trace_paths_pr(&fixpoint(&facts, &rules), 8, 1000).into_iter().collect();
    let mut monotone = true;
    for vid in ["va", "vb", "vc"] {
        for f in patch_removals(&facts, vid) {
            facts.remove(&f);
        }
        let cur: BTreeSet<AttackPath> =
            trace_paths_pr(&fixpoint(&facts, &rules), 8, 1000).into_iter().collect();
        monotone &= cur.is_subset(&prev);
        prev = cur;
    }

    // RV majority error under q = 0.2, V = 5 stays within the binomial tail.
    let chain = diamond();
    let result = fixpoint(&chain, &rules);
    let path = trace_paths_pr(&result, 8, 10).remove(0);
    let bound = {
        let q: f64 = 0.2;
        let c = |n: u64, k: u64| -> f64 { (1..=k).map(|i| (n - k + i) as f64 / i as f64).product() };
        (3..=5u64)
            .map(|k| c(5, k) * q.powi(k as i32) * (1.0 - q).powi(5 - k as i32))
            .sum::<f64>()
    };
    let mut backend = FlipBackend {
        q: 0.2,
        rng: ChaCha12Rng::seed_from_u64(1),
    };
    let mut errors = 0u32;
    for _ in 0..10_000 {
        if verify_path_rv(&path, &chain, &rules, &mut backend, 5).unwrap() != Verdict::Valid {
            errors += 1;
        }
    }
    let rate = errors as f64 / 10_000.0;
    // Sanity: the deterministic backend is unanimous.
    let mut det = DeterministicBackend;
    let det_ok = verify_path_rv(&path, &chain, &rules, &mut det, 5).unwrap() == Verdict::Valid;

    verdict(
        "8 attack-graph",
        all_equal && complete && monotone && rate <= bound && det_ok,
        &format!(
            "semi-naive == naive on 20 instances: {all_equal}; PR+SPE+PD == brute force: {complete}; \
             monotone shrinkage: {monotone}; RV error {rate:.4} <= binomial bound {bound:.4}"
        ),
    );
}

fn diamond() -> BTreeSet<Fact> {
    compile_facts(
        "node n0\nnode n1\nnode n2\nnode n3\n\
         link n0 n1\nlink n1 n3\nlink n0 n2\nlink n2 n3\n\
         service n1 sa 1.0\nservice n2 sb 1.0\nservice n3 sc 1.0\n\
         vuln va sa 1.0 user user\nvuln vb sb 1.0 user user\nvuln vc sc 1.0 user root\n\
         entry n0\nasset n3\n",
        "",
    )
    .unwrap()
    .facts
}

fn random_instance(seed: u64) -> BTreeSet<Fact> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = 8;
    let mut lines = Vec::new();
    for i in 0..n {
        lines.push(format!("node m{i}"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.2) {
                lines.push(format!("link m{i} m{j}"));
            }
        }
    }
    let n_vulns = rng.gen_range(3..=8);
    for v in 0..n_vulns {
        let svc = v % 3;
        let (pre, post) = match rng.gen_range(0..3) {
            0 => ("user", "user"),
            1 => ("user", "root"),
            _ => ("root", "root"),
        };
        lines.push(format!("vuln w{v} s{svc} 1.0 {pre} {post}"));
    }
    for i in 0..n {
        if rng.gen_bool(0.5) {
            lines.push(format!("service m{i} s{} 1.0", rng.gen_range(0..3)));
        }
    }
    lines.push("entry m0".to_string());
    lines.push(format!("asset m{}", n - 1));
    compile_facts(&lines.join("\n"), "").unwrap().facts
}

/// Brute-force simple-path enumeration straight off the fact base.
fn oracle_paths(facts: &BTreeSet<Fact>, depth_cap: usize) -> BTreeSet<AttackPath> {
    use uavguard_core::graph::AttackStep;
    let links: Vec<(String, String)> = facts
        .iter()
        .filter(|f| f.pred == "link")
        .map(|f| (f.args[0].clone(), f.args[1].clone()))
        .collect();
    let services: Vec<(String, String, String)> = facts
        .iter()
        .filter(|f| f.pred == "service")
        .map(|f| (f.args[0].clone(), f.args[1].clone(), f.args[2].clone()))
        .collect();
    let vulns: Vec<(String, String, String, String, String)> = facts
        .iter()
        .filter(|f| f.pred == "vuln")
        .map(|f| {
            (
                f.args[0].clone(),
                f.args[1].clone(),
                f.args[2].clone(),
                f.args[3].clone(),
                f.args[4].clone(),
            )
        })
        .collect();
    let assets: BTreeSet<String> = facts
        .iter()
        .filter(|f| f.pred == "asset")
        .map(|f| f.args[0].clone())
        .collect();
    let entries: Vec<String> = facts
        .iter()
        .filter(|f| f.pred == "entry")
        .map(|f| f.args[0].clone())
        .collect();

    let steps_from = |node: &str, privilege: &str| -> Vec<AttackStep> {
        let mut out = Vec::new();
        let mut push_for = |dst: &str| {
            for (sn, sname, sver) in &services {
                if sn != dst {
                    continue;
                }
                for (vid, vs, vv, pre, post) in &vulns {
                    if vs == sname && vv == sver && pre == privilege {
                        out.push(AttackStep {
                            src: node.to_string(),
                            priv_before: privilege.to_string(),
                            vuln: vid.clone(),
                            dst: dst.to_string(),
                            priv_after: post.clone(),
                        });
                    }
                }
            }
        };
        for (a, b) in &links {
            if a == node {
                push_for(b);
            } else if b == node {
                push_for(a);
            }
        }
        push_for(node);
        out.sort();
        out.dedup();
        out
    };

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        node: &str,
        privilege: &str,
        steps_from: &dyn Fn(&str, &str) -> Vec<AttackStep>,
        assets: &BTreeSet<String>,
        depth_cap: usize,
        visited: &mut BTreeSet<(String, String)>,
        stack: &mut Vec<AttackStep>,
        out: &mut BTreeSet<AttackPath>,
    ) {
        if !stack.is_empty() && privilege == "root" && assets.contains(node) {
            out.insert(AttackPath { steps: stack.clone() });
        }
        if stack.len() >= depth_cap {
            return;
        }
        for step in steps_from(node, privilege) {
            let key = (step.dst.clone(), step.priv_after.clone());
            if visited.contains(&key) {
                continue;
            }
            visited.insert(key.clone());
            stack.push(step.clone());
            dfs(&step.dst, &step.priv_after, steps_from, assets, depth_cap, visited, stack, out);
            stack.pop();
            visited.remove(&key);
        }
    }

    let mut out = BTreeSet::new();
    for e in entries {
        let mut visited = BTreeSet::new();
        visited.insert((e.clone(), "user".to_string()));
        dfs(&e, "user", &steps_from, &assets, depth_cap, &mut visited, &mut Vec::new(), &mut out);
    }
    out
}

#[test]
fn criterion_9_determinism() {
    // The shared batch already holds a (proposed, seed 1) run; a fresh,
    // independently constructed run must be byte-identical, CSV and SVG.
    let from_batch = batch()
        .runs
        .iter()
        .find(|r| r.policy == Policy::Proposed && r.seed == 1)
        .unwrap();
    let fresh = run_scenario(&ScenarioConfig::default(), Policy::Proposed, 1).unwrap();
    let csv_ok = from_batch.csv == fresh.csv;

    let series = vec![
        ("proposed".to_string(), from_batch.rows.clone()),
        ("fresh".to_string(), fresh.rows.clone()),
    ];
    let svg_a = plot(&series, PlotKind::Cost, (2.0, 5.0)).unwrap();
    let svg_b = plot(&series, PlotKind::Cost, (2.0, 5.0)).unwrap();
    let svg_ok = svg_a == svg_b;
    verdict(
        "9 determinism",
        csv_ok && svg_ok,
        &format!("CSV byte-identical: {csv_ok}; SVG byte-identical: {svg_ok}"),
    );
}

#[test]
fn default_scenario_file_matches_code_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/default.toml");
    let loaded = ScenarioConfig::load(&path).expect("scenarios/default.toml loads");
    assert_eq!(loaded, ScenarioConfig::default());
}
