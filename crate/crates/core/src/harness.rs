//! Scenario orchestration: single runs, (policy x seed) batches with the
//! qualitative-ordering summary, all deterministic per seed.

use crate::baselines::Policy;
use crate::config::ScenarioConfig;
use crate::metrics::{to_csv, MetricsRow};
use crate::sim::{SimError, Simulation};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Result of one scenario run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub policy: Policy,
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub csv: String,
}

/// Run one (config, policy, seed) tuple to completion.
pub fn run_scenario(
    config: &ScenarioConfig,
    policy: Policy,
    seed: u64,
) -> Result<RunOutput, SimError> {
    let mut sim = Simulation::new(config.clone(), policy, seed)?;
    sim.run()?;
    let csv = to_csv(&sim.config, &sim.rows);
    Ok(RunOutput {
        policy,
        seed,
        rows: sim.rows,
        csv,
    })
}

/// Mean of a metric over rows with t in [t0, t1).
pub fn window_mean(rows: &[MetricsRow], t0: f64, t1: f64, f: impl Fn(&MetricsRow) -> f64) -> f64 {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.t >= t0 && r.t < t1)
        .map(f)
        .collect();
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

/// Batch outcome: every run plus the ordering summary.
#[derive(Debug)]
pub struct BatchOutput {
    pub runs: Vec<RunOutput>,
    pub summary: String,
    pub orderings_pass: bool,
}

/// Run the (policy x seed) cross product concurrently (each run is
/// internally deterministic) and assemble the summary with the window-mean
/// cost/overhead ordering checks.
pub fn run_batch(
    config: &ScenarioConfig,
    policies: &[Policy],
    seeds: &[u64],
) -> Result<BatchOutput, SimError> {
    if policies.is_empty() || seeds.is_empty() {
        return Err(SimError::Config(crate::config::ConfigError::Invalid(
            "batch needs at least one policy and one seed".into(),
        )));
    }
    let jobs: Vec<(Policy, u64)> = policies
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let results: Vec<Result<RunOutput, SimError>> = jobs
        .par_iter()
        .map(|&(policy, seed)| run_scenario(config, policy, seed))
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(r) => runs.push(r),
            Err(e) => {
                return Err(SimError::Fault {
                    slot: 0,
                    message: format!("run ({}, seed {}) failed: {e}", job.0.name(), job.1),
                })
            }
        }
    }

    let summary = summarize(config, policies, seeds, &runs);
    let orderings_pass = summary.contains("cost ordering: PASS")
        && summary.contains("overhead ordering: PASS");
    Ok(BatchOutput {
        runs,
        summary,
        orderings_pass,
    })
}

fn mean_over_seeds(
    runs: &[RunOutput],
    policy: Policy,
    t0: f64,
    t1: f64,
    f: impl Fn(&MetricsRow) -> f64 + Copy,
) -> Option<f64> {
    let vals: Vec<f64> = runs
        .iter()
        .filter(|r| r.policy == policy)
        .map(|r| window_mean(&r.rows, t0, t1, f))
        .collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

fn summarize(
    config: &ScenarioConfig,
    policies: &[Policy],
    seeds: &[u64],
    runs: &[RunOutput],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# batch summary: {} policies x {} seeds", policies.len(), seeds.len());
    let (c0, c1) = (config.spoof.t_start, config.spoof.t_end);
    let (h0, h1) = (config.penetration.t_start, config.penetration.t_end);
    let _ = writeln!(out, "# cost window [{c0}, {c1}) s, overhead window [{h0}, {h1}) s");

    let _ = writeln!(out, "policy,window_mean_cost,window_mean_overhead");
    let mut cost = std::collections::BTreeMap::new();
    let mut over = std::collections::BTreeMap::new();
    for &p in policies {
        let c = mean_over_seeds(runs, p, c0, c1, |r| r.mean_cost);
        let h = mean_over_seeds(runs, p, h0, h1, |r| r.hardening_overhead);
        if let (Some(c), Some(h)) = (c, h) {
            let _ = writeln!(out, "{},{},{}", p.name(), c, h);
            cost.insert(p.name(), c);
            over.insert(p.name(), h);
        }
    }

    // Fig. 4 qualitative ordering on window-mean cost.
    if let (Some(&p), Some(&gs), Some(&lfs), Some(&cos)) = (
        cost.get("proposed"),
        cost.get("gs"),
        cost.get("lfs"),
        cost.get("cos"),
    ) {
        let ok = p < gs && gs < lfs && lfs < cos;
        let _ = writeln!(
            out,
            "cost ordering: {} (proposed {p} < gs {gs} < lfs {lfs} < cos {cos})",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    // Fig. 5 qualitative ordering on window-mean overhead.
    if let (Some(&p), Some(&fls), Some(&sas), Some(&gp)) = (
        over.get("proposed"),
        over.get("fls"),
        over.get("sas"),
        over.get("gp"),
    ) {
        let floor = fls.min(sas).min(gp);
        let ok = p < floor;
        let _ = writeln!(
            out,
            "overhead ordering: {} (proposed {p} < min(fls {fls}, sas {sas}, gp {gp}))",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    out
}
