//! The six comparison strategies: three CDI policies (COS, LFS, GS) and
//! three hardening strategies (FLS, SAS, GP). Each produces the same metric
//! stream as the proposed mechanisms; only the decision rule differs.

use crate::game::MfgParams;
use crate::graph::{naive_fixpoint, AttackPath, AttackStep, Fact, HornRule};
use rand::Rng;
use std::collections::BTreeSet;

/// Which strategy bundle a run uses. The first four select the CDI axis
/// (with proposed hardening); the last three select the hardening axis
/// (with the proposed CDI policy).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Proposed,
    Cos,
    Lfs,
    Gs,
    Fls,
    Sas,
    Gp,
}

impl Policy {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "proposed" => Policy::Proposed,
            "cos" => Policy::Cos,
            "lfs" => Policy::Lfs,
            "gs" => Policy::Gs,
            "fls" => Policy::Fls,
            "sas" => Policy::Sas,
            "gp" => Policy::Gp,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Proposed => "proposed",
            Policy::Cos => "cos",
            Policy::Lfs => "lfs",
            Policy::Gs => "gs",
            Policy::Fls => "fls",
            Policy::Sas => "sas",
            Policy::Gp => "gp",
        }
    }

    pub fn all() -> [Policy; 7] {
        [
            Policy::Proposed,
            Policy::Cos,
            Policy::Lfs,
            Policy::Gs,
            Policy::Fls,
            Policy::Sas,
            Policy::Gp,
        ]
    }

    /// CDI decision rule for this bundle.
    pub fn cdi_axis(&self) -> CdiPolicy {
        match self {
            Policy::Cos => CdiPolicy::Cos,
            Policy::Lfs => CdiPolicy::Lfs,
            Policy::Gs => CdiPolicy::Gs,
            _ => CdiPolicy::Mpc,
        }
    }

    /// Hardening strategy for this bundle.
    pub fn hardening_axis(&self) -> Hardening {
        match self {
            Policy::Fls => Hardening::Fls,
            Policy::Sas => Hardening::Sas,
            Policy::Gp => Hardening::Gp,
            _ => Hardening::Proposed,
        }
    }

    /// The behavioral trust stack belongs to the proposed framework; the
    /// plain CDI baselines run without it.
    pub fn trust_enabled(&self) -> bool {
        !matches!(self, Policy::Cos | Policy::Lfs | Policy::Gs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdiPolicy {
    Mpc,
    Cos,
    Lfs,
    Gs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hardening {
    Proposed,
    Fls,
    Sas,
    Gp,
}

/// Continuous Operation Strategy: maximal-range cooperation at all times.
pub fn cos_policy(r_sense: f64) -> f64 {
    r_sense
}

/// Linear Feedback Strategy: CDI proportional to the deviation estimate.
pub fn lfs_policy(deviation: f64, gain: f64, r_sense: f64) -> f64 {
    (gain * deviation).clamp(0.0, r_sense)
}

/// Greedy Strategy: one-step lookahead, no horizon and no attack model.
/// Minimizes instantaneous cost plus the next slot's deviation risk over
/// the CDI grid.
pub fn gs_policy(deviation: f64, p_grid: &[f64], mfg: &MfgParams, dt: f64, pbar: f64) -> f64 {
    let mut best = 0.0;
    let mut best_cost = f64::INFINITY;
    for &p in p_grid {
        let s_next = deviation * (1.0 - mfg.gamma * p * dt);
        let j = mfg.running_cost(deviation, p, pbar) + mfg.c_risk * s_next * s_next;
        if j < best_cost {
            best_cost = j;
            best = p;
        }
    }
    best
}

/// Outcome of one hardening reasoning round under a baseline strategy.
#[derive(Debug, Clone)]
pub struct HardenOutcome {
    pub paths: Vec<AttackPath>,
    /// Rule firings (units of 1).
    pub firings: u64,
    pub truncated: bool,
}

/// Formal Logic Strategy: exhaustive DFS over all simple privilege-state
/// sequences, no provenance pruning, no dedup, no sub-path reuse. Every
/// expansion is one firing; the walk is truncated (and flagged) at
/// `fire_cap`.
pub fn fls_harden(facts: &BTreeSet<Fact>, depth_cap: usize, fire_cap: u64) -> HardenOutcome {
    let view = FactView::new(facts);
    let mut paths = Vec::new();
    let mut firings = 0u64;
    let mut truncated = false;
    for entry in &view.entries {
        let mut visited = BTreeSet::new();
        visited.insert((entry.clone(), "user".to_string()));
        let mut stack = Vec::new();
        exhaustive_dfs(
            &view,
            entry,
            "user",
            depth_cap,
            fire_cap,
            &mut visited,
            &mut stack,
            &mut paths,
            &mut firings,
            &mut truncated,
        );
    }
    paths.sort();
    HardenOutcome {
        paths,
        firings,
        truncated,
    }
}

/// Direct fact-base view used by the exhaustive strategies.
struct FactView {
    links: Vec<(String, String)>,
    services: Vec<(String, String, String)>,
    vulns: Vec<(String, String, String, String, String)>,
    assets: BTreeSet<String>,
    entries: Vec<String>,
}

impl FactView {
    fn new(facts: &BTreeSet<Fact>) -> Self {
        Self {
            links: facts
                .iter()
                .filter(|f| f.pred == "link")
                .map(|f| (f.args[0].clone(), f.args[1].clone()))
                .collect(),
            services: facts
                .iter()
                .filter(|f| f.pred == "service")
                .map(|f| (f.args[0].clone(), f.args[1].clone(), f.args[2].clone()))
                .collect(),
            vulns: facts
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
                .collect(),
            assets: facts
                .iter()
                .filter(|f| f.pred == "asset")
                .map(|f| f.args[0].clone())
                .collect(),
            entries: facts
                .iter()
                .filter(|f| f.pred == "entry")
                .map(|f| f.args[0].clone())
                .collect(),
        }
    }

    fn steps_from(&self, node: &str, privilege: &str) -> Vec<AttackStep> {
        let mut out = Vec::new();
        for (a, b) in &self.links {
            let dst = if a == node {
                b
            } else if b == node {
                a
            } else {
                continue;
            };
            self.push_exploits(node, privilege, dst, &mut out);
        }
        // Local escalation on the current node.
        let own = node.to_string();
        self.push_exploits(node, privilege, &own, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn push_exploits(&self, src: &str, privilege: &str, dst: &str, out: &mut Vec<AttackStep>) {
        for (sn, sname, sver) in &self.services {
            if sn != dst {
                continue;
            }
            for (vid, vs, vv, pre, post) in &self.vulns {
                if vs == sname && vv == sver && pre == privilege {
                    out.push(AttackStep {
                        src: src.to_string(),
                        priv_before: privilege.to_string(),
                        vuln: vid.clone(),
                        dst: dst.to_string(),
                        priv_after: post.clone(),
                    });
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn exhaustive_dfs(
    view: &FactView,
    node: &str,
    privilege: &str,
    depth_cap: usize,
    fire_cap: u64,
    visited: &mut BTreeSet<(String, String)>,
    stack: &mut Vec<AttackStep>,
    paths: &mut Vec<AttackPath>,
    firings: &mut u64,
    truncated: &mut bool,
) {
    if !stack.is_empty() && privilege == "root" && view.assets.contains(node) {
        paths.push(AttackPath { steps: stack.clone() });
    }
    if stack.len() >= depth_cap || *truncated {
        return;
    }
    for step in view.steps_from(node, privilege) {
        let key = (step.dst.clone(), step.priv_after.clone());
        if visited.contains(&key) {
            continue;
        }
        *firings += 1;
        if *firings >= fire_cap {
            *truncated = true;
            return;
        }
        visited.insert(key.clone());
        stack.push(step.clone());
        exhaustive_dfs(
            view,
            &step.dst,
            &step.priv_after,
            depth_cap,
            fire_cap,
            visited,
            stack,
            paths,
            firings,
            truncated,
        );
        stack.pop();
        visited.remove(&key);
        if *truncated {
            return;
        }
    }
}

/// Single-Agent Strategy accounting for one round: naive re-derivation
/// firings, hallucination retries (each triggers one failed verification),
/// and occasional whole-session resets that multiply the round's work.
#[derive(Debug, Clone, Copy)]
pub struct SasRound {
    pub firings: u64,
    pub retries: u64,
    /// Work multiplier from session resets (1 = clean run).
    pub reset_multiplier: u64,
}

pub fn sas_harden<R: Rng>(
    facts: &BTreeSet<Fact>,
    rules: &[HornRule],
    paths: &[AttackPath],
    error_prob: f64,
    reset_prob: f64,
    reset_mult_max: u64,
    rng: &mut R,
) -> SasRound {
    let (_, firings) = naive_fixpoint(facts, rules);
    // Sequential path derivation: every hallucinated step fails
    // verification and is retried.
    let mut retries = 0u64;
    for p in paths {
        for _ in &p.steps {
            if rng.gen_range(0.0..1.0) < error_prob {
                retries += 1;
            }
        }
    }
    let reset_multiplier = if reset_prob > 0.0 && rng.gen_range(0.0..1.0) < reset_prob {
        rng.gen_range(2..=reset_mult_max.max(2))
    } else {
        1
    };
    SasRound {
        firings,
        retries,
        reset_multiplier,
    }
}
