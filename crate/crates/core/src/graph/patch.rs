//! Patch prioritization: rank vulnerabilities by exploitation frequency
//! across verified attack paths and topological proximity to critical
//! assets, then truncate to the per-slot budget.

use super::{AttackPath, Fact};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// One plan entry: vulnerability id and its priority score.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchEntry {
    pub vuln_id: String,
    pub score: f64,
}

/// Ordered remediation plan; scores are non-increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatchPlan {
    pub entries: Vec<PatchEntry>,
}

/// BFS hop distances to the nearest critical asset over the (undirected)
/// link graph.
fn hops_to_assets(facts: &BTreeSet<Fact>) -> BTreeMap<String, usize> {
    let mut adj: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for f in facts.iter().filter(|f| f.pred == "link") {
        adj.entry(f.args[0].clone()).or_default().push(f.args[1].clone());
        adj.entry(f.args[1].clone()).or_default().push(f.args[0].clone());
    }
    let mut dist: BTreeMap<String, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for f in facts.iter().filter(|f| f.pred == "asset") {
        dist.insert(f.args[0].clone(), 0);
        queue.push_back(f.args[0].clone());
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        if let Some(neighbors) = adj.get(&u) {
            for v in neighbors {
                if !dist.contains_key(v) {
                    dist.insert(v.clone(), d + 1);
                    queue.push_back(v.clone());
                }
            }
        }
    }
    dist
}

/// score(v) = freq(v)/total_steps + rho / (1 + minhops(v -> nearest asset)).
/// Only vulnerabilities appearing on at least one path are candidates; an
/// empty path set yields an empty plan.
pub fn prioritize_patches(
    paths: &[AttackPath],
    facts: &BTreeSet<Fact>,
    budget: usize,
    rho: f64,
) -> PatchPlan {
    if paths.is_empty() {
        return PatchPlan::default();
    }
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    let mut total_steps = 0usize;
    for p in paths {
        for s in &p.steps {
            *freq.entry(s.vuln.clone()).or_default() += 1;
            total_steps += 1;
        }
    }
    // Hosts of each vuln: nodes running its (service, version).
    let dist = hops_to_assets(facts);
    let mut host_hops: BTreeMap<String, usize> = BTreeMap::new();
    for v in facts.iter().filter(|f| f.pred == "vuln") {
        let (vid, svc, ver) = (&v.args[0], &v.args[1], &v.args[2]);
        let min_hops = facts
            .iter()
            .filter(|f| f.pred == "service" && &f.args[1] == svc && &f.args[2] == ver)
            .filter_map(|f| dist.get(&f.args[0]).copied())
            .min();
        if let Some(h) = min_hops {
            let entry = host_hops.entry(vid.clone()).or_insert(usize::MAX);
            *entry = (*entry).min(h);
        }
    }

    let mut entries: Vec<PatchEntry> = freq
        .iter()
        .map(|(vid, &count)| {
            let proximity = match host_hops.get(vid) {
                Some(&h) => rho / (1.0 + h as f64),
                None => 0.0,
            };
            PatchEntry {
                vuln_id: vid.clone(),
                score: count as f64 / total_steps as f64 + proximity,
            }
        })
        .collect();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.vuln_id.cmp(&b.vuln_id)));
    entries.truncate(budget);
    PatchPlan { entries }
}

/// Facts removed when a vulnerability is patched.
pub fn patch_removals(facts: &BTreeSet<Fact>, vuln_id: &str) -> Vec<Fact> {
    facts
        .iter()
        .filter(|f| f.pred == "vuln" && f.args[0] == vuln_id)
        .cloned()
        .collect()
}
