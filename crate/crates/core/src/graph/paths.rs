//! The four attack-path agents: path reasoning (PR) over the provenance
//! graph, voting-based result verification (RV), path deduplication (PD),
//! and prefix-decomposition sub-path exploration (SPE).
//!
//! Agents are deterministic reasoners behind a pluggable backend interface;
//! the stochastic backend models an unreliable verifier (e.g. an LLM
//! adapter) for exercising the majority vote.

use super::engine::FixpointResult;
use super::{Atom, AttackPath, AttackStep, Fact, GraphError, HornRule, Term};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Contexts are has_priv facts: (agent, node, privilege).
fn is_ctx(f: &Fact) -> bool {
    f.pred == "has_priv" && f.args.len() == 3
}

/// Extract the exploit step carried by one derivation, if it has the
/// propagation/escalation shape: a has_priv body atom (source context), a
/// vuln body atom, and a has_priv head (target context).
fn step_of(head: &Fact, body: &[Fact]) -> Option<AttackStep> {
    if !is_ctx(head) {
        return None;
    }
    let src = body.iter().find(|f| is_ctx(f))?;
    let vuln = body.iter().find(|f| f.pred == "vuln")?;
    Some(AttackStep {
        src: src.args[1].clone(),
        priv_before: src.args[2].clone(),
        vuln: vuln.args[0].clone(),
        dst: head.args[1].clone(),
        priv_after: head.args[2].clone(),
    })
}

/// Exploit adjacency extracted from provenance: source context fact ->
/// (step, target context fact), sorted for deterministic traversal.
fn step_adjacency(result: &FixpointResult) -> BTreeMap<Fact, Vec<(AttackStep, Fact)>> {
    let mut adj: BTreeMap<Fact, Vec<(AttackStep, Fact)>> = BTreeMap::new();
    for (head, derivs) in &result.provenance {
        for d in derivs {
            if let Some(step) = step_of(head, &d.body) {
                let src = d.body.iter().find(|f| is_ctx(f)).unwrap().clone();
                adj.entry(src).or_default().push((step, head.clone()));
            }
        }
    }
    for exts in adj.values_mut() {
        exts.sort();
        exts.dedup();
    }
    adj
}

/// Entry contexts: has_priv facts with at least one derivation that does
/// not consume another has_priv fact (e.g. the entry-foothold rule).
fn root_contexts(result: &FixpointResult) -> Vec<Fact> {
    result
        .provenance
        .iter()
        .filter(|(head, derivs)| {
            is_ctx(head) && derivs.iter().any(|d| !d.body.iter().any(|b| is_ctx(b)))
        })
        .map(|(head, _)| head.clone())
        .collect()
}

/// Context facts that complete an attack: they support a derived
/// `compromised` fact.
fn terminal_contexts(result: &FixpointResult) -> BTreeSet<Fact> {
    let mut terminals = BTreeSet::new();
    for (head, derivs) in &result.provenance {
        if head.pred != "compromised" {
            continue;
        }
        for d in derivs {
            for b in &d.body {
                if is_ctx(b) {
                    terminals.insert(b.clone());
                }
            }
        }
    }
    terminals
}

/// PR: depth-first walk over the provenance graph from entry contexts
/// toward asset-reaching contexts, emitting simple paths (no repeated
/// (node, privilege) pair) up to `depth_cap` steps, at most `path_cap`
/// paths, in lexicographic step order.
pub fn trace_paths_pr(result: &FixpointResult, depth_cap: usize, path_cap: usize) -> Vec<AttackPath> {
    let adj = step_adjacency(result);
    let terminals = terminal_contexts(result);
    let mut roots = root_contexts(result);
    roots.sort();

    let mut paths = Vec::new();
    for root in roots {
        let mut visited: BTreeSet<(String, String)> = BTreeSet::new();
        visited.insert((root.args[1].clone(), root.args[2].clone()));
        let mut stack: Vec<AttackStep> = Vec::new();
        dfs(
            &root,
            &adj,
            &terminals,
            depth_cap,
            path_cap,
            &mut visited,
            &mut stack,
            &mut paths,
        );
        if paths.len() >= path_cap {
            break;
        }
    }
    paths.sort();
    paths.dedup();
    paths
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    ctx: &Fact,
    adj: &BTreeMap<Fact, Vec<(AttackStep, Fact)>>,
    terminals: &BTreeSet<Fact>,
    depth_cap: usize,
    path_cap: usize,
    visited: &mut BTreeSet<(String, String)>,
    stack: &mut Vec<AttackStep>,
    paths: &mut Vec<AttackPath>,
) {
    if !stack.is_empty() && terminals.contains(ctx) {
        paths.push(AttackPath { steps: stack.clone() });
    }
    if stack.len() >= depth_cap || paths.len() >= path_cap {
        return;
    }
    let Some(exts) = adj.get(ctx) else {
        return;
    };
    for (step, target) in exts {
        let key = (step.dst.clone(), step.priv_after.clone());
        if visited.contains(&key) {
            continue;
        }
        visited.insert(key.clone());
        stack.push(step.clone());
        dfs(target, adj, terminals, depth_cap, path_cap, visited, stack, paths);
        stack.pop();
        visited.remove(&key);
        if paths.len() >= path_cap {
            return;
        }
    }
}

/// Verification verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
}

/// A verification instance backend: receives the deterministic re-derivation
/// result for the whole path and returns this instance's verdict.
pub trait VerifyBackend {
    fn instance_verdict(&mut self, rederived_ok: bool, instance: usize) -> bool;
}

/// Faithful backend: reports exactly the re-derivation result.
#[derive(Debug, Default)]
pub struct DeterministicBackend;

impl VerifyBackend for DeterministicBackend {
    fn instance_verdict(&mut self, rederived_ok: bool, _instance: usize) -> bool {
        rederived_ok
    }
}

/// Unreliable backend: flips each instance verdict with probability `q`.
pub struct FlipBackend<R: Rng> {
    pub q: f64,
    pub rng: R,
}

impl<R: Rng> VerifyBackend for FlipBackend<R> {
    fn instance_verdict(&mut self, rederived_ok: bool, _instance: usize) -> bool {
        if self.rng.gen_range(0.0..1.0) < self.q {
            !rederived_ok
        } else {
            rederived_ok
        }
    }
}

/// Check one step against (facts, rules): some rule instance with a
/// has_priv head matching the step's target must be satisfiable from the
/// fact base, with the source context taken as premise.
fn step_justified(step: &AttackStep, facts: &BTreeSet<Fact>, rules: &[HornRule]) -> bool {
    'rules: for rule in rules {
        if rule.head.pred != "has_priv" || rule.head.args.len() != 3 {
            continue;
        }
        let Some(body_ctx_idx) = rule.body.iter().position(|a| a.pred == "has_priv") else {
            continue;
        };
        if !rule.body.iter().any(|a| a.pred == "vuln") {
            continue;
        }
        // Bind head to (_, dst, priv_after) and the body context to
        // (_, src, priv_before) under shared variables.
        let mut bindings: BTreeMap<String, String> = BTreeMap::new();
        let head_pattern = [None, Some(&step.dst), Some(&step.priv_after)];
        for (t, want) in rule.head.args.iter().zip(head_pattern.iter()) {
            if let Some(w) = want {
                match t {
                    Term::Const(c) => {
                        if &c != w {
                            continue 'rules;
                        }
                    }
                    Term::Var(v) => {
                        if let Some(prev) = bindings.insert(v.clone(), (*w).clone()) {
                            if &prev != *w {
                                continue 'rules;
                            }
                        }
                    }
                }
            }
        }
        let ctx_atom = &rule.body[body_ctx_idx];
        let ctx_pattern = [None, Some(&step.src), Some(&step.priv_before)];
        let mut ok = true;
        for (t, want) in ctx_atom.args.iter().zip(ctx_pattern.iter()) {
            if let Some(w) = want {
                match t {
                    Term::Const(c) => {
                        if &c != w {
                            ok = false;
                            break;
                        }
                    }
                    Term::Var(v) => {
                        if let Some(prev) = bindings.get(v) {
                            if prev != *w {
                                ok = false;
                                break;
                            }
                        } else {
                            bindings.insert(v.clone(), (*w).clone());
                        }
                    }
                }
            }
        }
        if !ok {
            continue;
        }
        // Remaining body atoms (all but the premise context) must be
        // satisfiable from the fact base; the vuln atom must bind the
        // step's vuln id.
        let rest: Vec<&Atom> = rule
            .body
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != body_ctx_idx)
            .map(|(_, a)| a)
            .collect();
        if satisfy(&rest, 0, &bindings, facts, &step.vuln) {
            return true;
        }
    }
    false
}

fn satisfy(
    atoms: &[&Atom],
    pos: usize,
    bindings: &BTreeMap<String, String>,
    facts: &BTreeSet<Fact>,
    vuln_id: &str,
) -> bool {
    if pos == atoms.len() {
        return true;
    }
    let atom = atoms[pos];
    for fact in facts.iter().filter(|f| f.pred == atom.pred) {
        if atom.pred == "vuln" && fact.args[0] != vuln_id {
            continue;
        }
        if atom.args.len() != fact.args.len() {
            continue;
        }
        let mut b = bindings.clone();
        let mut ok = true;
        for (t, v) in atom.args.iter().zip(fact.args.iter()) {
            match t {
                Term::Const(c) => {
                    if c != v {
                        ok = false;
                        break;
                    }
                }
                Term::Var(name) => match b.get(name) {
                    Some(bound) if bound != v => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        b.insert(name.clone(), v.clone());
                    }
                },
            }
        }
        if ok && satisfy(atoms, pos + 1, &b, facts, vuln_id) {
            return true;
        }
    }
    false
}

/// Deterministic re-derivation of a whole path: well-formed chain, every
/// step justified, and the final context reaching a critical asset at root.
pub fn rederive_path(path: &AttackPath, facts: &BTreeSet<Fact>, rules: &[HornRule]) -> bool {
    if !path.is_well_formed() {
        return false;
    }
    let last = match path.steps.last() {
        Some(s) => s,
        None => return false,
    };
    if last.priv_after != "root" || !facts.contains(&Fact::new("asset", &[&last.dst])) {
        return false;
    }
    path.steps.iter().all(|s| step_justified(s, facts, rules))
}

/// RV: run `v_instances` verification instances and take the majority. With
/// the deterministic backend the vote is unanimous.
pub fn verify_path_rv<B: VerifyBackend>(
    path: &AttackPath,
    facts: &BTreeSet<Fact>,
    rules: &[HornRule],
    backend: &mut B,
    v_instances: usize,
) -> Result<Verdict, GraphError> {
    if v_instances % 2 == 0 {
        return Err(GraphError::EvenInstances(v_instances));
    }
    let truth = rederive_path(path, facts, rules);
    let yes_votes = (0..v_instances)
        .filter(|&i| backend.instance_verdict(truth, i))
        .count();
    Ok(if yes_votes * 2 > v_instances {
        Verdict::Valid
    } else {
        Verdict::Invalid
    })
}

/// PD: canonicalize and merge logically equivalent paths (identical step
/// tuples). Idempotent; output never exceeds input.
pub fn dedup_pd(paths: Vec<AttackPath>) -> Vec<AttackPath> {
    let set: BTreeSet<AttackPath> = paths.into_iter().collect();
    set.into_iter().collect()
}

/// SPE: for every proper prefix of every path, search alternate
/// continuations that exclude the already-used next step; newly found paths
/// are verified and deduplicated before inclusion, recursively, bounded by
/// `depth_cap` and `path_cap`.
pub fn explore_spe(
    seed_paths: &[AttackPath],
    result: &FixpointResult,
    rules: &[HornRule],
    depth_cap: usize,
    path_cap: usize,
) -> Vec<AttackPath> {
    let adj = step_adjacency(result);
    let terminals = terminal_contexts(result);
    // Context lookup: (node, priv) -> context facts (agents rarely differ,
    // but stay general).
    let mut ctx_of: BTreeMap<(String, String), Vec<Fact>> = BTreeMap::new();
    for f in result.facts.iter().filter(|f| is_ctx(f)) {
        ctx_of
            .entry((f.args[1].clone(), f.args[2].clone()))
            .or_default()
            .push(f.clone());
    }

    let mut known: BTreeSet<AttackPath> = seed_paths.iter().cloned().collect();
    let mut queue: Vec<AttackPath> = seed_paths.to_vec();
    let mut backend = DeterministicBackend;

    while let Some(path) = queue.pop() {
        for prefix_len in 0..path.steps.len() {
            let prefix = &path.steps[..prefix_len];
            let excluded_next = &path.steps[prefix_len];
            // Context after the prefix.
            let (node, privilege) = if prefix_len == 0 {
                (excluded_next.src.clone(), excluded_next.priv_before.clone())
            } else {
                let last = &prefix[prefix_len - 1];
                (last.dst.clone(), last.priv_after.clone())
            };
            let Some(ctxs) = ctx_of.get(&(node.clone(), privilege.clone())) else {
                continue;
            };
            let mut visited: BTreeSet<(String, String)> = BTreeSet::new();
            visited.insert((
                if prefix_len == 0 { node.clone() } else { prefix[0].src.clone() },
                if prefix_len == 0 { privilege.clone() } else { prefix[0].priv_before.clone() },
            ));
            for s in prefix {
                visited.insert((s.dst.clone(), s.priv_after.clone()));
            }
            for ctx in ctxs {
                let mut found = Vec::new();
                let mut stack = prefix.to_vec();
                dfs_excluding(
                    ctx,
                    &adj,
                    &terminals,
                    depth_cap,
                    path_cap,
                    excluded_next,
                    prefix_len,
                    &mut visited.clone(),
                    &mut stack,
                    &mut found,
                );
                for candidate in found {
                    if known.contains(&candidate) {
                        continue;
                    }
                    if verify_path_rv(&candidate, &result.facts, rules, &mut backend, 1)
                        .is_ok_and(|v| v == Verdict::Valid)
                    {
                        known.insert(candidate.clone());
                        if known.len() < path_cap {
                            queue.push(candidate);
                        }
                    }
                }
            }
        }
        if known.len() >= path_cap {
            break;
        }
    }
    dedup_pd(known.into_iter().collect())
}

#[allow(clippy::too_many_arguments)]
fn dfs_excluding(
    ctx: &Fact,
    adj: &BTreeMap<Fact, Vec<(AttackStep, Fact)>>,
    terminals: &BTreeSet<Fact>,
    depth_cap: usize,
    path_cap: usize,
    excluded_first: &AttackStep,
    prefix_len: usize,
    visited: &mut BTreeSet<(String, String)>,
    stack: &mut Vec<AttackStep>,
    found: &mut Vec<AttackPath>,
) {
    if stack.len() > prefix_len && terminals.contains(ctx) {
        found.push(AttackPath { steps: stack.clone() });
    }
    if stack.len() >= depth_cap || found.len() >= path_cap {
        return;
    }
    let Some(exts) = adj.get(ctx) else {
        return;
    };
    for (step, target) in exts {
        // At the branch point, skip the continuation the seed path used.
        if stack.len() == prefix_len && step == excluded_first {
            continue;
        }
        let key = (step.dst.clone(), step.priv_after.clone());
        if visited.contains(&key) {
            continue;
        }
        visited.insert(key.clone());
        stack.push(step.clone());
        dfs_excluding(
            target,
            adj,
            terminals,
            depth_cap,
            path_cap,
            excluded_first,
            prefix_len,
            visited,
            stack,
            found,
        );
        stack.pop();
        visited.remove(&key);
    }
}
