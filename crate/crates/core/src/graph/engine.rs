//! Bottom-up Datalog evaluation: semi-naive fixpoint with full provenance,
//! incremental fact addition, and delete-rederive retraction (used when a
//! patch removes vulnerability facts or the scanned topology changes).
//!
//! A "firing" is one successful rule instantiation, counted once per
//! distinct (head, rule, body-tuple); firings are the unit of reasoning
//! overhead.

use super::{Atom, Fact, HornRule, Term};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// One way a fact was derived: the rule index and the bound body facts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Derivation {
    pub rule: usize,
    pub body: Vec<Fact>,
}

type Provenance = BTreeMap<Fact, BTreeSet<Derivation>>;

/// Fact storage with per-predicate and (predicate, position, value)
/// indexes so joins can seek on whichever argument is already ground.
#[derive(Debug, Clone, Default)]
struct Store {
    all: BTreeSet<Fact>,
    by_pred: HashMap<String, BTreeSet<Fact>>,
    by_pred_arg: HashMap<(String, usize, String), BTreeSet<Fact>>,
}

impl Store {
    fn contains(&self, f: &Fact) -> bool {
        self.all.contains(f)
    }

    fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    fn insert(&mut self, f: Fact) -> bool {
        if !self.all.insert(f.clone()) {
            return false;
        }
        self.by_pred.entry(f.pred.clone()).or_default().insert(f.clone());
        for (pos, arg) in f.args.iter().enumerate() {
            self.by_pred_arg
                .entry((f.pred.clone(), pos, arg.clone()))
                .or_default()
                .insert(f.clone());
        }
        true
    }

    fn remove(&mut self, f: &Fact) {
        if !self.all.remove(f) {
            return;
        }
        if let Some(set) = self.by_pred.get_mut(&f.pred) {
            set.remove(f);
        }
        for (pos, arg) in f.args.iter().enumerate() {
            if let Some(set) = self.by_pred_arg.get_mut(&(f.pred.clone(), pos, arg.clone())) {
                set.remove(f);
            }
        }
    }

    /// Candidate facts for an atom under the current bindings: seek on the
    /// first argument position that is already ground, falling back to the
    /// whole relation.
    fn candidates<'a>(
        &'a self,
        atom: &Atom,
        bindings: &BTreeMap<String, String>,
    ) -> Box<dyn Iterator<Item = &'a Fact> + 'a> {
        for (pos, term) in atom.args.iter().enumerate() {
            let value = match term {
                Term::Const(c) => Some(c.clone()),
                Term::Var(v) => bindings.get(v).cloned(),
            };
            if let Some(value) = value {
                return match self.by_pred_arg.get(&(atom.pred.clone(), pos, value)) {
                    Some(set) => Box::new(set.iter()),
                    None => Box::new(std::iter::empty()),
                };
            }
        }
        match self.by_pred.get(&atom.pred) {
            Some(set) => Box::new(set.iter()),
            None => Box::new(std::iter::empty()),
        }
    }
}

fn unify(atom: &Atom, fact: &Fact, bindings: &BTreeMap<String, String>) -> Option<BTreeMap<String, String>> {
    if atom.pred != fact.pred || atom.args.len() != fact.args.len() {
        return None;
    }
    let mut b = bindings.clone();
    for (t, v) in atom.args.iter().zip(fact.args.iter()) {
        match t {
            Term::Const(c) => {
                if c != v {
                    return None;
                }
            }
            Term::Var(name) => match b.get(name) {
                Some(bound) => {
                    if bound != v {
                        return None;
                    }
                }
                None => {
                    b.insert(name.clone(), v.clone());
                }
            },
        }
    }
    Some(b)
}

fn instantiate_head(head: &Atom, bindings: &BTreeMap<String, String>) -> Fact {
    Fact {
        pred: head.pred.clone(),
        args: head
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                // Range restriction guarantees every head variable is bound.
                Term::Var(v) => bindings[v].clone(),
            })
            .collect(),
    }
}

/// Enumerate all instantiations of `rule` where position `delta_pos` is
/// bound from the delta, earlier positions from pre-delta facts only, and
/// later positions from everything. Visits each instantiation exactly once
/// across delta positions. With an empty-ish delta semantics (`delta_pos`
/// facts drawn from `all` when `delta` is `None`) this degenerates to a
/// full evaluation pass.
fn join_rule(
    rule: &HornRule,
    rule_idx: usize,
    delta_pos: usize,
    all: &Store,
    delta: Option<&Store>,
    out: &mut Vec<(Fact, Derivation)>,
) {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        rule: &HornRule,
        rule_idx: usize,
        delta_pos: usize,
        pos: usize,
        bindings: BTreeMap<String, String>,
        chosen: &mut Vec<Fact>,
        all: &Store,
        delta: Option<&Store>,
        out: &mut Vec<(Fact, Derivation)>,
    ) {
        if pos == rule.body.len() {
            let head = instantiate_head(&rule.head, &bindings);
            out.push((
                head,
                Derivation {
                    rule: rule_idx,
                    body: chosen.clone(),
                },
            ));
            return;
        }
        let atom = &rule.body[pos];
        // Position == delta_pos draws from the delta; positions before it
        // draw from old facts only (all minus delta); later positions from
        // everything.
        let (store, exclude_delta) = match (delta, pos.cmp(&delta_pos)) {
            (Some(d), std::cmp::Ordering::Equal) => (d, false),
            (Some(_), std::cmp::Ordering::Less) => (all, true),
            _ => (all, false),
        };
        let cands: Vec<Fact> = store
            .candidates(atom, &bindings)
            .filter(|f| !exclude_delta || !delta.is_some_and(|d| d.contains(f)))
            .cloned()
            .collect();
        for fact in cands {
            if let Some(b) = unify(atom, &fact, &bindings) {
                chosen.push(fact);
                recurse(rule, rule_idx, delta_pos, pos + 1, b, chosen, all, delta, out);
                chosen.pop();
            }
        }
    }
    recurse(
        rule,
        rule_idx,
        delta_pos,
        0,
        BTreeMap::new(),
        &mut Vec::new(),
        all,
        delta,
        out,
    );
}

/// Snapshot of an evaluation: the least fixpoint and every derivation found.
#[derive(Debug, Clone)]
pub struct FixpointResult {
    pub facts: BTreeSet<Fact>,
    pub provenance: BTreeMap<Fact, Vec<Derivation>>,
    pub firings: u64,
}

/// Persistent engine: keeps base facts, derived facts, and provenance so
/// later slots pay only for genuinely new reasoning.
#[derive(Debug, Clone)]
pub struct Engine {
    rules: Vec<HornRule>,
    base: BTreeSet<Fact>,
    store: Store,
    provenance: Provenance,
    /// Every (head, derivation) ever billed: re-validating a derivation the
    /// provenance cache has already seen costs nothing.
    billed: std::collections::HashSet<(Fact, Derivation)>,
    pub firings_total: u64,
}

impl Engine {
    pub fn new(rules: Vec<HornRule>) -> Self {
        Self {
            rules,
            base: BTreeSet::new(),
            store: Store::default(),
            provenance: Provenance::new(),
            billed: std::collections::HashSet::new(),
            firings_total: 0,
        }
    }

    pub fn rules(&self) -> &[HornRule] {
        &self.rules
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.store.all
    }

    pub fn base_facts(&self) -> &BTreeSet<Fact> {
        &self.base
    }

    pub fn provenance_of(&self, fact: &Fact) -> Option<&BTreeSet<Derivation>> {
        self.provenance.get(fact)
    }

    /// Add base facts and run the semi-naive closure. Returns the number of
    /// new rule firings.
    pub fn add_facts<I: IntoIterator<Item = Fact>>(&mut self, facts: I) -> u64 {
        let mut delta = Store::default();
        for f in facts {
            if self.base.insert(f.clone()) && !self.store.contains(&f) {
                delta.insert(f.clone());
                self.store.insert(f);
            } else if self.base.contains(&f) && !self.store.contains(&f) {
                // Base fact previously retracted and re-added.
                delta.insert(f.clone());
                self.store.insert(f);
            }
        }
        self.close_from(delta)
    }

    /// Semi-naive rounds seeded by `delta`, which must already be in the
    /// store. Bills one firing per new derivation.
    fn close_from(&mut self, mut delta: Store) -> u64 {
        let mut fired = 0u64;
        while !delta.is_empty() {
            let mut out = Vec::new();
            for (ri, rule) in self.rules.iter().enumerate() {
                for pos in 0..rule.body.len() {
                    join_rule(rule, ri, pos, &self.store, Some(&delta), &mut out);
                }
            }
            let mut next_delta = Store::default();
            for (head, deriv) in out {
                let entry = self.provenance.entry(head.clone()).or_default();
                if entry.insert(deriv.clone())
                    && self.billed.insert((head.clone(), deriv))
                {
                    fired += 1;
                }
                if !self.store.contains(&head) {
                    self.store.insert(head.clone());
                    next_delta.insert(head);
                }
            }
            delta = next_delta;
        }
        self.firings_total += fired;
        fired
    }

    /// Retract base facts with delete-rederive semantics. Facts whose every
    /// support transitively involved a retracted fact disappear; facts with
    /// surviving alternative derivations are re-derived. Returns the number
    /// of re-derivation firings.
    pub fn retract_facts(&mut self, gone: &[Fact]) -> u64 {
        let mut deleted: BTreeSet<Fact> = BTreeSet::new();
        for f in gone {
            if self.base.remove(f) {
                deleted.insert(f.clone());
            }
        }
        if deleted.is_empty() {
            return 0;
        }
        // Over-delete: anything with a derivation touching a deleted fact.
        loop {
            let mut grew = false;
            for (fact, derivs) in self.provenance.iter() {
                if deleted.contains(fact) {
                    continue;
                }
                if derivs
                    .iter()
                    .any(|d| d.body.iter().any(|b| deleted.contains(b)))
                {
                    deleted.insert(fact.clone());
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        for f in &deleted {
            self.store.remove(f);
            self.provenance.remove(f);
        }
        // Surviving facts cannot reference deleted ones (they would have
        // been over-deleted), so the remaining provenance is consistent.
        // Re-derive: one full evaluation pass over the remaining store
        // reinstates anything with alternative support, then the normal
        // closure continues from the reinstated facts.
        let mut out = Vec::new();
        for (ri, rule) in self.rules.iter().enumerate() {
            join_rule(rule, ri, 0, &self.store, None, &mut out);
        }
        let mut fired = 0u64;
        let mut delta = Store::default();
        for (head, deriv) in out {
            let entry = self.provenance.entry(head.clone()).or_default();
            if entry.insert(deriv.clone())
                && self.billed.insert((head.clone(), deriv))
            {
                fired += 1;
            }
            if !self.store.contains(&head) {
                self.store.insert(head.clone());
                delta.insert(head);
            }
        }
        self.firings_total += fired;
        fired + self.close_from(delta)
    }

    /// Immutable snapshot of the current fixpoint.
    pub fn result(&self) -> FixpointResult {
        FixpointResult {
            facts: self.store.all.clone(),
            provenance: self
                .provenance
                .iter()
                .map(|(f, ds)| (f.clone(), ds.iter().cloned().collect()))
                .collect(),
            firings: self.firings_total,
        }
    }
}

/// Semi-naive bottom-up evaluation to the least fixpoint.
pub fn fixpoint(base: &BTreeSet<Fact>, rules: &[HornRule]) -> FixpointResult {
    let mut engine = Engine::new(rules.to_vec());
    engine.add_facts(base.iter().cloned());
    engine.result()
}

/// Naive re-derive-everything evaluation: every round re-evaluates every
/// rule over the full store and counts every successful instantiation.
/// Serves as the independent oracle for the semi-naive engine and as the
/// cost model of single-agent sequential reasoning.
pub fn naive_fixpoint(base: &BTreeSet<Fact>, rules: &[HornRule]) -> (BTreeSet<Fact>, u64) {
    let mut store = Store::default();
    for f in base {
        store.insert(f.clone());
    }
    let mut firings = 0u64;
    loop {
        let mut out = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            join_rule(rule, ri, 0, &store, None, &mut out);
        }
        firings += out.len() as u64;
        let mut grew = false;
        for (head, _) in out {
            if store.insert(head) {
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    (store.all, firings)
}
