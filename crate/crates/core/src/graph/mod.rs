//! Multi-agent proactive protection: Datalog compilation of raw scan data,
//! Horn-clause fixpoint reasoning with provenance, attack-path tracing,
//! voting-based verification, dedup, prefix exploration, and patch
//! prioritization.

pub mod engine;
pub mod parser;
pub mod paths;
pub mod patch;

pub use engine::{naive_fixpoint, Engine, FixpointResult};
pub use parser::{compile_facts, parse_rules, CompileReport};
pub use paths::{
    dedup_pd, explore_spe, trace_paths_pr, verify_path_rv, DeterministicBackend, FlipBackend,
    Verdict, VerifyBackend,
};
pub use patch::{prioritize_patches, PatchPlan};

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("more than 10% of raw lines are malformed ({bad}/{total}); compilation rejected")]
    CompilationRejected { bad: usize, total: usize },
    #[error("rule '{rule}' is not range-restricted: head variable {var} missing from body")]
    UnboundHeadVariable { rule: String, var: String },
    #[error("rule '{0}' has an empty body")]
    EmptyBody(String),
    #[error("rule parse error at line {line}: {message}")]
    RuleSyntax { line: usize, message: String },
    #[error("verification requires an odd number of instances, got {0}")]
    EvenInstances(usize),
}

/// A ground atomic fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub pred: String,
    pub args: Vec<String>,
}

impl Fact {
    pub fn new(pred: &str, args: &[&str]) -> Self {
        Self {
            pred: pred.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.pred, self.args.join(","))
    }
}

/// A term in a rule atom: uppercase-led identifiers are variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn parse(token: &str) -> Self {
        if token.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
            Term::Var(token.to_string())
        } else {
            Term::Const(token.to_string())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// An atom with variables, as it appears in a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|t| t.to_string()).collect();
        write!(f, "{}({})", self.pred, args.join(","))
    }
}

/// A Horn clause `head :- body`. Every head variable must occur in the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HornRule {
    pub id: String,
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl HornRule {
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.body.is_empty() {
            return Err(GraphError::EmptyBody(self.id.clone()));
        }
        for t in &self.head.args {
            if let Term::Var(v) = t {
                let bound = self.body.iter().any(|a| {
                    a.args.iter().any(|bt| matches!(bt, Term::Var(bv) if bv == v))
                });
                if !bound {
                    return Err(GraphError::UnboundHeadVariable {
                        rule: self.id.clone(),
                        var: v.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// One exploit step: the attacker holding `priv_before` on `src` uses
/// `vuln` to gain `priv_after` on `dst`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttackStep {
    pub src: String,
    pub priv_before: String,
    pub vuln: String,
    pub dst: String,
    pub priv_after: String,
}

impl fmt::Display for AttackStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}-[{}]->{}:{}",
            self.src, self.priv_before, self.vuln, self.dst, self.priv_after
        )
    }
}

/// A verified exploit-step sequence ending at a critical asset. Consecutive
/// steps chain on (node, privilege) and no (node, privilege) pair repeats.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttackPath {
    pub steps: Vec<AttackStep>,
}

impl AttackPath {
    /// Canonical text form; equal paths have equal canonical forms.
    pub fn canonical(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Chain and simple-path invariants.
    pub fn is_well_formed(&self) -> bool {
        if self.steps.is_empty() {
            return false;
        }
        let mut seen = std::collections::BTreeSet::new();
        seen.insert((self.steps[0].src.clone(), self.steps[0].priv_before.clone()));
        for w in self.steps.windows(2) {
            if w[0].dst != w[1].src || w[0].priv_after != w[1].priv_before {
                return false;
            }
        }
        for s in &self.steps {
            if !seen.insert((s.dst.clone(), s.priv_after.clone())) {
                return false;
            }
        }
        true
    }
}

/// The default Horn rule set shipped with the artifact: privilege
/// propagation across links (both link orientations), local escalation, the
/// entry foothold, and asset compromise.
pub const DEFAULT_RULES: &str = include_str!("../../rules/default.dl");

pub fn default_rules() -> Vec<HornRule> {
    parse_rules(DEFAULT_RULES).expect("shipped rule file parses")
}
