//! Line grammar for raw scan data and the Horn-rule file format.
//!
//! Scan lines (whitespace-separated, `#` comments):
//!   node <id> | link <id> <id> | service <node> <name> <version>
//!   | vuln <vid> <service> <version> <pre_priv> <post_priv>
//!   | asset <id> | entry <id>
//!
//! Rule files: `head :- atom, atom, ... .` with lowercase constants,
//! uppercase variables, `%` comments.

use super::{Atom, Fact, GraphError, HornRule, Term};
use std::collections::BTreeSet;

/// Result of compiling raw text into atomic facts: the deduplicated fact
/// set plus a malformed-line report (line numbers are 1-based and global
/// across the two inputs in order).
#[derive(Debug, Clone, Default)]
pub struct CompileReport {
    pub facts: BTreeSet<Fact>,
    pub malformed: Vec<(usize, String)>,
    pub raw_lines: usize,
}

fn compile_line(tokens: &[&str]) -> Option<Fact> {
    match tokens {
        ["node", id] => Some(Fact::new("node", &[id])),
        ["link", a, b] => Some(Fact::new("link", &[a, b])),
        ["service", n, s, v] => Some(Fact::new("service", &[n, s, v])),
        ["vuln", vid, s, v, pre, post] => Some(Fact::new("vuln", &[vid, s, v, pre, post])),
        ["asset", id] => Some(Fact::new("asset", &[id])),
        ["entry", id] => Some(Fact::new("entry", &[id])),
        _ => None,
    }
}

/// Map raw network-configuration and vulnerability-report text to compact
/// atomic facts. Duplicates collapse under set semantics; malformed lines
/// are collected rather than aborting the parse, and the whole compilation
/// is rejected when more than 10% of lines are malformed.
pub fn compile_facts(raw_config: &str, raw_vulns: &str) -> Result<CompileReport, GraphError> {
    let mut report = CompileReport::default();
    let mut line_no = 0usize;
    for text in [raw_config, raw_vulns] {
        for line in text.lines() {
            line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            report.raw_lines += 1;
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            match compile_line(&tokens) {
                Some(fact) => {
                    report.facts.insert(fact);
                }
                None => report.malformed.push((line_no, trimmed.to_string())),
            }
        }
    }
    if report.raw_lines > 0 && report.malformed.len() * 10 > report.raw_lines {
        return Err(GraphError::CompilationRejected {
            bad: report.malformed.len(),
            total: report.raw_lines,
        });
    }
    Ok(report)
}

fn parse_atom(text: &str, line: usize) -> Result<Atom, GraphError> {
    let text = text.trim();
    let open = text.find('(').ok_or(GraphError::RuleSyntax {
        line,
        message: format!("expected '(' in atom '{text}'"),
    })?;
    if !text.ends_with(')') {
        return Err(GraphError::RuleSyntax {
            line,
            message: format!("expected ')' at end of atom '{text}'"),
        });
    }
    let pred = text[..open].trim();
    if pred.is_empty() || !pred.chars().next().unwrap().is_ascii_lowercase() {
        return Err(GraphError::RuleSyntax {
            line,
            message: format!("predicate must start lowercase in '{text}'"),
        });
    }
    let inner = &text[open + 1..text.len() - 1];
    let args: Vec<Term> = inner
        .split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(Term::parse)
        .collect();
    if args.is_empty() {
        return Err(GraphError::RuleSyntax {
            line,
            message: format!("atom '{text}' has no arguments"),
        });
    }
    Ok(Atom {
        pred: pred.to_string(),
        args,
    })
}

/// Split a rule body on top-level commas (commas inside parentheses bind to
/// their atom).
fn split_atoms(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in body.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Parse a rule file. Rules are validated for range restriction at load.
pub fn parse_rules(text: &str) -> Result<Vec<HornRule>, GraphError> {
    let mut rules = Vec::new();
    // Statements end with '.'; comments run to end of line.
    let mut cleaned = String::new();
    for line in text.lines() {
        let line = match line.find('%') {
            Some(idx) => &line[..idx],
            None => line,
        };
        cleaned.push_str(line);
        cleaned.push('\n');
    }
    for (idx, stmt) in cleaned.split('.').enumerate() {
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        let line = cleaned[..cleaned.find(stmt).unwrap_or(0)]
            .chars()
            .filter(|&c| c == '\n')
            .count()
            + 1;
        let (head_text, body_text) = stmt.split_once(":-").ok_or(GraphError::RuleSyntax {
            line,
            message: format!("expected ':-' in rule '{stmt}'"),
        })?;
        let head = parse_atom(head_text, line)?;
        let body: Result<Vec<Atom>, GraphError> = split_atoms(body_text)
            .iter()
            .map(|a| parse_atom(a, line))
            .collect();
        let rule = HornRule {
            id: format!("r{idx}"),
            head,
            body: body?,
        };
        rule.validate()?;
        rules.push(rule);
    }
    Ok(rules)
}
