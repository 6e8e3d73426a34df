//! uavguard: scenario runner, batch orchestrator, attack-graph tracer, and
//! figure regeneration for the UAV swarm defense simulator.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 simulation fault
//! (the failing slot index goes to stderr).

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use uavguard_core::baselines::Policy;
use uavguard_core::config::ScenarioConfig;
use uavguard_core::graph::{
    compile_facts, default_rules, engine::fixpoint, parse_rules, prioritize_patches,
    trace_paths_pr,
};
use uavguard_core::harness::{run_batch, run_scenario};
use uavguard_core::metrics::from_csv;
use uavguard_core::plot::{plot, PlotKind};
use uavguard_core::sim::SimError;

#[derive(Parser)]
#[command(name = "uavguard", version, about = "UAV swarm security simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write a metrics CSV.
    Run {
        /// Scenario file (TOML; missing keys take defaults).
        #[arg(long)]
        scenario: PathBuf,
        /// proposed | cos | lfs | gs | fls | sas | gp
        #[arg(long)]
        policy: String,
        #[arg(long)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a (policy x seed) batch and write CSVs plus a summary.
    Batch {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated policy names.
        #[arg(long)]
        policies: String,
        /// Comma-separated seeds or an inclusive range like 1..5.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile raw scan facts, trace attack paths, and emit a patch plan.
    Trace {
        /// Raw fact file (scan line grammar).
        #[arg(long)]
        facts: PathBuf,
        /// Horn rule file; defaults to the built-in rule set.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Maximum path length.
        #[arg(long, default_value_t = 8)]
        depth_cap: usize,
        /// Patch plan budget.
        #[arg(long, default_value_t = 2)]
        budget: usize,
    },
    /// Render an SVG figure from metrics CSVs.
    Plot {
        /// cost | overhead
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
        /// Input CSV files (shared time axis).
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("UAVGUARD_LOG")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Sim(e)) => {
            eprintln!("simulation fault: {e}");
            ExitCode::from(3)
        }
    }
}

enum Failure {
    Usage(String),
    Sim(SimError),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn parse_policy(name: &str) -> Result<Policy, Failure> {
    Policy::parse(name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown policy '{name}' (expected proposed|cos|lfs|gs|fls|sas|gp)"
        ))
    })
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, Failure> {
    let mut seeds = Vec::new();
    for part in spec.split(',').filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad_seed(part))?;
            let b: u64 = b.trim().parse().map_err(|_| bad_seed(part))?;
            if a > b {
                return Err(bad_seed(part));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(part.trim().parse().map_err(|_| bad_seed(part))?);
        }
    }
    if seeds.is_empty() {
        return Err(Failure::Usage("empty seed list".into()));
    }
    Ok(seeds)
}

fn bad_seed(part: &str) -> Failure {
    Failure::Usage(format!("bad seed spec '{part}' (expected N, N,M or A..B)"))
}

fn csv_name(policy: Policy, seed: u64) -> String {
    format!("run_{}_seed{}.csv", policy.name(), seed)
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            scenario,
            policy,
            seed,
            out,
        } => {
            let config = load_config(&scenario)?;
            let policy = parse_policy(&policy)?;
            let result = run_scenario(&config, policy, seed).map_err(|e| match e {
                SimError::Config(c) => Failure::Usage(c.to_string()),
                other => Failure::Sim(other),
            })?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(csv_name(policy, seed));
            std::fs::write(&path, &result.csv)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Batch {
            scenario,
            policies,
            seeds,
            out,
        } => {
            let config = load_config(&scenario)?;
            let policies: Result<Vec<Policy>, Failure> = policies
                .split(',')
                .filter(|s| !s.is_empty())
                .map(parse_policy)
                .collect();
            let policies = policies?;
            if policies.is_empty() {
                return Err(Failure::Usage("empty policy list".into()));
            }
            let seeds = parse_seeds(&seeds)?;
            let batch = run_batch(&config, &policies, &seeds).map_err(|e| match e {
                SimError::Config(c) => Failure::Usage(c.to_string()),
                other => Failure::Sim(other),
            })?;
            std::fs::create_dir_all(&out)?;
            for run in &batch.runs {
                std::fs::write(out.join(csv_name(run.policy, run.seed)), &run.csv)?;
            }
            let summary_path = out.join("summary.txt");
            std::fs::write(&summary_path, &batch.summary)?;
            print!("{}", batch.summary);
            println!("{}", summary_path.display());
            Ok(())
        }
        Command::Trace {
            facts,
            rules,
            out,
            depth_cap,
            budget,
        } => {
            let raw = std::fs::read_to_string(&facts)?;
            let rules = match rules {
                Some(path) => parse_rules(&std::fs::read_to_string(&path)?)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                None => default_rules(),
            };
            let report =
                compile_facts(&raw, "").map_err(|e| Failure::Usage(e.to_string()))?;
            if !report.malformed.is_empty() {
                for (line, text) in &report.malformed {
                    eprintln!("warning: malformed line {line}: {text}");
                }
            }
            let result = fixpoint(&report.facts, &rules);
            let paths = trace_paths_pr(&result, depth_cap, 100_000);
            let plan = prioritize_patches(&paths, &report.facts, budget, 0.5);
            std::fs::create_dir_all(&out)?;
            let mut path_report = String::new();
            for p in &paths {
                path_report.push_str(&p.canonical());
                path_report.push('\n');
            }
            std::fs::write(out.join("paths.txt"), &path_report)?;
            let mut plan_report = String::new();
            for e in &plan.entries {
                plan_report.push_str(&format!("{} {}\n", e.vuln_id, e.score));
            }
            std::fs::write(out.join("patch_plan.txt"), &plan_report)?;
            println!(
                "{} facts, {} paths, {} planned patches -> {}",
                report.facts.len(),
                paths.len(),
                plan.entries.len(),
                out.display()
            );
            Ok(())
        }
        Command::Plot { kind, out, csv } => {
            let kind = PlotKind::parse(&kind)
                .ok_or_else(|| Failure::Usage(format!("unknown plot kind '{kind}'")))?;
            let mut series = Vec::new();
            let mut window = (0.0f64, 0.0f64);
            for path in &csv {
                let text = std::fs::read_to_string(path)?;
                let rows = from_csv(&text).map_err(|e| Failure::Usage(e.to_string()))?;
                // The shaded band comes from the config echo in the file.
                window = read_window(&text, kind).unwrap_or(window);
                let label = rows
                    .first()
                    .map(|r| r.policy.clone())
                    .unwrap_or_else(|| path.display().to_string());
                series.push((label, rows));
            }
            let svg = plot(&series, kind, window).map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(dir) = out.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(&out, svg)?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

/// Pull the attack window for the shaded band out of the CSV's config echo.
fn read_window(text: &str, kind: PlotKind) -> Option<(f64, f64)> {
    let (start_key, end_key) = match kind {
        PlotKind::Cost => ("# spoof.t_start = ", "# spoof.t_end = "),
        PlotKind::Overhead => ("# penetration.t_start = ", "# penetration.t_end = "),
    };
    let mut start = None;
    let mut end = None;
    for line in text.lines() {
        if let Some(v) = line.strip_prefix(start_key) {
            start = v.trim().parse().ok();
        }
        if let Some(v) = line.strip_prefix(end_key) {
            end = v.trim().parse().ok();
        }
        if !line.starts_with('#') {
            break;
        }
    }
    Some((start?, end?))
}
