use uavguard_core::baselines::Policy;
use uavguard_core::config::ScenarioConfig;
use uavguard_core::harness::{run_batch, window_mean};

fn main() {
    let cfg = ScenarioConfig::default();
    let policies = [
        Policy::Proposed,
        Policy::Cos,
        Policy::Lfs,
        Policy::Gs,
        Policy::Fls,
        Policy::Sas,
        Policy::Gp,
    ];
    let seeds = [1u64, 2, 3, 4, 5];
    let out = run_batch(&cfg, &policies, &seeds).unwrap();
    println!("{}", out.summary);
    // Per-seed detail for margin analysis.
    for &seed in &seeds {
        print!("seed {seed}: cost ");
        for p in [Policy::Proposed, Policy::Gs, Policy::Lfs, Policy::Cos] {
            let r = out.runs.iter().find(|r| r.policy == p && r.seed == seed).unwrap();
            print!("{}={:.5} ", p.name(), window_mean(&r.rows, 2.0, 5.0, |x| x.mean_cost));
        }
        print!("| overhead ");
        for p in [Policy::Proposed, Policy::Fls, Policy::Sas, Policy::Gp] {
            let r = out.runs.iter().find(|r| r.policy == p && r.seed == seed).unwrap();
            print!("{}={:.1} ", p.name(), window_mean(&r.rows, 10.0, 30.0, |x| x.hardening_overhead));
        }
        // CoV for sas vs proposed
        let cov = |p: Policy| {
            let r = out.runs.iter().find(|r| r.policy == p && r.seed == seed).unwrap();
            let w: Vec<f64> = r.rows.iter().filter(|x| x.t >= 10.0 && x.t < 30.0).map(|x| x.hardening_overhead).collect();
            let m = w.iter().sum::<f64>() / w.len() as f64;
            let v = w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / w.len() as f64;
            if m > 0.0 { v.sqrt() / m } else { 0.0 }
        };
        print!("| CoV prop={:.2} sas={:.2} ", cov(Policy::Proposed), cov(Policy::Sas));
        // recovery and COS max fraction
        let prop = out.runs.iter().find(|r| r.policy == Policy::Proposed && r.seed == seed).unwrap();
        let pre = window_mean(&prop.rows, 0.0, 2.0, |x| x.mean_cost);
        let rec = window_mean(&prop.rows, 7.0, 8.0, |x| x.mean_cost);
        println!("| rec {:.3}", rec / pre);
    }
}
