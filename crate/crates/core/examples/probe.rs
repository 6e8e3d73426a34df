use uavguard_core::baselines::Policy;
use uavguard_core::config::ScenarioConfig;
use uavguard_core::harness::{run_scenario, window_mean};
use std::time::Instant;

fn main() {
    let cfg = ScenarioConfig::default();
    let policy = std::env::args().nth(1).unwrap_or("proposed".into());
    let seed: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let p = Policy::parse(&policy).unwrap();
    let t0 = Instant::now();
    let out = run_scenario(&cfg, p, seed).unwrap();
    let wall = t0.elapsed().as_secs_f64();
    let rows = &out.rows;
    let pre = window_mean(rows, 0.0, 2.0, |r| r.mean_cost);
    let wc = window_mean(rows, 2.0, 5.0, |r| r.mean_cost);
    let rec = window_mean(rows, 5.0, 7.0, |r| r.mean_cost);
    let post = window_mean(rows, 7.0, 10.0, |r| r.mean_cost);
    let oh = window_mean(rows, 10.0, 30.0, |r| r.hardening_overhead);
    let win: Vec<f64> = rows.iter().filter(|r| r.t >= 10.0 && r.t < 30.0).map(|r| r.hardening_overhead).collect();
    let m = win.iter().sum::<f64>() / win.len() as f64;
    let var = win.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / win.len() as f64;
    let cov = if m > 0.0 { var.sqrt() / m } else { 0.0 };
    let max_paths = rows.iter().map(|r| r.paths_open).max().unwrap_or(0);
    println!("{policy} seed {seed}: wall {wall:.1}s");
    println!("  overhead CoV={cov:.3} max_paths_open={max_paths}");
    println!("  cost pre[0,2)={pre:.6} window[2,5)={wc:.6} rec[5,7)={rec:.6} post[7,10)={post:.6}");
    println!("  overhead[10,30)={oh:.3}");
    // slot traces at interesting times
    for probe_t in [1.0, 2.1, 2.5, 3.0, 4.0, 5.0, 5.5, 6.0, 8.0, 12.0, 15.0, 20.0, 29.0, 35.0] {
        if let Some(r) = rows.iter().find(|r| (r.t - probe_t).abs() < 0.0501) {
            println!("  t={:4.1} cost={:9.5} cdi={:7.3} belief={:.3} victdev={:7.3} trustmin={:6.3} paths={} fb={} oh={:.1}",
                r.t, r.mean_cost, r.mean_cdi, r.spoof_belief, r.victim_deviation, r.joint_trust_min, r.paths_open, r.recon_fallbacks, r.hardening_overhead);
        }
    }
}
