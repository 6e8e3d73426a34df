//! Scenario configuration: one `[section]` per subsystem, `key = value`
//! entries, loaded from TOML. All lengths are meters, all times seconds.
//!
//! Every field has a default reproducing the reference case study: 500 UAVs
//! in a 200 x 200 x 100 m box, comm radius 10 m, sensing radius 50 m, a GPS
//! spoofing window on [2, 5] s with 12 m/s drift, a multi-hop penetration
//! window on [10, 30] s, and 20% insiders.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmSection {
    pub n_uavs: usize,
    /// Axis-aligned deployment box, meters.
    pub region: [f64; 3],
    pub r_comm: f64,
    pub r_sense: f64,
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    pub insider_fraction: f64,
    /// Random-waypoint cruise speed cap, m/s.
    pub max_speed: f64,
    /// Physical speed cap used by probing-task execution, m/s.
    pub v_max_task: f64,
}

impl Default for SwarmSection {
    fn default() -> Self {
        Self {
            n_uavs: 500,
            region: [200.0, 200.0, 100.0],
            r_comm: 10.0,
            r_sense: 50.0,
            dt: 0.1,
            duration: 40.0,
            seed: 1,
            insider_fraction: 0.2,
            max_speed: 2.0,
            v_max_task: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpoofSection {
    pub enabled: bool,
    pub t_start: f64,
    pub t_end: f64,
    /// Bias growth rate, m/s.
    pub drift_rate: f64,
    /// Drift direction (normalized at use).
    pub drift_dir: [f64; 3],
    /// "off" | "low" | "high"
    pub stealth: String,
}

impl Default for SpoofSection {
    fn default() -> Self {
        Self {
            enabled: true,
            t_start: 2.0,
            t_end: 5.0,
            drift_rate: 12.0,
            drift_dir: [1.0, 0.0, -1.0],
            stealth: "high".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InsiderSection {
    /// Max magnitude of the false-position offset, meters.
    pub misreport_offset_scale: f64,
    /// Per-insider probability of leaking config lines into a snapshot.
    pub leak_probability: f64,
    /// Slots of compliant behavior before misbehaving.
    pub camouflage_slots: u64,
}

impl Default for InsiderSection {
    fn default() -> Self {
        Self {
            misreport_offset_scale: 5.0,
            leak_probability: 0.3,
            camouflage_slots: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenetrationSection {
    pub enabled: bool,
    pub t_start: f64,
    pub t_end: f64,
    pub n_entry: usize,
    pub n_assets: usize,
    /// Fraction of UAVs running an exploitable service.
    pub vulnerable_fraction: f64,
    pub n_vuln_types: usize,
    pub n_services: usize,
}

impl Default for PenetrationSection {
    fn default() -> Self {
        Self {
            enabled: true,
            t_start: 10.0,
            t_end: 30.0,
            n_entry: 2,
            n_assets: 3,
            vulnerable_fraction: 0.12,
            n_vuln_types: 12,
            n_services: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionSection {
    /// Logistic midpoint of the residual-to-probability map, meters.
    pub kappa0: f64,
    /// Logistic scale, meters.
    pub sigma_k: f64,
    /// Std of range measurement noise, meters.
    pub sigma_range: f64,
    /// Spoof probability above which reconstruction is triggered.
    pub trigger: f64,
    /// Anchor candidates must have spoof probability below this cutoff.
    pub anchor_cutoff: f64,
    /// Anchor candidates must have joint trust at or above this floor.
    pub anchor_trust_floor: f64,
    /// Max anchors per reconstruction.
    pub anchor_cap: usize,
    /// Reports from UAVs whose joint trust falls below this are dropped.
    pub report_trust_floor: f64,
    /// Condition-number threshold for DegenerateGeometry.
    pub cond_threshold: f64,
    /// Anchors advertise their previous-slot fused position.
    pub anchors_use_prev_fused: bool,
}

impl Default for PerceptionSection {
    fn default() -> Self {
        Self {
            kappa0: 1.0,
            sigma_k: 0.5,
            sigma_range: 0.1,
            trigger: 0.5,
            anchor_cutoff: 0.4,
            anchor_trust_floor: 0.7,
            anchor_cap: 8,
            report_trust_floor: 0.0,
            cond_threshold: 1e6,
            anchors_use_prev_fused: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameSection {
    /// Attacker bias-rate levels, m/s. First entry must be 0 (no attack).
    pub bias_levels: Vec<f64>,
    /// Defender swarm-level max-CDI action grid, meters.
    pub p_grid: Vec<f64>,
    /// Deviation-removal coefficient in ds = (a - gamma*p*s) dt + sigma dW, 1/m.
    pub gamma: f64,
    /// Diffusion of the deviation state, m/sqrt(s).
    pub sigma: f64,
    pub c_lat: f64,
    pub c_en: f64,
    pub c_risk: f64,
    pub c_cong: f64,
    /// Attacker utility weights: U = alpha*a*(1-P_det) - beta*P_det.
    pub alpha: f64,
    pub beta: f64,
    /// Weight of the defender's own resource cost inside the outer game.
    pub w_def: f64,
    /// Residual observability rho(P) = rho_max * P / (P + p_half).
    pub rho_max: f64,
    pub p_half: f64,
    /// Deviation-state grid.
    pub s_max: f64,
    pub ns: usize,
    /// MPC horizon, seconds, and its time grid.
    pub t_horizon: f64,
    pub nt: usize,
    /// Fictitious play iteration cap and L-inf stopping tolerance.
    pub fp_iters: usize,
    pub fp_eps: f64,
    /// Pseudo-count weight anchoring the attacker's empirical mixture to
    /// the current belief when the outer game is built.
    pub belief_anchor: f64,
    /// Belief-update likelihood: N(k_obs; k_base + a*tau_obs, obs_sigma).
    pub obs_sigma: f64,
    pub obs_tau: f64,
    pub k_base: f64,
    /// Swarm residual statistic fed to the belief update: "max" | "mean".
    pub belief_obs: String,
    pub mfg_damping: f64,
    pub mfg_tol: f64,
    pub mfg_max_iters: usize,
}

impl Default for GameSection {
    fn default() -> Self {
        Self {
            bias_levels: vec![0.0, 6.0, 12.0],
            p_grid: vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
            gamma: 0.2,
            sigma: 0.5,
            c_lat: 0.02,
            c_en: 0.005,
            c_risk: 0.1,
            c_cong: 0.01,
            alpha: 1.0,
            beta: 5.0,
            w_def: 0.12,
            rho_max: 0.3,
            p_half: 20.0,
            s_max: 30.0,
            ns: 61,
            t_horizon: 2.0,
            nt: 41,
            fp_iters: 500,
            fp_eps: 1e-3,
            belief_anchor: 1000.0,
            obs_sigma: 0.75,
            obs_tau: 0.25,
            k_base: 0.2,
            belief_obs: "max".into(),
            mfg_damping: 0.75,
            mfg_tol: 1e-4,
            mfg_max_iters: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrustSection {
    pub enabled: bool,
    /// Graded access thresholds on the type posterior.
    pub theta_hi: f64,
    pub theta_lo: f64,
    /// Trust decay factor and betrayal amplification.
    pub lambda: f64,
    pub eta: f64,
    /// Sliding-window length, slots.
    pub window: usize,
    /// Slots between behavioral tasks per UAV (staggered by id).
    pub task_period_slots: u64,
    /// One hidden probe per this many tasks.
    pub probe_interval: u64,
    /// Execution noise: relative delay std and accuracy std (m).
    pub sigma_delay: f64,
    pub sigma_acc: f64,
    /// Insider speed-conservation factor.
    pub conserve: f64,
    /// Insider accuracy-error model mean/std, meters.
    pub insider_acc_mean: f64,
    pub insider_acc_sigma: f64,
    /// Class-conditional likelihood parameters on (delay_ratio, accuracy_err).
    pub like_legit_delay_mean: f64,
    pub like_legit_delay_sigma: f64,
    pub like_mal_delay_mean: f64,
    pub like_mal_delay_sigma: f64,
    pub like_legit_acc_mean: f64,
    pub like_legit_acc_sigma: f64,
    pub like_mal_acc_mean: f64,
    pub like_mal_acc_sigma: f64,
}

impl Default for TrustSection {
    fn default() -> Self {
        Self {
            enabled: true,
            theta_hi: 0.9,
            theta_lo: 0.2,
            lambda: 0.9,
            eta: 3.0,
            window: 10,
            task_period_slots: 10,
            probe_interval: 6,
            sigma_delay: 0.1,
            sigma_acc: 1.0,
            conserve: 0.6,
            insider_acc_mean: 4.0,
            insider_acc_sigma: 2.0,
            like_legit_delay_mean: 1.0,
            like_legit_delay_sigma: 0.1,
            like_mal_delay_mean: 1.67,
            like_mal_delay_sigma: 0.25,
            like_legit_acc_mean: 0.0,
            like_legit_acc_sigma: 1.0,
            like_mal_acc_mean: 4.0,
            like_mal_acc_sigma: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    /// Max path length for tracing/exploration on hand instances.
    pub depth_cap: usize,
    /// Max path length used on live swarm snapshots.
    pub swarm_depth_cap: usize,
    /// Cap on enumerated paths per reasoning round.
    pub path_cap: usize,
    /// Patches applied per round under the proposed strategy.
    pub patch_budget: usize,
    /// Proximity weight in the patch score.
    pub rho: f64,
    /// Parallel verification instances (odd).
    pub v_instances: usize,
    /// Overhead weights, units.
    pub fire_cost: f64,
    pub verify_cost: f64,
    pub patch_cost: f64,
    /// SAS per-step hallucination probability and session-reset model.
    pub sas_error_prob: f64,
    pub sas_reset_prob: f64,
    pub sas_reset_mult_max: u64,
    /// FLS hard cap on DFS expansions per round.
    pub fls_fire_cap: u64,
    /// Proposed hardening patches a vulnerability only at or above this
    /// priority score.
    pub patch_score_floor: f64,
    /// Per-slot reasoning/verification budget of the proposed multi-agent
    /// pipeline, overhead units; work beyond it queues to later slots.
    pub work_rate: f64,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self {
            depth_cap: 8,
            swarm_depth_cap: 6,
            path_cap: 200,
            patch_budget: 2,
            rho: 0.5,
            v_instances: 5,
            fire_cost: 1.0,
            verify_cost: 5.0,
            patch_cost: 50.0,
            sas_error_prob: 0.2,
            sas_reset_prob: 0.15,
            sas_reset_mult_max: 8,
            fls_fire_cap: 50_000,
            patch_score_floor: 0.75,
            work_rate: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    /// LFS feedback gain, per meter of deviation estimate.
    pub lfs_gain: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self { lfs_gain: 2.0 }
    }
}

/// Full scenario configuration; one section per subsystem.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub swarm: SwarmSection,
    pub spoof: SpoofSection,
    pub insider: InsiderSection,
    pub penetration: PenetrationSection,
    pub perception: PerceptionSection,
    pub game: GameSection,
    pub trust: TrustSection,
    pub graph: GraphSection,
    pub baseline: BaselineSection,
}

impl ScenarioConfig {
    /// Load from a TOML file; missing keys take defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.swarm;
        if s.n_uavs < 1 {
            return Err(ConfigError::Invalid("n_uavs must be >= 1".into()));
        }
        if s.region.iter().any(|&d| d <= 0.0) {
            return Err(ConfigError::Invalid(
                "deployment region must have positive volume".into(),
            ));
        }
        if s.dt <= 0.0 {
            return Err(ConfigError::Invalid("dt must be > 0".into()));
        }
        if s.duration < s.dt {
            return Err(ConfigError::Invalid("duration must be >= dt".into()));
        }
        if !(0.0..=1.0).contains(&s.insider_fraction) {
            return Err(ConfigError::Invalid(
                "insider_fraction must be in [0, 1]".into(),
            ));
        }
        if s.r_comm > s.r_sense {
            return Err(ConfigError::Invalid("r_comm must be <= r_sense".into()));
        }
        if self.spoof.t_start >= self.spoof.t_end {
            return Err(ConfigError::Invalid("spoof window must have t_start < t_end".into()));
        }
        if !matches!(self.spoof.stealth.as_str(), "off" | "low" | "high") {
            return Err(ConfigError::Invalid(format!(
                "unknown stealth level '{}'",
                self.spoof.stealth
            )));
        }
        if self.trust.theta_lo >= self.trust.theta_hi
            || self.trust.theta_lo < 0.0
            || self.trust.theta_hi > 1.0
        {
            return Err(ConfigError::Invalid(
                "trust thresholds must satisfy 0 <= theta_lo < theta_hi <= 1".into(),
            ));
        }
        if !(0.0 < self.trust.lambda && self.trust.lambda < 1.0) {
            return Err(ConfigError::Invalid("lambda must be in (0, 1)".into()));
        }
        if self.trust.eta < 1.0 {
            return Err(ConfigError::Invalid("eta must be >= 1".into()));
        }
        if self.graph.v_instances % 2 == 0 {
            return Err(ConfigError::Invalid(
                "v_instances must be odd for majority voting".into(),
            ));
        }
        if self.game.bias_levels.is_empty() || self.game.bias_levels[0] != 0.0 {
            return Err(ConfigError::Invalid(
                "bias_levels must start with 0 (no-attack level)".into(),
            ));
        }
        if self.game.ns < 3 || self.game.nt < 2 {
            return Err(ConfigError::Invalid("mfg grid too small".into()));
        }
        Ok(())
    }

    /// Number of simulation slots.
    pub fn n_slots(&self) -> u64 {
        (self.swarm.duration / self.swarm.dt).round() as u64
    }

    /// Deterministic `# key = value` echo of the fully resolved config,
    /// emitted into every output file. Lengths in meters, times in seconds.
    pub fn echo_comment(&self) -> String {
        let mut out = String::new();
        out.push_str("# uavguard resolved scenario (units: meters, seconds, cost units)\n");
        let toml = toml::to_string(self).expect("config serializes");
        let mut section = String::new();
        for line in toml.lines() {
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                section = line.trim_matches(['[', ']']).to_string();
            } else {
                let _ = writeln!(out, "# {section}.{line}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn default_slot_count() {
        assert_eq!(ScenarioConfig::default().n_slots(), 400);
    }

    #[test]
    fn sparse_toml_fills_defaults() {
        let cfg = ScenarioConfig::from_toml("[swarm]\nn_uavs = 9\nseed = 7\n").unwrap();
        assert_eq!(cfg.swarm.n_uavs, 9);
        assert_eq!(cfg.swarm.seed, 7);
        assert_eq!(cfg.swarm.r_sense, 50.0);
        assert_eq!(cfg.game.ns, 61);
    }

    #[test]
    fn rejects_degenerate_region() {
        let err = ScenarioConfig::from_toml("[swarm]\nregion = [0.0, 10.0, 10.0]\n");
        assert!(matches!(err, Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ScenarioConfig::from_toml("[swarm]\nbogus = 1\n").is_err());
    }

    #[test]
    fn echo_is_deterministic_and_commented() {
        let a = ScenarioConfig::default().echo_comment();
        let b = ScenarioConfig::default().echo_comment();
        assert_eq!(a, b);
        assert!(a.lines().all(|l| l.starts_with('#')));
        assert!(a.contains("swarm.n_uavs = 500"));
        assert!(a.contains("game.gamma = 0.2"));
    }
}
