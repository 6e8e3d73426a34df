//! The three case-study attacks: GPS spoofing with dynamic bias, insider
//! misbehavior, and multi-hop penetration against core assets.
//!
//! Spoofing is modeled at the position-report level: an additive bias on the
//! victim's GPS fix growing at the configured drift rate. Penetration is
//! modeled as a vulnerability-instance reveal schedule plus the textual
//! network snapshots consumed by the attack-graph compiler.

use crate::config::ScenarioConfig;
use crate::swarm::{Role, SwarmTopology, UavState};
use crate::Vec3;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ThreatError {
    #[error("insider_misreport called on a legitimate UAV (id {0})")]
    NotInsider(usize),
    #[error("invalid attack parameters: {0}")]
    Invalid(String),
}

/// Bias magnitude modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stealth {
    Off,
    Low,
    High,
}

impl Stealth {
    pub fn factor(self) -> f64 {
        match self {
            Stealth::Off => 0.0,
            Stealth::Low => 0.5,
            Stealth::High => 1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self, ThreatError> {
        match s {
            "off" => Ok(Stealth::Off),
            "low" => Ok(Stealth::Low),
            "high" => Ok(Stealth::High),
            other => Err(ThreatError::Invalid(format!("unknown stealth '{other}'"))),
        }
    }
}

/// GPS spoofing attack on one edge UAV.
#[derive(Debug, Clone)]
pub struct SpoofAttack {
    pub victim: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Bias growth rate, m/s.
    pub drift_rate: f64,
    /// Unit drift direction.
    pub drift_dir: Vec3,
    pub stealth: Stealth,
}

impl SpoofAttack {
    pub fn new(
        victim: usize,
        t_start: f64,
        t_end: f64,
        drift_rate: f64,
        drift_dir: Vec3,
        stealth: Stealth,
    ) -> Result<Self, ThreatError> {
        if t_start >= t_end {
            return Err(ThreatError::Invalid("t_start must be < t_end".into()));
        }
        if drift_rate < 0.0 {
            return Err(ThreatError::Invalid("drift_rate must be >= 0".into()));
        }
        let norm = drift_dir.norm();
        if norm == 0.0 {
            return Err(ThreatError::Invalid("drift_dir must be nonzero".into()));
        }
        Ok(Self {
            victim,
            t_start,
            t_end,
            drift_rate,
            drift_dir: drift_dir / norm,
            stealth,
        })
    }

    pub fn from_config(config: &ScenarioConfig, victim: usize) -> Result<Self, ThreatError> {
        let sp = &config.spoof;
        Self::new(
            victim,
            sp.t_start,
            sp.t_end,
            sp.drift_rate,
            Vec3::new(sp.drift_dir[0], sp.drift_dir[1], sp.drift_dir[2]),
            Stealth::parse(&sp.stealth)?,
        )
    }

    /// Bias magnitude a(t): zero outside [t_start, t_end], linear ramp inside.
    pub fn bias(&self, t: f64) -> f64 {
        if t < self.t_start || t > self.t_end {
            0.0
        } else {
            self.drift_rate * (t - self.t_start) * self.stealth.factor()
        }
    }

    /// Spoofed GPS fix for the victim at time `t`.
    pub fn apply_spoof(&self, t: f64, victim_true_pos: Vec3) -> Vec3 {
        victim_true_pos + self.bias(t) * self.drift_dir
    }
}

/// Select the spoofing victim: the UAV with the fewest sense-neighbors,
/// ties broken by lowest id.
pub fn select_edge_victim(topology: &SwarmTopology, n_uavs: usize) -> usize {
    (0..n_uavs)
        .min_by_key(|&i| (topology.sense_degree(i, n_uavs), i))
        .unwrap_or(0)
}

/// Insider misbehavior parameters.
#[derive(Debug, Clone)]
pub struct InsiderPolicy {
    pub misreport_offset_scale: f64,
    pub leak_probability: f64,
    pub camouflage_slots: u64,
}

impl InsiderPolicy {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            misreport_offset_scale: config.insider.misreport_offset_scale,
            leak_probability: config.insider.leak_probability,
            camouflage_slots: config.insider.camouflage_slots,
        }
    }

    /// Position an insider reports to its neighbors. Truthful during the
    /// camouflage phase, offset by a uniform vector of magnitude in
    /// (0, misreport_offset_scale] afterwards.
    pub fn insider_misreport<R: Rng>(
        &self,
        uav: &UavState,
        slot: u64,
        rng: &mut R,
    ) -> Result<Vec3, ThreatError> {
        if uav.role != Role::Insider {
            return Err(ThreatError::NotInsider(uav.id));
        }
        if slot < self.camouflage_slots || self.misreport_offset_scale == 0.0 {
            return Ok(uav.pos_gps);
        }
        // Uniform direction, magnitude uniform in (0, scale].
        let dir = loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-6 && n <= 1.0 {
                break v / n;
            }
        };
        let mag = self.misreport_offset_scale * (1.0 - rng.gen_range(0.0..1.0));
        Ok(uav.pos_gps + mag * dir)
    }
}

/// Privilege levels for the vulnerability catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Priv {
    None,
    User,
    Root,
}

impl fmt::Display for Priv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Priv::None => write!(f, "none"),
            Priv::User => write!(f, "user"),
            Priv::Root => write!(f, "root"),
        }
    }
}

/// One catalog vulnerability: service + version it affects and the
/// privilege transition it grants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VulnRecord {
    pub id: String,
    pub service: String,
    pub version: String,
    pub pre: Priv,
    pub post: Priv,
}

/// A vulnerability instance (catalog entry present on a node) and the slot
/// at which the scanner first reveals it.
#[derive(Debug, Clone)]
pub struct InstanceReveal {
    pub node: usize,
    pub vuln: usize,
    pub reveal_slot: u64,
}

/// Multi-hop penetration scenario: entry footholds, critical assets, the
/// synthetic vulnerability catalog, per-node service assignments, and the
/// instance reveal schedule.
#[derive(Debug, Clone)]
pub struct PenetrationScenario {
    pub t_start: f64,
    pub t_end: f64,
    pub entry_nodes: Vec<usize>,
    pub critical_assets: Vec<usize>,
    pub vuln_catalog: Vec<VulnRecord>,
    /// node id -> (service, version) it runs.
    pub services: BTreeMap<usize, (String, String)>,
    pub instances: Vec<InstanceReveal>,
}

const SERVICE_NAMES: [&str; 4] = ["nav", "telemetry", "relay", "fileshare"];

impl PenetrationScenario {
    /// Build the default synthetic scenario: `vulnerable_fraction` of UAVs
    /// run one of the catalog (service, version) pairs; entries are the two
    /// best-connected vulnerable nodes, assets sit 2+ hops away; instance
    /// reveals are spread uniformly over the attack window.
    pub fn generate<R: Rng>(
        config: &ScenarioConfig,
        uavs: &[UavState],
        topology: &SwarmTopology,
        rng: &mut R,
    ) -> Self {
        let pen = &config.penetration;
        let n = uavs.len();
        let n_services = pen.n_services.clamp(1, SERVICE_NAMES.len());

        // Catalog: per service, (v1.0 user->user), (v1.0 user->root),
        // (v2.0 user->user), truncated to n_vuln_types.
        let mut catalog = Vec::new();
        'outer: for (si, name) in SERVICE_NAMES.iter().take(n_services).enumerate() {
            let entries = [
                ("1.0", Priv::User, Priv::User),
                ("1.0", Priv::User, Priv::Root),
                ("2.0", Priv::User, Priv::User),
            ];
            for (k, (ver, pre, post)) in entries.iter().enumerate() {
                if catalog.len() >= pen.n_vuln_types {
                    break 'outer;
                }
                catalog.push(VulnRecord {
                    id: format!("v{:02}", si * entries.len() + k),
                    service: (*name).to_string(),
                    version: (*ver).to_string(),
                    pre: *pre,
                    post: *post,
                });
            }
        }
        let pairs: Vec<(String, String)> = {
            let mut seen = BTreeSet::new();
            catalog
                .iter()
                .filter(|v| seen.insert((v.service.clone(), v.version.clone())))
                .map(|v| (v.service.clone(), v.version.clone()))
                .collect()
        };

        // Vulnerable nodes: seeded sample; the first nodes cover all pairs
        // round-robin so every catalog entry references a running service.
        let n_vulnerable = ((pen.vulnerable_fraction * n as f64).round() as usize).min(n);
        let mut ids: Vec<usize> = (0..n).collect();
        for k in 0..n_vulnerable {
            let pick = rng.gen_range(k..ids.len());
            ids.swap(k, pick);
        }
        let mut vulnerable: Vec<usize> = ids[..n_vulnerable].to_vec();
        vulnerable.sort_unstable();
        let mut services = BTreeMap::new();
        for (rank, &node) in vulnerable.iter().enumerate() {
            let pair = if rank < pairs.len() {
                pairs[rank].clone()
            } else {
                pairs[rng.gen_range(0..pairs.len())].clone()
            };
            services.insert(node, pair);
        }
        // Prune catalog entries whose (service, version) nobody runs.
        let running: BTreeSet<(String, String)> = services.values().cloned().collect();
        catalog.retain(|v| running.contains(&(v.service.clone(), v.version.clone())));

        // Entries: vulnerable nodes with the most vulnerable sense-neighbors.
        let vuln_set: BTreeSet<usize> = vulnerable.iter().copied().collect();
        let vdeg = |i: usize| -> usize {
            topology
                .sense_neighbors(i, n)
                .iter()
                .filter(|j| vuln_set.contains(j))
                .count()
        };
        let mut by_deg: Vec<usize> = vulnerable.clone();
        by_deg.sort_by_key(|&i| (std::cmp::Reverse(vdeg(i)), i));
        let entry_nodes: Vec<usize> = by_deg.iter().copied().take(pen.n_entry).collect();

        // Assets: vulnerable non-entry nodes, preferring BFS depth >= 2 from
        // the entry set over the vulnerable sense-subgraph.
        let entry_set: BTreeSet<usize> = entry_nodes.iter().copied().collect();
        let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &e in &entry_nodes {
            dist.insert(e, 0);
            queue.push_back(e);
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for v in topology.sense_neighbors(u, n) {
                if vuln_set.contains(&v) && !dist.contains_key(&v) {
                    dist.insert(v, d + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut candidates: Vec<usize> = vulnerable
            .iter()
            .copied()
            .filter(|i| !entry_set.contains(i))
            .collect();
        candidates.sort_by_key(|&i| {
            let d = dist.get(&i).copied().unwrap_or(0);
            // Prefer reachable nodes at depth >= 2, deepest first.
            (if d >= 2 { 0 } else { 1 }, std::cmp::Reverse(d), i)
        });
        let critical_assets: Vec<usize> = candidates.into_iter().take(pen.n_assets).collect();

        // Critical assets host first-generation service stacks: their
        // (service, "1.0") pairs carry a root-granting vulnerability, so a
        // full compromise is reachable in principle.
        for &a in &critical_assets {
            if let Some((svc, ver)) = services.get(&a).cloned() {
                let rootable = catalog
                    .iter()
                    .any(|v| v.service == svc && v.version == ver && v.post == Priv::Root);
                if !rootable {
                    services.insert(a, (svc, "1.0".to_string()));
                }
            }
        }

        // Instance reveals: every (node, matching catalog vuln) pair gets a
        // seeded reveal slot uniform over the attack window.
        let slot0 = (pen.t_start / config.swarm.dt).round() as u64;
        let slot1 = (pen.t_end / config.swarm.dt).round() as u64;
        let mut instances = Vec::new();
        for &node in &vulnerable {
            let (svc, ver) = &services[&node];
            for (vi, v) in catalog.iter().enumerate() {
                if &v.service == svc && &v.version == ver {
                    instances.push(InstanceReveal {
                        node,
                        vuln: vi,
                        reveal_slot: rng.gen_range(slot0..slot1.max(slot0 + 1)),
                    });
                }
            }
        }

        Self {
            t_start: pen.t_start,
            t_end: pen.t_end,
            entry_nodes,
            critical_assets,
            vuln_catalog: catalog,
            services,
            instances,
        }
    }

    /// Instances revealed at or before `slot`.
    pub fn revealed(&self, slot: u64) -> impl Iterator<Item = &InstanceReveal> {
        self.instances.iter().filter(move |i| i.reveal_slot <= slot)
    }

    /// Instances first revealed exactly at `slot`.
    pub fn newly_revealed(&self, slot: u64) -> impl Iterator<Item = &InstanceReveal> {
        self.instances.iter().filter(move |i| i.reveal_slot == slot)
    }
}

/// Raw textual scan output for one slot: network configuration plus the
/// vulnerability report, per the line grammar consumed by the attack-graph
/// compiler.
#[derive(Debug, Clone)]
pub struct NetworkSnapshot {
    pub config_text: String,
    pub vuln_text: String,
}

/// Emit the network-configuration and vulnerability-report text for the
/// current slot. The vulnerability report carries one line per revealed
/// live instance (catalog entries shared by several nodes repeat,
/// exercising compression downstream); insiders leak duplicate config lines
/// when the leak probability fires. Fleet-patched vulnerability ids and
/// reimaged nodes no longer show up in scans.
pub fn emit_network_snapshot<R: Rng>(
    scenario: &PenetrationScenario,
    topology: &SwarmTopology,
    uavs: &[UavState],
    policy: &InsiderPolicy,
    slot: u64,
    patched_vulns: &BTreeSet<String>,
    reimaged_nodes: &BTreeSet<usize>,
    rng: &mut R,
) -> NetworkSnapshot {
    let mut cfg = String::with_capacity(64 * 1024);
    cfg.push_str("# network configuration snapshot\n");
    for u in uavs {
        cfg.push_str("node ");
        cfg.push_str(itoa(u.id).as_str());
        cfg.push('\n');
    }
    for &(i, j) in &topology.sense_edges {
        cfg.push_str("link ");
        cfg.push_str(itoa(i).as_str());
        cfg.push(' ');
        cfg.push_str(itoa(j).as_str());
        cfg.push('\n');
    }
    for (node, (svc, ver)) in &scenario.services {
        if !reimaged_nodes.contains(node) {
            cfg.push_str(&format!("service {node} {svc} {ver}\n"));
        }
    }
    for &e in &scenario.entry_nodes {
        cfg.push_str(&format!("entry {e}\n"));
    }
    for &a in &scenario.critical_assets {
        cfg.push_str(&format!("asset {a}\n"));
    }
    // Insider leaks: duplicated (true) config lines.
    for u in uavs {
        if u.role == Role::Insider && rng.gen_range(0.0..1.0) < policy.leak_probability {
            cfg.push_str(&format!("node {}\n", u.id));
            if let Some((svc, ver)) = scenario.services.get(&u.id) {
                if !reimaged_nodes.contains(&u.id) {
                    cfg.push_str(&format!("service {} {svc} {ver}\n", u.id));
                }
            }
        }
    }

    let mut vuln = String::with_capacity(8 * 1024);
    vuln.push_str("# vulnerability scan report\n");
    for inst in scenario.revealed(slot) {
        let v = &scenario.vuln_catalog[inst.vuln];
        if patched_vulns.contains(&v.id) || reimaged_nodes.contains(&inst.node) {
            continue;
        }
        vuln.push_str(&format!(
            "vuln {} {} {} {} {}\n",
            v.id, v.service, v.version, v.pre, v.post
        ));
    }
    NetworkSnapshot {
        config_text: cfg,
        vuln_text: vuln,
    }
}

fn itoa(v: usize) -> String {
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swarm::{deploy_ppp, update_topology};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn attack() -> SpoofAttack {
        SpoofAttack::new(
            0,
            2.0,
            5.0,
            12.0,
            Vec3::new(1.0, 0.0, -1.0),
            Stealth::High,
        )
        .unwrap()
    }

    #[test]
    fn spoof_zero_at_window_start() {
        let a = attack();
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(a.apply_spoof(2.0, p), p);
    }

    #[test]
    fn spoof_magnitude_after_one_second() {
        let a = attack();
        let p = Vec3::zeros();
        let s = a.apply_spoof(3.0, p);
        assert!(((s - p).norm() - 12.0).abs() < 1e-9);
    }

    #[test]
    fn spoof_off_outside_window() {
        let a = attack();
        let p = Vec3::new(5.0, 5.0, 5.0);
        assert_eq!(a.apply_spoof(6.0, p), p);
        assert_eq!(a.apply_spoof(1.9, p), p);
    }

    #[test]
    fn spoof_bias_nondecreasing_and_zero_at_start() {
        let a = attack();
        assert_eq!(a.bias(2.0), 0.0);
        let mut prev = 0.0;
        let mut t = 2.0;
        while t <= 5.0 {
            let b = a.bias(t);
            assert!(b >= prev);
            prev = b;
            t += 0.05;
        }
    }

    #[test]
    fn stealth_low_halves_bias() {
        let mut a = attack();
        a.stealth = Stealth::Low;
        assert!((a.bias(3.0) - 6.0).abs() < 1e-12);
    }

    fn insider_uav(id: usize) -> UavState {
        UavState {
            id,
            pos_true: Vec3::new(1.0, 1.0, 1.0),
            pos_gps: Vec3::new(1.0, 1.0, 1.0),
            velocity: Vec3::zeros(),
            role: Role::Insider,
            energy: 1.0,
            cdi: 0.0,
            admitted: true,
        }
    }

    #[test]
    fn misreport_truthful_during_camouflage() {
        let p = InsiderPolicy {
            misreport_offset_scale: 5.0,
            leak_probability: 0.0,
            camouflage_slots: 10,
        };
        let u = insider_uav(3);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(p.insider_misreport(&u, 9, &mut rng).unwrap(), u.pos_gps);
    }

    #[test]
    fn misreport_zero_scale_is_truthful_forever() {
        let p = InsiderPolicy {
            misreport_offset_scale: 0.0,
            leak_probability: 0.0,
            camouflage_slots: 0,
        };
        let u = insider_uav(3);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(p.insider_misreport(&u, 100, &mut rng).unwrap(), u.pos_gps);
    }

    #[test]
    fn misreport_offset_bounded() {
        let p = InsiderPolicy {
            misreport_offset_scale: 5.0,
            leak_probability: 0.0,
            camouflage_slots: 0,
        };
        let u = insider_uav(3);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = p.insider_misreport(&u, 5, &mut rng).unwrap();
            let mag = (r - u.pos_gps).norm();
            assert!(mag > 0.0 && mag <= 5.0, "offset magnitude {mag}");
        }
    }

    #[test]
    fn misreport_rejects_legitimate() {
        let p = InsiderPolicy {
            misreport_offset_scale: 5.0,
            leak_probability: 0.0,
            camouflage_slots: 0,
        };
        let mut u = insider_uav(3);
        u.role = Role::Legitimate;
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(matches!(
            p.insider_misreport(&u, 5, &mut rng),
            Err(ThreatError::NotInsider(3))
        ));
    }

    fn small_world() -> (ScenarioConfig, Vec<UavState>, SwarmTopology) {
        let mut cfg = ScenarioConfig::default();
        cfg.swarm.n_uavs = 30;
        cfg.swarm.region = [60.0, 60.0, 30.0];
        cfg.penetration.vulnerable_fraction = 0.4;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let uavs = deploy_ppp(&cfg, &mut rng).unwrap();
        let topo = update_topology(&uavs, cfg.swarm.r_comm, cfg.swarm.r_sense, 0);
        (cfg, uavs, topo)
    }

    #[test]
    fn scenario_invariants() {
        let (cfg, uavs, topo) = small_world();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let sc = PenetrationScenario::generate(&cfg, &uavs, &topo, &mut rng);
        for e in &sc.entry_nodes {
            assert!(!sc.critical_assets.contains(e), "entries and assets overlap");
        }
        let running: BTreeSet<_> = sc.services.values().cloned().collect();
        for v in &sc.vuln_catalog {
            assert!(
                running.contains(&(v.service.clone(), v.version.clone())),
                "catalog vuln {} references a service nobody runs",
                v.id
            );
        }
        let slot0 = (sc.t_start / cfg.swarm.dt).round() as u64;
        let slot1 = (sc.t_end / cfg.swarm.dt).round() as u64;
        for i in &sc.instances {
            assert!(i.reveal_slot >= slot0 && i.reveal_slot < slot1);
        }
    }

    #[test]
    fn snapshot_counts_lines() {
        let (cfg, uavs, topo) = small_world();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let sc = PenetrationScenario::generate(&cfg, &uavs, &topo, &mut rng);
        let policy = InsiderPolicy::from_config(&cfg);
        let snap = emit_network_snapshot(&sc, &topo, &uavs, &policy, 10_000, &BTreeSet::new(), &BTreeSet::new(), &mut rng);
        let nodes = snap
            .config_text
            .lines()
            .filter(|l| l.starts_with("node "))
            .count();
        let links = snap
            .config_text
            .lines()
            .filter(|l| l.starts_with("link "))
            .count();
        assert!(nodes >= uavs.len());
        assert!(links >= topo.sense_edges.len());
        // At the end of the window all instances are revealed.
        let vulns = snap
            .vuln_text
            .lines()
            .filter(|l| l.starts_with("vuln "))
            .count();
        assert_eq!(vulns, sc.instances.len());
    }

    #[test]
    fn snapshot_empty_catalog_has_no_vuln_lines() {
        let (mut cfg, uavs, topo) = small_world();
        cfg.penetration.vulnerable_fraction = 0.0;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let sc = PenetrationScenario::generate(&cfg, &uavs, &topo, &mut rng);
        let policy = InsiderPolicy::from_config(&cfg);
        let snap = emit_network_snapshot(&sc, &topo, &uavs, &policy, 250, &BTreeSet::new(), &BTreeSet::new(), &mut rng);
        assert_eq!(
            snap.vuln_text.lines().filter(|l| l.starts_with("vuln ")).count(),
            0
        );
    }

    #[test]
    fn edge_victim_is_least_connected() {
        let (cfg, _uavs, topo) = small_world();
        let v = select_edge_victim(&topo, cfg.swarm.n_uavs);
        let dv = topo.sense_degree(v, cfg.swarm.n_uavs);
        for i in 0..cfg.swarm.n_uavs {
            assert!(topo.sense_degree(i, cfg.swarm.n_uavs) >= dv);
        }
    }
}
