//! The discrete-time simulation: one deterministic RNG stream consumed in a
//! fixed phase order each slot.
//!
//! Slot pipeline:
//!  1. attacks: spoof bias applied to the victim's GPS fix
//!  2. reports: insiders draw their misreport offsets (id order)
//!  3. ranging: one noisy LoS range per sense edge (sorted edge order)
//!  4. perception: residuals, spoof probabilities, deviation estimates
//!  5. belief update from the swarm residual summary
//!  6. CDI policy (MPC double-layer game or a baseline)
//!  7. reconstruction + fusion for flagged UAVs; navigation solutions
//!  8. trust: pair outcomes, probing tasks (scheduled UAVs' draws, id
//!     order), graded access
//!  9. hardening round inside the penetration window (snapshot, compile,
//!     reasoning, verification, patching; strategy-dependent billing)
//! 10. kinematics: waypoint steering on navigation solutions (waypoint
//!     renewal draws, id order), energy drain
//! 11. topology refresh, epoch advance
//! 12. metrics row (NaN checks abort with the slot index)

use crate::baselines::{
    cos_policy, fls_harden, gs_policy, lfs_policy, sas_harden, CdiPolicy, Hardening, Policy,
};
use crate::config::{ConfigError, ScenarioConfig};
use crate::game::{
    mpc_step, AttackerBelief, MpcConfig, ObservationModel, ResidualSummary, SolverError,
    update_belief,
};
use crate::graph::{
    compile_facts, default_rules, patch::patch_removals, prioritize_patches, trace_paths_pr,
    AttackPath, Engine, Fact, HornRule,
};
use crate::metrics::MetricsRow;
use crate::perception::{
    compute_residual, fuse_position, reconstruct_position, residual_to_probability,
    select_anchors, AnchorCandidate, NeighborObs, PerceptionError,
};
use crate::swarm::{deploy_ppp, update_topology, Role, SwarmTopology, UavState};
use crate::threat::{
    emit_network_snapshot, select_edge_victim, InsiderPolicy, PenetrationScenario, SpoofAttack,
    ThreatError,
};
use crate::trust::{
    bayes_update, graded_access, signal_likelihoods, simulate_task_execution, Access, Outcome,
    ProbeTask, TrustLedger, TypeBelief,
};
use crate::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Threat(#[from] ThreatError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("simulation fault at slot {slot}: {message}")]
    Fault { slot: u64, message: String },
}

/// Persistent hardening state: the reasoning engine doubles as ground truth
/// for the telemetry; billing follows the selected strategy.
struct HardeningState {
    rules: Vec<HornRule>,
    engine: Engine,
    /// Catalog vulnerabilities patched fleet-wide (proposed/FLS/SAS plans).
    patched_vulns: BTreeSet<String>,
    /// Nodes reimaged by greedy patching.
    reimaged_nodes: BTreeSet<usize>,
    /// Instances greedy patching has already billed.
    gp_seen: BTreeSet<(usize, usize)>,
    /// Paths already past full verification (billed once).
    verified: BTreeSet<AttackPath>,
    /// Reasoning/verification work (overhead units) awaiting the agents'
    /// per-slot budget.
    pending_work: f64,
    open_paths: Vec<AttackPath>,
}

/// A full scenario run: swarm, attacks, defenses, metrics.
pub struct Simulation {
    pub config: ScenarioConfig,
    pub policy: Policy,
    rng: ChaCha12Rng,
    pub uavs: Vec<UavState>,
    pub topology: SwarmTopology,
    pub slot: u64,
    n_slots: u64,
    // Attacks.
    spoof: Option<SpoofAttack>,
    insider_policy: InsiderPolicy,
    penetration: Option<PenetrationScenario>,
    // Defense state.
    mpc: MpcConfig,
    belief: AttackerBelief,
    obs_model: ObservationModel,
    nav_pos: Vec<Vec3>,
    type_beliefs: Vec<TypeBelief>,
    access: Vec<Access>,
    ledgers: Vec<TrustLedger>,
    joint_trust: Vec<f64>,
    prev_mean_cdi: f64,
    // Kinematics.
    waypoints: Vec<Vec3>,
    hardening: HardeningState,
    pub rows: Vec<MetricsRow>,
}

impl Simulation {
    pub fn new(config: ScenarioConfig, policy: Policy, seed: u64) -> Result<Self, SimError> {
        let mut config = config;
        config.swarm.seed = seed;
        config.validate()?;

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let uavs = deploy_ppp(&config, &mut rng)?;
        let topology = update_topology(&uavs, config.swarm.r_comm, config.swarm.r_sense, 0);

        let spoof = if config.spoof.enabled {
            let victim = select_edge_victim(&topology, uavs.len());
            Some(SpoofAttack::from_config(&config, victim)?)
        } else {
            None
        };
        let insider_policy = InsiderPolicy::from_config(&config);
        let penetration = if config.penetration.enabled {
            Some(PenetrationScenario::generate(&config, &uavs, &topology, &mut rng))
        } else {
            None
        };

        let waypoints: Vec<Vec3> = (0..uavs.len())
            .map(|_| random_waypoint(&config, &mut rng))
            .collect();

        let n = uavs.len();
        let nav_pos = uavs.iter().map(|u| u.pos_gps).collect();
        let rules = default_rules();
        let n_slots = config.n_slots();
        let belief = AttackerBelief::quiescent(config.game.bias_levels.clone(), 1e-4);
        let mpc = MpcConfig::from_config(&config);
        let obs_model = ObservationModel::from_config(&config.game);
        let window = config.trust.window;
        Ok(Self {
            config,
            policy,
            rng,
            uavs,
            topology,
            slot: 0,
            n_slots,
            spoof,
            insider_policy,
            penetration,
            mpc,
            belief,
            obs_model,
            nav_pos,
            // Swarm members passed one-time identity authentication at
            // admission; behavioral monitoring starts from a trusting prior.
            type_beliefs: vec![TypeBelief { p_legit: 0.9 }; n],
            access: vec![Access::Escalate; n],
            ledgers: (0..n).map(|_| TrustLedger::new(window)).collect(),
            joint_trust: vec![0.0; n],
            prev_mean_cdi: 0.0,
            waypoints,
            hardening: HardeningState {
                engine: Engine::new(rules.clone()),
                rules,
                patched_vulns: BTreeSet::new(),
                reimaged_nodes: BTreeSet::new(),
                gp_seen: BTreeSet::new(),
                verified: BTreeSet::new(),
                pending_work: 0.0,
                open_paths: Vec::new(),
            },
            rows: Vec::new(),
        })
    }

    pub fn victim(&self) -> Option<usize> {
        self.spoof.as_ref().map(|s| s.victim)
    }

    /// Run every remaining slot and return the metric rows.
    pub fn run(&mut self) -> Result<&[MetricsRow], SimError> {
        while self.slot < self.n_slots {
            self.step()?;
        }
        Ok(&self.rows)
    }

    /// Advance one slot through the full pipeline.
    pub fn step(&mut self) -> Result<MetricsRow, SimError> {
        let n = self.uavs.len();
        let t = self.slot as f64 * self.config.swarm.dt;
        let trust_on = self.policy.trust_enabled() && self.config.trust.enabled;

        // Phase 1: attacks on GPS reports.
        for u in self.uavs.iter_mut() {
            u.pos_gps = u.pos_true;
        }
        if let Some(spoof) = &self.spoof {
            let u = &mut self.uavs[spoof.victim];
            u.pos_gps = spoof.apply_spoof(t, u.pos_true);
        }

        // Phase 2: position reports (insider misreport draws, id order).
        let mut reports: Vec<Vec3> = self.uavs.iter().map(|u| u.pos_gps).collect();
        for i in 0..n {
            if self.uavs[i].role == Role::Insider {
                reports[i] = self
                    .insider_policy
                    .insider_misreport(&self.uavs[i], self.slot, &mut self.rng)?;
            }
        }

        // Phase 3: LoS ranging (sorted unordered pairs).
        let range_noise = Normal::new(0.0, self.config.perception.sigma_range)
            .expect("sigma_range must be positive");
        let mut ranges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j) in &self.topology.sense_edges {
            let true_dist = (self.uavs[i].pos_true - self.uavs[j].pos_true).norm();
            ranges.insert((i, j), (true_dist + range_noise.sample(&mut self.rng)).max(0.0));
        }
        let range_of = |a: usize, b: usize| -> Option<f64> {
            let key = if a < b { (a, b) } else { (b, a) };
            ranges.get(&key).copied()
        };

        // Phase 4: residuals, spoof probabilities, deviation estimates.
        let report_ok: Vec<bool> = (0..n)
            .map(|j| {
                if !trust_on {
                    true
                } else {
                    self.uavs[j].admitted
                        && self.joint_trust[j] >= self.config.perception.report_trust_floor
                }
            })
            .collect();
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| self.topology.sense_neighbors(i, n))
            .collect();
        let mut k_vals = vec![0.0f64; n];
        let mut probs = vec![0.0f64; n];
        let mut pair_disc: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            let mut obs = Vec::new();
            for &j in &neighbors[i] {
                let Some(range) = range_of(i, j) else { continue };
                let disc = ((self.uavs[i].pos_gps - reports[j]).norm() - range).abs();
                pair_disc[i].push((j, disc));
                if report_ok[j] {
                    obs.push(NeighborObs {
                        reported_pos: reports[j],
                        measured_range: range,
                    });
                }
            }
            match compute_residual(i, self.uavs[i].pos_gps, &obs) {
                Ok(res) => {
                    k_vals[i] = res.k;
                    probs[i] = residual_to_probability(
                        res.k,
                        self.config.perception.kappa0,
                        self.config.perception.sigma_k,
                    );
                }
                Err(PerceptionError::IsolatedNode) => {
                    k_vals[i] = 0.0;
                    probs[i] = 0.0;
                }
                Err(_) => unreachable!("compute_residual only raises IsolatedNode"),
            }
        }
        let deviations: Vec<f64> = (0..n).map(|i| probs[i] * k_vals[i]).collect();

        // Phase 5: attacker-belief update from the swarm residual summary.
        let mut summary = ResidualSummary::default();
        for i in 0..n {
            if trust_on && !self.uavs[i].admitted {
                continue;
            }
            summary.max_k = summary.max_k.max(k_vals[i]);
            summary.mean_k += k_vals[i];
            summary.n += 1;
        }
        if summary.n > 0 {
            summary.mean_k /= summary.n as f64;
        }
        self.belief = update_belief(&self.belief, &summary, &self.obs_model);

        // Phase 6: CDI assignment.
        let r_sense = self.config.swarm.r_sense;
        match self.policy.cdi_axis() {
            CdiPolicy::Mpc => {
                let out = mpc_step(&self.mpc, &self.belief, &deviations)?;
                for i in 0..n {
                    self.uavs[i].cdi = out.cdis[i].clamp(0.0, r_sense);
                }
            }
            CdiPolicy::Cos => {
                for u in self.uavs.iter_mut() {
                    u.cdi = cos_policy(r_sense).clamp(0.0, r_sense);
                }
            }
            CdiPolicy::Lfs => {
                for i in 0..n {
                    self.uavs[i].cdi =
                        lfs_policy(deviations[i], self.config.baseline.lfs_gain, r_sense);
                }
            }
            CdiPolicy::Gs => {
                for i in 0..n {
                    self.uavs[i].cdi = gs_policy(
                        deviations[i],
                        &self.config.game.p_grid,
                        &self.mpc.mfg,
                        self.config.swarm.dt,
                        self.prev_mean_cdi,
                    )
                    .clamp(0.0, r_sense);
                }
            }
        }

        // Phase 7: reconstruction and fusion for flagged UAVs.
        let prev_nav = self.nav_pos.clone();
        let mut recon_fallbacks = 0usize;
        let mut s_cost = deviations.clone();
        for i in 0..n {
            if probs[i] <= self.config.perception.trigger {
                self.nav_pos[i] = self.uavs[i].pos_gps;
                continue;
            }
            let coop_range = self.uavs[i].cdi.max(self.config.swarm.r_comm).min(r_sense);
            let mut candidates = Vec::new();
            for &j in &neighbors[i] {
                let Some(range) = range_of(i, j) else { continue };
                if range > coop_range {
                    continue;
                }
                if trust_on && (!self.uavs[j].admitted || self.access[j] != Access::Admit) {
                    continue;
                }
                let advertised = if self.uavs[j].role == Role::Insider {
                    reports[j]
                } else if self.config.perception.anchors_use_prev_fused {
                    prev_nav[j]
                } else {
                    reports[j]
                };
                candidates.push(AnchorCandidate {
                    id: j,
                    prob: probs[j],
                    trust: if trust_on { self.joint_trust[j] } else { 1.0 },
                    pos: advertised,
                    range,
                });
            }
            let trust_floor = if trust_on {
                self.config.perception.anchor_trust_floor
            } else {
                0.0
            };
            let selected = select_anchors(
                &candidates,
                self.config.perception.anchor_cutoff,
                trust_floor,
                self.config.perception.anchor_cap,
                self.config.perception.cond_threshold,
            );
            match selected.and_then(|set| reconstruct_position(&set)) {
                Ok(rec) => {
                    let fused = fuse_position(self.uavs[i].pos_gps, rec.estimate, probs[i]);
                    self.nav_pos[i] = fused;
                    // Post-fusion deviation estimate for the cost metric.
                    let obs: Vec<NeighborObs> = pair_disc[i]
                        .iter()
                        .filter(|(j, _)| report_ok[*j])
                        .filter_map(|(j, _)| {
                            range_of(i, *j).map(|range| NeighborObs {
                                reported_pos: reports[*j],
                                measured_range: range,
                            })
                        })
                        .collect();
                    if let Ok(res) = compute_residual(i, fused, &obs) {
                        s_cost[i] = probs[i] * res.k;
                    }
                }
                Err(_) => {
                    self.nav_pos[i] = self.uavs[i].pos_gps;
                    recon_fallbacks += 1;
                }
            }
        }

        // Phase 8: trust pair outcomes, probing tasks, graded access.
        if trust_on {
            let medians: Vec<f64> = (0..n)
                .map(|i| {
                    let mut d: Vec<f64> = pair_disc[i].iter().map(|(_, x)| *x).collect();
                    if d.is_empty() {
                        return 0.0;
                    }
                    d.sort_by(f64::total_cmp);
                    d[d.len() / 2]
                })
                .collect();
            let betrayal_gate = 3.0 * self.config.perception.sigma_range;
            for i in 0..n {
                if medians[i] > betrayal_gate {
                    // The observer's own position solution is suspect; its
                    // accusations would be unreliable.
                    continue;
                }
                for &(j, disc) in &pair_disc[i] {
                    let outcome = if disc > betrayal_gate {
                        Outcome::Betrayal
                    } else {
                        Outcome::Good
                    };
                    self.ledgers[j].record(
                        i,
                        outcome,
                        self.config.trust.lambda,
                        self.config.trust.eta,
                    );
                }
            }
            for j in 0..n {
                self.ledgers[j].close_slot();
                self.joint_trust[j] = self.ledgers[j].aggregate();
            }

            // Probing tasks, staggered by id.
            let period = self.config.trust.task_period_slots.max(1);
            for i in 0..n {
                if self.slot % period != (i as u64) % period {
                    continue;
                }
                let task_no = self.slot / period;
                let task = ProbeTask {
                    target_pos: self.nav_pos[i]
                        + Vec3::new(
                            self.rng.gen_range(-30.0..30.0),
                            self.rng.gen_range(-30.0..30.0),
                            self.rng.gen_range(-10.0..10.0),
                        ),
                    deadline: 5.0,
                    is_probe: task_no % self.config.trust.probe_interval.max(1) == 0,
                };
                let camouflaged = self.slot < self.insider_policy.camouflage_slots;
                let signal = simulate_task_execution(
                    &self.config.trust,
                    self.uavs[i].role,
                    camouflaged,
                    self.nav_pos[i],
                    &task,
                    self.config.swarm.v_max_task,
                    &mut self.rng,
                );
                let (l_legit, l_mal) = signal_likelihoods(&self.config.trust, &signal, task.deadline);
                // Robustness against execution-noise outliers: one signal
                // may shift the posterior odds by at most a factor of 10.
                let ratio = (l_legit / l_mal.max(1e-300)).clamp(0.1, 10.0);
                self.type_beliefs[i] = bayes_update(self.type_beliefs[i], ratio, 1.0);
                let decision = graded_access(
                    self.type_beliefs[i],
                    self.config.trust.theta_hi,
                    self.config.trust.theta_lo,
                )
                .expect("validated thresholds");
                self.access[i] = decision;
                if decision == Access::Reject {
                    self.uavs[i].admitted = false;
                }
            }
        }

        // Phase 9: hardening round inside the penetration window.
        let overhead = self.hardening_round(t)?;

        // Phase 10: kinematics on navigation solutions.
        let max_speed = self.config.swarm.max_speed;
        let dt = self.config.swarm.dt;
        for i in 0..n {
            let to_target = self.waypoints[i] - self.nav_pos[i];
            let dist = to_target.norm();
            if dist < 1.0 {
                self.waypoints[i] = random_waypoint(&self.config, &mut self.rng);
            }
            let speed = (dist / dt).min(max_speed);
            let v = if dist > 1e-9 {
                to_target / dist * speed
            } else {
                Vec3::zeros()
            };
            self.uavs[i].velocity = v;
            self.uavs[i].pos_true += v * dt;
            let drain = dt * (0.05 * v.norm_squared() + 0.01 * self.uavs[i].cdi);
            self.uavs[i].energy = (self.uavs[i].energy - drain).max(0.0);
        }

        // Phase 11: topology refresh.
        self.slot += 1;
        self.topology = update_topology(
            &self.uavs,
            self.config.swarm.r_comm,
            self.config.swarm.r_sense,
            self.slot,
        );

        // Phase 12: metrics.
        let g = &self.config.game;
        let mean_cdi = self.uavs.iter().map(|u| u.cdi).sum::<f64>() / n as f64;
        let mean_cost = (0..n)
            .map(|i| {
                let p = self.uavs[i].cdi;
                g.c_lat * p + g.c_en * p * p + g.c_cong * p * mean_cdi
                    + g.c_risk * s_cost[i] * s_cost[i]
            })
            .sum::<f64>()
            / n as f64;
        self.prev_mean_cdi = mean_cdi;
        let victim_deviation = match &self.spoof {
            Some(s) => (self.nav_pos[s.victim] - self.uavs[s.victim].pos_true).norm(),
            None => 0.0,
        };
        let joint_trust_min = if trust_on {
            (0..n)
                .filter(|&i| self.uavs[i].admitted)
                .map(|i| self.joint_trust[i])
                .fold(f64::INFINITY, f64::min)
                .min(1.0)
        } else {
            0.0
        };
        let row = MetricsRow {
            t,
            mean_cost,
            hardening_overhead: overhead,
            mean_cdi,
            victim_deviation,
            spoof_belief: self.belief.attack_probability(),
            joint_trust_min,
            paths_open: self.hardening.open_paths.len(),
            recon_fallbacks,
            policy: self.policy.name().to_string(),
            seed: self.config.swarm.seed,
        };
        let finite = row.t.is_finite()
            && row.mean_cost.is_finite()
            && row.mean_cdi.is_finite()
            && row.victim_deviation.is_finite()
            && self.uavs.iter().all(|u| {
                u.pos_true.iter().all(|c| c.is_finite()) && u.pos_gps.iter().all(|c| c.is_finite())
            });
        if !finite {
            return Err(SimError::Fault {
                slot: self.slot - 1,
                message: "non-finite position or cost".into(),
            });
        }
        self.rows.push(row.clone());
        Ok(row)
    }

    /// One reasoning/hardening round. Returns the overhead billed to the
    /// selected strategy (0 outside the penetration window).
    fn hardening_round(&mut self, t: f64) -> Result<f64, SimError> {
        let Some(pen) = &self.penetration else {
            return Ok(0.0);
        };
        if t < pen.t_start || t > pen.t_end {
            return Ok(0.0);
        }
        let gcfg = &self.config.graph;

        // Scan, compile, and feed the persistent engine (adds + retracts).
        let snapshot = emit_network_snapshot(
            pen,
            &self.topology,
            &self.uavs,
            &self.insider_policy,
            self.slot,
            &self.hardening.patched_vulns,
            &self.hardening.reimaged_nodes,
            &mut self.rng,
        );
        let report = compile_facts(&snapshot.config_text, &snapshot.vuln_text)
            .map_err(|e| SimError::Fault {
                slot: self.slot,
                message: format!("scan compilation failed: {e}"),
            })?;
        let gone: Vec<Fact> = self
            .hardening
            .engine
            .base_facts()
            .iter()
            .filter(|f| !report.facts.contains(f))
            .cloned()
            .collect();
        let mut firings = self.hardening.engine.retract_facts(&gone);
        firings += self.hardening.engine.add_facts(report.facts.iter().cloned());

        // Ground-truth tracing on the current fixpoint.
        let result = self.hardening.engine.result();
        let paths = trace_paths_pr(&result, gcfg.swarm_depth_cap, gcfg.path_cap);
        let facts = result.facts.clone();

        let mut overhead;
        match self.policy.hardening_axis() {
            Hardening::Proposed => {
                // Reasoning and verification work flows through the agents'
                // bounded per-slot budget: firings, the full instance panel
                // for each newly discovered path, and one spot-check
                // instance per open path every 10 slots. Patching disrupts
                // service at the slot it happens and is billed as-is.
                self.hardening.pending_work += firings as f64 * gcfg.fire_cost;
                for p in &paths {
                    if self.hardening.verified.insert(p.clone()) {
                        self.hardening.pending_work +=
                            gcfg.v_instances as f64 * gcfg.verify_cost;
                    }
                }
                for idx in 0..paths.len() {
                    if self.slot % 10 == (idx as u64) % 10 {
                        self.hardening.pending_work += gcfg.verify_cost;
                    }
                }
                overhead = self.hardening.pending_work.min(gcfg.work_rate);
                self.hardening.pending_work -= overhead;
                // Prioritized, budgeted patching.
                let plan = prioritize_patches(&paths, &facts, gcfg.patch_budget, gcfg.rho);
                for entry in plan
                    .entries
                    .iter()
                    .filter(|e| e.score >= gcfg.patch_score_floor)
                {
                    let removals = patch_removals(&facts, &entry.vuln_id);
                    let refire = self.hardening.engine.retract_facts(&removals);
                    self.hardening.pending_work += refire as f64 * gcfg.fire_cost;
                    overhead += gcfg.patch_cost;
                    self.hardening.patched_vulns.insert(entry.vuln_id.clone());
                }
            }
            Hardening::Fls => {
                let out = fls_harden(&facts, gcfg.swarm_depth_cap, gcfg.fls_fire_cap);
                overhead = out.firings as f64 * gcfg.fire_cost;
                let plan = prioritize_patches(&paths, &facts, gcfg.patch_budget, gcfg.rho);
                for entry in plan
                    .entries
                    .iter()
                    .filter(|e| e.score >= gcfg.patch_score_floor)
                {
                    let removals = patch_removals(&facts, &entry.vuln_id);
                    self.hardening.engine.retract_facts(&removals);
                    overhead += gcfg.patch_cost;
                    self.hardening.patched_vulns.insert(entry.vuln_id.clone());
                }
            }
            Hardening::Sas => {
                let round = sas_harden(
                    &facts,
                    &self.hardening.rules,
                    &paths,
                    gcfg.sas_error_prob,
                    gcfg.sas_reset_prob,
                    gcfg.sas_reset_mult_max,
                    &mut self.rng,
                );
                overhead = (round.firings as f64 * gcfg.fire_cost
                    + round.retries as f64 * gcfg.verify_cost)
                    * round.reset_multiplier as f64;
                let plan = prioritize_patches(&paths, &facts, gcfg.patch_budget, gcfg.rho);
                for entry in plan
                    .entries
                    .iter()
                    .filter(|e| e.score >= gcfg.patch_score_floor)
                {
                    let removals = patch_removals(&facts, &entry.vuln_id);
                    self.hardening.engine.retract_facts(&removals);
                    overhead += gcfg.patch_cost;
                    self.hardening.patched_vulns.insert(entry.vuln_id.clone());
                }
            }
            Hardening::Gp => {
                // Greedy patching: one disruptive patch per newly detected
                // vulnerability instance, immediately, no prioritization;
                // the affected node's service is reimaged as a side effect.
                overhead = 0.0;
                let mut reimaged = Vec::new();
                for inst in pen.newly_revealed(self.slot) {
                    if self.hardening.reimaged_nodes.contains(&inst.node)
                        || self.hardening.patched_vulns.contains(&pen.vuln_catalog[inst.vuln].id)
                    {
                        continue;
                    }
                    if self.hardening.gp_seen.insert((inst.node, inst.vuln)) {
                        overhead += gcfg.patch_cost;
                        reimaged.push(inst.node);
                    }
                }
                for node in reimaged {
                    self.hardening.reimaged_nodes.insert(node);
                    let service_fact: Vec<Fact> = facts
                        .iter()
                        .filter(|f| f.pred == "service" && f.args[0] == node.to_string())
                        .cloned()
                        .collect();
                    self.hardening.engine.retract_facts(&service_fact);
                }
            }
        }

        // Refresh the open-path telemetry after patching.
        let result = self.hardening.engine.result();
        self.hardening.open_paths = trace_paths_pr(&result, gcfg.swarm_depth_cap, gcfg.path_cap);
        Ok(overhead)
    }
}

impl Simulation {
    /// Test/diagnostic hook: engine fact counts.
    pub fn debug_engine_stats(&self) -> (usize, usize, usize, usize) {
        let facts = self.hardening.engine.facts();
        (
            facts.len(),
            facts.iter().filter(|f| f.pred == "has_priv").count(),
            facts.iter().filter(|f| f.pred == "vuln").count(),
            facts.iter().filter(|f| f.pred == "compromised").count(),
        )
    }

    /// Test/diagnostic hook: penetration layout summary.
    pub fn debug_penetration(&self) -> String {
        match &self.penetration {
            None => "no penetration".into(),
            Some(p) => {
                let facts = self.hardening.engine.facts();
                let reached: Vec<String> = facts
                    .iter()
                    .filter(|f| f.pred == "has_priv")
                    .map(|f| format!("{}:{}", f.args[1], f.args[2]))
                    .collect();
                format!(
                    "entries {:?} assets {:?} services {} instances {} revealed_by_160 {}
reached: {:?}",
                    p.entry_nodes,
                    p.critical_assets,
                    p.services.len(),
                    p.instances.len(),
                    p.revealed(160).count(),
                    reached
                )
            }
        }
    }
}

fn random_waypoint<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Vec3 {
    Vec3::new(
        rng.gen_range(0.0..config.swarm.region[0]),
        rng.gen_range(0.0..config.swarm.region[1]),
        rng.gen_range(0.0..config.swarm.region[2]),
    )
}
