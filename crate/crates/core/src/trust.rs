//! Dynamic behavioral authentication and distributed trust.
//!
//! Single-node stage: probing tasks yield (delay, accuracy) signals, a
//! Bayesian filter tracks the posterior that the UAV is legitimate, and
//! graded access admits / rejects / escalates on fixed thresholds.
//! Swarm stage: per-observer decayed trust with a betrayal penalty, fused by
//! interaction-count weighting over a sliding window.

use crate::config::TrustSection;
use crate::swarm::Role;
use crate::Vec3;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrustError {
    #[error("threshold ordering violated: need 0 <= theta_lo < theta_hi <= 1")]
    BadThresholds,
}

/// A maneuvering task; probes are indistinguishable from real tasks to the
/// UAV under test.
#[derive(Debug, Clone, Copy)]
pub struct ProbeTask {
    pub target_pos: Vec3,
    /// Seconds allotted to reach the target.
    pub deadline: f64,
    pub is_probe: bool,
}

/// Observable behavioral signal extracted from one task execution.
#[derive(Debug, Clone, Copy)]
pub struct BehaviorSignal {
    /// Completion time, seconds.
    pub delay: f64,
    /// Distance between arrival and target, meters.
    pub accuracy_err: f64,
}

/// Posterior probability that a UAV is of the legitimate type.
#[derive(Debug, Clone, Copy)]
pub struct TypeBelief {
    pub p_legit: f64,
}

impl Default for TypeBelief {
    fn default() -> Self {
        Self { p_legit: 0.5 }
    }
}

/// Graded access decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Admit,
    Reject,
    Escalate,
}

/// Outcome of one observed interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Good,
    Betrayal,
}

/// Execution model: legitimate UAVs fly at the speed the deadline requires
/// (energy scales with speed squared, so no faster); insiders past their
/// camouflage phase conserve energy by capping speed at `conserve` times the
/// required speed and landing off-target.
pub fn simulate_task_execution<R: Rng>(
    params: &TrustSection,
    role: Role,
    camouflaged: bool,
    from: Vec3,
    task: &ProbeTask,
    v_max: f64,
    rng: &mut R,
) -> BehaviorSignal {
    let distance = (task.target_pos - from).norm();
    let v_required = (distance / task.deadline).min(v_max);
    let noise_d = Normal::new(0.0, params.sigma_delay).unwrap();
    let behave_legit = role == Role::Legitimate || camouflaged;
    if behave_legit {
        let v = (v_required * (1.0 + noise_d.sample(rng))).max(1e-6);
        let delay = distance / v;
        let accuracy_err = Normal::new(0.0, params.sigma_acc).unwrap().sample(rng).abs();
        BehaviorSignal { delay, accuracy_err }
    } else {
        let v = (params.conserve * v_required * (1.0 + noise_d.sample(rng))).max(1e-6);
        let delay = distance / v;
        let accuracy_err = Normal::new(params.insider_acc_mean, params.insider_acc_sigma)
            .unwrap()
            .sample(rng)
            .max(0.0);
        BehaviorSignal { delay, accuracy_err }
    }
}

fn gauss(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Class-conditional likelihood of a signal given the deadline, on the
/// (delay_ratio, accuracy_err) pair.
pub fn signal_likelihoods(params: &TrustSection, signal: &BehaviorSignal, deadline: f64) -> (f64, f64) {
    let ratio = signal.delay / deadline;
    let l_legit = gauss(ratio, params.like_legit_delay_mean, params.like_legit_delay_sigma)
        * gauss(
            signal.accuracy_err,
            params.like_legit_acc_mean,
            params.like_legit_acc_sigma,
        );
    let l_mal = gauss(ratio, params.like_mal_delay_mean, params.like_mal_delay_sigma)
        * gauss(
            signal.accuracy_err,
            params.like_mal_acc_mean,
            params.like_mal_acc_sigma,
        );
    (l_legit, l_mal)
}

/// Bayes posterior update, floored into [1e-6, 1 - 1e-6]; a zero total
/// likelihood keeps the belief and logs a warning.
pub fn bayes_update(belief: TypeBelief, l_legit: f64, l_mal: f64) -> TypeBelief {
    let num = belief.p_legit * l_legit;
    let den = num + (1.0 - belief.p_legit) * l_mal;
    if den <= 0.0 || !den.is_finite() {
        log::warn!("type-belief update: zero total likelihood; belief unchanged");
        return belief;
    }
    TypeBelief {
        p_legit: (num / den).clamp(1e-6, 1.0 - 1e-6),
    }
}

/// Three-way decision on the posterior: reject at or below `theta_lo`,
/// admit at or above `theta_hi`, escalate in between.
pub fn graded_access(belief: TypeBelief, theta_hi: f64, theta_lo: f64) -> Result<Access, TrustError> {
    if !(0.0..=1.0).contains(&theta_lo) || !(0.0..=1.0).contains(&theta_hi) || theta_lo >= theta_hi {
        return Err(TrustError::BadThresholds);
    }
    Ok(if belief.p_legit >= theta_hi {
        Access::Admit
    } else if belief.p_legit <= theta_lo {
        Access::Reject
    } else {
        Access::Escalate
    })
}

/// Decayed local trust update with betrayal amplification, clamped to
/// [-1, 1]:
///   Good:     T' = lambda * T + (1 - lambda)
///   Betrayal: T' = lambda * T - (1 - lambda) * eta
pub fn update_local_trust(t: f64, outcome: Outcome, lambda: f64, eta: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&lambda) && lambda > 0.0);
    debug_assert!(eta >= 1.0);
    let t_new = match outcome {
        Outcome::Good => lambda * t + (1.0 - lambda),
        Outcome::Betrayal => lambda * t - (1.0 - lambda) * eta,
    };
    t_new.clamp(-1.0, 1.0)
}

/// Per-target distributed trust state: one decayed trust value and an
/// interaction count per observer, plus the sliding window of joint scores.
#[derive(Debug, Clone)]
pub struct TrustLedger {
    /// observer id -> (local trust, interaction count).
    pub observers: BTreeMap<usize, (f64, u64)>,
    window: VecDeque<f64>,
    window_len: usize,
}

impl TrustLedger {
    pub fn new(window_len: usize) -> Self {
        Self {
            observers: BTreeMap::new(),
            window: VecDeque::new(),
            window_len: window_len.max(1),
        }
    }

    pub fn record(&mut self, observer: usize, outcome: Outcome, lambda: f64, eta: f64) {
        let entry = self.observers.entry(observer).or_insert((0.0, 0));
        entry.0 = update_local_trust(entry.0, outcome, lambda, eta);
        entry.1 += 1;
    }

    /// Interaction-count-weighted instantaneous joint trust.
    pub fn instantaneous_joint(&self) -> f64 {
        let total: u64 = self.observers.values().map(|(_, c)| c).sum();
        if total == 0 {
            return 0.0;
        }
        self.observers
            .values()
            .map(|(t, c)| t * (*c as f64 / total as f64))
            .sum()
    }

    /// Push this slot's instantaneous joint score into the sliding window.
    pub fn close_slot(&mut self) {
        let joint = self.instantaneous_joint();
        self.window.push_back(joint);
        while self.window.len() > self.window_len {
            self.window.pop_front();
        }
    }

    /// Sliding-window aggregate: mean of the recent instantaneous joints.
    /// Empty window yields the neutral score 0.
    pub fn aggregate(&self) -> f64 {
        if self.window.is_empty() {
            return 0.0;
        }
        self.window.iter().sum::<f64>() / self.window.len() as f64
    }
}
