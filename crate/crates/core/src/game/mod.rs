//! The Bayesian-MFG double-layer decision mechanism.
//!
//! Outer layer: a zero-sum matrix game between the attacker (bias-rate
//! levels) and the swarm (max-CDI grid), solved by fictitious play with the
//! attacker's empirical counts anchored to the current belief. Inner layer:
//! the mean-field game in [`mfg`]. The MPC wrapper in [`mpc`] re-solves both
//! every slot on a receding horizon.

pub mod mfg;
pub mod mpc;
pub mod tridiagonal;

pub use mfg::{control_at, solve_fpk, solve_hjb, solve_mfg, FpkSolution, MfgGrid, MfgParams, MfgSolution};
pub use mpc::{mpc_step, MpcConfig, MpcOutcome};
pub use tridiagonal::{thomas_solve, SolverError, Tridiagonal};

use crate::config::GameSection;
use nalgebra::DMatrix;

/// Belief over the attacker's bias-rate level.
#[derive(Debug, Clone)]
pub struct AttackerBelief {
    /// Bias levels, m/s; index 0 is the no-attack level.
    pub support: Vec<f64>,
    /// Probabilities on the simplex.
    pub probs: Vec<f64>,
}

impl AttackerBelief {
    pub fn uniform(support: Vec<f64>) -> Self {
        let n = support.len();
        Self {
            support,
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Prior concentrated on "no attack".
    pub fn quiescent(support: Vec<f64>, epsilon: f64) -> Self {
        let n = support.len();
        let mut probs = vec![epsilon; n];
        probs[0] = 1.0 - epsilon * (n - 1) as f64;
        Self { support, probs }
    }

    /// Expected bias rate under the belief.
    pub fn expected_bias(&self) -> f64 {
        self.support
            .iter()
            .zip(self.probs.iter())
            .map(|(a, p)| a * p)
            .sum()
    }

    /// Probability that an attack is underway (any nonzero level).
    pub fn attack_probability(&self) -> f64 {
        self.support
            .iter()
            .zip(self.probs.iter())
            .filter(|(a, _)| **a != 0.0)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Summary of the swarm's residual observations for one slot.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualSummary {
    pub max_k: f64,
    pub mean_k: f64,
    pub n: usize,
}

/// Gaussian observation model: the chosen residual statistic under bias
/// level `a` is N(k_base + a * tau, obs_sigma).
#[derive(Debug, Clone, Copy)]
pub struct ObservationModel {
    pub k_base: f64,
    pub tau: f64,
    pub sigma: f64,
    pub use_max: bool,
}

impl ObservationModel {
    pub fn from_config(g: &GameSection) -> Self {
        Self {
            k_base: g.k_base,
            tau: g.obs_tau,
            sigma: g.obs_sigma,
            use_max: g.belief_obs != "mean",
        }
    }

    pub fn likelihood(&self, observed: f64, bias_level: f64) -> f64 {
        let mu = self.k_base + bias_level * self.tau;
        let z = (observed - mu) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn statistic(&self, summary: &ResidualSummary) -> f64 {
        if self.use_max {
            summary.max_k
        } else {
            summary.mean_k
        }
    }
}

/// Posterior update from one slot of residual observations. Zero-probability
/// collapse is prevented by flooring at 1e-9 before renormalizing; an
/// all-zero likelihood vector keeps the prior and logs a warning.
pub fn update_belief(
    belief: &AttackerBelief,
    summary: &ResidualSummary,
    model: &ObservationModel,
) -> AttackerBelief {
    let obs = model.statistic(summary);
    let mut posterior: Vec<f64> = belief
        .probs
        .iter()
        .zip(belief.support.iter())
        .map(|(p, a)| p * model.likelihood(obs, *a))
        .collect();
    let total: f64 = posterior.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        log::warn!("attacker-belief update: all likelihoods zero; keeping prior");
        return belief.clone();
    }
    for p in posterior.iter_mut() {
        *p = (*p / total).max(1e-9);
    }
    let renorm: f64 = posterior.iter().sum();
    for p in posterior.iter_mut() {
        *p /= renorm;
    }
    AttackerBelief {
        support: belief.support.clone(),
        probs: posterior,
    }
}

/// Attacker-facing utility parameters of the outer game.
#[derive(Debug, Clone, Copy)]
pub struct UtilityParams {
    pub alpha: f64,
    pub beta: f64,
    pub w_def: f64,
    pub rho_max: f64,
    pub p_half: f64,
    pub kappa0: f64,
    pub sigma_k: f64,
    pub c_lat: f64,
    pub c_en: f64,
}

impl UtilityParams {
    pub fn from_config(g: &GameSection, kappa0: f64, sigma_k: f64) -> Self {
        Self {
            alpha: g.alpha,
            beta: g.beta,
            w_def: g.w_def,
            rho_max: g.rho_max,
            p_half: g.p_half,
            kappa0,
            sigma_k,
            c_lat: g.c_lat,
            c_en: g.c_en,
        }
    }

    /// Expected residual observability, increasing in the defense intensity.
    pub fn rho(&self, p_max: f64) -> f64 {
        self.rho_max * p_max / (p_max + self.p_half)
    }

    /// Probability the attack is detected given bias rate and max CDI.
    pub fn detection_probability(&self, a: f64, p_max: f64) -> f64 {
        let x = (a * self.rho(p_max) - self.kappa0) / self.sigma_k;
        1.0 / (1.0 + (-x).exp())
    }

    /// Attacker utility: deviation payoff while undetected minus the
    /// detection penalty.
    pub fn attacker_utility(&self, a: f64, p_max: f64) -> f64 {
        let pd = self.detection_probability(a, p_max);
        self.alpha * a * (1.0 - pd) - self.beta * pd
    }

    /// Defender-side resource charge for committing to `p_max`; depends on
    /// the defender's own action only, so adding it to the attacker utility
    /// leaves attacker best responses unchanged.
    pub fn defense_charge(&self, p_max: f64) -> f64 {
        self.w_def * (self.c_lat * p_max + self.c_en * p_max * p_max)
    }
}

/// The outer matrix game. Rows: attacker bias levels (maximizer); columns:
/// defender max-CDI actions (minimizer). `payoff` is the zero-sum objective
/// U(a, P) + defense charge(P); `*_counts` seed fictitious play.
#[derive(Debug, Clone)]
pub struct OuterGame {
    pub attacker_actions: Vec<f64>,
    pub defender_actions: Vec<f64>,
    pub payoff: DMatrix<f64>,
    pub attacker_counts: Vec<f64>,
    pub defender_counts: Vec<f64>,
}

impl OuterGame {
    /// Plain game with zeroed counts (classic fictitious play start).
    pub fn new(attacker_actions: Vec<f64>, defender_actions: Vec<f64>, payoff: DMatrix<f64>) -> Self {
        let na = attacker_actions.len();
        let nd = defender_actions.len();
        assert_eq!(payoff.nrows(), na);
        assert_eq!(payoff.ncols(), nd);
        Self {
            attacker_actions,
            defender_actions,
            payoff,
            attacker_counts: vec![0.0; na],
            defender_counts: vec![0.0; nd],
        }
    }

    /// Build the belief-anchored outer game: the attacker's empirical counts
    /// start at `belief * anchor`, realizing the Bayesian game as a
    /// fictitious-play problem whose row mixture is pinned to the belief
    /// over attacker types.
    pub fn from_belief(
        belief: &AttackerBelief,
        defender_actions: &[f64],
        util: &UtilityParams,
        anchor: f64,
    ) -> Self {
        let na = belief.support.len();
        let nd = defender_actions.len();
        let mut payoff = DMatrix::zeros(na, nd);
        for (i, &a) in belief.support.iter().enumerate() {
            for (j, &p) in defender_actions.iter().enumerate() {
                payoff[(i, j)] = util.attacker_utility(a, p) + util.defense_charge(p);
            }
        }
        let mut game = Self::new(belief.support.clone(), defender_actions.to_vec(), payoff);
        game.attacker_counts = belief.probs.iter().map(|p| p * anchor).collect();
        game
    }
}

/// Fictitious-play outcome: empirical mixtures, empirical game value, and
/// whether the stopping tolerance was reached.
#[derive(Debug, Clone)]
pub struct FpOutcome {
    pub defender: Vec<f64>,
    pub attacker: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn normalize_or_uniform(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        vec![1.0 / counts.len() as f64; counts.len()]
    } else {
        counts.iter().map(|c| c / total).collect()
    }
}

/// Iterate simultaneous best responses to the opponents' empirical action
/// frequencies; stop when both mixtures move less than `eps` in L-infinity
/// between iterations or at the iteration cap (flagged approximate).
pub fn fictitious_play(game: &OuterGame, max_iters: usize, eps: f64) -> FpOutcome {
    let na = game.attacker_actions.len();
    let nd = game.defender_actions.len();
    let mut ac = game.attacker_counts.clone();
    let mut dc = game.defender_counts.clone();
    let mut attacker = normalize_or_uniform(&ac);
    let mut defender = normalize_or_uniform(&dc);
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..max_iters {
        iterations = it + 1;
        // Attacker best response to the defender's mixture (maximize).
        let mut best_a = 0;
        let mut best_av = f64::NEG_INFINITY;
        for i in 0..na {
            let v: f64 = (0..nd).map(|j| game.payoff[(i, j)] * defender[j]).sum();
            if v > best_av {
                best_av = v;
                best_a = i;
            }
        }
        // Defender best response to the attacker's mixture (minimize).
        let mut best_d = 0;
        let mut best_dv = f64::INFINITY;
        for j in 0..nd {
            let v: f64 = (0..na).map(|i| game.payoff[(i, j)] * attacker[i]).sum();
            if v < best_dv {
                best_dv = v;
                best_d = j;
            }
        }
        ac[best_a] += 1.0;
        dc[best_d] += 1.0;
        let attacker_new = normalize_or_uniform(&ac);
        let defender_new = normalize_or_uniform(&dc);
        let move_a = attacker
            .iter()
            .zip(attacker_new.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let move_d = defender
            .iter()
            .zip(defender_new.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        attacker = attacker_new;
        defender = defender_new;
        if move_a < eps && move_d < eps {
            converged = true;
            break;
        }
    }

    let value: f64 = (0..na)
        .map(|i| {
            (0..nd)
                .map(|j| attacker[i] * game.payoff[(i, j)] * defender[j])
                .sum::<f64>()
        })
        .sum();
    if !converged {
        log::debug!("fictitious play hit the iteration cap; mixtures are approximate");
    }
    FpOutcome {
        defender,
        attacker,
        value,
        converged,
        iterations,
    }
}
