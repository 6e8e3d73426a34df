//! MPC rolling horizon around the double-layer game: every slot the outer
//! game is re-solved from the current belief, the inner MFG from the current
//! deviation population, and only the first control layer is applied.

use super::mfg::{control_at, solve_mfg, MfgParams};
use super::tridiagonal::SolverError;
use super::{fictitious_play, AttackerBelief, OuterGame, UtilityParams};
use crate::config::ScenarioConfig;

/// Everything the per-slot decision needs from the scenario config.
#[derive(Debug, Clone)]
pub struct MpcConfig {
    pub util: UtilityParams,
    pub mfg: MfgParams,
    pub defender_actions: Vec<f64>,
    pub fp_iters: usize,
    pub fp_eps: f64,
    pub belief_anchor: f64,
}

impl MpcConfig {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            util: UtilityParams::from_config(&cfg.game, cfg.perception.kappa0, cfg.perception.sigma_k),
            mfg: MfgParams::from_config(&cfg.game),
            defender_actions: cfg.game.p_grid.clone(),
            fp_iters: cfg.game.fp_iters,
            fp_eps: cfg.game.fp_eps,
            belief_anchor: cfg.game.belief_anchor,
        }
    }
}

/// Per-slot decision: swarm-level cap, per-UAV CDI assignments, diagnostics.
#[derive(Debug, Clone)]
pub struct MpcOutcome {
    /// Expected defender action: the swarm-level max CDI.
    pub p_max: f64,
    /// Expected bias rate under the belief.
    pub a_eff: f64,
    /// Per-UAV CDI assignments aligned with the deviation inputs.
    pub cdis: Vec<f64>,
    pub defender_mixture: Vec<f64>,
    pub game_value: f64,
    pub mfg_iterations: usize,
    pub mfg_converged: bool,
}

/// One rolling-horizon step: fictitious play on the belief-anchored outer
/// game fixes the swarm-level cap, the inner MFG yields the control surface,
/// and each UAV reads its CDI at its own deviation estimate.
pub fn mpc_step(
    cfg: &MpcConfig,
    belief: &AttackerBelief,
    deviations: &[f64],
) -> Result<MpcOutcome, SolverError> {
    let game = OuterGame::from_belief(belief, &cfg.defender_actions, &cfg.util, cfg.belief_anchor);
    let fp = fictitious_play(&game, cfg.fp_iters, cfg.fp_eps);
    let p_max: f64 = fp
        .defender
        .iter()
        .zip(cfg.defender_actions.iter())
        .map(|(w, p)| w * p)
        .sum();
    let a_eff = belief.expected_bias();

    // Quiescent shortcut: a cap below half a meter of communication range
    // buys no cooperation, so the control surface is treated as zero.
    if p_max <= 0.5 {
        return Ok(MpcOutcome {
            p_max,
            a_eff,
            cdis: vec![0.0; deviations.len()],
            defender_mixture: fp.defender,
            game_value: fp.value,
            mfg_iterations: 0,
            mfg_converged: true,
        });
    }

    // Empirical deviation density as the MFG initial condition.
    let ns = cfg.mfg.ns;
    let ds = cfg.mfg.ds();
    let mut m0 = vec![0.0; ns];
    if deviations.is_empty() {
        m0[0] = 1.0;
    } else {
        for &s in deviations {
            let idx = ((s / ds).round() as usize).min(ns - 1);
            m0[idx] += 1.0;
        }
    }

    let sol = solve_mfg(&cfg.mfg, a_eff, p_max, &m0)?;
    let cdis = deviations.iter().map(|&s| control_at(&sol.grid, s)).collect();
    Ok(MpcOutcome {
        p_max,
        a_eff,
        cdis,
        defender_mixture: fp.defender,
        game_value: fp.value,
        mfg_iterations: sol.iterations,
        mfg_converged: sol.converged,
    })
}
