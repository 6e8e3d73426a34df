//! Inner-layer mean-field game: coupled implicit HJB / FPK finite
//! differences on the deviation-state lattice, each backward/forward step
//! one Thomas solve.
//!
//! Deviation dynamics: ds = (a_eff - gamma * p * s) dt + sigma dW.
//! Running cost: c(s, p, m) = c_lat*p + c_en*p^2 + c_risk*s^2
//!                            + c_cong * p * Pbar(m),
//! with the mean-field coupling Pbar(m) = integral of p_star * m ds.
//! Terminal cost: c_risk * s^2. Interior minimizer:
//! p*(s, t) = clamp((gamma*s*dV/ds - c_lat - c_cong*Pbar) / (2 c_en), 0, P_max).

use super::tridiagonal::{thomas_solve, SolverError, Tridiagonal};
use crate::config::GameSection;
use nalgebra::DMatrix;

/// Parameters of the inner game (copied out of the scenario config).
#[derive(Debug, Clone)]
pub struct MfgParams {
    pub gamma: f64,
    pub sigma: f64,
    pub c_lat: f64,
    pub c_en: f64,
    pub c_risk: f64,
    pub c_cong: f64,
    pub s_max: f64,
    pub ns: usize,
    pub t_horizon: f64,
    pub nt: usize,
    pub damping: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl MfgParams {
    pub fn from_config(g: &GameSection) -> Self {
        Self {
            gamma: g.gamma,
            sigma: g.sigma,
            c_lat: g.c_lat,
            c_en: g.c_en,
            c_risk: g.c_risk,
            c_cong: g.c_cong,
            s_max: g.s_max,
            ns: g.ns,
            t_horizon: g.t_horizon,
            nt: g.nt,
            damping: g.mfg_damping,
            tol: g.mfg_tol,
            max_iters: g.mfg_max_iters,
        }
    }

    pub fn ds(&self) -> f64 {
        self.s_max / (self.ns - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_horizon / (self.nt - 1) as f64
    }

    pub fn s_axis(&self) -> Vec<f64> {
        (0..self.ns).map(|i| i as f64 * self.ds()).collect()
    }

    /// Running cost at one state/control point given the mean-field term.
    pub fn running_cost(&self, s: f64, p: f64, pbar: f64) -> f64 {
        self.c_lat * p + self.c_en * p * p + self.c_risk * s * s + self.c_cong * p * pbar
    }

    /// Pointwise HJB minimizer.
    pub fn optimal_control(&self, s: f64, dv_ds: f64, pbar: f64, p_max: f64) -> f64 {
        let numerator = self.gamma * s * dv_ds - self.c_lat - self.c_cong * pbar;
        if self.c_en > 0.0 {
            (numerator / (2.0 * self.c_en)).clamp(0.0, p_max)
        } else if numerator > 0.0 {
            // Bang-bang limit when control is free of quadratic cost.
            p_max
        } else {
            0.0
        }
    }
}

/// Discretized deviation-state/time lattice with value, density, control.
#[derive(Debug, Clone)]
pub struct MfgGrid {
    pub s_axis: Vec<f64>,
    pub t_axis: Vec<f64>,
    /// Value function, ns x nt.
    pub v: DMatrix<f64>,
    /// Density, ns x nt; each time layer integrates to 1.
    pub m: DMatrix<f64>,
    /// Optimal control, ns x nt, clamped to [0, P_max].
    pub p_star: DMatrix<f64>,
}

/// Outcome of the coupled fixed point.
#[derive(Debug, Clone)]
pub struct MfgSolution {
    pub grid: MfgGrid,
    pub iterations: usize,
    pub converged: bool,
    /// Final L1 change in the density between iterates.
    pub last_change: f64,
}

fn mean_field_term(params: &MfgParams, p_star: &DMatrix<f64>, m: &DMatrix<f64>, layer: usize) -> f64 {
    let ds = params.ds();
    (0..params.ns).map(|i| p_star[(i, layer)] * m[(i, layer)] * ds).sum()
}

/// Central difference of one time layer, one-sided at the boundaries.
fn gradient(col: &[f64], ds: f64) -> Vec<f64> {
    let n = col.len();
    let mut g = vec![0.0; n];
    for i in 0..n {
        g[i] = if i == 0 {
            (col[1] - col[0]) / ds
        } else if i == n - 1 {
            (col[n - 1] - col[n - 2]) / ds
        } else {
            (col[i + 1] - col[i - 1]) / (2.0 * ds)
        };
    }
    g
}

/// Backward-in-time implicit solve of the HJB equation given the density.
/// Returns (V, p_star).
pub fn solve_hjb(
    params: &MfgParams,
    a_eff: f64,
    p_max: f64,
    m: &DMatrix<f64>,
    prev_p_star: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>), SolverError> {
    hjb_backward(params, a_eff, p_max, m, prev_p_star, false)
}

/// Sanity variant used by numerics tests: terminal cost kept, running cost
/// forced to zero, control reduced to its bang-bang limit.
pub fn solve_hjb_zero_running(
    params: &MfgParams,
    a_eff: f64,
    p_max: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>), SolverError> {
    let mut p = params.clone();
    p.c_lat = 0.0;
    p.c_en = 0.0;
    p.c_cong = 0.0;
    let m = DMatrix::from_element(p.ns, p.nt, 1.0 / p.s_max);
    let zero = DMatrix::zeros(p.ns, p.nt);
    hjb_backward(&p, a_eff, p_max, &m, &zero, true)
}

fn hjb_backward(
    params: &MfgParams,
    a_eff: f64,
    p_max: f64,
    m: &DMatrix<f64>,
    prev_p_star: &DMatrix<f64>,
    zero_running: bool,
) -> Result<(DMatrix<f64>, DMatrix<f64>), SolverError> {
    let ns = params.ns;
    let nt = params.nt;
    let ds = params.ds();
    let dt = params.dt();
    let s = params.s_axis();
    let diff = 0.5 * params.sigma * params.sigma;

    let mut v = DMatrix::zeros(ns, nt);
    let mut p_star = DMatrix::zeros(ns, nt);

    // Terminal condition V(s, T) = c_risk * s^2 and its implied control.
    for i in 0..ns {
        v[(i, nt - 1)] = params.c_risk * s[i] * s[i];
    }
    {
        let vt: Vec<f64> = (0..ns).map(|i| v[(i, nt - 1)]).collect();
        let grad = gradient(&vt, ds);
        let pbar = mean_field_term(params, prev_p_star, m, nt - 1);
        for i in 0..ns {
            p_star[(i, nt - 1)] = params.optimal_control(s[i], grad[i], pbar, p_max);
        }
    }

    for n in (0..nt - 1).rev() {
        let v_next: Vec<f64> = (0..ns).map(|i| v[(i, n + 1)]).collect();
        let grad = gradient(&v_next, ds);
        let pbar = mean_field_term(params, prev_p_star, m, n);

        // Control from the known layer, then one implicit step.
        let mut drift = vec![0.0; ns];
        for i in 0..ns {
            let p = params.optimal_control(s[i], grad[i], pbar, p_max);
            p_star[(i, n)] = p;
            drift[i] = a_eff - params.gamma * p * s[i];
        }

        // Assemble (I - dt L) V_n = V_{n+1} + dt * c, upwind drift.
        let mut lower = vec![0.0; ns - 1];
        let mut diag = vec![0.0; ns];
        let mut upper = vec![0.0; ns - 1];
        let mut rhs = vec![0.0; ns];
        for i in 0..ns {
            let mut d = 1.0;
            // Diffusion with zero-gradient ghosts at both walls.
            if i > 0 {
                d += dt * diff / (ds * ds);
                lower[i - 1] -= dt * diff / (ds * ds);
            }
            if i + 1 < ns {
                d += dt * diff / (ds * ds);
                upper[i] -= dt * diff / (ds * ds);
            }
            // Upwind advection; outflow ghost (zero gradient) when the wind
            // points out of the grid at a wall.
            let mu = drift[i];
            if mu >= 0.0 {
                if i + 1 < ns {
                    d += dt * mu / ds;
                    upper[i] -= dt * mu / ds;
                }
            } else if i > 0 {
                d += dt * (-mu) / ds;
                lower[i - 1] -= dt * (-mu) / ds;
            }
            diag[i] = d;
            let c = if zero_running {
                0.0
            } else {
                params.running_cost(s[i], p_star[(i, n)], pbar)
            };
            rhs[i] = v[(i, n + 1)] + dt * c;
        }
        let sys = Tridiagonal::new(lower, diag, upper, rhs)?;
        if !sys.is_row_dominant() {
            return Err(SolverError::NotDiagonallyDominant);
        }
        let sol = thomas_solve(&sys)?;
        for i in 0..ns {
            v[(i, n)] = sol[i];
        }
    }
    Ok((v, p_star))
}

/// Density solution plus the worst per-step mass drift observed before the
/// roundoff renormalization.
#[derive(Debug, Clone)]
pub struct FpkSolution {
    pub m: DMatrix<f64>,
    pub max_mass_drift: f64,
}

/// Forward implicit solve of the FPK equation under a given control field,
/// conservative flux form with reflecting boundaries.
pub fn solve_fpk(
    params: &MfgParams,
    p_star: &DMatrix<f64>,
    a_eff: f64,
    m0: &[f64],
) -> Result<FpkSolution, SolverError> {
    let ns = params.ns;
    let nt = params.nt;
    let ds = params.ds();
    let dt = params.dt();
    let s = params.s_axis();
    let diff = 0.5 * params.sigma * params.sigma;

    if m0.len() != ns {
        return Err(SolverError::Dimension(format!(
            "m0 length {} != ns {ns}",
            m0.len()
        )));
    }
    let mut m = DMatrix::zeros(ns, nt);
    let mass0: f64 = m0.iter().sum::<f64>() * ds;
    if mass0 <= 0.0 {
        return Err(SolverError::Dimension("initial density has no mass".into()));
    }
    for i in 0..ns {
        m[(i, 0)] = m0[i] / mass0;
    }
    let mut max_mass_drift = 0.0f64;

    for n in 0..nt - 1 {
        // Drift at the target layer (implicit).
        let mu: Vec<f64> = (0..ns)
            .map(|i| a_eff - params.gamma * p_star[(i, n + 1)] * s[i])
            .collect();
        // Interface drifts mu_{i+1/2}, i = 0..ns-2.
        let mu_half: Vec<f64> = (0..ns - 1).map(|i| 0.5 * (mu[i] + mu[i + 1])).collect();

        let mut lower = vec![0.0; ns - 1];
        let mut diag = vec![1.0 / dt; ns];
        let mut upper = vec![0.0; ns - 1];

        // Flux F_{i+1/2} = mu+ m_i + mu- m_{i+1} - D (m_{i+1} - m_i)/ds;
        // row i gains +F_{i+1/2}/ds and -F_{i-1/2}/ds; boundary fluxes are
        // zero, so column sums telescope and mass is conserved exactly.
        for i in 0..ns - 1 {
            let up = mu_half[i].max(0.0);
            let dn = mu_half[i].min(0.0);
            // Contribution of F_{i+1/2} to row i (outflow).
            diag[i] += (up + diff / ds) / ds;
            upper[i] += (dn - diff / ds) / ds;
            // Contribution of -F_{i+1/2} to row i+1 (inflow).
            lower[i] += (-up - diff / ds) / ds;
            diag[i + 1] += (-dn + diff / ds) / ds;
        }

        let rhs: Vec<f64> = (0..ns).map(|i| m[(i, n)] / dt).collect();
        let sys = Tridiagonal::new(lower, diag, upper, rhs)?;
        if !sys.is_column_dominant() {
            return Err(SolverError::NotDiagonallyDominant);
        }
        let sol = thomas_solve(&sys)?;

        let mass: f64 = sol.iter().sum::<f64>() * ds;
        let drift_err = (mass - 1.0).abs();
        if drift_err > 1e-3 {
            return Err(SolverError::MassDrift(drift_err));
        }
        debug_assert!(drift_err <= 1e-6, "mass drift {drift_err} per step");
        max_mass_drift = max_mass_drift.max(drift_err);
        for i in 0..ns {
            // Roundoff cleanup only; the scheme conserves mass by design.
            m[(i, n + 1)] = (sol[i] / mass).max(0.0);
        }
    }
    Ok(FpkSolution { m, max_mass_drift })
}

/// Alternate HJB and FPK with a damped density update until the L1 change
/// falls below tolerance.
pub fn solve_mfg(
    params: &MfgParams,
    a_eff: f64,
    p_max: f64,
    m0: &[f64],
) -> Result<MfgSolution, SolverError> {
    let ns = params.ns;
    let nt = params.nt;
    let ds = params.ds();
    let t_axis: Vec<f64> = (0..nt).map(|n| n as f64 * params.dt()).collect();

    let mut m = DMatrix::zeros(ns, nt);
    let mass0: f64 = m0.iter().sum::<f64>() * ds;
    if mass0 <= 0.0 {
        return Err(SolverError::Dimension("initial density has no mass".into()));
    }
    for n in 0..nt {
        for i in 0..ns {
            m[(i, n)] = m0[i] / mass0;
        }
    }
    let mut p_star = DMatrix::zeros(ns, nt);

    // Without the congestion coupling the HJB is independent of m: a single
    // pass is the fixed point.
    if params.c_cong == 0.0 {
        let (v, p) = solve_hjb(params, a_eff, p_max, &m, &p_star)?;
        let m_out = solve_fpk(params, &p, a_eff, m0)?.m;
        return Ok(MfgSolution {
            grid: MfgGrid {
                s_axis: params.s_axis(),
                t_axis,
                v,
                m: m_out,
                p_star: p,
            },
            iterations: 1,
            converged: true,
            last_change: 0.0,
        });
    }

    let mut damping = params.damping;
    let mut reductions = 0usize;
    let mut growth_streak = 0usize;
    let mut prev_change = f64::INFINITY;
    let mut v = DMatrix::zeros(ns, nt);
    let mut change = f64::INFINITY;

    for iter in 1..=params.max_iters {
        let (v_new, p_new) = solve_hjb(params, a_eff, p_max, &m, &p_star)?;
        // Damp the control surface as well: the congestion feedback through
        // Pbar has near-unit gain and oscillates under plain Picard steps.
        for n in 0..nt {
            for i in 0..ns {
                p_star[(i, n)] = (1.0 - damping) * p_star[(i, n)] + damping * p_new[(i, n)];
            }
        }
        let m_new = solve_fpk(params, &p_star, a_eff, m0)?.m;
        v = v_new;

        // Max over time layers of the spatial L1 distance.
        change = (0..nt)
            .map(|n| (0..ns).map(|i| (m_new[(i, n)] - m[(i, n)]).abs() * ds).sum::<f64>())
            .fold(0.0, f64::max);

        if change > prev_change {
            growth_streak += 1;
            if growth_streak >= 3 {
                damping *= 0.5;
                reductions += 1;
                growth_streak = 0;
                if reductions > 5 {
                    return Err(SolverError::Oscillation);
                }
            }
        } else {
            growth_streak = 0;
        }
        prev_change = change;

        for n in 0..nt {
            for i in 0..ns {
                m[(i, n)] = (1.0 - damping) * m[(i, n)] + damping * m_new[(i, n)];
            }
        }

        if change < params.tol {
            return Ok(MfgSolution {
                grid: MfgGrid {
                    s_axis: params.s_axis(),
                    t_axis,
                    v,
                    m,
                    p_star,
                },
                iterations: iter,
                converged: true,
                last_change: change,
            });
        }
    }

    Ok(MfgSolution {
        grid: MfgGrid {
            s_axis: params.s_axis(),
            t_axis,
            v,
            m,
            p_star,
        },
        iterations: params.max_iters,
        converged: false,
        last_change: change,
    })
}

/// Linear interpolation of the control surface at (s, t=0).
pub fn control_at(grid: &MfgGrid, s: f64) -> f64 {
    let axis = &grid.s_axis;
    let n = axis.len();
    if s <= axis[0] {
        return grid.p_star[(0, 0)];
    }
    if s >= axis[n - 1] {
        return grid.p_star[(n - 1, 0)];
    }
    let ds = axis[1] - axis[0];
    let idx = ((s - axis[0]) / ds).floor() as usize;
    let idx = idx.min(n - 2);
    let w = (s - axis[idx]) / ds;
    grid.p_star[(idx, 0)] * (1.0 - w) + grid.p_star[(idx + 1, 0)] * w
}
