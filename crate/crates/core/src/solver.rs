//! Newton solution of `F(eps, g) = 0` and natural-parameter continuation
//! in `eps` from the point-vortex pair.
//!
//! The Jacobian is formed by central differences and left-preconditioned
//! with the closed-form inverse of the `eps = 0` linearization; the
//! preconditioned system is solved by dense LU.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::asymptotics::expansion_state;
use crate::error::{Error, Result};
use crate::functional::{ball_guard, truncation_indicator, Functional};
use crate::problem::{
    base_state, linearized_solve, vec_to_series, PairConfig, StateVector,
};

/// A converged point `(eps, g(eps))` of the solution curve.
#[derive(Debug, Clone, PartialEq)]
pub struct VState {
    pub eps: f64,
    pub state: StateVector,
    /// Sup norm of the projected residual.
    pub residual_norm: f64,
    pub newton_iters: usize,
    /// Largest residual mode above `N+1` at doubled resolution.
    pub truncation_indicator: f64,
    /// Residual sup norm before each Newton step and after the last.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub config: PairConfig,
    /// Converged states, strictly increasing in `eps`.
    pub states: Vec<VState>,
    /// Largest `eps` reached.
    pub eps_max: f64,
    /// Why continuation stopped early, if it did.
    pub stopped: Option<String>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone)]
pub struct Solver {
    functional: Functional,
}

impl Solver {
    pub fn new(cfg: PairConfig) -> Result<Self> {
        Ok(Solver {
            functional: Functional::new(cfg)?,
        })
    }

    pub fn config(&self) -> &PairConfig {
        self.functional.config()
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    /// Central-difference Jacobian of the projected residual, one column per
    /// unknown, step `1e-6 max(1, |u_i|)`.
    pub fn jacobian_fd(&self, eps: f64, g: &StateVector) -> Result<DMatrix<f64>> {
        let cfg = self.config();
        let n = cfg.modes;
        let dim = cfg.dimension();
        let u = g.to_vec();
        let columns: Vec<Vec<f64>> = (0..dim)
            .into_par_iter()
            .map(|i| {
                let h = 1e-6 * u[i].abs().max(1.0);
                let mut up = u.clone();
                let mut down = u.clone();
                up[i] += h;
                down[i] -= h;
                let fp = self
                    .functional
                    .residual_vec(eps, &StateVector::from_slice(&up, n)?)?;
                let fm = self
                    .functional
                    .residual_vec(eps, &StateVector::from_slice(&down, n)?)?;
                Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
    }

    fn precondition(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(linearized_solve(self.config(), &vec_to_series(v))?.to_vec())
    }

    pub fn newton_solve(&self, eps: f64, init: &StateVector) -> Result<VState> {
        let cfg = self.config();
        let n = cfg.modes;
        let tol = cfg.scaled_tol();
        ball_guard(eps, cfg, init)?;
        let mut g = init.clone();
        let mut history = Vec::new();
        for iter in 0..=cfg.max_iter {
            let f = self.functional.residual_vec(eps, &g)?;
            let r = sup(&f);
            history.push(r);
            if !r.is_finite() {
                break;
            }
            if r <= tol {
                return Ok(VState {
                    eps,
                    truncation_indicator: truncation_indicator(eps, &g, cfg)?,
                    state: g,
                    residual_norm: r,
                    newton_iters: iter,
                    residual_history: history,
                });
            }
            if iter == cfg.max_iter {
                break;
            }
            let jac = self.jacobian_fd(eps, &g)?;
            let dim = jac.ncols();
            let mut pre = DMatrix::zeros(dim, dim);
            for c in 0..dim {
                let col: Vec<f64> = jac.column(c).iter().copied().collect();
                pre.set_column(c, &DVector::from_vec(self.precondition(&col)?));
            }
            let rhs = DVector::from_vec(self.precondition(&f)?);
            let step = pre
                .lu()
                .solve(&rhs)
                .ok_or(Error::SingularJacobian { eps })?;
            let mut u = g.to_vec();
            for (x, s) in u.iter_mut().zip(step.iter()) {
                *x -= s;
            }
            g = StateVector::from_slice(&u, n)?;
            ball_guard(eps, cfg, &g)?;
        }
        Err(Error::NoConvergence {
            eps,
            iterations: history.len().saturating_sub(1),
            residual: history.last().copied().unwrap_or(f64::NAN),
        })
    }

    /// Traces the branch over increasing `targets`. The first two targets
    /// are predicted from the small-`eps` expansion, later ones by quadratic
    /// extrapolation of the converged states. A failed target is retried
    /// once via the midpoint of the step before continuation stops.
    pub fn continue_branch(&self, targets: &[f64]) -> Result<Branch> {
        let cfg = self.config().clone();
        if targets.is_empty() {
            return Err(Error::InvalidConfig {
                field: "eps_targets",
                reason: "no continuation targets".into(),
            });
        }
        if targets.windows(2).any(|w| w[1] <= w[0]) || targets.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "eps_targets",
                reason: "targets must be finite and strictly increasing".into(),
            });
        }
        let origin = (0.0, base_state(&cfg));
        let mut states: Vec<VState> = Vec::new();
        let mut stopped = None;

        for (idx, &target) in targets.iter().enumerate() {
            let predict = |states: &[VState], eps: f64| -> StateVector {
                if idx < 2 {
                    if let Ok(g) = expansion_state(&cfg, eps) {
                        return g;
                    }
                }
                extrapolate(&origin, states, eps)
            };
            match self.newton_solve(target, &predict(&states, target)) {
                Ok(v) => states.push(v),
                Err(err) if states.is_empty() => {
                    return Err(Error::EmptyBranch {
                        eps: target,
                        reason: err.to_string(),
                    })
                }
                Err(err) => {
                    let last = states.last().map(|s| s.eps).unwrap_or(0.0);
                    let mid = 0.5 * (last + target);
                    let retried = self
                        .newton_solve(mid, &predict(&states, mid))
                        .and_then(|v| {
                            states.push(v);
                            self.newton_solve(target, &predict(&states, target))
                        });
                    match retried {
                        Ok(v) => states.push(v),
                        Err(_) => {
                            stopped = Some(format!("eps = {target}: {err}"));
                            break;
                        }
                    }
                }
            }
        }
        let eps_max = states.last().map(|s| s.eps).unwrap_or(0.0);
        Ok(Branch {
            config: cfg,
            states,
            eps_max,
            stopped,
        })
    }
}

/// Lagrange extrapolation through the last three known points of the curve,
/// falling back on the base point when fewer states exist.
fn extrapolate(origin: &(f64, StateVector), states: &[VState], eps: f64) -> StateVector {
    let mut pts: Vec<(f64, Vec<f64>)> = Vec::new();
    if states.first().is_none_or(|s| s.eps != origin.0) {
        pts.push((origin.0, origin.1.to_vec()));
    }
    pts.extend(states.iter().map(|s| (s.eps, s.state.to_vec())));
    let pts = &pts[pts.len().saturating_sub(3)..];
    let dim = pts[0].1.len();
    let mut out = vec![0.0; dim];
    for (i, (ei, ui)) in pts.iter().enumerate() {
        let weight: f64 = pts
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, (ek, _))| (eps - ek) / (ei - ek))
            .product();
        for (o, x) in out.iter_mut().zip(ui) {
            *o += weight * x;
        }
    }
    StateVector::from_slice(&out, origin.1.modes()).expect("dimension preserved")
}

pub fn newton_solve(cfg: &PairConfig, eps: f64, init: &StateVector) -> Result<VState> {
    Solver::new(cfg.clone())?.newton_solve(eps, init)
}

pub fn jacobian_fd(cfg: &PairConfig, eps: f64, g: &StateVector) -> Result<DMatrix<f64>> {
    Solver::new(cfg.clone())?.jacobian_fd(eps, g)
}

pub fn continue_branch(cfg: &PairConfig, targets: &[f64]) -> Result<Branch> {
    Solver::new(cfg.clone())?.continue_branch(targets)
}
