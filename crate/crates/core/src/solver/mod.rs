//! Frank-Wolfe iteration shared by FWUA and the smoothed baselines.
//!
//! All variants start at `X_0 = 0`, use the step `alpha_k = 2 / (k + 2)` and
//! the same trace-ball oracle; they differ only in the matrix handed to the
//! oracle.

mod baselines;
mod bounds;
mod tau;

pub use baselines::{
    hcgs_beta, hcgs_gradient, hcgs_smoothed_value, sccg_gradient, sccg_smoothed_value,
    soft_threshold, soft_threshold_scalar, subgradient_limit,
};
pub use bounds::{curvature_bound, iteration_budget, IterationBudget};
pub use tau::{
    freeze_iteration, update_tau, update_tau_with_freeze, StepHistory, TauUpdate, HISTORY_LEN,
};

use alloc::vec::Vec;

use crate::approx::{surrogate_value, uniform_slopes};
use crate::error::{Error, Result};
use crate::lmo::{trace_ball_lmo_warm, Atom, LmoOptions};
use crate::matrix::Matrix;
use crate::objective::SeparableObjective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Uniform affine approximations.
    Fwua,
    /// Fixed smoothing of width `mu`.
    Sccg { mu: f64 },
    /// Decaying smoothing, `beta_k = 1 / sqrt(k + 1)`.
    Hcgs,
    /// Plain subgradient linearization (the `mu -> 0` limit of SCCG).
    Subgrad,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Fwua => "fwua",
            Variant::Sccg { .. } => "sccg",
            Variant::Hcgs => "hcgs",
            Variant::Subgrad => "subgrad",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Target accuracy; sets the FWUA freeze point.
    pub epsilon: f64,
    pub lmo_tol: f64,
    pub lmo_max_iters: usize,
    pub variant: Variant,
    /// Freeze the FWUA radius after this iteration instead of the computed `k'`.
    pub freeze_override: Option<usize>,
    pub record_every: usize,
    pub seed: u64,
    /// Start each power iteration from the previous right singular vector.
    pub warm_start_lmo: bool,
    /// Stop once the Frank-Wolfe gap drops below `1e-12 (1 + |f|)`.
    pub stop_when_stationary: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 1000,
            epsilon: 1e-2,
            lmo_tol: 1e-8,
            lmo_max_iters: 2000,
            variant: Variant::Fwua,
            freeze_override: None,
            record_every: 1,
            seed: 0,
            warm_start_lmo: true,
            stop_when_stationary: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", "must be positive and finite"));
        }
        if !(self.lmo_tol > 0.0 && self.lmo_tol.is_finite()) {
            return Err(Error::param("lmo_tol", "must be positive"));
        }
        if self.lmo_max_iters == 0 {
            return Err(Error::param("lmo_max_iters", "must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be positive"));
        }
        if let Variant::Sccg { mu } = self.variant {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::param("mu", "must be positive; use the subgradient variant for mu = 0"));
            }
        }
        Ok(())
    }
}

/// One row of the convergence trace, describing iterate `X_k` and the
/// oracle call made from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub k: usize,
    /// True objective `f(X_k)`.
    pub objective: f64,
    /// Value of the smooth model the variant linearizes (`f` for the
    /// subgradient variant).
    pub surrogate: f64,
    pub fw_gap: f64,
    /// FWUA radius `tau_k`; `mu` for SCCG, `beta_k` for HCGS, 0 for the
    /// subgradient variant.
    pub tau: f64,
    /// `||X_k - S_k||_inf`.
    pub step_inf_norm: f64,
    pub elapsed_s: f64,
    pub rank_estimate: usize,
    /// Relative change of the power iteration at exit.
    pub lmo_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: Matrix,
    /// `X = Σ weight * atom`.
    pub atoms: Vec<(f64, Atom)>,
    pub k: usize,
    pub tau: f64,
    pub history: StepHistory,
    pub frozen: bool,
    pub frozen_at: Option<usize>,
    pub trace: Vec<ConvergenceRecord>,
}

impl SolverState {
    fn new(rows: usize, cols: usize, tau0: f64) -> Self {
        SolverState {
            x: Matrix::zeros(rows, cols),
            atoms: Vec::new(),
            k: 0,
            tau: tau0,
            history: StepHistory::new(),
            frozen: false,
            frozen_at: None,
            trace: Vec::new(),
        }
    }

    pub fn rank_estimate(&self) -> usize {
        self.atoms.iter().filter(|(w, _)| *w != 0.0).count()
    }

    /// `Σ weight * atom`, materialized.
    pub fn atom_sum(&self) -> Matrix {
        let mut sum = Matrix::zeros(self.x.rows(), self.x.cols());
        for (w, atom) in &self.atoms {
            sum.axpy(*w, &atom.to_matrix());
        }
        sum
    }

    fn push_atom(&mut self, alpha: f64, atom: Atom) {
        for (w, _) in self.atoms.iter_mut() {
            *w *= 1.0 - alpha;
        }
        self.atoms.retain(|(w, _)| *w != 0.0);
        for (w, old) in self.atoms.iter_mut() {
            if let Some(orientation) = same_direction(old, &atom) {
                *w += alpha * orientation * atom.scale / old.scale;
                return;
            }
        }
        self.atoms.push((alpha, atom));
    }
}

/// `Some(±1)` when `b = ±a` up to rounding, so that merging keeps
/// `X = Σ weight * atom` exact to working precision.
fn same_direction(a: &Atom, b: &Atom) -> Option<f64> {
    const TOL: f64 = 1e-13;
    let close = |x: &[f64], y: &[f64], s: f64| x.iter().zip(y).all(|(p, q)| (p - s * q).abs() <= TOL);
    let su = if dot(&a.left, &b.left) >= 0.0 { 1.0 } else { -1.0 };
    let sv = if dot(&a.right, &b.right) >= 0.0 { 1.0 } else { -1.0 };
    (close(&a.left, &b.left, su) && close(&a.right, &b.right, sv)).then_some(su * sv)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveDiagnostics {
    /// Freeze iteration in effect (the override, if any).
    pub freeze_after: f64,
    /// `k'` from the schedule, `8 mn (M + 1) D^2 Δ_f / eps - 1`.
    pub k_prime: f64,
    /// `k'` without the `- 1`.
    pub first_frozen_k: f64,
    /// Whether the freeze point falls inside the iteration budget.
    pub freeze_reachable: bool,
    pub stationary_steps: usize,
    pub lmo_unconverged: usize,
    pub max_lmo_residual: f64,
    pub lmo_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub state: SolverState,
    /// `f(X_K)` at the returned iterate.
    pub final_objective: f64,
    pub stopped_early: bool,
    pub diagnostics: SolveDiagnostics,
}

impl SolveOutput {
    pub fn trace(&self) -> &[ConvergenceRecord] {
        &self.state.trace
    }

    pub fn best_objective(&self) -> f64 {
        self.state
            .trace
            .iter()
            .map(|r| r.objective)
            .fold(self.final_objective, f64::min)
    }
}

/// Timing and observation hooks; the defaults do nothing.
pub trait SolveHooks {
    /// Seconds since the solve started.
    fn elapsed_secs(&mut self) -> f64 {
        0.0
    }

    /// Called with every iterate `X_0, ..., X_K`.
    fn on_iterate(&mut self, _k: usize, _x: &Matrix) {}
}

pub struct NoHooks;

impl SolveHooks for NoHooks {}

/// FWUA on `obj` over the trace ball of radius `delta`.
pub fn fwua_solve(obj: &SeparableObjective, delta: f64, cfg: &SolverConfig) -> Result<SolveOutput> {
    if cfg.variant != Variant::Fwua {
        return Err(Error::param("variant", "fwua_solve requires the FWUA variant"));
    }
    solve(obj, delta, cfg, &mut NoHooks)
}

/// SCCG, HCGS or subgradient Frank-Wolfe on the same scaffold.
pub fn baseline_solve(obj: &SeparableObjective, delta: f64, cfg: &SolverConfig) -> Result<SolveOutput> {
    if cfg.variant == Variant::Fwua {
        return Err(Error::param("variant", "baseline_solve requires a baseline variant"));
    }
    solve(obj, delta, cfg, &mut NoHooks)
}

/// Mixes the run seed with the iteration so every oracle call has its own
/// stream.
pub fn lmo_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `cfg.variant` for `cfg.max_iters` iterations.
pub fn solve(
    obj: &SeparableObjective,
    delta: f64,
    cfg: &SolverConfig,
    hooks: &mut dyn SolveHooks,
) -> Result<SolveOutput> {
    cfg.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", "must be positive and finite"));
    }
    let (rows, cols) = obj.shape();
    let meta = *obj.meta();
    let k_prime = freeze_iteration(&meta, cfg.epsilon);
    let freeze_after = cfg.freeze_override.map_or(k_prime, |k| k as f64);
    let mut diagnostics = SolveDiagnostics {
        freeze_after,
        k_prime,
        first_frozen_k: k_prime + 1.0,
        freeze_reachable: freeze_after < cfg.max_iters as f64,
        ..SolveDiagnostics::default()
    };

    let mut state = SolverState::new(rows, cols, meta.diam_d);
    let mut warm: Option<Vec<f64>> = None;
    let mut stopped_early = false;

    for k in 0..cfg.max_iters {
        state.k = k;
        hooks.on_iterate(k, &state.x);
        let alpha = 2.0 / (k as f64 + 2.0);

        let (xi, smoothing) = match cfg.variant {
            Variant::Fwua => {
                let update = update_tau_with_freeze(k, state.tau, freeze_after, meta.diam_d, &state.history);
                state.tau = update.tau;
                if update.frozen && !state.frozen {
                    state.frozen = true;
                    state.frozen_at = Some(k);
                }
                (uniform_slopes(obj, &state.x, state.tau)?, state.tau)
            }
            Variant::Sccg { mu } => (sccg_gradient(obj, &state.x, mu)?, mu),
            Variant::Hcgs => (hcgs_gradient(obj, &state.x, k)?, hcgs_beta(k)),
            Variant::Subgrad => (subgradient_limit(obj, &state.x)?, 0.0),
        };

        let opts = LmoOptions {
            tol: cfg.lmo_tol,
            max_iters: cfg.lmo_max_iters,
            seed: lmo_seed(cfg.seed, k),
        };
        let warm_start = if cfg.warm_start_lmo { warm.as_deref() } else { None };
        let lmo = trace_ball_lmo_warm(&xi, delta, &opts, warm_start);
        diagnostics.lmo_iterations += lmo.iterations;
        if !lmo.converged {
            diagnostics.lmo_unconverged += 1;
        }
        diagnostics.max_lmo_residual = diagnostics.max_lmo_residual.max(lmo.residual);

        let record_now = k % cfg.record_every == 0;
        let objective = obj.evaluate(&state.x)?;
        let gap = state.x.dot(&xi) - lmo.value();
        let surrogate = if record_now {
            match cfg.variant {
                Variant::Fwua => surrogate_value(obj, &state.x, state.tau)?.value,
                Variant::Sccg { mu } => sccg_smoothed_value(obj, &state.x, mu)?,
                Variant::Hcgs => hcgs_smoothed_value(obj, &state.x, k)?,
                Variant::Subgrad => objective,
            }
        } else {
            f64::NAN
        };

        let atom = lmo.atom;
        let step_inf_norm = if lmo.stationary {
            diagnostics.stationary_steps += 1;
            0.0
        } else {
            // X <- X + alpha (S - X), tracking ||X - S||_inf on the way
            let mut step = 0.0_f64;
            let data = state.x.as_mut_slice();
            for (i, &ui) in atom.left.iter().enumerate() {
                let su = atom.scale * ui;
                let row = &mut data[i * cols..(i + 1) * cols];
                for (xij, &vj) in row.iter_mut().zip(&atom.right) {
                    let diff = su * vj - *xij;
                    step = step.max(diff.abs());
                    *xij += alpha * diff;
                }
            }
            step
        };

        if record_now {
            state.trace.push(ConvergenceRecord {
                k,
                objective,
                surrogate,
                fw_gap: gap,
                tau: smoothing,
                step_inf_norm,
                elapsed_s: hooks.elapsed_secs(),
                rank_estimate: state.rank_estimate(),
                lmo_residual: lmo.residual,
            });
        }

        if !lmo.stationary {
            state.history.push(step_inf_norm);
            warm = Some(atom.right.clone());
            state.push_atom(alpha, atom);
        }

        if cfg.stop_when_stationary && gap < 1e-12 * (1.0 + objective.abs()) {
            stopped_early = true;
            state.k = k + 1;
            break;
        }
        state.k = k + 1;
    }

    hooks.on_iterate(state.k, &state.x);
    let final_objective = obj.evaluate(&state.x)?;
    Ok(SolveOutput {
        state,
        final_objective,
        stopped_early,
        diagnostics,
    })
}
