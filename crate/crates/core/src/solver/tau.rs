//! Neighborhood radius schedule.
//!
//! Before the freeze point the radius follows the recent Frank-Wolfe step
//! lengths: `tau_k = 2 max_{j<5} ||X_{k-1-j} - S_{k-1-j}||_inf / (k + 2)`.
//! After it the radius is held fixed, which fixes the surrogate and caps its
//! curvature.

use crate::objective::ObjectiveMeta;

pub const HISTORY_LEN: usize = 5;

/// The last [`HISTORY_LEN`] values of `||X - S||_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepHistory {
    values: [f64; HISTORY_LEN],
    len: usize,
    next: usize,
}

impl StepHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step_inf_norm: f64) {
        self.values[self.next] = step_inf_norm;
        self.next = (self.next + 1) % HISTORY_LEN;
        self.len = (self.len + 1).min(HISTORY_LEN);
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max(&self) -> Option<f64> {
        self.values[..self.len].iter().copied().reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauUpdate {
    pub tau: f64,
    pub frozen: bool,
}

/// `k' = 8 mn (M + 1) D^2 Δ_f / eps - 1`; refinement stops for `k > k'`.
pub fn freeze_iteration(meta: &ObjectiveMeta, epsilon: f64) -> f64 {
    8.0 * meta.mn as f64 * (meta.kink_count_m as f64 + 1.0) * meta.diam_d * meta.diam_d * meta.delta_f
        / epsilon
        - 1.0
}

pub fn update_tau(
    k: usize,
    tau_prev: f64,
    epsilon: f64,
    meta: &ObjectiveMeta,
    history: &StepHistory,
) -> TauUpdate {
    update_tau_with_freeze(k, tau_prev, freeze_iteration(meta, epsilon), meta.diam_d, history)
}

/// Schedule with an explicit freeze point. An empty history is seeded with
/// the diameter, so `tau_0 = D`.
pub fn update_tau_with_freeze(
    k: usize,
    tau_prev: f64,
    freeze_after: f64,
    diam_d: f64,
    history: &StepHistory,
) -> TauUpdate {
    if k as f64 > freeze_after {
        return TauUpdate {
            tau: tau_prev,
            frozen: true,
        };
    }
    let largest = history.max().unwrap_or(diam_d);
    let tau = 2.0 * largest / (k as f64 + 2.0);
    // tau must stay positive; zero steps only happen at a fixed point
    let tau = if tau > 0.0 && tau.is_finite() { tau } else { tau_prev };
    TauUpdate { tau, frozen: false }
}
