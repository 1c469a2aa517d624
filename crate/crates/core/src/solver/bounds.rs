//! Curvature bound of the surrogate and the iteration budget that follows.

use crate::objective::ObjectiveMeta;

use super::tau::freeze_iteration;

/// `C <= (L / tau) D^2` for the surrogate at radius `tau`.
pub fn curvature_bound(meta: &ObjectiveMeta, tau: f64) -> f64 {
    meta.lipschitz_l / tau * meta.diam_d * meta.diam_d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationBudget {
    /// Freeze trigger used by the schedule (`... - 1` form).
    pub k_prime: f64,
    /// `8 mn (M + 1) D^2 Δ_f / eps`, the first iteration past the freeze.
    pub first_frozen_k: f64,
    pub curvature: f64,
    /// `8 C / eps`.
    pub fw_iterations: f64,
    /// `first_frozen_k + 8 C / eps`.
    pub total: f64,
}

/// Iterations after which `f(X_k) - f* < eps` is guaranteed, given the
/// frozen radius `tau_frozen`.
pub fn iteration_budget(meta: &ObjectiveMeta, epsilon: f64, tau_frozen: f64) -> IterationBudget {
    let k_prime = freeze_iteration(meta, epsilon);
    let curvature = curvature_bound(meta, tau_frozen);
    let fw_iterations = 8.0 * curvature / epsilon;
    IterationBudget {
        k_prime,
        first_frozen_k: k_prime + 1.0,
        curvature,
        fw_iterations,
        total: k_prime + 1.0 + fw_iterations,
    }
}
