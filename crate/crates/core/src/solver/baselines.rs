//! Gradients of the smoothed baselines.
//!
//! Each component is split into its quadratic part (the smooth loss) and
//! the weighted absolute value `w |x - z|`, which is the part being smoothed.
//! For the sparse objectives `z = 0` and these reduce to the usual
//! `lambda |x|` formulas.

use crate::approx::ComponentFunction;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::objective::SeparableObjective;

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sgn(X) ⊙ max(|X| - t, 0)`.
pub fn soft_threshold(x: &Matrix, t: f64) -> Matrix {
    x.map(|v| soft_threshold_scalar(v, t))
}

#[inline]
pub fn soft_threshold_scalar(v: f64, t: f64) -> f64 {
    sign(v) * (v.abs() - t).max(0.0)
}

/// Fixed smoothing: `w sgn(u)` when `|u| >= mu`, else `(w / mu) u`.
pub fn sccg_gradient(obj: &SeparableObjective, x: &Matrix, mu: f64) -> Result<Matrix> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", "must be positive; use the subgradient variant for mu = 0"));
    }
    obj.map_entries(x, |f, v| sccg_entry(f, v, mu))
}

fn sccg_entry(f: &ComponentFunction, v: f64, mu: f64) -> f64 {
    let u = v - f.l1_center();
    let w = f.l1_weight();
    let nonsmooth = if u.abs() >= mu { w * sign(u) } else { w / mu * u };
    f.smooth_derivative(v) + nonsmooth
}

/// The `mu -> 0` limit of [`sccg_gradient`]: `w sgn(u)` with `sgn(0) = 0`.
pub fn subgradient_limit(obj: &SeparableObjective, x: &Matrix) -> Result<Matrix> {
    obj.map_entries(x, |f, v| {
        f.smooth_derivative(v) + f.l1_weight() * sign(v - f.l1_center())
    })
}

/// `beta_k = 1 / sqrt(k + 1)`.
pub fn hcgs_beta(k: usize) -> f64 {
    1.0 / libm::sqrt(k as f64 + 1.0)
}

/// Decaying smoothing: gradient of the Moreau envelope of `w |u|` with
/// parameter `beta_k`, `(u - S(u, w beta_k)) / beta_k`.
pub fn hcgs_gradient(obj: &SeparableObjective, x: &Matrix, k: usize) -> Result<Matrix> {
    let beta = hcgs_beta(k);
    obj.map_entries(x, |f, v| {
        let u = v - f.l1_center();
        let w = f.l1_weight();
        f.smooth_derivative(v) + (u - soft_threshold_scalar(u, w * beta)) / beta
    })
}

fn quad_and_const(f: &ComponentFunction, v: f64) -> f64 {
    let d = v - f.quad_center();
    f.quad_weight() * d * d + f.const_term()
}

/// Objective whose gradient is [`sccg_gradient`]: Huber smoothing of width `mu`.
pub fn sccg_smoothed_value(obj: &SeparableObjective, x: &Matrix, mu: f64) -> Result<f64> {
    obj.check_shape(x)?;
    Ok(obj
        .components()
        .iter()
        .zip(x.as_slice())
        .map(|(f, &v)| {
            let u = (v - f.l1_center()).abs();
            let h = if u >= mu { u - 0.5 * mu } else { u * u / (2.0 * mu) };
            quad_and_const(f, v) + f.l1_weight() * h
        })
        .sum())
}

/// Objective whose gradient is [`hcgs_gradient`]: Moreau envelope at `beta_k`.
pub fn hcgs_smoothed_value(obj: &SeparableObjective, x: &Matrix, k: usize) -> Result<f64> {
    obj.check_shape(x)?;
    let beta = hcgs_beta(k);
    Ok(obj
        .components()
        .iter()
        .zip(x.as_slice())
        .map(|(f, &v)| {
            let u = (v - f.l1_center()).abs();
            let w = f.l1_weight();
            let env = if u <= w * beta {
                u * u / (2.0 * beta)
            } else {
                w * u - 0.5 * w * w * beta
            };
            quad_and_const(f, v) + env
        })
        .sum())
}
