//! Degree-one Chebyshev (minimax) approximation of convex univariate
//! components, the uniform slope function and the smooth surrogate it
//! integrates to.
//!
//! Every component has the form `a (x - y)^2 + b |x - z| + c` with
//! `a, b >= 0`. Within this family the minimax line, the mean-value point,
//! the slope function and its antiderivative all have closed forms, so
//! nothing here samples or integrates numerically.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::objective::SeparableObjective;

/// Relative width below which an interval is treated as a single point.
pub const DEGENERATE_INTERVAL_RTOL: f64 = 1e-12;

/// `quad_weight (x - quad_center)^2 + l1_weight |x - l1_center| + const_term`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentFunction {
    quad_weight: f64,
    quad_center: f64,
    l1_weight: f64,
    l1_center: f64,
    const_term: f64,
}

impl ComponentFunction {
    pub fn new(
        quad_weight: f64,
        quad_center: f64,
        l1_weight: f64,
        l1_center: f64,
        const_term: f64,
    ) -> Result<Self> {
        let all_finite = [quad_weight, quad_center, l1_weight, l1_center, const_term]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::param("component", "coefficients must be finite"));
        }
        if quad_weight < 0.0 {
            return Err(Error::param("quad_weight", "must be nonnegative"));
        }
        if l1_weight < 0.0 {
            return Err(Error::param("l1_weight", "must be nonnegative"));
        }
        Ok(ComponentFunction {
            quad_weight,
            quad_center,
            l1_weight,
            l1_center,
            const_term,
        })
    }

    /// `|x|`.
    pub const fn abs() -> Self {
        ComponentFunction {
            quad_weight: 0.0,
            quad_center: 0.0,
            l1_weight: 1.0,
            l1_center: 0.0,
            const_term: 0.0,
        }
    }

    /// `weight (x - center)^2`. Panics on a negative weight.
    pub fn quadratic(weight: f64, center: f64) -> Self {
        Self::new(weight, center, 0.0, 0.0, 0.0).expect("invalid quadratic component")
    }

    /// `weight |x - center|`. Panics on a negative weight.
    pub fn absolute(weight: f64, center: f64) -> Self {
        Self::new(0.0, 0.0, weight, center, 0.0).expect("invalid absolute-value component")
    }

    pub fn quad_weight(&self) -> f64 {
        self.quad_weight
    }

    pub fn quad_center(&self) -> f64 {
        self.quad_center
    }

    pub fn l1_weight(&self) -> f64 {
        self.l1_weight
    }

    pub fn l1_center(&self) -> f64 {
        self.l1_center
    }

    pub fn const_term(&self) -> f64 {
        self.const_term
    }

    /// The point where the function is not differentiable, if any.
    pub fn kink(&self) -> Option<f64> {
        (self.l1_weight > 0.0).then_some(self.l1_center)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.quad_center;
        self.quad_weight * d * d + self.l1_weight * (x - self.l1_center).abs() + self.const_term
    }

    /// Derivative of the quadratic part alone.
    #[inline]
    pub fn smooth_derivative(&self, x: f64) -> f64 {
        2.0 * self.quad_weight * (x - self.quad_center)
    }

    pub fn left_derivative(&self, x: f64) -> f64 {
        let sign = if x <= self.l1_center { -1.0 } else { 1.0 };
        self.smooth_derivative(x) + sign * self.l1_weight
    }

    pub fn right_derivative(&self, x: f64) -> f64 {
        let sign = if x < self.l1_center { -1.0 } else { 1.0 };
        self.smooth_derivative(x) + sign * self.l1_weight
    }

    /// Endpoints of the subdifferential at `x`.
    pub fn subdifferential(&self, x: f64) -> (f64, f64) {
        if self.l1_weight == 0.0 {
            let d = self.smooth_derivative(x);
            return (d, d);
        }
        (self.left_derivative(x), self.right_derivative(x))
    }

    /// Element of the subdifferential with the smallest magnitude.
    pub fn min_norm_subgradient(&self, x: f64) -> f64 {
        let (lo, hi) = self.subdifferential(x);
        0.0_f64.clamp(lo, hi)
    }

    /// Second derivative where it exists (everywhere but the kink).
    pub fn second_derivative(&self, x: f64) -> Option<f64> {
        match self.kink() {
            Some(z) if z == x => None,
            _ => Some(2.0 * self.quad_weight),
        }
    }

    /// Slope of the secant from `a` to `b` (`a < b`), in closed form.
    pub fn secant_slope(&self, a: f64, b: f64) -> f64 {
        let quad = self.quad_weight * (a + b - 2.0 * self.quad_center);
        let l1 = if self.l1_weight == 0.0 {
            0.0
        } else if self.l1_center <= a {
            self.l1_weight
        } else if self.l1_center >= b {
            -self.l1_weight
        } else {
            self.l1_weight * ((b - self.l1_center) - (self.l1_center - a)) / (b - a)
        };
        quad + l1
    }

    /// Lipschitz constant on `[lo, hi]`: the largest subgradient magnitude.
    pub fn lipschitz_on(&self, lo: f64, hi: f64) -> f64 {
        self.left_derivative(lo).abs().max(self.right_derivative(hi).abs())
    }

    /// Spread `max ∂f - min ∂f` of subgradients over `[lo, hi]`.
    pub fn subgradient_spread_on(&self, lo: f64, hi: f64) -> f64 {
        self.right_derivative(hi) - self.left_derivative(lo)
    }
}

/// The line `t -> value_at_center + slope (t - center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineLine {
    pub slope: f64,
    pub value_at_center: f64,
    pub center: f64,
}

impl AffineLine {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.value_at_center + self.slope * (t - self.center)
    }
}

/// Minimax line on an interval together with its certificate data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevFit {
    /// Centered at the mean-value point `c` (or the midpoint if degenerate).
    pub line: AffineLine,
    /// `max |f - line|` on the interval.
    pub max_error: f64,
    pub lower: f64,
    pub upper: f64,
    /// The interval was too short to divide by; the line is a subgradient
    /// line at the midpoint and carries no equioscillation certificate.
    pub degenerate: bool,
}

impl ChebyshevFit {
    pub fn mvt_point(&self) -> f64 {
        self.line.center
    }

    /// Signed errors `f - line` at `lower`, `c` and `upper`. For a
    /// nondegenerate fit these equal `E, -E, E` with `E = max_error`.
    pub fn alternation_errors(&self, f: &ComponentFunction) -> [f64; 3] {
        let err = |t: f64| f.eval(t) - self.line.eval(t);
        [err(self.lower), err(self.line.center), err(self.upper)]
    }
}

fn is_degenerate(a: f64, b: f64) -> bool {
    (b - a).abs() < DEGENERATE_INTERVAL_RTOL * 1.0_f64.max(a.abs()).max(b.abs())
}

/// Best uniform affine approximation of `f` on `[a, b]`.
///
/// The slope is the secant slope; the line runs halfway between the secant
/// and the parallel supporting line touching `f` at the mean-value point.
pub fn chebyshev_fit(f: &ComponentFunction, a: f64, b: f64) -> ChebyshevFit {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if is_degenerate(a, b) {
        let mid = 0.5 * (a + b);
        return ChebyshevFit {
            line: AffineLine {
                slope: f.min_norm_subgradient(mid),
                value_at_center: f.eval(mid),
                center: mid,
            },
            max_error: 0.0,
            lower: a,
            upper: b,
            degenerate: true,
        };
    }
    let slope = f.secant_slope(a, b);
    let c = find_mvt_point(f, a, b, slope);
    let fa = f.eval(a);
    let fc = f.eval(c);
    let secant_at_c = fa + slope * (c - a);
    ChebyshevFit {
        line: AffineLine {
            slope,
            value_at_center: 0.5 * (fc + secant_at_c),
            center: c,
        },
        // rounding can push an affine piece slightly negative
        max_error: (0.5 * (secant_at_c - fc)).max(0.0),
        lower: a,
        upper: b,
        degenerate: false,
    }
}

/// Minimax affine approximation of `f` on `[a, b]`.
pub fn chebyshev_line(f: &ComponentFunction, a: f64, b: f64) -> AffineLine {
    chebyshev_fit(f, a, b).line
}

/// A point `c` in `(a, b)` with `secant_slope ∈ ∂f(c)`.
///
/// Solved piecewise: the kink if the slope falls in its subdifferential
/// jump, otherwise the root of the derivative on the matching smooth piece.
/// Flat pieces (no quadratic term) return their midpoint.
pub fn find_mvt_point(f: &ComponentFunction, a: f64, b: f64, secant_slope: f64) -> f64 {
    let q = f.quad_weight;
    let y = f.quad_center;
    let w = f.l1_weight;
    let z = f.l1_center;

    if w > 0.0 && z > a && z < b {
        let (lo, hi) = f.subdifferential(z);
        if (lo..=hi).contains(&secant_slope) || q == 0.0 {
            return z;
        }
        return if secant_slope < lo {
            (y + (secant_slope + w) / (2.0 * q)).clamp(a, z)
        } else {
            (y + (secant_slope - w) / (2.0 * q)).clamp(z, b)
        };
    }

    // One smooth piece covers (a, b).
    if q == 0.0 {
        return 0.5 * (a + b);
    }
    let l1_slope = if w == 0.0 {
        0.0
    } else if z <= a {
        w
    } else {
        -w
    };
    (y + (secant_slope - l1_slope) / (2.0 * q)).clamp(a, b)
}

/// Slope of the minimax line of `f` on `[x - tau, x + tau]`, i.e. the
/// central secant slope `(f(x + tau) - f(x - tau)) / (2 tau)`.
pub fn uniform_slope(f: &ComponentFunction, x: f64, tau: f64) -> f64 {
    let quad = f.smooth_derivative(x);
    if f.l1_weight == 0.0 {
        return quad;
    }
    quad + f.l1_weight * ((x - f.l1_center) / tau).clamp(-1.0, 1.0)
}

/// Antiderivative of `clamp(u / tau, -1, 1)`, normalized to equal `|u|`
/// outside `(-tau, tau)`.
#[inline]
fn huber(u: f64, tau: f64) -> f64 {
    let r = u.abs();
    if r < tau {
        u * u / (2.0 * tau) + 0.5 * tau
    } else {
        r
    }
}

/// `∫_{x_min}^{x} m(t, tau) dt + f(x_min)` for a single component.
pub fn surrogate_component(f: &ComponentFunction, x: f64, tau: f64, x_min: f64) -> f64 {
    let d = x - f.quad_center;
    let mut value = f.quad_weight * d * d + f.const_term;
    if f.l1_weight > 0.0 {
        let u_min = x_min - f.l1_center;
        let base = u_min.abs() - huber(u_min, tau);
        value += f.l1_weight * (huber(x - f.l1_center, tau) + base);
    }
    value
}

/// Per-entry minimax linearization of a separable objective on the
/// infinity-norm ball of radius `radius` around `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformAffine {
    pub slopes: Matrix,
    /// Sum of the per-entry minimax lines evaluated at the anchor.
    pub offset: f64,
    pub anchor: Matrix,
    pub radius: f64,
}

impl UniformAffine {
    /// `offset + <point - anchor, slopes>`.
    pub fn eval(&self, point: &Matrix) -> f64 {
        self.offset + point.sub(&self.anchor).dot(&self.slopes)
    }
}

fn check_radius(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", "must be positive and finite"));
    }
    Ok(())
}

/// Slope matrix of the uniform affine approximation. This is all the
/// solver needs per iteration; [`uniform_affine_at`] also fills the offset.
pub fn uniform_slopes(obj: &SeparableObjective, x: &Matrix, tau: f64) -> Result<Matrix> {
    check_radius(tau)?;
    obj.check_shape(x)?;
    let comps = obj.components();
    Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
        uniform_slope(&comps[(i, j)], x[(i, j)], tau)
    }))
}

pub fn uniform_affine_at(obj: &SeparableObjective, x: &Matrix, tau: f64) -> Result<UniformAffine> {
    let slopes = uniform_slopes(obj, x, tau)?;
    let offset = obj
        .components()
        .iter()
        .zip(x.as_slice())
        .map(|(f, &xij)| chebyshev_fit(f, xij - tau, xij + tau).line.eval(xij))
        .sum();
    Ok(UniformAffine {
        slopes,
        offset,
        anchor: x.clone(),
        radius: tau,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateValue {
    pub value: f64,
    /// Entries outside the domain box; the value there uses the slope
    /// function's natural extension.
    pub entries_outside_box: usize,
}

/// Smooth surrogate `f̂(X, tau)`, evaluated analytically.
pub fn surrogate_value(obj: &SeparableObjective, x: &Matrix, tau: f64) -> Result<SurrogateValue> {
    check_radius(tau)?;
    obj.check_shape(x)?;
    let x_min = obj.x_min();
    let h = obj.domain_half_width();
    let mut outside = 0;
    let value = obj
        .components()
        .iter()
        .zip(x.as_slice())
        .map(|(f, &xij)| {
            if xij.abs() > h {
                outside += 1;
            }
            surrogate_component(f, xij, tau, x_min)
        })
        .sum();
    Ok(SurrogateValue {
        value,
        entries_outside_box: outside,
    })
}

/// `mn (M + 1) D Δ_f tau`, the uniform bound on `|f̂ - f|` over the domain.
pub fn surrogate_error_bound(obj: &SeparableObjective, tau: f64) -> f64 {
    let meta = obj.meta();
    meta.mn as f64 * (meta.kink_count_m as f64 + 1.0) * meta.diam_d * meta.delta_f * tau
}

/// Bound for the surrogate shifted up so that it majorizes `f`.
pub fn offset_surrogate_error_bound(obj: &SeparableObjective, tau: f64) -> f64 {
    2.0 * surrogate_error_bound(obj, tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
    }

    #[test]
    fn abs_on_asymmetric_interval() {
        let fit = chebyshev_fit(&ComponentFunction::abs(), -1.0, 3.0);
        assert_eq!(fit.line.slope, 0.5);
        assert_eq!(fit.mvt_point(), 0.0);
        assert_eq!(fit.max_error, 0.75);
        // 0.75 + 0.5 x
        assert_eq!(fit.line.eval(0.0), 0.75);
        assert_eq!(fit.line.eval(2.0), 1.75);
        let [ea, ec, eb] = fit.alternation_errors(&ComponentFunction::abs());
        assert_eq!([ea, ec, eb], [0.75, -0.75, 0.75]);
    }

    #[test]
    fn quadratic_on_zero_two() {
        let f = ComponentFunction::quadratic(1.0, 0.0);
        let fit = chebyshev_fit(&f, 0.0, 2.0);
        assert_eq!(fit.line.slope, 2.0);
        assert_eq!(fit.mvt_point(), 1.0);
        assert_eq!(fit.max_error, 0.5);
        assert_eq!(fit.line.eval(0.0), -0.5);
        // Chebyshev error of a unit quadratic is (b - a)^2 / 8.
        assert_eq!(fit.max_error, 2.0_f64 * 2.0 / 8.0);
    }

    #[test]
    fn abs_on_symmetric_interval() {
        let tau = 0.37;
        let fit = chebyshev_fit(&ComponentFunction::abs(), -tau, tau);
        assert_eq!(fit.line.slope, 0.0);
        assert_eq!(fit.mvt_point(), 0.0);
        assert!(close(fit.line.eval(1.0), tau / 2.0, 1e-15));
        assert!(close(fit.max_error, tau / 2.0, 1e-15));
    }

    #[test]
    fn degenerate_interval_falls_back_to_subgradient_line() {
        let f = ComponentFunction::new(1.0, 0.5, 2.0, 0.0, 0.0).unwrap();
        let fit = chebyshev_fit(&f, 3.0, 3.0 + 1e-14);
        assert!(fit.degenerate);
        assert!(close(fit.line.slope, 2.0 * 2.5 + 2.0, 1e-12));
        let kink = chebyshev_fit(&f, 0.0, 0.0);
        assert!(kink.degenerate);
        // ∂f(0) = [-1 - 2, -1 + 2], smallest magnitude element is 0.
        assert_eq!(kink.line.slope, 0.0);
    }

    #[test]
    fn reversed_interval_is_normalized() {
        let f = ComponentFunction::abs();
        assert_eq!(chebyshev_fit(&f, 3.0, -1.0), chebyshev_fit(&f, -1.0, 3.0));
    }

    #[test]
    fn mvt_point_examples() {
        let sq = ComponentFunction::quadratic(1.0, 0.0);
        assert_eq!(find_mvt_point(&sq, 0.0, 2.0, 2.0), 1.0);
        assert_eq!(find_mvt_point(&ComponentFunction::abs(), -1.0, 3.0, 0.5), 0.0);
    }

    #[test]
    fn mvt_point_matches_bisection_on_composite() {
        // (x - 1)^2 + |x| on [0, 2].
        let f = ComponentFunction::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let s = (f.eval(2.0) - f.eval(0.0)) / 2.0;
        let c = find_mvt_point(&f, 0.0, 2.0, s);

        // bisection on the monotone subgradient map
        let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (dl, dr) = (f.left_derivative(mid), f.right_derivative(mid));
            if dr < s {
                lo = mid;
            } else if dl > s {
                hi = mid;
            } else {
                lo = mid;
                hi = mid;
                break;
            }
        }
        assert!((c - 0.5 * (lo + hi)).abs() < 1e-12, "{c} vs {lo}");
        assert_eq!(c, 1.0);
    }

    #[test]
    fn flat_piece_returns_midpoint() {
        let f = ComponentFunction::absolute(2.0, -5.0);
        assert_eq!(find_mvt_point(&f, 1.0, 3.0, 2.0), 2.0);
        let constant = ComponentFunction::new(0.0, 0.0, 0.0, 0.0, 4.0).unwrap();
        assert_eq!(find_mvt_point(&constant, -1.0, 0.0, 0.0), -0.5);
    }

    #[test]
    fn uniform_slope_examples() {
        let abs = ComponentFunction::abs();
        assert_eq!(uniform_slope(&abs, 0.0, 1.0), 0.0);
        assert_eq!(uniform_slope(&abs, 0.5, 1.0), 0.5);
        assert_eq!(uniform_slope(&abs, -4.0, 1.0), -1.0);
        let sq = ComponentFunction::quadratic(1.0, 0.0);
        assert_eq!(uniform_slope(&sq, 1.0, 0.5), 2.0);
    }

    #[test]
    fn uniform_slope_is_the_central_secant() {
        let f = ComponentFunction::new(0.7, -0.3, 1.3, 0.4, 2.0).unwrap();
        for &(x, tau) in &[(0.0, 1.0), (0.45, 0.1), (-2.0, 0.5), (0.4, 3.0)] {
            let secant = (f.eval(x + tau) - f.eval(x - tau)) / (2.0 * tau);
            assert!(close(uniform_slope(&f, x, tau), secant, 1e-12));
            assert!(close(chebyshev_line(&f, x - tau, x + tau).slope, secant, 1e-12));
        }
    }

    #[test]
    fn surrogate_component_abs_closed_form() {
        let abs = ComponentFunction::abs();
        assert_eq!(surrogate_component(&abs, 0.0, 2.0, -5.0), 1.0);
        assert_eq!(surrogate_component(&abs, 3.0, 2.0, -5.0), 3.0);
        assert_eq!(surrogate_component(&abs, -3.0, 2.0, -5.0), 3.0);
        assert_eq!(surrogate_component(&abs, 1.0, 2.0, -5.0), 0.25 + 1.0);
    }

    #[test]
    fn surrogate_component_integrates_the_slope() {
        // trapezoid refinement of ∫ m(t, tau) dt as an independent check
        let f = ComponentFunction::new(0.5, 0.2, 0.8, -0.1, 1.0).unwrap();
        let (tau, x_min, x) = (0.3, -2.0, 0.7);
        let n = 200_000;
        let h = (x - x_min) / n as f64;
        let mut integral = 0.0;
        for k in 0..n {
            let t0 = x_min + k as f64 * h;
            integral += 0.5 * h * (uniform_slope(&f, t0, tau) + uniform_slope(&f, t0 + h, tau));
        }
        let expected = integral + f.eval(x_min);
        let got = surrogate_component(&f, x, tau, x_min);
        assert!((got - expected).abs() < 1e-8, "{got} vs {expected}");
    }

    #[test]
    fn surrogate_is_exact_for_quadratics() {
        let f = ComponentFunction::new(1.5, 0.3, 0.0, 0.0, -0.2).unwrap();
        for &x in &[-1.0, 0.0, 0.3, 2.0] {
            assert_eq!(surrogate_component(&f, x, 0.25, -1.0), f.eval(x));
        }
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(ComponentFunction::new(-1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(ComponentFunction::new(0.0, 0.0, -1.0, 0.0, 0.0).is_err());
        assert!(ComponentFunction::new(f64::NAN, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn second_derivative_undefined_only_at_kink() {
        let f = ComponentFunction::new(2.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(f.second_derivative(1.0), None);
        assert_eq!(f.second_derivative(0.0), Some(4.0));
        assert_eq!(ComponentFunction::quadratic(1.0, 1.0).kink(), None);
    }
}
