//! Separable objectives `f(X) = Σ_ij f_ij(X_ij)` over the trace-norm ball,
//! and the constants that drive the surrogate error bound and the
//! neighborhood schedule.

use alloc::vec::Vec;
use core::ops::Index;

use crate::approx::ComponentFunction;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Row-major grid of component functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentGrid {
    rows: usize,
    cols: usize,
    cells: Vec<ComponentFunction>,
}

impl ComponentGrid {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> ComponentFunction,
    ) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                cells.push(f(i, j));
            }
        }
        ComponentGrid { rows, cols, cells }
    }

    pub fn filled(rows: usize, cols: usize, f: ComponentFunction) -> Self {
        Self::from_fn(rows, cols, |_, _| f)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn iter(&self) -> core::slice::Iter<'_, ComponentFunction> {
        self.cells.iter()
    }

    pub fn as_slice(&self) -> &[ComponentFunction] {
        &self.cells
    }
}

impl Index<(usize, usize)> for ComponentGrid {
    type Output = ComponentFunction;

    fn index(&self, (i, j): (usize, usize)) -> &ComponentFunction {
        &self.cells[i * self.cols + j]
    }
}

/// Constants of the surrogate error bound and the tau schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveMeta {
    /// Largest subgradient magnitude of any component on the enlarged box.
    pub lipschitz_l: f64,
    /// Maximum number of kinks of any component (0 or 1 here).
    pub kink_count_m: usize,
    /// Infinity-norm diameter of the feasible set.
    pub diam_d: f64,
    pub delta_f: f64,
    pub mn: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableObjective {
    components: ComponentGrid,
    domain_half_width: f64,
    meta: ObjectiveMeta,
}

impl SeparableObjective {
    /// `domain_half_width` must bound `||X||_inf` on the feasible set; for
    /// the trace-norm ball of radius `delta` it is `delta`.
    pub fn new(components: ComponentGrid, domain_half_width: f64) -> Result<Self> {
        if !(domain_half_width > 0.0 && domain_half_width.is_finite()) {
            return Err(Error::param("delta", "must be positive and finite"));
        }
        if components.rows == 0 || components.cols == 0 {
            return Err(Error::param("components", "grid must be nonempty"));
        }
        let meta = compute_meta(&components, domain_half_width);
        Ok(SeparableObjective {
            components,
            domain_half_width,
            meta,
        })
    }

    pub fn components(&self) -> &ComponentGrid {
        &self.components
    }

    pub fn rows(&self) -> usize {
        self.components.rows
    }

    pub fn cols(&self) -> usize {
        self.components.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.components.rows, self.components.cols)
    }

    pub fn domain_half_width(&self) -> f64 {
        self.domain_half_width
    }

    /// Lower bound on every feasible entry.
    pub fn x_min(&self) -> f64 {
        -self.domain_half_width
    }

    pub fn meta(&self) -> &ObjectiveMeta {
        &self.meta
    }

    pub(crate) fn check_shape(&self, x: &Matrix) -> Result<()> {
        x.ensure_shape(self.rows(), self.cols())
    }

    pub fn evaluate(&self, x: &Matrix) -> Result<f64> {
        self.check_shape(x)?;
        Ok(self
            .components
            .iter()
            .zip(x.as_slice())
            .map(|(f, &v)| f.eval(v))
            .sum())
    }

    /// Entrywise minimum-norm subgradient.
    pub fn subgradient(&self, x: &Matrix) -> Result<Matrix> {
        self.map_entries(x, |f, v| f.min_norm_subgradient(v))
    }

    /// Gradient of the quadratic terms only.
    pub fn smooth_gradient(&self, x: &Matrix) -> Result<Matrix> {
        self.map_entries(x, |f, v| f.smooth_derivative(v))
    }

    pub(crate) fn map_entries(
        &self,
        x: &Matrix,
        op: impl Fn(&ComponentFunction, f64) -> f64,
    ) -> Result<Matrix> {
        self.check_shape(x)?;
        let data = self
            .components
            .iter()
            .zip(x.as_slice())
            .map(|(f, &v)| op(f, v))
            .collect();
        Matrix::from_row_major(self.rows(), self.cols(), data)
    }
}

/// Metadata constants for components on the box `[-h, h]`.
///
/// Subgradient quantities are taken over the box enlarged by the largest
/// neighborhood radius the solver uses, `tau^0 = D = 2h`.
pub fn compute_meta(components: &ComponentGrid, domain_half_width: f64) -> ObjectiveMeta {
    let diam_d = 2.0 * domain_half_width;
    let lo = -domain_half_width - diam_d;
    let hi = domain_half_width + diam_d;
    let mut lipschitz_l = 0.0_f64;
    let mut spread = 0.0_f64;
    let mut kink_count_m = 0;
    for f in components.iter() {
        lipschitz_l = lipschitz_l.max(f.lipschitz_on(lo, hi));
        spread = spread.max(f.subgradient_spread_on(lo, hi));
        if f.kink().is_some() {
            kink_count_m = 1;
        }
    }
    ObjectiveMeta {
        lipschitz_l,
        kink_count_m,
        diam_d,
        // f'' is constant off the kink, so only the subgradient term counts.
        delta_f: 2.0 * spread,
        mn: components.rows * components.cols,
    }
}

fn check_mask(y: &Matrix, mask: &[(usize, usize)]) -> Result<()> {
    for &(row, col) in mask {
        if row >= y.rows() || col >= y.cols() {
            return Err(Error::IndexOutOfRange {
                row,
                col,
                rows: y.rows(),
                cols: y.cols(),
            });
        }
    }
    Ok(())
}

fn observed_flags(y: &Matrix, mask: &[(usize, usize)]) -> Result<Vec<bool>> {
    check_mask(y, mask)?;
    let mut flags = alloc::vec![false; y.len()];
    for &(i, j) in mask {
        flags[i * y.cols() + j] = true;
    }
    Ok(flags)
}

fn check_weight(name: &'static str, w: f64) -> Result<()> {
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::param(name, "must be nonnegative and finite"));
    }
    Ok(())
}

/// `||P_Ω(X - Y)||_F^2 + lambda1 ||X||_1` on the trace ball of radius `delta`.
pub fn build_sparse_lowrank_objective(
    y: &Matrix,
    mask: &[(usize, usize)],
    lambda1: f64,
    delta: f64,
) -> Result<SeparableObjective> {
    check_weight("lambda1", lambda1)?;
    let observed = observed_flags(y, mask)?;
    let grid = ComponentGrid::from_fn(y.rows(), y.cols(), |i, j| {
        let quad = if observed[i * y.cols() + j] { 1.0 } else { 0.0 };
        ComponentFunction::new(quad, y[(i, j)], lambda1, 0.0, 0.0)
            .expect("finite nonnegative weights")
    });
    SeparableObjective::new(grid, delta)
}

/// `||P_Ω(X - Y)||_1 + lambda ||P_Ωc(X)||_F^2` on the trace ball of radius `delta`.
pub fn build_l1_completion_objective(
    y: &Matrix,
    mask: &[(usize, usize)],
    lambda: f64,
    delta: f64,
) -> Result<SeparableObjective> {
    check_weight("lambda", lambda)?;
    let observed = observed_flags(y, mask)?;
    let grid = ComponentGrid::from_fn(y.rows(), y.cols(), |i, j| {
        if observed[i * y.cols() + j] {
            ComponentFunction::absolute(1.0, y[(i, j)])
        } else {
            ComponentFunction::quadratic(lambda, 0.0)
        }
    });
    SeparableObjective::new(grid, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_entries(m: usize, n: usize) -> Vec<(usize, usize)> {
        (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    }

    #[test]
    fn sparse_lowrank_at_data_is_l1_penalty() {
        let y = Matrix::from_rows(&[&[0.5, -0.25], &[0.0, 0.125]]);
        let obj = build_sparse_lowrank_objective(&y, &all_entries(2, 2), 0.4, 2.0).unwrap();
        let expected = 0.4 * (0.5 + 0.25 + 0.125);
        assert!((obj.evaluate(&y).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn pure_quadratic_has_no_kinks() {
        let y = Matrix::from_rows(&[&[0.5, -0.25]]);
        let obj = build_sparse_lowrank_objective(&y, &all_entries(1, 2), 0.0, 1.0).unwrap();
        assert_eq!(obj.meta().kink_count_m, 0);
        assert!(obj.components().iter().all(|f| f.kink().is_none()));
    }

    #[test]
    fn l1_completion_components() {
        let y = Matrix::from_rows(&[&[3.0, 4.0]]);
        let obj = build_l1_completion_objective(&y, &[(0, 0)], 0.001, 10.0).unwrap();
        assert_eq!(obj.components()[(0, 0)].eval(3.0), 0.0);
        assert!((obj.components()[(0, 1)].eval(2.0) - 0.004).abs() < 1e-15);
        assert_eq!(obj.evaluate(&Matrix::zeros(1, 2)).unwrap(), 3.0);
    }

    #[test]
    fn mask_out_of_range_is_rejected() {
        let y = Matrix::zeros(2, 2);
        let err = build_sparse_lowrank_objective(&y, &[(2, 0)], 0.1, 1.0).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { row: 2, .. }));
        assert!(build_l1_completion_objective(&y, &[(0, 5)], 0.1, 1.0).is_err());
        assert!(build_sparse_lowrank_objective(&y, &[], 0.1, 0.0).is_err());
        assert!(build_sparse_lowrank_objective(&y, &[], -0.1, 1.0).is_err());
    }

    #[test]
    fn meta_for_l1_norm() {
        let delta = 1.5;
        let obj = SeparableObjective::new(
            ComponentGrid::filled(3, 4, ComponentFunction::abs()),
            delta,
        )
        .unwrap();
        let meta = obj.meta();
        assert_eq!(meta.lipschitz_l, 1.0);
        assert_eq!(meta.kink_count_m, 1);
        assert_eq!(meta.diam_d, 3.0);
        assert_eq!(meta.delta_f, 4.0);
        assert_eq!(meta.mn, 12);
    }

    #[test]
    fn meta_lipschitz_for_quadratic_matches_sampling() {
        let (delta, center) = (0.8, -0.3);
        let obj = SeparableObjective::new(
            ComponentGrid::filled(1, 1, ComponentFunction::quadratic(1.0, center)),
            delta,
        )
        .unwrap();
        // enlarged box is [-3 delta, 3 delta]
        let expected = 2.0 * (3.0 * delta + center.abs());
        assert!((obj.meta().lipschitz_l - expected).abs() < 1e-12);
        let sampled = (0..=6000)
            .map(|k| -3.0 * delta + k as f64 * delta / 1000.0)
            .map(|x| (2.0 * (x - center)).abs())
            .fold(0.0_f64, f64::max);
        assert!((sampled - expected).abs() < 1e-9);
    }

    #[test]
    fn diameter_doubles_half_width() {
        let obj = SeparableObjective::new(
            ComponentGrid::filled(1, 1, ComponentFunction::abs()),
            43.92,
        )
        .unwrap();
        assert!((obj.meta().diam_d - 87.84).abs() < 1e-12);
    }

    #[test]
    fn subgradient_examples() {
        let obj = SeparableObjective::new(
            ComponentGrid::filled(2, 2, ComponentFunction::abs()),
            3.0,
        )
        .unwrap();
        assert_eq!(obj.subgradient(&Matrix::zeros(2, 2)).unwrap(), Matrix::zeros(2, 2));
        let g = obj.subgradient(&Matrix::from_rows(&[&[-2.0, 1.0], &[0.0, 5.0]])).unwrap();
        assert_eq!(g.as_slice(), &[-1.0, 1.0, 0.0, 1.0]);

        let composite = ComponentFunction::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(composite.min_norm_subgradient(2.0), 3.0);
    }

    #[test]
    fn shape_mismatch() {
        let obj = SeparableObjective::new(
            ComponentGrid::filled(2, 2, ComponentFunction::abs()),
            1.0,
        )
        .unwrap();
        assert!(obj.evaluate(&Matrix::zeros(2, 3)).is_err());
        assert!(obj.subgradient(&Matrix::zeros(1, 2)).is_err());
    }
}
