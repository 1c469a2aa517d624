//! Linear minimization over the trace-norm ball.
//!
//! `argmin_{||S||_tr <= delta} <S, G>` is `-delta u1 v1^T` for the top
//! singular pair `(u1, v1)` of `G`. The pair is found by power iteration on
//! `G^T G`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;

/// Below this Frobenius norm the slope matrix is treated as zero.
pub const STATIONARY_NORM: f64 = 1e-14;

/// Matrix-free access to `G` and `G^T`.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = G x`
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = G^T x`
    fn apply_transpose(&self, x: &[f64], out: &mut [f64]);
    /// Used for the stationarity test when cheaply available.
    fn frobenius_norm(&self) -> Option<f64> {
        None
    }
}

impl LinearOperator for Matrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.matvec(x, out)
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        self.matvec_t(x, out)
    }

    fn frobenius_norm(&self) -> Option<f64> {
        Some(Matrix::frobenius_norm(self))
    }
}

/// Rank-one matrix `scale * left * right^T` with unit `left`, `right`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub scale: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Atom {
    /// Scale zero; the vectors are the first canonical basis vectors.
    pub fn zero(rows: usize, cols: usize) -> Self {
        let mut left = vec![0.0; rows];
        let mut right = vec![0.0; cols];
        if let Some(v) = left.first_mut() {
            *v = 1.0;
        }
        if let Some(v) = right.first_mut() {
            *v = 1.0;
        }
        Atom {
            scale: 0.0,
            left,
            right,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::outer(self.scale, &self.left, &self.right)
    }

    /// `<atom, g>` without materializing the atom.
    pub fn inner(&self, g: &Matrix) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let mut gv = vec![0.0; g.rows()];
        g.matvec(&self.right, &mut gv);
        self.scale * dot(&self.left, &gv)
    }

    /// Trace norm of the materialized atom.
    pub fn trace_norm(&self) -> f64 {
        self.scale.abs() * norm(&self.left) * norm(&self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmoOptions {
    /// Stop once successive singular value estimates differ by less than
    /// `tol * sigma`.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for LmoOptions {
    fn default() -> Self {
        LmoOptions {
            tol: 1e-8,
            max_iters: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmoOutput {
    pub atom: Atom,
    /// Estimate of the top singular value of `G`.
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change of the singular value estimate at the last step.
    pub residual: f64,
    /// `G` was (numerically) zero; the atom is the zero atom.
    pub stationary: bool,
    pub restarted: bool,
}

impl LmoOutput {
    /// `<S, G>` at the returned atom, `-delta * sigma`.
    pub fn value(&self) -> f64 {
        self.atom.scale * self.sigma
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn normalize(a: &mut [f64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|v| *v /= n);
    }
    n
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        if normalize(&mut v) > 0.0 {
            return v;
        }
    }
}

struct PowerRun {
    sigma: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    iterations: usize,
    converged: bool,
    residual: f64,
}

fn power_iteration<G: LinearOperator + ?Sized>(
    g: &G,
    mut right: Vec<f64>,
    tol: f64,
    max_iters: usize,
) -> PowerRun {
    let (m, n) = (g.nrows(), g.ncols());
    let mut left = vec![0.0; m];
    let mut back = vec![0.0; n];
    let mut sigma = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iters {
        iterations += 1;
        g.apply(&right, &mut left);
        let next = normalize(&mut left);
        if next == 0.0 {
            // start vector in the null space of G
            sigma = 0.0;
            break;
        }
        residual = (next - sigma).abs() / next;
        sigma = next;
        if residual < tol {
            converged = true;
            break;
        }
        g.apply_transpose(&left, &mut back);
        if normalize(&mut back) == 0.0 {
            break;
        }
        core::mem::swap(&mut right, &mut back);
    }

    PowerRun {
        sigma,
        left,
        right,
        iterations,
        converged,
        residual,
    }
}

/// Minimizer of `<S, G>` over `||S||_tr <= delta`.
pub fn trace_ball_lmo<G: LinearOperator + ?Sized>(g: &G, delta: f64, opts: &LmoOptions) -> LmoOutput {
    trace_ball_lmo_warm(g, delta, opts, None)
}

/// As [`trace_ball_lmo`], starting the power iteration from `warm_start`
/// (a right singular vector guess) when given.
pub fn trace_ball_lmo_warm<G: LinearOperator + ?Sized>(
    g: &G,
    delta: f64,
    opts: &LmoOptions,
    warm_start: Option<&[f64]>,
) -> LmoOutput {
    let (m, n) = (g.nrows(), g.ncols());
    let stationary = |iterations| LmoOutput {
        atom: Atom::zero(m, n),
        sigma: 0.0,
        iterations,
        converged: true,
        residual: 0.0,
        stationary: true,
        restarted: false,
    };
    if matches!(g.frobenius_norm(), Some(f) if f < STATIONARY_NORM) {
        return stationary(0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = match warm_start {
        Some(w) if w.len() == n && norm(w) > 0.0 => {
            let mut v = w.to_vec();
            normalize(&mut v);
            v
        }
        _ => random_unit(&mut rng, n),
    };
    let mut run = power_iteration(g, start, opts.tol, opts.max_iters);
    let mut restarted = false;
    if run.sigma == 0.0 || (!run.converged && run.residual > libm::sqrt(opts.tol)) {
        restarted = true;
        let again = power_iteration(g, random_unit(&mut rng, n), opts.tol, opts.max_iters);
        let iterations = run.iterations + again.iterations;
        if again.sigma > run.sigma {
            run = again;
        }
        run.iterations = iterations;
    }
    if run.sigma < STATIONARY_NORM {
        return stationary(run.iterations);
    }
    LmoOutput {
        atom: Atom {
            scale: -delta,
            left: run.left,
            right: run.right,
        },
        sigma: run.sigma,
        iterations: run.iterations,
        converged: run.converged,
        residual: run.residual,
        stationary: false,
        restarted,
    }
}

/// Frank-Wolfe gap `<X - S, xi>`.
pub fn fw_gap(x: &Matrix, s: &Matrix, xi: &Matrix) -> f64 {
    x.dot(xi) - s.dot(xi)
}
