//! Independent reference computations used by the integration tests.

#![allow(dead_code)]

use fwua_core::approx::ComponentFunction;
use fwua_core::Matrix;
use nalgebra::DMatrix;
use rand::Rng;

pub fn to_dmatrix(x: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice())
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn singular_values(x: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_dmatrix(x).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn trace_norm(x: &Matrix) -> f64 {
    singular_values(x).iter().sum()
}

pub fn top_singular_value(x: &Matrix) -> f64 {
    singular_values(x).first().copied().unwrap_or(0.0)
}

/// Euclidean projection of nonnegative `s` onto `{t >= 0, sum t <= r}`.
pub fn project_simplex_ball(s: &[f64], r: f64) -> Vec<f64> {
    if s.iter().sum::<f64>() <= r {
        return s.to_vec();
    }
    let mut sorted = s.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let t = (cumulative - r) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    s.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Frobenius projection onto the trace-norm ball of radius `r`.
pub fn project_trace_ball(x: &DMatrix<f64>, r: f64) -> DMatrix<f64> {
    let svd = x.clone().svd(true, true);
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let p = project_simplex_ball(&s, r);
    let u = svd.u.expect("u");
    let vt = svd.v_t.expect("v_t");
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for (k, &pk) in p.iter().enumerate() {
        if pk > 0.0 {
            out += pk * u.column(k) * vt.row(k);
        }
    }
    out
}

/// Minimizer of a unimodal function on `[a, b]` by golden-section search.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mut best = (c, fc);
    for t in [a, b, d] {
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

/// `max_{[a,b]} |f - l|` for convex `f` and affine `l(t) = value + slope (t - anchor)`.
/// The difference is convex, so the maximum sits at an endpoint and the
/// minimum is found by golden-section search on each side of the kink.
pub fn max_line_error(f: &ComponentFunction, slope: f64, anchor: f64, value: f64, a: f64, b: f64) -> f64 {
    let g = |t: f64| f.eval(t) - (value + slope * (t - anchor));
    let top = g(a).max(g(b));
    let mut bottom = f64::INFINITY;
    let mut pieces = vec![(a, b)];
    if let Some(k) = f.kink() {
        if k > a && k < b {
            pieces = vec![(a, k), (k, b)];
        }
    }
    for (lo, hi) in pieces {
        bottom = bottom.min(golden_min(g, lo, hi).1);
    }
    top.max(-bottom)
}

/// Best max-error over a `grid x grid` family of lines: slopes span the
/// subgradients on `[a, b]`, intercepts span the values of `f - slope t`.
pub fn grid_minimax_error(f: &ComponentFunction, a: f64, b: f64, grid: usize) -> f64 {
    let s_lo = f.right_derivative(a);
    let s_hi = f.left_derivative(b);
    let mid = 0.5 * (a + b);
    let mut best = f64::INFINITY;
    for i in 0..grid {
        let s = s_lo + (s_hi - s_lo) * i as f64 / (grid - 1) as f64;
        // h(t) = f(t) - s (t - mid) is convex; the intercept p gives error
        // max(h_max - p, p - h_min).
        let h = |t: f64| f.eval(t) - s * (t - mid);
        let h_max = h(a).max(h(b));
        let mut h_min = f64::INFINITY;
        let mut pieces = vec![(a, b)];
        if let Some(k) = f.kink() {
            if k > a && k < b {
                pieces = vec![(a, k), (k, b)];
            }
        }
        for (lo, hi) in pieces {
            h_min = h_min.min(golden_min(h, lo, hi).1);
        }
        for j in 0..grid {
            let p = h_min + (h_max - h_min) * j as f64 / (grid - 1) as f64;
            best = best.min((h_max - p).max(p - h_min));
        }
    }
    best
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting
/// one half.
pub fn brute_force_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let mut doubled = 0u64;
    let mut pairs = 0u64;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                doubled += 2;
            } else if scores[i] == scores[j] {
                doubled += 1;
            }
        }
    }
    (pairs > 0).then(|| doubled as f64 / (2.0 * pairs as f64))
}

pub fn random_component(rng: &mut impl Rng) -> ComponentFunction {
    let q = if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.0..3.0) };
    let w = if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.0..3.0) };
    ComponentFunction::new(
        q,
        rng.random_range(-2.0..2.0),
        w,
        rng.random_range(-2.0..2.0),
        rng.random_range(-1.0..1.0),
    )
    .expect("valid component")
}

/// Random interval, biased so that about half contain the kink of `f`.
pub fn random_interval(rng: &mut impl Rng, f: &ComponentFunction) -> (f64, f64) {
    let len = 10f64.powf(rng.random_range(-3.0..0.7));
    let a = match f.kink() {
        Some(k) if rng.random_bool(0.5) => k - rng.random_range(0.0..1.0) * len,
        _ => rng.random_range(-3.0..3.0),
    };
    (a, a + len)
}
