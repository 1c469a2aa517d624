use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde_json::json;

use super::{provenance, rng_for, streams, trace_norm, IndexSet, ProblemInstance, ProblemKind, TestSet};
use crate::error::DataError;
use fwua_core::Matrix;

/// ℓ1 weight used for every covariance run.
pub const COVARIANCE_LAMBDA: f64 = 0.4;
/// Tuned SCCG smoothing for covariance runs.
pub const COVARIANCE_SCCG_MU: f64 = 0.01;

const COVARIANCE_DELTAS: [(usize, f64); 6] = [
    (750, 43.92),
    (1000, 73.17),
    (1250, 100.43),
    (1500, 134.06),
    (1750, 169.40),
    (2000, 201.46),
];

/// Tabulated trace-norm radius for the published covariance sizes.
pub fn covariance_table_delta(n: usize) -> Option<f64> {
    COVARIANCE_DELTAS.iter().find(|(size, _)| *size == n).map(|&(_, d)| d)
}

/// Tabulated ℓ1 weight for link prediction at the given flip level; the
/// nearest tabulated level is used for other values.
pub fn link_prediction_lambda(flip_prob: f64) -> f64 {
    const TABLE: [(f64, f64); 3] = [(0.0, 0.01), (0.05, 0.05), (0.1, 0.1)];
    TABLE
        .iter()
        .min_by(|a, b| (a.0 - flip_prob).abs().total_cmp(&(b.0 - flip_prob).abs()))
        .map(|&(_, l)| l)
        .unwrap_or(0.01)
}

fn block_sizes(n: usize, blocks: usize) -> Vec<usize> {
    let base = n / blocks;
    let mut sizes = vec![base; blocks];
    sizes[blocks - 1] += n - base * blocks;
    sizes
}

/// Block-diagonal ground truth with Uniform[-1, 1] in-block entries,
/// observed fully under iid Gaussian noise.
pub fn gen_block_diag_cov(
    n: usize,
    blocks: usize,
    noise_var: f64,
    seed: u64,
) -> Result<ProblemInstance, DataError> {
    if n == 0 {
        return Err(DataError::Invalid("n must be positive".into()));
    }
    if blocks == 0 || blocks > n {
        return Err(DataError::Invalid(format!("blocks must be in 1..={n}, got {blocks}")));
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(DataError::Invalid("noise_var must be nonnegative".into()));
    }
    let mut rng = rng_for(seed, streams::INSTANCE);
    let sizes = block_sizes(n, blocks);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut truth = Matrix::zeros(n, n);
    let mut start = 0;
    for &size in &sizes {
        for i in start..start + size {
            for j in start..start + size {
                truth[(i, j)] = unit.sample(&mut rng);
            }
        }
        start += size;
    }
    let mut y = truth.clone();
    if noise_var > 0.0 {
        let noise = Normal::new(0.0, noise_var.sqrt()).expect("valid std");
        for v in y.as_mut_slice() {
            *v += noise.sample(&mut rng);
        }
    }

    let (delta, delta_source) = match covariance_table_delta(n) {
        Some(d) => (d, "table".to_string()),
        None => (trace_norm(&truth), "ground_truth_trace_norm".to_string()),
    };
    Ok(ProblemInstance {
        kind: ProblemKind::Covariance,
        rows: n,
        cols: n,
        seed,
        y: y.into_vec(),
        omega: IndexSet::all(n, n),
        ground_truth: Some(truth.into_vec()),
        test_set: None,
        delta,
        lambda: COVARIANCE_LAMBDA,
        provenance: provenance(
            "block_diag_cov",
            json!({ "n": n, "blocks": blocks, "noise_var": noise_var, "block_sizes": sizes }),
            delta_source,
            Vec::new(),
        ),
    })
}

/// Undirected stochastic block model over `nodes` vertices with contiguous,
/// near-equal communities. Edges are returned as `(i, j)` with `i < j`.
pub fn gen_sbm_edges(
    nodes: usize,
    communities: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<Vec<(usize, usize)>, DataError> {
    if communities == 0 || communities > nodes {
        return Err(DataError::Invalid(format!(
            "communities must be in 1..={nodes}, got {communities}"
        )));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(DataError::Invalid(format!("{name} must lie in [0, 1]")));
        }
    }
    let sizes = block_sizes(nodes, communities);
    let mut label = Vec::with_capacity(nodes);
    for (c, &s) in sizes.iter().enumerate() {
        label.extend(std::iter::repeat_n(c, s));
    }
    let mut rng = rng_for(seed, streams::GRAPH);
    let mut edges = Vec::new();
    for i in 0..nodes {
        for j in i + 1..nodes {
            let p = if label[i] == label[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

/// Link-prediction instance from an undirected edge list over `nodes`
/// vertices. Each unordered pair is observed (in both orientations) or held
/// out; observed labels are flipped independently.
pub fn make_link_prediction(
    nodes: usize,
    edges: &[(usize, usize)],
    observe_frac: f64,
    flip_prob: f64,
    seed: u64,
) -> Result<ProblemInstance, DataError> {
    if nodes < 2 {
        return Err(DataError::Invalid("need at least two nodes".into()));
    }
    if !(observe_frac > 0.0 && observe_frac <= 1.0) {
        return Err(DataError::Invalid("observe_frac must lie in (0, 1]".into()));
    }
    if !(0.0..1.0).contains(&flip_prob) {
        return Err(DataError::Invalid("flip_prob must lie in [0, 1)".into()));
    }
    let mut adjacency = BTreeSet::new();
    let mut self_loops = 0usize;
    for &(a, b) in edges {
        if a >= nodes || b >= nodes {
            return Err(DataError::Invalid(format!("edge ({a}, {b}) out of range for {nodes} nodes")));
        }
        if a == b {
            self_loops += 1;
            continue;
        }
        adjacency.insert((a.min(b), a.max(b)));
    }

    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(nodes * (nodes - 1) / 2);
    for i in 0..nodes {
        for j in i + 1..nodes {
            pairs.push((i, j));
        }
    }
    let observed = ((observe_frac * pairs.len() as f64).round() as usize).min(pairs.len());
    let mut split_rng = rng_for(seed, streams::SPLIT);
    pairs.shuffle(&mut split_rng);
    let (train, test) = pairs.split_at(observed);

    let mut rng = rng_for(seed, streams::INSTANCE);
    let mut y = Matrix::zeros(nodes, nodes);
    let mut omega = IndexSet::default();
    let mut flips = 0usize;
    let mut train_sorted = train.to_vec();
    train_sorted.sort_unstable();
    for &(i, j) in &train_sorted {
        let mut label = adjacency.contains(&(i, j));
        if flip_prob > 0.0 && rng.random::<f64>() < flip_prob {
            label = !label;
            flips += 1;
        }
        let v = if label { 1.0 } else { 0.0 };
        y[(i, j)] = v;
        y[(j, i)] = v;
        omega.push(i, j);
        omega.push(j, i);
    }

    let mut test_sorted = test.to_vec();
    test_sorted.sort_unstable();
    let mut test_set = TestSet::default();
    for &(i, j) in &test_sorted {
        test_set.push(i, j, if adjacency.contains(&(i, j)) { 1.0 } else { 0.0 });
    }

    let mut truth = Matrix::zeros(nodes, nodes);
    for &(i, j) in &adjacency {
        truth[(i, j)] = 1.0;
        truth[(j, i)] = 1.0;
    }
    let mut notes = Vec::new();
    if self_loops > 0 {
        notes.push(format!("dropped {self_loops} self-loops"));
    }
    if test_set.is_empty() {
        notes.push("empty test set".to_string());
    }
    let delta = trace_norm(&truth).max(f64::MIN_POSITIVE);
    Ok(ProblemInstance {
        kind: ProblemKind::LinkPrediction,
        rows: nodes,
        cols: nodes,
        seed,
        y: y.into_vec(),
        omega,
        ground_truth: Some(truth.into_vec()),
        test_set: Some(test_set),
        delta,
        lambda: link_prediction_lambda(flip_prob),
        provenance: provenance(
            "link_prediction",
            json!({
                "nodes": nodes,
                "edges": adjacency.len(),
                "observe_frac": observe_frac,
                "flip_prob": flip_prob,
                "observed_pairs": observed,
                "flips": flips,
                "self_loops_dropped": self_loops,
            }),
            "ground_truth_trace_norm",
            notes,
        ),
    })
}
