use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde_json::json;

use super::{provenance, rng_for, streams, trace_norm, IndexSet, ProblemInstance, ProblemKind, TestSet};
use crate::error::DataError;
use fwua_core::Matrix;

/// Ridge weight on unobserved entries for completion runs.
pub const COMPLETION_LAMBDA: f64 = 0.001;

/// Deduplicated undirected edges over contiguous node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    /// `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Original identifier of each contiguous index.
    pub original_ids: Vec<i64>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

impl EdgeList {
    pub fn node_count(&self) -> usize {
        self.original_ids.len()
    }

    /// True when the input held no edges.
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList, DataError> {
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(DataError::parse(
                line_no,
                format!("expected two node ids, found {} tokens", tokens.len()),
            ));
        }
        let parse = |t: &str| {
            t.parse::<i64>()
                .map_err(|_| DataError::parse(line_no, format!("invalid node id {t:?}")))
        };
        raw.push((parse(tokens[0])?, parse(tokens[1])?));
    }

    let mut self_loops = 0;
    let mut ids = BTreeSet::new();
    for &(a, b) in &raw {
        ids.insert(a);
        ids.insert(b);
    }
    let original_ids: Vec<i64> = ids.into_iter().collect();
    let index: BTreeMap<i64, usize> = original_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut edges = BTreeSet::new();
    let mut kept = 0;
    for &(a, b) in &raw {
        if a == b {
            self_loops += 1;
            continue;
        }
        kept += 1;
        let (i, j) = (index[&a], index[&b]);
        edges.insert((i.min(j), i.max(j)));
    }
    Ok(EdgeList {
        duplicates_dropped: kept - edges.len(),
        edges: edges.into_iter().collect(),
        original_ids,
        self_loops_dropped: self_loops,
    })
}

pub fn ingest_edge_list(path: &Path) -> Result<EdgeList, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    parse_edge_list(&text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: i64,
    pub item: i64,
    pub value: f64,
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains("::") {
        line.split("::").map(str::trim).collect()
    } else if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses `user item rating [extra...]` lines separated by `::`, tabs,
/// commas or whitespace. A non-numeric first line is treated as a header.
pub fn parse_ratings(text: &str) -> Result<Vec<Rating>, DataError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields = split_fields(content);
        if fields.len() < 3 {
            return Err(DataError::parse(line_no, format!("expected at least 3 fields, found {}", fields.len())));
        }
        let user = fields[0].parse::<i64>();
        if user.is_err() && out.is_empty() && fields[0].parse::<f64>().is_err() {
            continue;
        }
        let user = user.map_err(|_| DataError::parse(line_no, format!("invalid user id {:?}", fields[0])))?;
        let item = fields[1]
            .parse::<i64>()
            .map_err(|_| DataError::parse(line_no, format!("invalid item id {:?}", fields[1])))?;
        let value = fields[2]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| DataError::parse(line_no, format!("invalid rating {:?}", fields[2])))?;
        out.push(Rating { user, item, value });
    }
    Ok(out)
}

/// ℓ1-loss completion instance from rating triples. Users and items are
/// re-indexed contiguously in id order; a later duplicate overrides an
/// earlier one. A `test_frac` share of entries is held out.
pub fn ratings_instance(
    ratings: &[Rating],
    test_frac: f64,
    seed: u64,
) -> Result<ProblemInstance, DataError> {
    if ratings.is_empty() {
        return Err(DataError::Invalid("no ratings".into()));
    }
    if !(0.0..1.0).contains(&test_frac) {
        return Err(DataError::Invalid("test_frac must lie in [0, 1)".into()));
    }
    let users: BTreeSet<i64> = ratings.iter().map(|r| r.user).collect();
    let items: BTreeSet<i64> = ratings.iter().map(|r| r.item).collect();
    let user_idx: BTreeMap<i64, usize> = users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let item_idx: BTreeMap<i64, usize> = items.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for r in ratings {
        entries.insert((user_idx[&r.user], item_idx[&r.item]), r.value);
    }
    let duplicates = ratings.len() - entries.len();
    let (rows, cols) = (users.len(), items.len());

    let mut keys: Vec<(usize, usize)> = entries.keys().copied().collect();
    keys.shuffle(&mut rng_for(seed, streams::SPLIT));
    let n_test = (test_frac * keys.len() as f64).round() as usize;
    let (test_keys, train_keys) = keys.split_at(n_test);
    let mut train_keys = train_keys.to_vec();
    train_keys.sort_unstable();
    let mut test_keys = test_keys.to_vec();
    test_keys.sort_unstable();

    let mut y = Matrix::zeros(rows, cols);
    let mut omega = IndexSet::default();
    for &(i, j) in &train_keys {
        y[(i, j)] = entries[&(i, j)];
        omega.push(i, j);
    }
    let mut test_set = TestSet::default();
    for &(i, j) in &test_keys {
        test_set.push(i, j, entries[&(i, j)]);
    }
    let delta = trace_norm(&y).max(f64::MIN_POSITIVE);
    let mut notes = Vec::new();
    if duplicates > 0 {
        notes.push(format!("{duplicates} duplicate ratings overridden"));
    }
    if test_set.is_empty() {
        notes.push("empty test set".to_string());
    }
    Ok(ProblemInstance {
        kind: ProblemKind::L1Completion,
        rows,
        cols,
        seed,
        y: y.into_vec(),
        omega,
        ground_truth: None,
        test_set: Some(test_set),
        delta,
        lambda: COMPLETION_LAMBDA,
        provenance: provenance(
            "ratings",
            json!({
                "ratings": ratings.len(),
                "users": rows,
                "items": cols,
                "test_frac": test_frac,
                "train": train_keys.len(),
                "test": test_keys.len(),
                "user_ids": users.into_iter().collect::<Vec<_>>(),
                "item_ids": items.into_iter().collect::<Vec<_>>(),
            }),
            "train_trace_norm",
            notes,
        ),
    })
}

pub fn ingest_ratings(path: &Path, test_frac: f64, seed: u64) -> Result<ProblemInstance, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    ratings_instance(&parse_ratings(&text)?, test_frac, seed)
}
