//! Problem instances for the three experiment families: block-diagonal
//! covariance recovery, link prediction on a noisy graph and ℓ1-loss matrix
//! completion.

mod generate;
mod ingest;

pub use generate::{
    covariance_table_delta, gen_block_diag_cov, gen_sbm_edges, link_prediction_lambda,
    make_link_prediction, COVARIANCE_LAMBDA, COVARIANCE_SCCG_MU,
};
pub use ingest::{
    ingest_edge_list, ingest_ratings, COMPLETION_LAMBDA, parse_edge_list, parse_ratings, ratings_instance, EdgeList,
    Rating,
};

use std::fs;
use std::path::Path;

use fwua_core::metrics::{auc, rmse};
use fwua_core::objective::{build_l1_completion_objective, build_sparse_lowrank_objective};
use fwua_core::{Matrix, SeparableObjective};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Labeled random streams derived from the single user seed.
pub(crate) mod streams {
    pub const INSTANCE: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const GRAPH: u64 = 3;
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Covariance,
    LinkPrediction,
    L1Completion,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: usize, col: usize) {
        self.rows.push(row);
        self.cols.push(col);
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.rows.iter().copied().zip(self.cols.iter().copied()).collect()
    }

    pub fn all(rows: usize, cols: usize) -> Self {
        let mut set = IndexSet::default();
        for i in 0..rows {
            for j in 0..cols {
                set.push(i, j);
            }
        }
        set
    }
}

/// Held-out entries with their true values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestSet {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl TestSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.rows.push(row);
        self.cols.push(col);
        self.values.push(value);
    }

    pub fn triples(&self) -> Vec<(usize, usize, f64)> {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.values)
            .map(|((&r, &c), &v)| (r, c, v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub params: serde_json::Map<String, serde_json::Value>,
    /// Where the default `delta` came from.
    pub delta_source: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    /// Observations, row-major; zero outside `omega`.
    pub y: Vec<f64>,
    pub omega: IndexSet,
    pub ground_truth: Option<Vec<f64>>,
    pub test_set: Option<TestSet>,
    /// Default trace-norm radius.
    pub delta: f64,
    /// Default regularization weight.
    pub lambda: f64,
    pub provenance: Provenance,
}

/// Evaluation of a solution against an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub objective_final: f64,
    pub auc: Option<f64>,
    pub rmse: Option<f64>,
    pub wall_time: f64,
    pub rank_estimate: usize,
}

impl ProblemInstance {
    pub fn y_matrix(&self) -> Result<Matrix, DataError> {
        Ok(Matrix::from_row_major(self.rows, self.cols, self.y.clone())?)
    }

    pub fn ground_truth_matrix(&self) -> Result<Option<Matrix>, DataError> {
        self.ground_truth
            .as_ref()
            .map(|g| Matrix::from_row_major(self.rows, self.cols, g.clone()).map_err(DataError::from))
            .transpose()
    }

    /// Checks shapes, index ranges and finiteness.
    pub fn validate(&self) -> Result<(), DataError> {
        let n = self.rows * self.cols;
        if self.rows == 0 || self.cols == 0 {
            return Err(DataError::Invalid("empty matrix".into()));
        }
        if self.y.len() != n {
            return Err(DataError::Invalid(format!("y has {} values, expected {n}", self.y.len())));
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Invalid("y contains non-finite values".into()));
        }
        if let Some(g) = &self.ground_truth {
            if g.len() != n {
                return Err(DataError::Invalid("ground_truth has the wrong size".into()));
            }
        }
        if self.omega.rows.len() != self.omega.cols.len() {
            return Err(DataError::Invalid("omega index arrays differ in length".into()));
        }
        let in_range = |r: &[usize], c: &[usize]| {
            r.iter().all(|&i| i < self.rows) && c.iter().all(|&j| j < self.cols)
        };
        if !in_range(&self.omega.rows, &self.omega.cols) {
            return Err(DataError::Invalid("omega index out of range".into()));
        }
        if let Some(t) = &self.test_set {
            if t.rows.len() != t.values.len() || t.cols.len() != t.values.len() {
                return Err(DataError::Invalid("test_set arrays differ in length".into()));
            }
            if !in_range(&t.rows, &t.cols) {
                return Err(DataError::Invalid("test_set index out of range".into()));
            }
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(DataError::Invalid("delta must be positive".into()));
        }
        Ok(())
    }

    /// The separable objective for this instance, with optional overrides
    /// of the regularization weight and radius.
    pub fn objective(&self, lambda: Option<f64>, delta: Option<f64>) -> Result<SeparableObjective, DataError> {
        let y = self.y_matrix()?;
        let mask = self.omega.pairs();
        let lambda = lambda.unwrap_or(self.lambda);
        let delta = delta.unwrap_or(self.delta);
        let obj = match self.kind {
            ProblemKind::Covariance | ProblemKind::LinkPrediction => {
                build_sparse_lowrank_objective(&y, &mask, lambda, delta)?
            }
            ProblemKind::L1Completion => build_l1_completion_objective(&y, &mask, lambda, delta)?,
        };
        Ok(obj)
    }

    /// AUC over the held-out pairs, scoring each pair by `x[(i, j)]`.
    pub fn auc(&self, x: &Matrix) -> Option<f64> {
        let test = self.test_set.as_ref()?;
        let scores: Vec<f64> = test.rows.iter().zip(&test.cols).map(|(&i, &j)| x[(i, j)]).collect();
        let labels: Vec<bool> = test.values.iter().map(|&v| v > 0.5).collect();
        auc(&scores, &labels)
    }

    pub fn rmse(&self, x: &Matrix) -> Option<f64> {
        let test = self.test_set.as_ref()?;
        rmse(x, &test.triples()).ok()
    }

    pub fn metrics(&self, x: &Matrix, objective_final: f64, wall_time: f64, rank_estimate: usize) -> Metrics {
        Metrics {
            objective_final,
            auc: match self.kind {
                ProblemKind::LinkPrediction => self.auc(x),
                _ => None,
            },
            rmse: match self.kind {
                ProblemKind::L1Completion => self.rmse(x),
                _ => None,
            },
            wall_time,
            rank_estimate,
        }
    }

    pub fn to_json(&self) -> Result<String, DataError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        let inst: ProblemInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        fs::write(path, self.to_json()?).map_err(|e| DataError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Sum of singular values.
pub fn trace_norm(x: &Matrix) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice());
    m.singular_values().iter().sum()
}

pub(crate) fn provenance(
    generator: &str,
    params: serde_json::Value,
    delta_source: impl Into<String>,
    notes: Vec<String>,
) -> Provenance {
    let params = match params {
        serde_json::Value::Object(map) => map,
        _ => serde_json::Map::new(),
    };
    Provenance {
        generator: generator.to_string(),
        params,
        delta_source: delta_source.into(),
        notes,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}
