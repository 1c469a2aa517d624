//! Trace CSV and metrics JSON writers.
//!
//! Trace columns, in order: `k, objective, surrogate, fw_gap, tau,
//! step_inf_norm, elapsed_s, rank_estimate`. Combined traces from `compare`
//! prepend `variant` and `mu`.

use std::fs;
use std::io::Write;
use std::path::Path;

use fwua_core::{ConvergenceRecord, SolverConfig, Variant};
use serde_json::{json, Value};

use crate::error::DataError;
use crate::problems::ProblemInstance;
use crate::run::RunResult;

pub const TRACE_COLUMNS: [&str; 8] = [
    "k",
    "objective",
    "surrogate",
    "fw_gap",
    "tau",
    "step_inf_norm",
    "elapsed_s",
    "rank_estimate",
];

fn record_fields(r: &ConvergenceRecord) -> [String; 8] {
    [
        r.k.to_string(),
        r.objective.to_string(),
        r.surrogate.to_string(),
        r.fw_gap.to_string(),
        r.tau.to_string(),
        r.step_inf_norm.to_string(),
        r.elapsed_s.to_string(),
        r.rank_estimate.to_string(),
    ]
}

fn csv_err(path: &Path, e: csv::Error) -> DataError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::io(path, io),
        other => DataError::Invalid(format!("{}: {other:?}", path.display())),
    }
}

pub fn write_trace<W: Write>(out: W, trace: &[ConvergenceRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in trace {
        w.write_record(record_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv(path: &Path, trace: &[ConvergenceRecord]) -> Result<(), DataError> {
    let file = fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    write_trace(file, trace).map_err(|e| csv_err(path, e))
}

pub fn write_combined_csv(path: &Path, runs: &[RunResult]) -> Result<(), DataError> {
    let file = fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["variant", "mu"];
    header.extend(TRACE_COLUMNS);
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for run in runs {
        let mu = match run.config.variant {
            Variant::Sccg { mu } => mu.to_string(),
            Variant::Subgrad => "0".to_string(),
            _ => String::new(),
        };
        for r in run.output.trace() {
            let mut row = vec![run.label.clone(), mu.clone()];
            row.extend(record_fields(r));
            w.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| DataError::io(path, e))
}

pub fn variant_json(v: &Variant) -> Value {
    match v {
        Variant::Sccg { mu } => json!({ "name": "sccg", "mu": mu }),
        other => json!({ "name": other.name() }),
    }
}

pub fn config_json(cfg: &SolverConfig, lambda: f64, delta: f64) -> Value {
    json!({
        "variant": variant_json(&cfg.variant),
        "max_iters": cfg.max_iters,
        "epsilon": cfg.epsilon,
        "lmo_tol": cfg.lmo_tol,
        "lmo_max_iters": cfg.lmo_max_iters,
        "freeze_override": cfg.freeze_override,
        "record_every": cfg.record_every,
        "seed": cfg.seed,
        "warm_start_lmo": cfg.warm_start_lmo,
        "stop_when_stationary": cfg.stop_when_stationary,
        "lambda": lambda,
        "delta": delta,
    })
}

pub fn metrics_json(run: &RunResult, instance: &ProblemInstance, instance_path: Option<&Path>) -> Value {
    let d = &run.output.diagnostics;
    json!({
        "metrics": run.metrics,
        "variant": run.label,
        "config": config_json(&run.config, run.lambda, run.delta),
        "instance": {
            "path": instance_path.map(|p| p.display().to_string()),
            "kind": instance.kind,
            "rows": instance.rows,
            "cols": instance.cols,
            "seed": instance.seed,
            "provenance": instance.provenance,
        },
        "iterations_to_10pct_drop": run.iterations_to_drop,
        "best_objective": run.output.best_objective(),
        "stopped_early": run.output.stopped_early,
        "diagnostics": {
            "freeze_after": finite_or_null(d.freeze_after),
            "k_prime": finite_or_null(d.k_prime),
            "first_frozen_k": finite_or_null(d.first_frozen_k),
            "freeze_reachable": d.freeze_reachable,
            "frozen_at": run.output.state.frozen_at,
            "stationary_steps": d.stationary_steps,
            "lmo_unconverged": d.lmo_unconverged,
            "max_lmo_residual": d.max_lmo_residual,
            "lmo_iterations": d.lmo_iterations,
        },
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), DataError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| DataError::io(path, e))
}
