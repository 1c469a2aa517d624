//! Runs a solver variant against a problem instance with wall-clock timing.

use std::time::Instant;

use fwua_core::solver::{solve, SolveHooks};
use fwua_core::{ConvergenceRecord, Matrix, SolveOutput, SolverConfig};

use crate::error::DataError;
use crate::problems::{Metrics, ProblemInstance};

pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl SolveHooks for WallClock {
    fn elapsed_secs(&mut self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn on_iterate(&mut self, _k: usize, _x: &Matrix) {}
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub label: String,
    pub config: SolverConfig,
    pub lambda: f64,
    pub delta: f64,
    pub output: SolveOutput,
    pub metrics: Metrics,
    pub iterations_to_drop: Option<usize>,
}

/// First recorded iteration whose objective sits at least `frac * |f_0|`
/// below the starting objective.
pub fn iterations_to_drop(trace: &[ConvergenceRecord], frac: f64) -> Option<usize> {
    let f0 = trace.first()?.objective;
    let target = f0 - frac * f0.abs();
    trace.iter().find(|r| r.objective <= target).map(|r| r.k)
}

pub fn label_for(cfg: &SolverConfig) -> String {
    match cfg.variant {
        fwua_core::Variant::Sccg { mu } => format!("sccg(mu={mu})"),
        v => v.name().to_string(),
    }
}

pub fn run_solve(
    instance: &ProblemInstance,
    cfg: &SolverConfig,
    lambda: Option<f64>,
    delta: Option<f64>,
) -> Result<RunResult, DataError> {
    let lambda = lambda.unwrap_or(instance.lambda);
    let delta = delta.unwrap_or(instance.delta);
    let obj = instance.objective(Some(lambda), Some(delta))?;
    let mut clock = WallClock::start();
    let output = solve(&obj, delta, cfg, &mut clock)?;
    let wall = clock.elapsed_secs();
    let metrics = instance.metrics(
        &output.state.x,
        output.final_objective,
        wall,
        output.state.rank_estimate(),
    );
    Ok(RunResult {
        label: label_for(cfg),
        config: cfg.clone(),
        lambda,
        delta,
        iterations_to_drop: iterations_to_drop(output.trace(), 0.1),
        output,
        metrics,
    })
}
