//! Browser bindings. Each export returns a JSON string for the page to draw;
//! the plain `*_json` functions hold the logic so they can be tested natively.

use screenalloc::data::{discretize_beta, gen_synthetic, Regime};
use screenalloc::fixtures::stylized_instance;
use screenalloc::model::{DiversityConstraint, SolveResult, UtilitySpec};
use screenalloc::optimizer::{no_screening_baseline, pareto_frontier, sweep_solve, SweepConfig};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Outcome {
    feasible: bool,
    utility: f64,
    cost: f64,
    screened: f64,
    thresholds: Vec<f64>,
}

impl From<&SolveResult> for Outcome {
    fn from(r: &SolveResult) -> Self {
        Self {
            feasible: r.is_optimal(),
            utility: r.expected_utility,
            cost: r.expected_cost,
            screened: r.screening.probs.iter().sum(),
            thresholds: r.allocation.thresholds.clone(),
        }
    }
}

/// Lending example with the budget, per-applicant costs and the floor on
/// group-0 utility set by the caller.
pub fn stylized_json(budget: f64, screen_cost: f64, alloc_cost: f64, lambda: f64) -> Result<String, String> {
    let mut inst = stylized_instance();
    inst.budget = budget;
    for a in &mut inst.applicants {
        a.screen_cost = screen_cost;
        a.alloc_cost = alloc_cost;
    }
    let inst = inst.with_constraints(vec![DiversityConstraint::at_least(0, lambda)]);
    let screen = sweep_solve(&inst, &SweepConfig::default()).map_err(|e| e.to_string())?;
    let plain = no_screening_baseline(&inst, lambda).map_err(|e| e.to_string())?;
    let body = json!({ "screen": Outcome::from(&screen), "noscreen": Outcome::from(&plain) });
    Ok(body.to_string())
}

/// Frontier of a small synthetic instance, budget scaled with `n`.
pub fn frontier_json(regime: &str, seed: u64, n: usize, steps: usize) -> Result<String, String> {
    let regime: Regime = regime.parse().map_err(|e| format!("{e}"))?;
    let mut config = regime.config(seed);
    config.budget *= n as f64 / config.n as f64;
    config.n = n;
    config.bins = 41;
    let inst = gen_synthetic(&config, UtilitySpec::LENDING).map_err(|e| e.to_string())?;
    let top = inst.budget / config.alloc_cost * UtilitySpec::LENDING.repay_value;
    let sweep = SweepConfig {
        alpha_grid: (0..=10).map(|k| f64::from(k) / 10.0).collect(),
        lambda_grid: (0..steps.max(2))
            .map(|k| top * k as f64 / (steps.max(2) - 1) as f64)
            .collect(),
        ..SweepConfig::default()
    };
    let screen = pareto_frontier(&inst, &sweep, true).map_err(|e| e.to_string())?;
    let plain = pareto_frontier(&inst, &sweep, false).map_err(|e| e.to_string())?;
    let rows: Vec<_> = screen
        .iter()
        .zip(&plain)
        .map(|((lambda, s), (_, p))| {
            json!({
                "lambda": lambda,
                "screen": s.is_optimal().then_some(s.expected_utility),
                "noscreen": p.is_optimal().then_some(p.expected_utility),
            })
        })
        .collect();
    Ok(serde_json::Value::Array(rows).to_string())
}

/// Discretized beta density on `bins` midpoints of [0, 1].
pub fn shape_json(mean: f64, count: f64, bins: usize) -> Result<String, String> {
    let dist = discretize_beta(mean, count, bins).map_err(|e| e.to_string())?;
    Ok(json!({ "x": dist.support, "p": dist.probs }).to_string())
}

#[wasm_bindgen]
pub fn stylized(budget: f64, screen_cost: f64, alloc_cost: f64, lambda: f64) -> Result<String, JsError> {
    stylized_json(budget, screen_cost, alloc_cost, lambda).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn frontier(regime: &str, seed: u32, n: u32, steps: u32) -> Result<String, JsError> {
    frontier_json(regime, u64::from(seed), n as usize, steps as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn shape(mean: f64, count: f64, bins: u32) -> Result<String, JsError> {
    shape_json(mean, count, bins as usize).map_err(|e| JsError::new(&e))
}
