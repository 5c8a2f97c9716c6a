//! Subcommand implementations.

use crate::output::{money, read_input, write_atomic, write_json, RunManifest};
use crate::{CliError, Mode};
use screenalloc::data::german::check_canonical;
use screenalloc::data::{
    build_german_instance, fit_german, gen_synthetic, load_german, GermanCosts, LogisticConfig, Regime,
};
use screenalloc::evaluator::{exact_evaluate, monte_carlo_evaluate, EvalError, EvalReport};
use screenalloc::model::{
    validate_instance, DiversityConstraint, ProblemInstance, ScreeningPolicy, SolveResult, SolveStatus,
    ThresholdPolicy, UtilitySpec,
};
use screenalloc::optimizer::{no_screening_baseline, pareto_frontier, sweep_solve, SolveError, SweepConfig};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::Path;
use std::time::Instant;

fn solve_error(e: SolveError) -> CliError {
    match e {
        SolveError::Structural(_)
        | SolveError::Config(_)
        | SolveError::TooManySolves { .. }
        | SolveError::Unachievable { .. } => CliError::Input(e.to_string()),
        SolveError::Eval(EvalError::LengthMismatch { .. }) => CliError::Input(e.to_string()),
        _ => CliError::Internal(e.to_string()),
    }
}

fn load_instance(path: &Path) -> Result<(ProblemInstance, Vec<u8>), CliError> {
    let bytes = read_input(path)?;
    let instance: ProblemInstance = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: not a valid instance: {e}", path.display())))?;
    let violations = validate_instance(&instance);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        return Err(CliError::Input(format!(
            "{} failed validation with {} violation(s)",
            path.display(),
            violations.len()
        )));
    }
    Ok((instance, bytes))
}

fn sweep_config(alpha_steps: u32, lambda_grid: Vec<f64>) -> Result<SweepConfig, CliError> {
    if alpha_steps == 0 {
        return Err(CliError::Input("--alpha-steps must be at least 1".into()));
    }
    Ok(SweepConfig {
        alpha_grid: (0..=alpha_steps)
            .map(|k| f64::from(k) / f64::from(alpha_steps))
            .collect(),
        lambda_grid,
        ..SweepConfig::default()
    })
}

pub fn gen(regime: Regime, seed: u64, n: usize, bins: usize, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let config = screenalloc::data::SyntheticConfig {
        n,
        bins,
        ..regime.config(seed)
    };
    let instance = gen_synthetic(&config, UtilitySpec::LENDING).map_err(|e| CliError::Input(e.to_string()))?;
    write_json(out, &instance)?;
    let manifest = RunManifest::new(
        "gen",
        json!({ "regime": regime.name(), "synthetic": config }),
        Some(seed),
    );
    manifest.finish(out, start.elapsed())
}

pub fn gen_german(data: &Path, budget: f64, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let bytes = read_input(data)?;
    let records = load_german(data).map_err(|e| CliError::Input(format!("{}: {e}", data.display())))?;
    check_canonical(&records).map_err(|e| CliError::Input(e.to_string()))?;
    let logistic = LogisticConfig::default();
    let fit = fit_german(&records, &logistic).map_err(|e| CliError::Internal(e.to_string()))?;
    let costs = GermanCosts::default();
    let instance = build_german_instance(&records, &fit.probabilities, costs, budget, UtilitySpec::LENDING)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    write_json(out, &instance)?;
    let mut manifest = RunManifest::new(
        "gen-german",
        json!({ "budget": budget, "costs": costs, "logistic": logistic, "iterations": fit.iterations }),
        None,
    );
    manifest.add_input(data, &bytes);
    manifest.finish(out, start.elapsed())
}

fn print_summary(result: &SolveResult) {
    let status = match result.status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
    };
    println!("status {status}");
    if result.is_optimal() {
        println!("expected_utility {}", money(result.expected_utility));
        println!("expected_cost {}", money(result.expected_cost));
        for (g, u) in result.group_utilities.iter().enumerate() {
            println!("group_{g}_utility {}", money(*u));
        }
    }
}

pub fn solve(path: &Path, lambda: Option<f64>, mode: Mode, alpha_steps: u32, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let (instance, bytes) = load_instance(path)?;
    let config = sweep_config(alpha_steps, vec![0.0])?;
    let result = match mode {
        Mode::Screen => {
            let instance = match lambda {
                Some(l) => instance.with_constraints(vec![DiversityConstraint::at_least(0, l)]),
                None => instance,
            };
            sweep_solve(&instance, &config)
        }
        Mode::Noscreen => no_screening_baseline(&instance, lambda.unwrap_or(0.0)),
    }
    .map_err(solve_error)?;
    write_json(out, &result)?;
    let mode_name = match mode {
        Mode::Screen => "screen",
        Mode::Noscreen => "noscreen",
    };
    let mut manifest = RunManifest::new(
        "solve",
        json!({ "mode": mode_name, "lambda": lambda, "alpha_grid": config.alpha_grid }),
        None,
    );
    manifest.add_input(path, &bytes);
    manifest.finish(out, start.elapsed())?;
    print_summary(&result);
    if result.is_optimal() {
        Ok(())
    } else {
        Err(CliError::Infeasible)
    }
}

fn lambda_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 || !min.is_finite() || !max.is_finite() || max < min {
        return Err(CliError::Input(
            "need finite --lambda-min <= --lambda-max and --steps >= 1".into(),
        ));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps)
        .map(|k| min + (max - min) * k as f64 / (steps - 1) as f64)
        .collect())
}

fn status_name(r: &SolveResult) -> &'static str {
    match r.status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
    }
}

fn cells(r: &SolveResult) -> (String, String) {
    if r.is_optimal() {
        (money(r.expected_utility), money(r.expected_cost))
    } else {
        (String::new(), String::new())
    }
}

pub fn frontier(
    path: &Path,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    alpha_steps: u32,
    out: &Path,
) -> Result<(), CliError> {
    let start = Instant::now();
    let (instance, bytes) = load_instance(path)?;
    let config = sweep_config(alpha_steps, lambda_grid(lambda_min, lambda_max, steps)?)?;
    let screen = pareto_frontier(&instance, &config, true).map_err(solve_error)?;
    let plain = pareto_frontier(&instance, &config, false).map_err(solve_error)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Output(e.to_string());
    writer
        .write_record([
            "lambda",
            "utility_screen",
            "cost_screen",
            "utility_noscreen",
            "cost_noscreen",
            "status_screen",
            "status_noscreen",
        ])
        .map_err(csv_err)?;
    for ((lambda, s), (_, p)) in screen.iter().zip(&plain) {
        let (us, cs) = cells(s);
        let (up, cp) = cells(p);
        writer
            .write_record([
                money(*lambda),
                us,
                cs,
                up,
                cp,
                status_name(s).into(),
                status_name(p).into(),
            ])
            .map_err(csv_err)?;
    }
    let bytes_out = writer.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    write_atomic(out, &bytes_out)?;
    let mut manifest = RunManifest::new(
        "frontier",
        json!({ "lambda_grid": config.lambda_grid, "alpha_grid": config.alpha_grid }),
        None,
    );
    manifest.add_input(path, &bytes);
    manifest.finish(out, start.elapsed())
}

/// Only these two fields are read, so a solve result can be passed as is.
#[derive(Debug, Deserialize)]
struct PolicyFile {
    screening: ScreeningPolicy,
    allocation: ThresholdPolicy,
}

#[derive(Debug, Serialize)]
struct SimulationReport {
    monte_carlo: EvalReport,
    exact: EvalReport,
}

pub fn simulate(path: &Path, policy: &Path, draws: u64, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let start = Instant::now();
    let (instance, bytes) = load_instance(path)?;
    let policy_bytes = read_input(policy)?;
    let pf: PolicyFile = serde_json::from_slice(&policy_bytes)
        .map_err(|e| CliError::Input(format!("{}: not a valid policy: {e}", policy.display())))?;
    let eval_err = |e: EvalError| CliError::Input(e.to_string());
    let exact = exact_evaluate(&instance, &pf.screening, &pf.allocation).map_err(eval_err)?;
    let monte_carlo = monte_carlo_evaluate(&instance, &pf.screening, &pf.allocation, draws, seed).map_err(eval_err)?;
    let report = SimulationReport { monte_carlo, exact };
    match out {
        Some(out) => {
            write_json(out, &report)?;
            let mut manifest = RunManifest::new("simulate", json!({ "draws": draws }), Some(seed));
            manifest.add_input(path, &bytes);
            manifest.add_input(policy, &policy_bytes);
            manifest.finish(out, start.elapsed())?;
            println!(
                "mc_utility {} se {} exact_utility {}",
                money(report.monte_carlo.expected_utility),
                money(report.monte_carlo.std_error_utility.unwrap_or(0.0)),
                money(report.exact.expected_utility)
            );
        }
        None => {
            let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
            println!("{text}");
        }
    }
    Ok(())
}
