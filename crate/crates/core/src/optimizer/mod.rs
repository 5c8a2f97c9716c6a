//! Optimal screening and allocation by sweeping threshold policies.
//!
//! For a fixed per-group `(threshold, alpha)` rule the optimal screening
//! probabilities solve a linear program. Threshold candidates are finite, so
//! sweeping them (and a grid of alpha values) and keeping the best LP gives an
//! optimal policy up to the alpha discretization.

mod baseline;
mod calibrate;
mod candidates;
mod frontier;
mod program;
mod sweep;

pub use baseline::no_screening_baseline;
pub use calibrate::{calibrate_threshold, pool_value, TargetKind};
pub use candidates::{candidate_pairs, normalized_points, threshold_candidates};
pub use frontier::pareto_frontier;
pub use program::{build_joint_lp, build_screening_lp, joint_lp_applicable, ScreeningProgram, VarKind};
pub use sweep::sweep_solve;

use crate::evaluator::EvalError;
use crate::linprog::LpError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    Structural(String),
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("sweep needs {required} LP solves, above the cap of {cap}")]
    TooManySolves { required: u128, cap: u64 },
    #[error("target {target} is outside the achievable range [0, {max}]")]
    Unachievable { target: f64, max: f64 },
    #[error("LP value {lp} disagrees with exact evaluation {exact}")]
    Inconsistent { lp: f64, exact: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub alpha_grid: Vec<f64>,
    /// Targeted-group utility levels for frontier sweeps.
    pub lambda_grid: Vec<f64>,
    /// Per-group threshold lists replacing the computed candidates.
    pub threshold_candidates: Option<Vec<Vec<f64>>>,
    pub max_lp_solves: u64,
    /// Use the joint LP when every group-1 applicant is unscreenable.
    pub use_joint_lp: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha_grid: (0..=20).map(|k| k as f64 / 20.0).collect(),
            lambda_grid: vec![0.0],
            threshold_candidates: None,
            max_lp_solves: 1_000_000,
            use_joint_lp: true,
        }
    }
}

fn check_grid(name: &str, grid: &[f64], unit: bool) -> Result<(), SolveError> {
    if grid.is_empty() {
        return Err(SolveError::Config(format!("{name} is empty")));
    }
    if grid.iter().any(|v| v.is_nan() || (unit && !(0.0..=1.0).contains(v))) {
        return Err(SolveError::Config(format!("{name} has values out of range")));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(SolveError::Config(format!("{name} is not sorted ascending")));
    }
    Ok(())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        check_grid("alpha_grid", &self.alpha_grid, true)?;
        check_grid("lambda_grid", &self.lambda_grid, false)?;
        if let Some(groups) = &self.threshold_candidates {
            for (g, ts) in groups.iter().enumerate() {
                check_grid(&format!("threshold candidates for group {g}"), ts, false)?;
            }
        }
        Ok(())
    }

    /// Copy with `extra` merged into the alpha grid.
    pub fn with_extra_alphas(&self, extra: &[f64]) -> Self {
        let mut alpha_grid = self.alpha_grid.clone();
        alpha_grid.extend(extra.iter().copied().filter(|a| (0.0..=1.0).contains(a)));
        alpha_grid.sort_by(f64::total_cmp);
        alpha_grid.dedup();
        Self {
            alpha_grid,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let c = SweepConfig::default();
        assert_eq!(c.alpha_grid.len(), 21);
        assert_eq!(c.alpha_grid[1], 0.05);
        assert_eq!(c.alpha_grid[20], 1.0);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_grids() {
        let bad = [vec![], vec![0.5, 0.2], vec![1.5]];
        for alpha_grid in bad {
            let c = SweepConfig {
                alpha_grid,
                ..SweepConfig::default()
            };
            assert!(matches!(c.validate(), Err(SolveError::Config(_))));
        }
        let c = SweepConfig {
            lambda_grid: vec![],
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn extra_alphas_merge_sorted() {
        let c = SweepConfig {
            alpha_grid: vec![0.0, 1.0],
            ..SweepConfig::default()
        }
        .with_extra_alphas(&[0.3, 1.0, 2.0]);
        assert_eq!(c.alpha_grid, vec![0.0, 0.3, 1.0]);
    }
}
