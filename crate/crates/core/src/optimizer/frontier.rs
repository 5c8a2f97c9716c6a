//! Utility frontier against a targeted-group utility level.

use super::baseline::no_screening_baseline;
use super::sweep::sweep_solve;
use super::{SolveError, SweepConfig};
use crate::model::{ProblemInstance, SolveResult};

/// Solves, for each `lambda` in `config.lambda_grid`, the instance with group
/// 0 pinned to `lambda` and every other group floored at 0.
///
/// With screening, the alpha grid is widened by the baseline's boundary
/// probabilities at each `lambda`, so the no-screening policy is always among
/// the candidates and the screening frontier never falls below it.
pub fn pareto_frontier(
    instance: &ProblemInstance,
    config: &SweepConfig,
    with_screening: bool,
) -> Result<Vec<(f64, SolveResult)>, SolveError> {
    config.validate()?;
    config
        .lambda_grid
        .iter()
        .map(|&lambda| {
            let pinned = instance.with_targeted_exactly(lambda);
            let baseline = no_screening_baseline(&pinned, lambda)?;
            if !with_screening {
                return Ok((lambda, baseline));
            }
            let local = if baseline.is_optimal() {
                config.with_extra_alphas(&baseline.allocation.boundary_probs)
            } else {
                config.clone()
            };
            Ok((lambda, sweep_solve(&pinned, &local)?))
        })
        .collect()
}
