//! Best policy when nobody is screened.

use super::calibrate::{calibrate_threshold, pool_value, TargetKind};
use super::program::check_groups;
use super::SolveError;
use crate::evaluator::exact_evaluate;
use crate::model::{ProblemInstance, ScreeningPolicy, SolveResult, SolveStatus, ThresholdPolicy};

const TOL: f64 = 1e-9;

/// Funds targeted (group 0) applicants by descending `mu / c` until their
/// expected utility is exactly `lambda_target`, then spends what is left on
/// group 1 by descending `mu / c`, skipping applicants with `mu <= 0`.
///
/// The greedy fill breaks ratio ties by lower id; the returned threshold
/// representation spreads a marginal tie evenly, which has the same totals.
/// The instance's own constraints are ignored.
pub fn no_screening_baseline(instance: &ProblemInstance, lambda_target: f64) -> Result<SolveResult, SolveError> {
    check_groups(instance)?;
    if instance.num_groups != 2 {
        return Err(SolveError::Structural(format!(
            "the no-screening baseline needs two groups, found {}",
            instance.num_groups
        )));
    }
    let infeasible = Ok(SolveResult::infeasible(instance));
    if !lambda_target.is_finite() || lambda_target < 0.0 {
        return infeasible;
    }

    let mut targeted: Vec<usize> = instance.group_members(0);
    targeted.retain(|&i| instance.applicants[i].mu > 0.0);
    targeted.sort_by(|&i, &j| {
        let (a, b) = (&instance.applicants[i], &instance.applicants[j]);
        (b.mu / b.alloc_cost)
            .total_cmp(&(a.mu / a.alloc_cost))
            .then(a.id.cmp(&b.id))
    });
    let mut remaining = lambda_target;
    let mut spent = 0.0;
    for &i in &targeted {
        if remaining <= 0.0 {
            break;
        }
        let a = &instance.applicants[i];
        let share = (remaining / a.mu).min(1.0);
        spent += share * a.alloc_cost;
        remaining -= share * a.mu;
    }
    if remaining > TOL * lambda_target.max(1.0) || spent > instance.budget + TOL * instance.budget.max(1.0) {
        return infeasible;
    }

    let pool = |g: usize| -> Vec<_> {
        instance
            .group_members(g)
            .iter()
            .map(|&i| instance.applicants[i].clone())
            .collect()
    };
    let targeted_pool = pool(0);
    let zeros0 = vec![0.0; targeted_pool.len()];
    let reachable = pool_value(&targeted_pool, &zeros0, 0.0, 1.0, TargetKind::Utility);
    let rule0 = calibrate_threshold(
        &targeted_pool,
        &zeros0,
        lambda_target.min(reachable),
        TargetKind::Utility,
    )?;
    let cost0 = pool_value(&targeted_pool, &zeros0, rule0.0, rule0.1, TargetKind::Cost);

    let other = pool(1);
    let zeros1 = vec![0.0; other.len()];
    let fundable: f64 = other.iter().filter(|a| a.mu > 0.0).map(|a| a.alloc_cost).sum();
    let leftover = (instance.budget - cost0).max(0.0);
    let rule1 = calibrate_threshold(&other, &zeros1, leftover.min(fundable), TargetKind::Cost)?;

    let screening = ScreeningPolicy::none(instance.len());
    let allocation = ThresholdPolicy {
        thresholds: vec![rule0.0, rule1.0],
        boundary_probs: vec![rule0.1, rule1.1],
    };
    let report = exact_evaluate(instance, &screening, &allocation)?;
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        expected_utility: report.expected_utility,
        expected_cost: report.expected_cost,
        group_utilities: report.group_utilities,
        screening,
        allocation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::stylized_instance;

    #[test]
    fn stylized_no_target() {
        let r = no_screening_baseline(&stylized_instance(), 0.0).unwrap();
        assert_eq!(r.expected_utility, 3750.0);
        assert_eq!(r.expected_cost, 2000.0);
        assert_eq!(r.allocation.thresholds[0], f64::INFINITY);
    }

    #[test]
    fn stylized_one_targeted_loan() {
        let r = no_screening_baseline(&stylized_instance(), 500.0).unwrap();
        assert!((r.expected_utility - 3500.0).abs() < 1e-9);
        assert!((r.expected_cost - 2000.0).abs() < 1e-9);
        assert!((r.group_utilities[0] - 500.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_targets() {
        let inst = stylized_instance();
        assert_eq!(
            no_screening_baseline(&inst, 4001.0).unwrap().status,
            SolveStatus::Infeasible
        );
        // Eight loans at 400 exceed the 2000 budget.
        assert_eq!(
            no_screening_baseline(&inst, 4000.0).unwrap().status,
            SolveStatus::Infeasible
        );
        assert_eq!(
            no_screening_baseline(&inst, -1.0).unwrap().status,
            SolveStatus::Infeasible
        );
        assert!(no_screening_baseline(&inst, 2500.0).unwrap().is_optimal());
    }

    #[test]
    fn needs_two_groups() {
        let mut inst = stylized_instance();
        inst.num_groups = 3;
        assert!(matches!(
            no_screening_baseline(&inst, 0.0),
            Err(SolveError::Structural(_))
        ));
    }
}
