//! Exhaustive sweep over threshold rules.

use super::calibrate::{calibrate_threshold, pool_value, TargetKind};
use super::candidates::candidate_pairs;
use super::program::{
    build_joint_lp, build_screening_lp, check_groups, joint_lp_applicable, ScreeningProgram, VarKind,
};
use super::{SolveError, SweepConfig};
use crate::evaluator::exact_evaluate;
use crate::linprog::{solve_lp, LpStatus};
use crate::model::{ConstraintMode, ProblemInstance, ScreeningPolicy, SolveResult, SolveStatus, ThresholdPolicy};
use std::cmp::Ordering;

struct Sweep<'a> {
    instance: &'a ProblemInstance,
    joint: bool,
    pairs: Vec<Vec<(f64, f64)>>,
}

impl Sweep<'_> {
    fn total(&self) -> u128 {
        self.pairs.iter().map(|p| p.len() as u128).product()
    }

    /// Mixed-radix decoding, group 0 most significant.
    fn decode(&self, mut k: usize) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.pairs.len()];
        for g in (0..self.pairs.len()).rev() {
            let r = self.pairs[g].len();
            out[g] = self.pairs[g][k % r];
            k /= r;
        }
        out
    }

    fn program(&self, rule: &[(f64, f64)]) -> Result<ScreeningProgram, SolveError> {
        if self.joint {
            build_joint_lp(self.instance, rule[0])
        } else {
            let policy = ThresholdPolicy {
                thresholds: rule.iter().map(|r| r.0).collect(),
                boundary_probs: rule.iter().map(|r| r.1).collect(),
            };
            build_screening_lp(self.instance, &policy)
        }
    }

    fn value(&self, k: usize) -> Result<Option<f64>, SolveError> {
        let prog = self.program(&self.decode(k))?;
        let sol = solve_lp(&prog.lp)?;
        Ok((sol.status == LpStatus::Optimal).then(|| prog.expected_utility(&sol.x)))
    }
}

/// Lexicographic order on all thresholds, then all boundary probabilities.
fn rule_order(a: &[(f64, f64)], b: &[(f64, f64)]) -> Ordering {
    let ts = a.iter().zip(b).map(|(x, y)| x.0.total_cmp(&y.0));
    let alphas = a.iter().zip(b).map(|(x, y)| x.1.total_cmp(&y.1));
    ts.chain(alphas).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Best policy over every candidate `(threshold, alpha)` combination.
///
/// Near-ties (within `1e-9` relative) go to the lexicographically smallest
/// rule, so the result does not depend on evaluation order.
pub fn sweep_solve(instance: &ProblemInstance, config: &SweepConfig) -> Result<SolveResult, SolveError> {
    config.validate()?;
    check_groups(instance)?;
    let joint = config.use_joint_lp && joint_lp_applicable(instance);
    let swept = if joint { 1 } else { instance.num_groups };
    let sweep = Sweep {
        instance,
        joint,
        pairs: (0..swept).map(|g| candidate_pairs(instance, g, config)).collect(),
    };
    let total = sweep.total();
    if total > config.max_lp_solves as u128 {
        return Err(SolveError::TooManySolves {
            required: total,
            cap: config.max_lp_solves,
        });
    }
    let total = total as usize;

    #[cfg(feature = "parallel")]
    let values: Vec<Option<f64>> = {
        use rayon::prelude::*;
        (0..total)
            .into_par_iter()
            .map(|k| sweep.value(k))
            .collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Option<f64>> = (0..total).map(|k| sweep.value(k)).collect::<Result<_, _>>()?;

    let Some(best) = values.iter().flatten().copied().max_by(f64::total_cmp) else {
        return Ok(SolveResult::infeasible(instance));
    };
    let floor = best - 1e-9 * best.abs().max(1.0);
    let winner = (0..total)
        .filter(|&k| values[k].is_some_and(|v| v >= floor))
        .map(|k| sweep.decode(k))
        .min_by(|a, b| rule_order(a, b))
        .expect("at least one value reaches the maximum");

    let prog = sweep.program(&winner)?;
    let sol = solve_lp(&prog.lp)?;
    finalize(instance, &prog, &sol.x, &winner, joint)
}

fn finalize(
    instance: &ProblemInstance,
    prog: &ScreeningProgram,
    x: &[f64],
    rule: &[(f64, f64)],
    joint: bool,
) -> Result<SolveResult, SolveError> {
    let probs: Vec<f64> = x
        .iter()
        .zip(&prog.kinds)
        .map(|(&v, &k)| if k == VarKind::Screen { v.clamp(0.0, 1.0) } else { 0.0 })
        .collect();
    let mut allocation = ThresholdPolicy {
        thresholds: rule.iter().map(|r| r.0).collect(),
        boundary_probs: rule.iter().map(|r| r.1).collect(),
    };
    if joint {
        let members = instance.group_members(1);
        let pool: Vec<_> = members.iter().map(|&i| instance.applicants[i].clone()).collect();
        let pinned = instance
            .constraints
            .iter()
            .any(|c| c.group == 1 && c.mode == ConstraintMode::Exactly);
        let kind = if pinned { TargetKind::Utility } else { TargetKind::Cost };
        let target: f64 = members
            .iter()
            .map(|&i| {
                let a = &instance.applicants[i];
                let weight = if pinned { a.mu } else { a.alloc_cost };
                weight * x[i].clamp(0.0, 1.0)
            })
            .sum();
        let zeros = vec![0.0; pool.len()];
        let max = pool_value(&pool, &zeros, f64::NEG_INFINITY, 0.0, kind);
        let (t, alpha) = calibrate_threshold(&pool, &zeros, target.clamp(0.0, max), kind)?;
        allocation.thresholds.push(t);
        allocation.boundary_probs.push(alpha);
    }
    let screening = ScreeningPolicy { probs };
    let report = exact_evaluate(instance, &screening, &allocation)?;
    let lp_utility = prog.expected_utility(x);
    if (report.expected_utility - lp_utility).abs() > 1e-6 * lp_utility.abs().max(1.0) {
        return Err(SolveError::Inconsistent {
            lp: lp_utility,
            exact: report.expected_utility,
        });
    }
    let lp_cost = prog.expected_cost(x);
    if !joint && (report.expected_cost - lp_cost).abs() > 1e-6 * lp_cost.abs().max(1.0) {
        return Err(SolveError::Inconsistent {
            lp: lp_cost,
            exact: report.expected_cost,
        });
    }
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
    use crate::model::DiversityConstraint;

    #[test]
    fn stylized_optimum() {
        let inst = stylized_instance();
        for use_joint_lp in [true, false] {
            let config = SweepConfig {
                use_joint_lp,
                ..SweepConfig::default()
            };
            let r = sweep_solve(&inst, &config).unwrap();
            assert!(r.is_optimal());
            assert!((r.expected_utility - 4000.0).abs() < 1e-9);
            assert!((r.expected_cost - 2000.0).abs() < 1e-9);
            assert!(r.screening.probs[..8].iter().all(|&p| (p - 1.0).abs() < 1e-12));
            assert!(r.screening.probs[8..].iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn zero_budget() {
        let mut inst = stylized_instance();
        inst.budget = 0.0;
        let r = sweep_solve(&inst, &SweepConfig::default()).unwrap();
        assert!(r.is_optimal());
        assert_eq!(r.expected_utility, 0.0);
        assert!(r.screening.probs.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn infeasible_constraint() {
        let inst = stylized_instance().with_constraints(vec![DiversityConstraint::at_least(1, 1e6)]);
        let r = sweep_solve(&inst, &SweepConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn constrained_to_non_targeted() {
        let inst = stylized_instance().with_constraints(vec![DiversityConstraint::at_least(1, 1500.0)]);
        let r = sweep_solve(&inst, &SweepConfig::default()).unwrap();
        // Two loans of 750 leave 1200 to screen and fund targeted applicants
        // at 250 each: 4.8 screened, 2.4 loans of 1000.
        assert!((r.expected_utility - 3900.0).abs() < 1e-6, "{}", r.expected_utility);
        assert!(r.group_utilities[1] >= 1500.0 - 1e-6);
    }

    #[test]
    fn cap_is_enforced() {
        let config = SweepConfig {
            max_lp_solves: 10,
            use_joint_lp: false,
            ..SweepConfig::default()
        };
        assert!(matches!(
            sweep_solve(&stylized_instance(), &config),
            Err(SolveError::TooManySolves { .. })
        ));
    }

    #[test]
    fn rule_order_is_thresholds_first() {
        let a = [(1.0, 0.9), (2.0, 0.0)];
        let b = [(1.0, 0.0), (3.0, 0.0)];
        assert_eq!(rule_order(&a, &b), Ordering::Less);
    }
}
