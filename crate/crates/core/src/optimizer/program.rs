//! LP formulations for a fixed threshold policy.

use super::SolveError;
use crate::coefficients::coefficients_at;
use crate::linprog::LinearProgram;
use crate::model::{ConstraintMode, ProblemInstance, ThresholdPolicy};

/// What the LP variable at a given applicant index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Screening probability `p_i`.
    Screen,
    /// Direct allocation probability `a_i` (joint formulation only).
    Allocate,
}

/// An LP over one variable per applicant, plus the constants the LP drops.
///
/// Total expected utility is `lp.objective . x + objective_offset` and total
/// expected cost is `budget row . x + cost_offset`. The budget row is always
/// `lp.ineq[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningProgram {
    pub lp: LinearProgram,
    pub objective_offset: f64,
    pub cost_offset: f64,
    pub kinds: Vec<VarKind>,
}

impl ScreeningProgram {
    pub fn expected_utility(&self, x: &[f64]) -> f64 {
        self.lp.objective_at(x) + self.objective_offset
    }

    pub fn expected_cost(&self, x: &[f64]) -> f64 {
        let row = &self.lp.ineq[0];
        row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.cost_offset
    }
}

pub(crate) fn check_groups(instance: &ProblemInstance) -> Result<(), SolveError> {
    let m = instance.num_groups;
    if m == 0 {
        return Err(SolveError::Structural("num_groups must be at least 1".into()));
    }
    if let Some(a) = instance.applicants.iter().find(|a| a.group >= m) {
        return Err(SolveError::Structural(format!(
            "applicant {} is in group {}, but there are {m} groups",
            a.id, a.group
        )));
    }
    if let Some(c) = instance.constraints.iter().find(|c| c.group >= m) {
        return Err(SolveError::Structural(format!(
            "constraint on group {}, but there are {m} groups",
            c.group
        )));
    }
    Ok(())
}

/// Per-variable utility and cost coefficients with their constants.
struct Rows {
    utility: Vec<f64>,
    cost: Vec<f64>,
    group_constant: Vec<f64>,
    cost_constant: f64,
}

fn assemble(instance: &ProblemInstance, rows: Rows, kinds: Vec<VarKind>, fixed: Vec<bool>) -> ScreeningProgram {
    let n = instance.len();
    let mut lp = LinearProgram::new(rows.utility.clone());
    for (b, &f) in lp.bounds.iter_mut().zip(&fixed) {
        if f {
            *b = (0.0, 0.0);
        }
    }
    lp.add_le(rows.cost, instance.budget - rows.cost_constant);
    for c in &instance.constraints {
        let coeffs: Vec<f64> = (0..n)
            .map(|i| {
                if instance.applicants[i].group == c.group {
                    rows.utility[i]
                } else {
                    0.0
                }
            })
            .collect();
        let rhs = c.target - rows.group_constant[c.group];
        match c.mode {
            ConstraintMode::AtLeast => lp.add_ge(coeffs, rhs),
            ConstraintMode::Exactly => lp.add_eq(coeffs, rhs),
        }
    }
    ScreeningProgram {
        lp,
        objective_offset: rows.group_constant.iter().sum(),
        cost_offset: rows.cost_constant,
        kinds,
    }
}

/// Screening LP for a fixed threshold policy: variables `p_i`, with
/// applicants lacking a posterior pinned to 0.
pub fn build_screening_lp(
    instance: &ProblemInstance,
    policy: &ThresholdPolicy,
) -> Result<ScreeningProgram, SolveError> {
    check_groups(instance)?;
    if policy.num_groups() != instance.num_groups || policy.boundary_probs.len() != instance.num_groups {
        return Err(SolveError::Structural(format!(
            "policy covers {} groups, instance has {}",
            policy.num_groups(),
            instance.num_groups
        )));
    }
    let n = instance.len();
    let mut rows = Rows {
        utility: Vec::with_capacity(n),
        cost: Vec::with_capacity(n),
        group_constant: vec![0.0; instance.num_groups],
        cost_constant: 0.0,
    };
    for a in &instance.applicants {
        let (t, alpha) = policy.group(a.group);
        let k = coefficients_at(a, t, alpha);
        rows.utility.push(k.qe - k.o * a.mu);
        rows.cost.push(a.screen_cost + a.alloc_cost * (k.q - k.o));
        rows.group_constant[a.group] += k.o * a.mu;
        rows.cost_constant += a.alloc_cost * k.o;
    }
    let fixed = instance.applicants.iter().map(|a| !a.is_screenable()).collect();
    Ok(assemble(instance, rows, vec![VarKind::Screen; n], fixed))
}

/// True when the joint formulation applies: two groups, and nobody in
/// group 1 can be screened.
pub fn joint_lp_applicable(instance: &ProblemInstance) -> bool {
    instance.num_groups == 2
        && instance
            .applicants
            .iter()
            .filter(|a| a.group == 1)
            .all(|a| !a.is_screenable())
}

/// Joint LP: screening variables for group 0 under `(t, alpha)` and direct
/// allocation variables for group 1.
pub fn build_joint_lp(instance: &ProblemInstance, group0_rule: (f64, f64)) -> Result<ScreeningProgram, SolveError> {
    check_groups(instance)?;
    if !joint_lp_applicable(instance) {
        return Err(SolveError::Structural(
            "joint LP needs exactly two groups with no screenable applicant in group 1".into(),
        ));
    }
    let (t, alpha) = group0_rule;
    let n = instance.len();
    let mut rows = Rows {
        utility: Vec::with_capacity(n),
        cost: Vec::with_capacity(n),
        group_constant: vec![0.0; 2],
        cost_constant: 0.0,
    };
    let mut kinds = Vec::with_capacity(n);
    let mut fixed = Vec::with_capacity(n);
    for a in &instance.applicants {
        if a.group == 1 {
            rows.utility.push(a.mu);
            rows.cost.push(a.alloc_cost);
            kinds.push(VarKind::Allocate);
            fixed.push(false);
        } else {
            let k = coefficients_at(a, t, alpha);
            rows.utility.push(k.qe - k.o * a.mu);
            rows.cost.push(a.screen_cost + a.alloc_cost * (k.q - k.o));
            rows.group_constant[0] += k.o * a.mu;
            rows.cost_constant += a.alloc_cost * k.o;
            kinds.push(VarKind::Screen);
            fixed.push(!a.is_screenable());
        }
    }
    Ok(assemble(instance, rows, kinds, fixed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::stylized_instance;
    use crate::linprog::{solve_lp, LpStatus};
    use crate::model::{Applicant, DiversityConstraint};

    fn targeted_only() -> ThresholdPolicy {
        ThresholdPolicy {
            thresholds: vec![2.5, f64::INFINITY],
            boundary_probs: vec![1.0, 0.0],
        }
    }

    #[test]
    fn stylized_budget_row() {
        let inst = stylized_instance();
        let prog = build_screening_lp(&inst, &targeted_only()).unwrap();
        assert_eq!(prog.cost_offset, 0.0);
        assert_eq!(prog.lp.ineq[0].rhs, 2000.0);
        assert_eq!(&prog.lp.ineq[0].coeffs[..8], &[250.0; 8]);
        assert_eq!(prog.lp.objective[0], 500.0);
        assert_eq!(prog.lp.bounds[8], (0.0, 0.0));
        let sol = solve_lp(&prog.lp).unwrap();
        assert_eq!(prog.expected_utility(&sol.x), 4000.0);
    }

    #[test]
    fn nothing_allocated_leaves_screening_cost() {
        let inst = stylized_instance();
        let prog = build_screening_lp(&inst, &ThresholdPolicy::allocate_none(2)).unwrap();
        assert!(prog.lp.objective.iter().all(|&c| c == 0.0));
        assert_eq!(prog.objective_offset, 0.0);
        assert_eq!(prog.lp.ineq[0].coeffs, vec![50.0; 13]);
        assert_eq!(prog.lp.bounds[8], (0.0, 0.0));
    }

    #[test]
    fn unscreenable_is_pinned() {
        let mut inst = stylized_instance();
        inst.applicants.truncate(9);
        inst.applicants.drain(..8);
        inst.applicants[0].group = 0;
        inst.num_groups = 1;
        let policy = ThresholdPolicy {
            thresholds: vec![1.0],
            boundary_probs: vec![0.0],
        };
        let prog = build_screening_lp(&inst, &policy).unwrap();
        assert_eq!(prog.lp.bounds, vec![(0.0, 0.0)]);
        assert_eq!(prog.objective_offset, 750.0);
        assert_eq!(prog.cost_offset, 400.0);
    }

    #[test]
    fn constraint_rows() {
        let inst = stylized_instance().with_constraints(vec![
            DiversityConstraint::at_least(0, 1000.0),
            DiversityConstraint::exactly(1, 750.0),
        ]);
        let policy = ThresholdPolicy {
            thresholds: vec![2.5, 1.875],
            boundary_probs: vec![1.0, 0.2],
        };
        let prog = build_screening_lp(&inst, &policy).unwrap();
        // >= is stored negated.
        assert_eq!(prog.lp.ineq[1].coeffs[0], -500.0);
        assert_eq!(prog.lp.ineq[1].rhs, -1000.0);
        // Group 1 is all constant: 5 * 0.2 * 750.
        assert_eq!(prog.lp.eq[0].rhs, 0.0);
        assert!(prog.lp.eq[0].coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn bad_group_is_structural() {
        let mut inst = stylized_instance();
        inst.constraints.push(DiversityConstraint::at_least(5, 0.0));
        assert!(matches!(
            build_screening_lp(&inst, &ThresholdPolicy::allocate_none(2)),
            Err(SolveError::Structural(_))
        ));
        assert!(matches!(
            build_screening_lp(&stylized_instance(), &ThresholdPolicy::allocate_none(3)),
            Err(SolveError::Structural(_))
        ));
    }

    #[test]
    fn joint_lp_on_stylized() {
        let inst = stylized_instance();
        let prog = build_joint_lp(&inst, (2.5, 1.0)).unwrap();
        assert_eq!(prog.kinds[8], VarKind::Allocate);
        assert_eq!(prog.lp.objective[8], 750.0);
        assert_eq!(prog.lp.ineq[0].coeffs[8], 400.0);
        let sol = solve_lp(&prog.lp).unwrap();
        assert_eq!(prog.expected_utility(&sol.x), 4000.0);
    }

    #[test]
    fn joint_lp_infeasible_target() {
        let inst = stylized_instance().with_constraints(vec![DiversityConstraint::at_least(1, 5000.0)]);
        let prog = build_joint_lp(&inst, (2.5, 1.0)).unwrap();
        assert_eq!(solve_lp(&prog.lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn joint_lp_precondition() {
        let mut inst = stylized_instance();
        inst.applicants[9].posterior = inst.applicants[0].posterior.clone();
        inst.applicants[9].mu = 500.0;
        assert!(matches!(
            build_joint_lp(&inst, (1.0, 0.0)),
            Err(SolveError::Structural(_))
        ));
        let one_each = ProblemInstance {
            applicants: vec![
                stylized_instance().applicants[0].clone(),
                Applicant {
                    id: 1,
                    ..stylized_instance().applicants[8].clone()
                },
            ],
            ..stylized_instance()
        };
        let prog = build_joint_lp(&one_each, (1.0, 0.0)).unwrap();
        assert_eq!(prog.lp.objective[1], 750.0);
    }
}
