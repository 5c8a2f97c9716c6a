//! Domain types: applicants, post-screening distributions, policies, and the
//! problem instance that ties them together.
//!
//! Thresholds are always cost-normalized: an applicant with post-screening
//! estimate `u` and allocation cost `c` is compared as `u / c` against the
//! threshold of their group.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Tolerance on `sum(probs) == 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Tolerance on `E[posterior] == mu`.
pub const TOWER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("repayment probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid utility spec: repay value {repay} must exceed default value {default}")]
    InvalidUtility { repay: f64, default: f64 },
}

/// Finite-support law of a post-screening estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteDistribution {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Builds a distribution, rejecting anything [`Self::violations`] flags.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self, ModelError> {
        let dist = Self { support, probs };
        match dist.violations().into_iter().next() {
            None => Ok(dist),
            Some(v) => Err(ModelError::InvalidDistribution(v)),
        }
    }

    pub fn point_mass(value: f64) -> Self {
        Self {
            support: vec![value],
            probs: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(v, p)| p * (v - m) * (v - m)).sum()
    }

    /// Value at cumulative probability `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (v, p) in self.iter() {
            acc += p;
            if u < acc {
                return v;
            }
        }
        *self.support.last().expect("non-empty support")
    }

    /// Invariant violations, empty when the distribution is well formed.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.support.is_empty() {
            out.push("support is empty".to_string());
            return out;
        }
        if self.support.len() != self.probs.len() {
            out.push(format!(
                "support has {} points but probs has {}",
                self.support.len(),
                self.probs.len()
            ));
            return out;
        }
        if self.support.iter().chain(&self.probs).any(|v| !v.is_finite()) {
            out.push("non-finite support value or probability".to_string());
        }
        if self.probs.iter().any(|&p| p < 0.0) {
            out.push("negative probability".to_string());
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            out.push(format!("probabilities sum to {total}, not 1"));
        }
        if self.support.windows(2).any(|w| w[0] >= w[1]) {
            out.push("support is not strictly increasing".to_string());
        }
        out
    }
}

/// `a` is the utility of a repaid loan, `b` of a default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySpec {
    pub repay_value: f64,
    pub default_value: f64,
}

impl UtilitySpec {
    pub const LENDING: UtilitySpec = UtilitySpec {
        repay_value: 1000.0,
        default_value: -200.0,
    };

    pub fn new(repay_value: f64, default_value: f64) -> Result<Self, ModelError> {
        if repay_value.is_finite() && default_value.is_finite() && repay_value > default_value {
            Ok(Self {
                repay_value,
                default_value,
            })
        } else {
            Err(ModelError::InvalidUtility {
                repay: repay_value,
                default: default_value,
            })
        }
    }

    /// Expected utility of lending to someone who repays with probability `x`.
    pub fn utility_from_repay_prob(&self, x: f64) -> Result<f64, ModelError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(ModelError::ProbabilityOutOfRange(x));
        }
        Ok(self.map(x))
    }

    /// Unchecked affine map `x -> a x + b (1 - x)`.
    pub(crate) fn map(&self, x: f64) -> f64 {
        self.repay_value * x + self.default_value * (1.0 - x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Applicant {
    pub id: u64,
    pub group: usize,
    /// Pre-screening expected utility.
    pub mu: f64,
    pub screen_cost: f64,
    pub alloc_cost: f64,
    /// `None` when screening reveals nothing.
    pub posterior: Option<DiscreteDistribution>,
}

impl Applicant {
    pub fn is_screenable(&self) -> bool {
        self.posterior.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    AtLeast,
    Exactly,
}

/// Floor (or exact target) on the expected utility allocated to one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiversityConstraint {
    pub group: usize,
    pub target: f64,
    pub mode: ConstraintMode,
}

impl DiversityConstraint {
    pub fn at_least(group: usize, target: f64) -> Self {
        Self {
            group,
            target,
            mode: ConstraintMode::AtLeast,
        }
    }

    pub fn exactly(group: usize, target: f64) -> Self {
        Self {
            group,
            target,
            mode: ConstraintMode::Exactly,
        }
    }

    /// Whether a group utility satisfies the constraint within `tol`.
    pub fn is_met(&self, group_utility: f64, tol: f64) -> bool {
        match self.mode {
            ConstraintMode::AtLeast => group_utility >= self.target - tol,
            ConstraintMode::Exactly => (group_utility - self.target).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub budget: f64,
    pub num_groups: usize,
    pub utility: UtilitySpec,
    pub applicants: Vec<Applicant>,
    #[serde(default)]
    pub constraints: Vec<DiversityConstraint>,
}

impl ProblemInstance {
    pub fn len(&self) -> usize {
        self.applicants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.applicants.is_empty()
    }

    /// Indices of the applicants belonging to `group`.
    pub fn group_members(&self, group: usize) -> Vec<usize> {
        self.applicants
            .iter()
            .enumerate()
            .filter(|(_, a)| a.group == group)
            .map(|(i, _)| i)
            .collect()
    }

    /// Same pool and budget with the constraint list replaced.
    pub fn with_constraints(&self, constraints: Vec<DiversityConstraint>) -> Self {
        Self {
            constraints,
            ..self.clone()
        }
    }

    /// Frontier form: group 0 pinned to `lambda`, every other group floored at 0.
    pub fn with_targeted_exactly(&self, lambda: f64) -> Self {
        let mut constraints = vec![DiversityConstraint::exactly(0, lambda)];
        constraints.extend((1..self.num_groups).map(|g| DiversityConstraint::at_least(g, 0.0)));
        self.with_constraints(constraints)
    }
}

/// Per-group `(threshold, boundary probability)` allocation rule.
///
/// Thresholds may be `f64::NEG_INFINITY` (allocate everyone) or
/// `f64::INFINITY` (allocate no one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdPolicy {
    #[serde(with = "extended_reals")]
    pub thresholds: Vec<f64>,
    pub boundary_probs: Vec<f64>,
}

impl ThresholdPolicy {
    /// Allocates nothing in any of `num_groups` groups.
    pub fn allocate_none(num_groups: usize) -> Self {
        Self {
            thresholds: vec![f64::INFINITY; num_groups],
            boundary_probs: vec![0.0; num_groups],
        }
    }

    pub fn num_groups(&self) -> usize {
        self.thresholds.len()
    }

    pub fn group(&self, g: usize) -> (f64, f64) {
        (self.thresholds[g], self.boundary_probs[g])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreeningPolicy {
    pub probs: Vec<f64>,
}

impl ScreeningPolicy {
    pub fn none(n: usize) -> Self {
        Self { probs: vec![0.0; n] }
    }

    /// Screens every applicant that has a posterior.
    pub fn all_screenable(instance: &ProblemInstance) -> Self {
        Self {
            probs: instance
                .applicants
                .iter()
                .map(|a| if a.is_screenable() { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub expected_utility: f64,
    pub expected_cost: f64,
    pub group_utilities: Vec<f64>,
    pub screening: ScreeningPolicy,
    pub allocation: ThresholdPolicy,
}

impl SolveResult {
    pub fn infeasible(instance: &ProblemInstance) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            expected_utility: 0.0,
            expected_cost: 0.0,
            group_utilities: vec![0.0; instance.num_groups],
            screening: ScreeningPolicy::none(instance.len()),
            allocation: ThresholdPolicy::allocate_none(instance.num_groups),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// A single rule broken by an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Offending applicant, if the rule is per-applicant.
    pub applicant: Option<u64>,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.applicant {
            Some(id) => write!(f, "applicant {id}: {} ({})", self.rule, self.detail),
            None => write!(f, "{} ({})", self.rule, self.detail),
        }
    }
}

pub const RULE_TOWER: &str = "posterior mean must equal mu (iterated expectations)";
pub const RULE_DISTRIBUTION: &str = "posterior must be a valid discrete distribution";
pub const RULE_ALLOC_COST: &str = "alloc_cost must be positive and finite";
pub const RULE_SCREEN_COST: &str = "screen_cost must be non-negative and finite";
pub const RULE_MU: &str = "mu must be finite";
pub const RULE_GROUP: &str = "group index must be below num_groups";
pub const RULE_BUDGET: &str = "budget must be non-negative and finite";
pub const RULE_NUM_GROUPS: &str = "num_groups must be at least 1";
pub const RULE_UTILITY: &str = "repay_value must exceed default_value";
pub const RULE_CONSTRAINT: &str = "constraint must reference a valid group with a finite target";
pub const RULE_CONSTRAINT_COUNT: &str = "at most one constraint per group";

/// Checks every structural invariant of an instance.
pub fn validate_instance(instance: &ProblemInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let global = |rule, detail: String| Violation {
        applicant: None,
        rule,
        detail,
    };

    if instance.num_groups == 0 {
        out.push(global(RULE_NUM_GROUPS, "got 0".into()));
    }
    if !(instance.budget.is_finite() && instance.budget >= 0.0) {
        out.push(global(RULE_BUDGET, format!("got {}", instance.budget)));
    }
    let u = instance.utility;
    if UtilitySpec::new(u.repay_value, u.default_value).is_err() {
        out.push(global(
            RULE_UTILITY,
            format!("repay {} default {}", u.repay_value, u.default_value),
        ));
    }

    for a in &instance.applicants {
        let mut push = |rule, detail: String| {
            out.push(Violation {
                applicant: Some(a.id),
                rule,
                detail,
            })
        };
        if a.group >= instance.num_groups {
            push(
                RULE_GROUP,
                format!("group {} with {} groups", a.group, instance.num_groups),
            );
        }
        if !a.mu.is_finite() {
            push(RULE_MU, format!("got {}", a.mu));
        }
        if !(a.alloc_cost.is_finite() && a.alloc_cost > 0.0) {
            push(RULE_ALLOC_COST, format!("got {}", a.alloc_cost));
        }
        if !(a.screen_cost.is_finite() && a.screen_cost >= 0.0) {
            push(RULE_SCREEN_COST, format!("got {}", a.screen_cost));
        }
        if let Some(post) = &a.posterior {
            let problems = post.violations();
            if problems.is_empty() {
                let mean = post.mean();
                if (mean - a.mu).abs() > TOWER_TOL {
                    push(RULE_TOWER, format!("posterior mean {mean} vs mu {}", a.mu));
                }
            } else {
                for p in problems {
                    push(RULE_DISTRIBUTION, p);
                }
            }
        }
    }

    if instance.constraints.len() > instance.num_groups {
        out.push(global(
            RULE_CONSTRAINT_COUNT,
            format!(
                "{} constraints for {} groups",
                instance.constraints.len(),
                instance.num_groups
            ),
        ));
    }
    let mut seen = vec![false; instance.num_groups];
    for c in &instance.constraints {
        if c.group >= instance.num_groups || !c.target.is_finite() {
            out.push(global(
                RULE_CONSTRAINT,
                format!("group {} target {}", c.group, c.target),
            ));
        } else if std::mem::replace(&mut seen[c.group], true) {
            out.push(global(RULE_CONSTRAINT_COUNT, format!("group {} repeated", c.group)));
        }
    }
    out
}

/// Serde adapter for vectors of extended reals: finite values are JSON
/// numbers, infinities are the strings `"inf"` and `"-inf"`.
pub mod extended_reals {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Named(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<Repr> = values
            .iter()
            .map(|&v| {
                if v == f64::INFINITY {
                    Repr::Named("inf".into())
                } else if v == f64::NEG_INFINITY {
                    Repr::Named("-inf".into())
                } else {
                    Repr::Finite(v)
                }
            })
            .collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Repr::Finite(v) => Ok(v),
                Repr::Named(s) => match s.as_str() {
                    "inf" | "+inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(D::Error::custom(format!("bad threshold {other:?}"))),
                },
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::stylized_instance;
    use proptest::prelude::*;

    #[test]
    fn stylized_instance_is_valid() {
        let inst = stylized_instance();
        assert_eq!(inst.applicants.len(), 13);
        assert_eq!(inst.budget, 2000.0);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn tower_violation_names_applicant() {
        let mut inst = stylized_instance();
        inst.applicants[0].posterior = Some(DiscreteDistribution::new(vec![200.0, 1000.0], vec![0.5, 0.5]).unwrap());
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, RULE_TOWER);
        assert_eq!(v[0].applicant, Some(inst.applicants[0].id));
        assert!(v[0].to_string().contains("iterated expectations"));
    }

    #[test]
    fn probs_not_summing_to_one() {
        let d = DiscreteDistribution {
            support: vec![0.0, 1.0],
            probs: vec![0.5, 0.4],
        };
        assert_eq!(d.violations().len(), 1);
        assert!(DiscreteDistribution::new(d.support.clone(), d.probs.clone()).is_err());

        let mut inst = stylized_instance();
        inst.applicants[0].posterior = Some(d);
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, RULE_DISTRIBUTION);
    }

    #[test]
    fn unsorted_support_rejected() {
        assert!(DiscreteDistribution::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn structural_violations() {
        let mut inst = stylized_instance();
        inst.applicants[3].group = 7;
        inst.applicants[4].alloc_cost = 0.0;
        inst.budget = -1.0;
        inst.constraints = vec![DiversityConstraint::at_least(5, 1.0)];
        let rules: Vec<_> = validate_instance(&inst).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&RULE_GROUP));
        assert!(rules.contains(&RULE_ALLOC_COST));
        assert!(rules.contains(&RULE_BUDGET));
        assert!(rules.contains(&RULE_CONSTRAINT));
    }

    #[test]
    fn lending_utility_values() {
        let u = UtilitySpec::LENDING;
        assert_eq!(u.utility_from_repay_prob(1.0).unwrap(), 1000.0);
        assert_eq!(u.utility_from_repay_prob(0.0).unwrap(), -200.0);
        assert_eq!(u.utility_from_repay_prob(0.5).unwrap(), 400.0);
        assert!(u.utility_from_repay_prob(1.5).is_err());
        assert!(u.utility_from_repay_prob(-0.1).is_err());
        assert!(UtilitySpec::new(1.0, 2.0).is_err());
    }

    #[test]
    fn instance_json_rejects_unknown_fields() {
        let inst = stylized_instance();
        let mut v = serde_json::to_value(&inst).unwrap();
        let back: ProblemInstance = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(back, inst);
        v["applicants"][0]["colour"] = serde_json::json!("red");
        assert!(serde_json::from_value::<ProblemInstance>(v).is_err());
    }

    #[test]
    fn thresholds_serialize_infinities() {
        let p = ThresholdPolicy {
            thresholds: vec![f64::NEG_INFINITY, 1.5, f64::INFINITY],
            boundary_probs: vec![0.0, 0.5, 1.0],
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"thresholds":["-inf",1.5,"inf"],"boundary_probs":[0.0,0.5,1.0]}"#);
        let back: ThresholdPolicy = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ThresholdPolicy>(r#"{"thresholds":["nope"],"boundary_probs":[0]}"#).is_err());
    }

    proptest! {
        #[test]
        fn utility_map_is_affine(lambda in 0.0f64..=1.0, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            let u = UtilitySpec::LENDING;
            let mixed = u.utility_from_repay_prob(lambda * x + (1.0 - lambda) * y).unwrap();
            let split = lambda * u.utility_from_repay_prob(x).unwrap()
                + (1.0 - lambda) * u.utility_from_repay_prob(y).unwrap();
            prop_assert!((mixed - split).abs() <= 1e-9);
        }
    }
}
