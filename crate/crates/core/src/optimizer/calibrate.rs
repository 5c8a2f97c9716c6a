//! Matching a utility or cost target with a single threshold rule.

use super::candidates::normalized_points;
use super::SolveError;
use crate::coefficients::coefficients_at;
use crate::model::Applicant;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Expected utility of the funded applicants.
    Utility,
    /// Expected allocation cost (screening cost excluded).
    Cost,
}

/// Value of the rule `(t, alpha)` over `pool`, given screening probabilities.
pub fn pool_value(pool: &[Applicant], screening: &[f64], t: f64, alpha: f64, kind: TargetKind) -> f64 {
    pool.iter()
        .zip(screening)
        .map(|(a, &p)| {
            let k = coefficients_at(a, t, alpha);
            match kind {
                TargetKind::Utility => k.qe * p + k.o * a.mu * (1.0 - p),
                TargetKind::Cost => a.alloc_cost * (k.q * p + k.o * (1.0 - p)),
            }
        })
        .sum()
}

/// Finds the highest candidate threshold whose full-boundary value reaches
/// `target`, then the boundary probability that hits it exactly.
pub fn calibrate_threshold(
    pool: &[Applicant],
    screening: &[f64],
    target: f64,
    kind: TargetKind,
) -> Result<(f64, f64), SolveError> {
    if screening.len() != pool.len() {
        return Err(SolveError::Structural(format!(
            "screening has {} entries for a pool of {}",
            screening.len(),
            pool.len()
        )));
    }
    let max = pool_value(pool, screening, f64::NEG_INFINITY, 0.0, kind);
    let unachievable = SolveError::Unachievable { target, max };
    if !target.is_finite() || target < 0.0 {
        return Err(unachievable);
    }
    if target == 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let slack = 1e-12 * target.abs().max(1.0);
    let mut ts = normalized_points(pool);
    ts.reverse();
    ts.push(f64::NEG_INFINITY);
    for t in ts {
        let v1 = pool_value(pool, screening, t, 1.0, kind);
        if v1 < target - slack {
            continue;
        }
        if t == f64::NEG_INFINITY {
            return Ok((t, 0.0));
        }
        let v0 = pool_value(pool, screening, t, 0.0, kind);
        let alpha = if v1 > v0 {
            ((target - v0) / (v1 - v0)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        return Ok((t, alpha));
    }
    Err(unachievable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::stylized_instance;

    #[test]
    fn single_unscreened_cost() {
        let pool = vec![stylized_instance().applicants[8].clone()];
        assert_eq!(
            calibrate_threshold(&pool, &[0.0], 200.0, TargetKind::Cost).unwrap(),
            (1.875, 0.5)
        );
        assert_eq!(
            calibrate_threshold(&pool, &[0.0], 0.0, TargetKind::Cost).unwrap(),
            (f64::INFINITY, 0.0)
        );
        assert_eq!(
            calibrate_threshold(&pool, &[0.0], 400.0, TargetKind::Cost).unwrap(),
            (1.875, 1.0)
        );
    }

    #[test]
    fn screened_targeted_utility() {
        let pool: Vec<_> = stylized_instance().applicants[..8].to_vec();
        let p = vec![1.0; 8];
        // Half the screened mass sits at 1000, so 2000 needs half of that atom.
        let (t, alpha) = calibrate_threshold(&pool, &p, 2000.0, TargetKind::Utility).unwrap();
        assert_eq!((t, alpha), (2.5, 0.5));
        assert_eq!(pool_value(&pool, &p, t, alpha, TargetKind::Utility), 2000.0);
    }

    #[test]
    fn out_of_range() {
        let pool = vec![stylized_instance().applicants[8].clone()];
        assert!(matches!(
            calibrate_threshold(&pool, &[0.0], 401.0, TargetKind::Cost),
            Err(SolveError::Unachievable { .. })
        ));
        assert!(matches!(
            calibrate_threshold(&pool, &[0.0], -1.0, TargetKind::Utility),
            Err(SolveError::Unachievable { .. })
        ));
    }
}
