//! Finite threshold candidate sets.

use super::SweepConfig;
use crate::model::{Applicant, ProblemInstance};

/// Sorted cost-normalized `mu` and posterior support values of `pool`, with
/// values closer than the threshold comparison tolerance merged.
pub fn normalized_points<'a>(pool: impl IntoIterator<Item = &'a Applicant>) -> Vec<f64> {
    let mut points = Vec::new();
    for a in pool {
        points.push(a.mu / a.alloc_cost);
        if let Some(post) = &a.posterior {
            points.extend(post.support.iter().map(|v| v / a.alloc_cost));
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * a.abs().max(1.0));
    points
}

/// `{-inf, +inf}` together with every cost-normalized value that can occur in
/// `group`, sorted ascending.
pub fn threshold_candidates(instance: &ProblemInstance, group: usize) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY];
    out.extend(normalized_points(
        instance.applicants.iter().filter(|a| a.group == group),
    ));
    out.push(f64::INFINITY);
    out
}

/// `(threshold, alpha)` pairs swept for `group`, sorted. Infinite thresholds
/// ignore alpha, so they appear once with alpha 0.
pub fn candidate_pairs(instance: &ProblemInstance, group: usize, config: &SweepConfig) -> Vec<(f64, f64)> {
    let ts = match config.threshold_candidates.as_ref().and_then(|c| c.get(group)) {
        Some(ts) => ts.clone(),
        None => threshold_candidates(instance, group),
    };
    let mut pairs = Vec::with_capacity(ts.len() * config.alpha_grid.len());
    for t in ts {
        if t.is_infinite() {
            pairs.push((t, 0.0));
        } else {
            pairs.extend(config.alpha_grid.iter().map(|&a| (t, a)));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::stylized_instance;

    #[test]
    fn stylized_groups() {
        let inst = stylized_instance();
        assert_eq!(
            threshold_candidates(&inst, 0),
            vec![f64::NEG_INFINITY, 0.0, 1.25, 2.5, f64::INFINITY]
        );
        assert_eq!(
            threshold_candidates(&inst, 1),
            vec![f64::NEG_INFINITY, 1.875, f64::INFINITY]
        );
        assert_eq!(threshold_candidates(&inst, 4), vec![f64::NEG_INFINITY, f64::INFINITY]);
    }

    #[test]
    fn pairs_skip_alpha_at_infinity() {
        let inst = stylized_instance();
        let config = SweepConfig {
            alpha_grid: vec![0.0, 0.5, 1.0],
            ..SweepConfig::default()
        };
        let pairs = candidate_pairs(&inst, 1, &config);
        assert_eq!(pairs.len(), 5);
        assert_eq!(pairs[0], (f64::NEG_INFINITY, 0.0));
        assert_eq!(pairs[2], (1.875, 0.5));
        assert_eq!(pairs[4], (f64::INFINITY, 0.0));
    }

    #[test]
    fn override_takes_precedence() {
        let inst = stylized_instance();
        let config = SweepConfig {
            alpha_grid: vec![1.0],
            threshold_candidates: Some(vec![vec![2.5], vec![f64::INFINITY]]),
            ..SweepConfig::default()
        };
        assert_eq!(candidate_pairs(&inst, 0, &config), vec![(2.5, 1.0)]);
        assert_eq!(candidate_pairs(&inst, 1, &config), vec![(f64::INFINITY, 0.0)]);
    }
}
