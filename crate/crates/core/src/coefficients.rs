//! Per-applicant LP coefficients induced by a fixed threshold policy.

use crate::model::{Applicant, ThresholdPolicy};

/// Where a cost-normalized value falls relative to a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    At,
    Below,
}

/// Compares `value` against `threshold`, treating values within
/// `1e-12 * max(1, |threshold|)` as sitting on it.
pub fn side_of(value: f64, threshold: f64) -> Side {
    if threshold == f64::INFINITY {
        return Side::Below;
    }
    if threshold == f64::NEG_INFINITY {
        return Side::Above;
    }
    let tol = 1e-12 * threshold.abs().max(1.0);
    if value > threshold + tol {
        Side::Above
    } else if value < threshold - tol {
        Side::Below
    } else {
        Side::At
    }
}

/// Allocation probability of a threshold rule at `value`.
pub fn allocation_prob(value: f64, threshold: f64, alpha: f64) -> f64 {
    match side_of(value, threshold) {
        Side::Above => 1.0,
        Side::At => alpha,
        Side::Below => 0.0,
    }
}

/// `q`: probability a screened applicant is allocated. `qe`: the matching
/// expected utility `E[D * A]`. `o`: allocation probability if unscreened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub q: f64,
    pub qe: f64,
    pub o: f64,
}

pub fn derive_coefficients(applicant: &Applicant, policy: &ThresholdPolicy) -> Coefficients {
    let (t, alpha) = policy.group(applicant.group);
    coefficients_at(applicant, t, alpha)
}

/// Coefficients for a single `(threshold, alpha)` pair, ignoring the group.
pub fn coefficients_at(applicant: &Applicant, threshold: f64, alpha: f64) -> Coefficients {
    let c = applicant.alloc_cost;
    let o = allocation_prob(applicant.mu / c, threshold, alpha);
    match &applicant.posterior {
        None => Coefficients {
            q: o,
            qe: o * applicant.mu,
            o,
        },
        Some(post) => {
            let (mut q, mut qe) = (0.0, 0.0);
            for (v, p) in post.iter() {
                let a = allocation_prob(v / c, threshold, alpha);
                q += a * p;
                qe += a * p * v;
            }
            Coefficients { q: q.min(1.0), qe, o }
        }
    }
}
