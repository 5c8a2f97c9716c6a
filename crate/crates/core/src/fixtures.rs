//! Ready-made instances: the 13-applicant lending example and seeded random
//! tiny instances for cross-checking the solver against brute force.

use crate::model::{Applicant, DiscreteDistribution, ProblemInstance, UtilitySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eight applicants without credit history (group 0, screenable: worth 0 or
/// 1000 with equal odds) and five with full history (group 1, worth 750),
/// loans cost 400, screening costs 50, budget 2000.
pub fn stylized_instance() -> ProblemInstance {
    let mut applicants = Vec::with_capacity(13);
    for id in 0..8 {
        applicants.push(Applicant {
            id,
            group: 0,
            mu: 500.0,
            screen_cost: 50.0,
            alloc_cost: 400.0,
            posterior: Some(DiscreteDistribution {
                support: vec![0.0, 1000.0],
                probs: vec![0.5, 0.5],
            }),
        });
    }
    for id in 8..13 {
        applicants.push(Applicant {
            id,
            group: 1,
            mu: 750.0,
            screen_cost: 50.0,
            alloc_cost: 400.0,
            posterior: None,
        });
    }
    ProblemInstance {
        budget: 2000.0,
        num_groups: 2,
        utility: UtilitySpec {
            repay_value: 1000.0,
            default_value: 0.0,
        },
        applicants,
        constraints: Vec::new(),
    }
}

/// Shape knobs for [`random_tiny_instance`].
#[derive(Debug, Clone, Copy)]
pub struct TinyShape {
    pub max_applicants: usize,
    pub max_screenable: usize,
    pub max_support: usize,
    pub num_groups: usize,
    /// When set, group 1 never has posteriors.
    pub pointmass_second_group: bool,
    /// Costs vary per applicant instead of being shared.
    pub varied_costs: bool,
}

impl Default for TinyShape {
    fn default() -> Self {
        Self {
            max_applicants: 6,
            max_screenable: 4,
            max_support: 3,
            num_groups: 2,
            pointmass_second_group: false,
            varied_costs: true,
        }
    }
}

/// Seeded random instance with small integer-valued supports so every
/// expectation is exact in binary floating point.
pub fn random_tiny_instance(seed: u64, shape: TinyShape) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=shape.max_applicants);
    let mut screenable_left = shape.max_screenable;
    let shared_alloc = rng.random_range(2..=8) as f64 * 50.0;
    let shared_screen = rng.random_range(1..=4) as f64 * 10.0;
    let mut applicants = Vec::with_capacity(n);
    let mut total_alloc = 0.0;
    for id in 0..n {
        let group = if id < shape.num_groups {
            id
        } else {
            rng.random_range(0..shape.num_groups)
        };
        let (alloc_cost, screen_cost) = if shape.varied_costs {
            (
                rng.random_range(2..=8) as f64 * 50.0,
                rng.random_range(1..=4) as f64 * 10.0,
            )
        } else {
            (shared_alloc, shared_screen)
        };
        total_alloc += alloc_cost;
        let may_screen = !(shape.pointmass_second_group && group == 1);
        let screened = may_screen && screenable_left > 0 && rng.random_bool(0.75);
        let (mu, posterior) = if screened {
            screenable_left -= 1;
            let k = rng.random_range(2..=shape.max_support.max(2));
            let mut support: Vec<f64> = Vec::with_capacity(k);
            while support.len() < k {
                let v = rng.random_range(-4..=20) as f64 * 50.0;
                if !support.contains(&v) {
                    support.push(v);
                }
            }
            support.sort_by(f64::total_cmp);
            // Dyadic weights keep the mean exact.
            let mut weights: Vec<u32> = (0..k).map(|_| rng.random_range(1..=4)).collect();
            let total: u32 = weights.iter().sum();
            let denom = total.next_power_of_two();
            weights[k - 1] += denom - total;
            let probs: Vec<f64> = weights.iter().map(|&w| w as f64 / denom as f64).collect();
            let dist = DiscreteDistribution { support, probs };
            (dist.mean(), Some(dist))
        } else {
            (rng.random_range(-4..=20) as f64 * 50.0, None)
        };
        applicants.push(Applicant {
            id: id as u64,
            group,
            mu,
            screen_cost,
            alloc_cost,
            posterior,
        });
    }
    let budget = (total_alloc * rng.random_range(0.2..0.9) / 10.0).round() * 10.0;
    ProblemInstance {
        budget,
        num_groups: shape.num_groups,
        utility: UtilitySpec::LENDING,
        applicants,
        constraints: Vec::new(),
    }
}
