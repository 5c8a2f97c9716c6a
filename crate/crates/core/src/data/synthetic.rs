//! Synthetic lending pools with beta-distributed repayment probabilities.

use super::beta::{beta_shape, discretize_beta};
use super::DataError;
use crate::model::{Applicant, DiscreteDistribution, ProblemInstance, UtilitySpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub targeted_mean: f64,
    pub untargeted_mean: f64,
    pub prior_count: f64,
    /// Count of the post-screening beta; smaller means screening reveals more.
    pub post_count: f64,
    pub screen_cost: f64,
    pub alloc_cost: f64,
    pub budget: f64,
    pub bins: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Regime::HiValLoCost.config(0)
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        for (name, m) in [
            ("targeted_mean", self.targeted_mean),
            ("untargeted_mean", self.untargeted_mean),
        ] {
            if !(m > 0.0 && m < 1.0) {
                return Err(DataError::Domain(format!("{name} must be in (0, 1), got {m}")));
            }
        }
        for (name, c) in [("prior_count", self.prior_count), ("post_count", self.post_count)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(DataError::Domain(format!("{name} must be positive, got {c}")));
            }
        }
        if self.bins < 2 {
            return Err(DataError::Domain(format!("bins must be at least 2, got {}", self.bins)));
        }
        if !(self.alloc_cost > 0.0 && self.screen_cost >= 0.0 && self.budget >= 0.0) {
            return Err(DataError::Domain(
                "costs and budget must be non-negative, allocation cost positive".into(),
            ));
        }
        Ok(())
    }
}

/// The four value-of-information by screening-cost settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    HiValLoCost,
    HiValHiCost,
    LoValLoCost,
    LoValHiCost,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::HiValLoCost,
        Regime::HiValHiCost,
        Regime::LoValLoCost,
        Regime::LoValHiCost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::HiValLoCost => "hi-val-lo-cost",
            Regime::HiValHiCost => "hi-val-hi-cost",
            Regime::LoValLoCost => "lo-val-lo-cost",
            Regime::LoValHiCost => "lo-val-hi-cost",
        }
    }

    pub fn config(self, seed: u64) -> SyntheticConfig {
        let (post_count, screen_cost) = match self {
            Regime::HiValLoCost => (5.0, 25.0),
            Regime::HiValHiCost => (5.0, 100.0),
            Regime::LoValLoCost => (25.0, 25.0),
            Regime::LoValHiCost => (25.0, 100.0),
        };
        SyntheticConfig {
            n: 500,
            targeted_mean: 0.5,
            untargeted_mean: 0.70,
            prior_count: 50.0,
            post_count,
            screen_cost,
            alloc_cost: 1000.0,
            budget: 50_000.0,
            bins: 101,
            seed,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| DataError::Domain(format!("unknown regime {s:?}")))
    }
}

/// Reweights `dist` by `exp(theta * v)` so its mean is `target`, keeping the
/// support. `target` must lie strictly between the extreme support values.
pub fn tilt_to_mean(dist: &DiscreteDistribution, target: f64) -> Result<DiscreteDistribution, DataError> {
    let lo = dist.support.first().copied().unwrap_or(f64::NAN);
    let hi = dist.support.last().copied().unwrap_or(f64::NAN);
    if !(target > lo && target < hi) {
        return Err(DataError::Domain(format!("mean {target} is outside ({lo}, {hi})")));
    }
    let scale = (hi - lo).max(f64::MIN_POSITIVE);
    let shifted: Vec<f64> = dist.support.iter().map(|v| (v - target) / scale).collect();
    let weights = |theta: f64| -> Vec<f64> {
        let top = shifted
            .iter()
            .zip(&dist.probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, _)| theta * s)
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = shifted
            .iter()
            .zip(&dist.probs)
            .map(|(s, &p)| p * (theta * s - top).exp())
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    };
    let excess = |theta: f64| -> f64 { weights(theta).iter().zip(&shifted).map(|(w, s)| w * s).sum() };

    let (mut a, mut b) = (-1.0, 1.0);
    while excess(a) > 0.0 {
        a *= 2.0;
    }
    while excess(b) < 0.0 {
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if excess(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (ea, eb) = (excess(a), excess(b));
    let theta = if ea.abs() <= eb.abs() { a } else { b };
    Ok(DiscreteDistribution {
        support: dist.support.clone(),
        probs: weights(theta),
    })
}

/// Two equal halves: group 0 (targeted) applicants can be screened, group 1
/// applicants cannot. Every targeted posterior shares the same support, the
/// utilities of the bin midpoints, and is tilted so its mean equals `mu`.
pub fn gen_synthetic(config: &SyntheticConfig, utility: UtilitySpec) -> Result<ProblemInstance, DataError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draw = |mean: f64| -> Result<Beta<f64>, DataError> {
        let (a, b) = beta_shape(mean, config.prior_count)?;
        Beta::new(a, b).map_err(|e| DataError::Domain(e.to_string()))
    };
    let targeted_prior = draw(config.targeted_mean)?;
    let other_prior = draw(config.untargeted_mean)?;
    let n_targeted = config.n / 2;
    let mut applicants = Vec::with_capacity(config.n);
    for id in 0..config.n {
        let targeted = id < n_targeted;
        let x = if targeted {
            targeted_prior.sample(&mut rng)
        } else {
            other_prior.sample(&mut rng)
        };
        let mu = utility.map(x);
        let posterior = if targeted {
            let base = discretize_beta(x, config.post_count, config.bins)?;
            let mapped = DiscreteDistribution {
                support: base.support.iter().map(|&v| utility.map(v)).collect(),
                probs: base.probs,
            };
            Some(tilt_to_mean(&mapped, mu)?)
        } else {
            None
        };
        applicants.push(Applicant {
            id: id as u64,
            group: if targeted { 0 } else { 1 },
            mu,
            screen_cost: config.screen_cost,
            alloc_cost: config.alloc_cost,
            posterior,
        });
    }
    Ok(ProblemInstance {
        budget: config.budget,
        num_groups: 2,
        utility,
        applicants,
        constraints: Vec::new(),
    })
}
