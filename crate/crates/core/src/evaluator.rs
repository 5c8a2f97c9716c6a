//! Exact and simulated evaluation of `(screening, threshold)` policy pairs,
//! plus a brute-force grid oracle and the threshold-dominance property check.

use crate::coefficients::{allocation_prob, coefficients_at, side_of, Side};
use crate::model::{ProblemInstance, ScreeningPolicy, ThresholdPolicy};
use crate::optimizer::{candidate_pairs, SweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulation draws per independently seeded chunk. Chunks are merged in
/// index order, so estimates do not depend on the number of workers.
pub const MC_CHUNK: u64 = 4096;

/// Cap on `oracle_grid_search` evaluations.
pub const ORACLE_CAP: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("draws must be at least 1")]
    NoDraws,
    #[error("search would evaluate {size} policies, above the cap of {cap}")]
    SizeCap { size: u128, cap: u128 },
    #[error("group {group} has threshold {threshold}; dominance needs t > 0")]
    ThresholdNotPositive { group: usize, threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub expected_utility: f64,
    pub expected_cost: f64,
    pub group_utilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error_utility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<u64>,
}

fn check_shapes(
    instance: &ProblemInstance,
    screening: &ScreeningPolicy,
    policy: &ThresholdPolicy,
) -> Result<(), EvalError> {
    let n = instance.len();
    let m = instance.num_groups;
    let checks = [
        ("screening policy", screening.probs.len(), n),
        ("thresholds", policy.thresholds.len(), m),
        ("boundary probabilities", policy.boundary_probs.len(), m),
    ];
    for (what, got, expected) in checks {
        if got != expected {
            return Err(EvalError::LengthMismatch { what, got, expected });
        }
    }
    Ok(())
}

/// Closed-form expected utility and cost, summed applicant by applicant.
pub fn exact_evaluate(
    instance: &ProblemInstance,
    screening: &ScreeningPolicy,
    policy: &ThresholdPolicy,
) -> Result<EvalReport, EvalError> {
    check_shapes(instance, screening, policy)?;
    let mut group_utilities = vec![0.0; instance.num_groups];
    let mut cost = 0.0;
    for (a, &p) in instance.applicants.iter().zip(&screening.probs) {
        let (t, alpha) = policy.group(a.group);
        let k = coefficients_at(a, t, alpha);
        group_utilities[a.group] += k.qe * p + k.o * a.mu * (1.0 - p);
        cost += a.screen_cost * p + a.alloc_cost * k.q * p + a.alloc_cost * k.o * (1.0 - p);
    }
    Ok(EvalReport {
        expected_utility: group_utilities.iter().sum(),
        expected_cost: cost,
        group_utilities,
        std_error_utility: None,
        std_error_cost: None,
        draws: None,
    })
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count / total;
        self.m2 += other.m2 + delta * delta * self.count * other.count / total;
        self.count = total;
    }

    fn std_error(&self) -> f64 {
        if self.count < 2.0 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.count - 1.0) / self.count).sqrt()
    }
}

#[derive(Debug, Clone)]
struct ChunkStats {
    utility: Moments,
    cost: Moments,
    groups: Vec<f64>,
}

fn simulate_chunk(
    instance: &ProblemInstance,
    screening: &ScreeningPolicy,
    policy: &ThresholdPolicy,
    seed: u64,
    chunk: u64,
    draws: u64,
) -> ChunkStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut stats = ChunkStats {
        utility: Moments::default(),
        cost: Moments::default(),
        groups: vec![0.0; instance.num_groups],
    };
    for _ in 0..draws {
        let (mut u, mut c) = (0.0, 0.0);
        for (a, &p) in instance.applicants.iter().zip(&screening.probs) {
            let screened = p > 0.0 && rng.random::<f64>() < p;
            let estimate = match (&a.posterior, screened) {
                (Some(post), true) => {
                    c += a.screen_cost;
                    post.quantile(rng.random())
                }
                _ => a.mu,
            };
            let (t, alpha) = policy.group(a.group);
            let allocated = match side_of(estimate / a.alloc_cost, t) {
                Side::Above => true,
                Side::Below => false,
                Side::At => alpha > 0.0 && rng.random::<f64>() < alpha,
            };
            if allocated {
                u += estimate;
                c += a.alloc_cost;
                stats.groups[a.group] += estimate;
            }
        }
        stats.utility.push(u);
        stats.cost.push(c);
    }
    stats
}

/// Simulates the screening and allocation process `draws` times.
///
/// Realized welfare is accumulated as the post-screening estimate of each
/// funded applicant, whose mean equals the mean of realized utility.
pub fn monte_carlo_evaluate(
    instance: &ProblemInstance,
    screening: &ScreeningPolicy,
    policy: &ThresholdPolicy,
    draws: u64,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    check_shapes(instance, screening, policy)?;
    if draws == 0 {
        return Err(EvalError::NoDraws);
    }
    let chunks = draws.div_ceil(MC_CHUNK);
    let run = |k: u64| {
        let size = MC_CHUNK.min(draws - k * MC_CHUNK);
        simulate_chunk(instance, screening, policy, seed, k, size)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<ChunkStats> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<ChunkStats> = (0..chunks).map(run).collect();

    let mut utility = Moments::default();
    let mut cost = Moments::default();
    let mut groups = vec![0.0; instance.num_groups];
    for part in &parts {
        utility.merge(&part.utility);
        cost.merge(&part.cost);
        for (g, v) in groups.iter_mut().zip(&part.groups) {
            *g += v;
        }
    }
    let n = draws as f64;
    Ok(EvalReport {
        expected_utility: utility.mean,
        expected_cost: cost.mean,
        group_utilities: groups.into_iter().map(|g| g / n).collect(),
        std_error_utility: Some(utility.std_error()),
        std_error_cost: Some(cost.std_error()),
        draws: Some(draws),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub report: EvalReport,
    pub screening: ScreeningPolicy,
    pub allocation: ThresholdPolicy,
}

/// Exhaustive search over screening probabilities drawn from `p_grid` and
/// every `(threshold, alpha)` pair of `config`, keeping the best policy that
/// meets the budget and constraints within `1e-9`. `None` when nothing is
/// feasible.
pub fn oracle_grid_search(
    instance: &ProblemInstance,
    p_grid: &[f64],
    config: &SweepConfig,
) -> Result<Option<OracleResult>, EvalError> {
    let screenable: Vec<usize> = (0..instance.len())
        .filter(|&i| instance.applicants[i].is_screenable())
        .collect();
    let pairs: Vec<Vec<(f64, f64)>> = (0..instance.num_groups)
        .map(|g| candidate_pairs(instance, g, config))
        .collect();
    let p_combos = (p_grid.len() as u128).pow(screenable.len() as u32);
    let t_combos: u128 = pairs.iter().map(|p| p.len() as u128).product();
    let size = p_combos.saturating_mul(t_combos);
    if size > ORACLE_CAP {
        return Err(EvalError::SizeCap { size, cap: ORACLE_CAP });
    }

    const TOL: f64 = 1e-9;
    let m = instance.num_groups;
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    let mut t_idx = vec![0usize; m];
    loop {
        let coeffs: Vec<_> = instance
            .applicants
            .iter()
            .map(|a| {
                let (t, alpha) = pairs[a.group][t_idx[a.group]];
                coefficients_at(a, t, alpha)
            })
            .collect();
        let mut p_idx = vec![0usize; screenable.len()];
        let mut probs = vec![0.0; instance.len()];
        loop {
            for (k, &i) in screenable.iter().enumerate() {
                probs[i] = p_grid[p_idx[k]];
            }
            let mut groups = vec![0.0; m];
            let mut cost = 0.0;
            for ((a, k), &p) in instance.applicants.iter().zip(&coeffs).zip(&probs) {
                groups[a.group] += k.qe * p + k.o * a.mu * (1.0 - p);
                cost += a.screen_cost * p + a.alloc_cost * (k.q * p + k.o * (1.0 - p));
            }
            let feasible =
                cost <= instance.budget + TOL && instance.constraints.iter().all(|c| c.is_met(groups[c.group], TOL));
            if feasible {
                let total: f64 = groups.iter().sum();
                if best.as_ref().is_none_or(|(b, _, _)| total > *b) {
                    best = Some((total, t_idx.clone(), p_idx.clone()));
                }
            }
            if !advance(&mut p_idx, p_grid.len()) {
                break;
            }
        }
        let radices: Vec<usize> = pairs.iter().map(Vec::len).collect();
        if !advance_mixed(&mut t_idx, &radices) {
            break;
        }
    }

    let Some((_, t_idx, p_idx)) = best else {
        return Ok(None);
    };
    let mut probs = vec![0.0; instance.len()];
    for (k, &i) in screenable.iter().enumerate() {
        probs[i] = p_grid[p_idx[k]];
    }
    let screening = ScreeningPolicy { probs };
    let allocation = ThresholdPolicy {
        thresholds: (0..m).map(|g| pairs[g][t_idx[g]].0).collect(),
        boundary_probs: (0..m).map(|g| pairs[g][t_idx[g]].1).collect(),
    };
    let report = exact_evaluate(instance, &screening, &allocation)?;
    Ok(Some(OracleResult {
        report,
        screening,
        allocation,
    }))
}

fn advance(idx: &mut [usize], radix: usize) -> bool {
    for v in idx.iter_mut() {
        *v += 1;
        if *v < radix {
            return true;
        }
        *v = 0;
    }
    false
}

fn advance_mixed(idx: &mut [usize], radices: &[usize]) -> bool {
    for (v, &r) in idx.iter_mut().zip(radices) {
        *v += 1;
        if *v < r {
            return true;
        }
        *v = 0;
    }
    false
}

/// Samples `trials` alternative allocation rules and counts those that beat
/// the threshold policy on some group: no more allocation cost but strictly
/// more utility (both within `1e-9`). Screening is held fixed.
///
/// Alternatives are tables of allocation probabilities indexed by each
/// applicant's possible post-screening states. Tables whose cost exceeds the
/// policy's are scaled down to match it, so every trial is a real contest.
pub fn check_threshold_dominance(
    instance: &ProblemInstance,
    screening: &ScreeningPolicy,
    policy: &ThresholdPolicy,
    trials: usize,
    seed: u64,
) -> Result<usize, EvalError> {
    check_shapes(instance, screening, policy)?;
    for (group, &threshold) in policy.thresholds.iter().enumerate() {
        if threshold.is_nan() || threshold <= 0.0 {
            return Err(EvalError::ThresholdNotPositive { group, threshold });
        }
    }

    // One entry per (applicant, post-screening state): (group, prob, value, cost).
    let mut states: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (a, &p) in instance.applicants.iter().zip(&screening.probs) {
        if p < 1.0 {
            states.push((a.group, 1.0 - p, a.mu, a.alloc_cost));
        }
        if let Some(post) = a.posterior.as_ref().filter(|_| p > 0.0) {
            for (v, w) in post.iter() {
                states.push((a.group, p * w, v, a.alloc_cost));
            }
        }
    }
    let reference: Vec<f64> = states
        .iter()
        .map(|&(g, _, v, c)| {
            let (t, alpha) = policy.group(g);
            allocation_prob(v / c, t, alpha)
        })
        .collect();

    let m = instance.num_groups;
    let totals = |table: &[f64]| {
        let mut cost = vec![0.0; m];
        let mut utility = vec![0.0; m];
        for (&(g, w, v, c), &a) in states.iter().zip(table) {
            cost[g] += w * c * a;
            utility[g] += w * v * a;
        }
        (cost, utility)
    };
    let (ref_cost, ref_utility) = totals(&reference);

    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for trial in 0..trials {
        let mut table: Vec<f64> = match trial % 3 {
            0 => states.iter().map(|_| rng.random()).collect(),
            1 => reference
                .iter()
                .map(|&r| (r + rng.random_range(-0.5..0.5)).clamp(0.0, 1.0))
                .collect(),
            _ => states
                .iter()
                .map(|_| if rng.random_bool(0.3) { 1.0 } else { 0.0 })
                .collect(),
        };
        let (cost, _) = totals(&table);
        for (k, &(g, ..)) in states.iter().enumerate() {
            if cost[g] > ref_cost[g] {
                table[k] *= ref_cost[g] / cost[g];
            }
        }
        let (cost, utility) = totals(&table);
        let beaten = (0..m).any(|g| cost[g] <= ref_cost[g] + TOL && utility[g] > ref_utility[g] + TOL);
        if beaten {
            violations += 1;
        }
    }
    Ok(violations)
}
