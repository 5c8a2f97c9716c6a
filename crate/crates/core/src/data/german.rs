//! The German Credit data set: parsing, features and the lending instance.

use super::logistic::{fit_logistic, LogisticConfig, LogisticFit};
use super::DataError;
use crate::model::{Applicant, DiscreteDistribution, ProblemInstance, UtilitySpec};
use nalgebra::DMatrix;
use std::path::Path;

/// 1-based attribute numbers of the numeric columns.
const NUMERIC: [usize; 7] = [2, 5, 8, 11, 13, 16, 18];

/// Categorical attributes with their code digits: attribute `k` takes codes
/// `A{k}{d}` for each listed `d`.
const CATEGORICAL: [(usize, &[u32]); 13] = [
    (1, &[1, 2, 3, 4]),
    (3, &[0, 1, 2, 3, 4]),
    (4, &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
    (6, &[1, 2, 3, 4, 5]),
    (7, &[1, 2, 3, 4, 5]),
    (9, &[1, 2, 3, 4, 5]),
    (10, &[1, 2, 3]),
    (12, &[1, 2, 3, 4]),
    (14, &[1, 2, 3]),
    (15, &[1, 2, 3]),
    (17, &[1, 2, 3, 4]),
    (19, &[1, 2]),
    (20, &[1, 2]),
];

/// Housing attribute and its "own" code.
const HOUSING: usize = 15;
const HOUSING_OWN: &str = "A152";

/// Largest number of atoms in the targeted group's prior.
pub const MAX_PRIOR_ATOMS: usize = 201;

#[derive(Debug, Clone, PartialEq)]
pub struct GermanRecord {
    /// Numeric attributes in column order.
    pub numeric: [f64; 7],
    /// Categorical codes in column order, e.g. `"A11"`.
    pub categorical: Vec<String>,
    pub good: bool,
    pub owns_residence: bool,
}

fn codes(attribute: usize, digits: &[u32]) -> Vec<String> {
    digits.iter().map(|d| format!("A{attribute}{d}")).collect()
}

/// Parses the whitespace-separated 21-column format (label 1 good, 2 bad).
pub fn parse_german(text: &str) -> Result<Vec<GermanRecord>, DataError> {
    let code_sets: Vec<Vec<String>> = CATEGORICAL.iter().map(|&(a, d)| codes(a, d)).collect();
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fail = |message: String| DataError::Parse { line: line_no, message };
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 21 {
            return Err(fail(format!("expected 21 columns, found {}", fields.len())));
        }
        let mut numeric = [0.0; 7];
        for (slot, &attr) in numeric.iter_mut().zip(&NUMERIC) {
            let raw = fields[attr - 1];
            *slot = raw
                .parse()
                .map_err(|_| fail(format!("attribute {attr}: {raw:?} is not a number")))?;
        }
        let mut categorical = Vec::with_capacity(CATEGORICAL.len());
        let mut owns_residence = false;
        for (&(attr, _), set) in CATEGORICAL.iter().zip(&code_sets) {
            let raw = fields[attr - 1];
            if !set.iter().any(|c| c == raw) {
                return Err(fail(format!("attribute {attr}: unknown code {raw:?}")));
            }
            if attr == HOUSING {
                owns_residence = raw == HOUSING_OWN;
            }
            categorical.push(raw.to_string());
        }
        let good = match fields[20] {
            "1" => true,
            "2" => false,
            other => return Err(fail(format!("label must be 1 or 2, found {other:?}"))),
        };
        records.push(GermanRecord {
            numeric,
            categorical,
            good,
            owns_residence,
        });
    }
    Ok(records)
}

pub fn load_german(path: &Path) -> Result<Vec<GermanRecord>, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_german(&text)
}

/// Checks the row and label counts of the canonical file.
pub fn check_canonical(records: &[GermanRecord]) -> Result<(), DataError> {
    let good = records.iter().filter(|r| r.good).count();
    if records.len() != 1000 || good != 700 {
        return Err(DataError::Domain(format!(
            "expected 1000 rows with 700 good, found {} rows with {good} good",
            records.len()
        )));
    }
    Ok(())
}

/// Design matrix without intercept: standardized numerics, then one-hot
/// categoricals with each attribute's first code dropped.
pub fn design_matrix(records: &[GermanRecord]) -> DMatrix<f64> {
    let n = records.len();
    let code_sets: Vec<Vec<String>> = CATEGORICAL.iter().map(|&(a, d)| codes(a, d)).collect();
    let width = NUMERIC.len() + code_sets.iter().map(|s| s.len() - 1).sum::<usize>();
    let mut x = DMatrix::zeros(n, width);
    for j in 0..NUMERIC.len() {
        let col: Vec<f64> = records.iter().map(|r| r.numeric[j]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        for (i, v) in col.iter().enumerate() {
            x[(i, j)] = (v - mean) / sd;
        }
    }
    let mut offset = NUMERIC.len();
    for (c, set) in code_sets.iter().enumerate() {
        for (i, r) in records.iter().enumerate() {
            let k = set.iter().position(|s| *s == r.categorical[c]).expect("validated code");
            if k > 0 {
                x[(i, offset + k - 1)] = 1.0;
            }
        }
        offset += set.len() - 1;
    }
    x
}

/// Fits the creditworthiness model in-sample.
pub fn fit_german(records: &[GermanRecord], config: &LogisticConfig) -> Result<LogisticFit, DataError> {
    let labels: Vec<bool> = records.iter().map(|r| r.good).collect();
    fit_logistic(&design_matrix(records), &labels, config)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GermanCosts {
    pub screen: f64,
    pub alloc: f64,
}

impl Default for GermanCosts {
    fn default() -> Self {
        Self {
            screen: 100.0,
            alloc: 1000.0,
        }
    }
}

pub const GERMAN_BUDGET: f64 = 150_000.0;

/// Collapses `values` to at most `max_atoms` atoms: each atom gathers a run
/// of consecutive sorted values (never splitting ties) and sits at their mean,
/// so the overall mean is preserved.
pub fn empirical_distribution(values: &[f64], max_atoms: usize) -> Result<DiscreteDistribution, DataError> {
    if values.is_empty() || max_atoms == 0 {
        return Err(DataError::Domain(
            "empirical distribution needs values and atoms".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut unique: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match unique.last_mut() {
            Some((u, c)) if *u == v => *c += 1,
            _ => unique.push((v, 1)),
        }
    }
    let n = values.len();
    let mut support = Vec::new();
    let mut probs = Vec::new();
    if unique.len() <= max_atoms {
        for (v, c) in unique {
            support.push(v);
            probs.push(c as f64 / n as f64);
        }
    } else {
        let (mut sum, mut count, mut seen) = (0.0, 0usize, 0usize);
        for (v, c) in unique {
            sum += v * c as f64;
            count += c;
            seen += c;
            let bin = support.len() + 1;
            if seen * max_atoms >= bin * n {
                support.push(sum / count as f64);
                probs.push(count as f64 / n as f64);
                sum = 0.0;
                count = 0;
            }
        }
        if count > 0 {
            support.push(sum / count as f64);
            probs.push(count as f64 / n as f64);
        }
    }
    Ok(DiscreteDistribution { support, probs })
}

/// Shifts or scales `dist` so its mean is `target`: multiplicatively when
/// both means are positive, additively otherwise.
pub fn recenter(dist: &DiscreteDistribution, target: f64) -> DiscreteDistribution {
    let mean = dist.mean();
    let support = if target > 0.0 && mean > 0.0 {
        dist.support.iter().map(|v| v * (target / mean)).collect()
    } else {
        dist.support.iter().map(|v| v + (target - mean)).collect()
    };
    DiscreteDistribution {
        support,
        probs: dist.probs.clone(),
    }
}

/// Group 0 holds applicants who do not own their residence. The lender only
/// knows that group's base rate, so each member gets `mu = utility(base
/// rate)` and a prior equal to the group's empirical distribution of
/// model-scored utilities. Screening reveals the individual score. Group 1
/// members are scored directly and cannot be screened.
pub fn build_german_instance(
    records: &[GermanRecord],
    probabilities: &[f64],
    costs: GermanCosts,
    budget: f64,
    utility: UtilitySpec,
) -> Result<ProblemInstance, DataError> {
    if records.len() != probabilities.len() {
        return Err(DataError::Domain(format!(
            "{} probabilities for {} records",
            probabilities.len(),
            records.len()
        )));
    }
    let targeted: Vec<usize> = (0..records.len()).filter(|&i| !records[i].owns_residence).collect();
    if targeted.is_empty() {
        return Err(DataError::Domain("no applicant lacks a residence".into()));
    }
    let base_rate = targeted.iter().filter(|&&i| records[i].good).count() as f64 / targeted.len() as f64;
    let mu_targeted = utility.map(base_rate);
    let scored: Vec<f64> = targeted.iter().map(|&i| utility.map(probabilities[i])).collect();
    let prior = recenter(&empirical_distribution(&scored, MAX_PRIOR_ATOMS)?, mu_targeted);

    let applicants = records
        .iter()
        .zip(probabilities)
        .enumerate()
        .map(|(i, (r, &p))| {
            let (group, mu, posterior) = if r.owns_residence {
                (1, utility.map(p), None)
            } else {
                (0, mu_targeted, Some(prior.clone()))
            };
            Applicant {
                id: i as u64,
                group,
                mu,
                screen_cost: costs.screen,
                alloc_cost: costs.alloc,
                posterior,
            }
        })
        .collect();
    Ok(ProblemInstance {
        budget,
        num_groups: 2,
        utility,
        applicants,
        constraints: Vec::new(),
    })
}
