//! Ridge-regularized logistic regression fitted by Newton/IRLS steps.

use super::DataError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    /// L2 penalty on every coefficient, intercept included.
    pub ridge: f64,
    /// Stop once no coefficient moves more than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            ridge: 1e-6,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    /// Intercept first, then one coefficient per feature column. When all
    /// labels agree only the intercept is fitted and the rest are 0.
    pub coefficients: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fits `P(y = 1 | row) = sigmoid(b0 + row . b)`. `features` has one row
/// per observation and no intercept column.
pub fn fit_logistic(
    features: &DMatrix<f64>,
    labels: &[bool],
    config: &LogisticConfig,
) -> Result<LogisticFit, DataError> {
    let (n, k) = features.shape();
    if labels.len() != n || n == 0 {
        return Err(DataError::Domain(format!("{} labels for {n} rows", labels.len())));
    }
    let single_label = labels.iter().all(|&l| l == labels[0]);
    let cols = if single_label { 1 } else { k + 1 };
    let mut x = DMatrix::from_element(n, cols, 1.0);
    if !single_label {
        x.columns_mut(1, k).copy_from(features);
    }
    let y = DVector::from_iterator(n, labels.iter().map(|&l| if l { 1.0 } else { 0.0 }));

    let mut beta = DVector::zeros(cols);
    for iter in 1..=config.max_iter {
        let p = (&x * &beta).map(sigmoid);
        let w = p.map(|v| (v * (1.0 - v)).max(1e-12));
        let mut xw = x.clone();
        for (mut row, &wi) in xw.row_iter_mut().zip(w.iter()) {
            row *= wi;
        }
        let mut hessian = x.transpose() * xw;
        for d in 0..cols {
            hessian[(d, d)] += config.ridge;
        }
        let gradient = x.transpose() * (&y - &p) - &beta * config.ridge;
        let step = hessian
            .cholesky()
            .ok_or_else(|| DataError::Domain("IRLS normal equations are not positive definite".into()))?
            .solve(&gradient);
        beta += &step;
        if step.amax() < config.tol {
            let probabilities = (&x * &beta).map(sigmoid).iter().copied().collect();
            let mut coefficients = vec![0.0; k + 1];
            coefficients[..cols].copy_from_slice(beta.as_slice());
            return Ok(LogisticFit {
                coefficients,
                probabilities,
                iterations: iter,
            });
        }
    }
    Err(DataError::Convergence {
        iterations: config.max_iter,
        coefficients: beta.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_data_is_monotone() {
        let xs = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
        let labels = [false, false, false, true, true, true];
        let features = DMatrix::from_column_slice(6, 1, &xs);
        let config = LogisticConfig {
            max_iter: 500,
            ..LogisticConfig::default()
        };
        let fit = fit_logistic(&features, &labels, &config).unwrap();
        assert!(fit.probabilities.windows(2).all(|w| w[0] < w[1]));
        assert!(fit.probabilities[0] < 0.01 && fit.probabilities[5] > 0.99);
    }

    #[test]
    fn all_good_is_intercept_only() {
        let features = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let fit = fit_logistic(&features, &[true; 4], &LogisticConfig::default()).unwrap();
        assert!(fit.probabilities.iter().all(|&p| p > 0.99));
        assert_eq!(fit.coefficients[1], 0.0);
    }

    #[test]
    fn recovers_known_model() {
        // Deterministic design with labels set by fractional frequency so the
        // exact MLE is b0 = 0, b1 = ln 3.
        let mut xs = Vec::new();
        let mut labels = Vec::new();
        for &(x, good, bad) in &[(-1.0, 1, 3), (1.0, 3, 1)] {
            for _ in 0..good {
                xs.push(x);
                labels.push(true);
            }
            for _ in 0..bad {
                xs.push(x);
                labels.push(false);
            }
        }
        let features = DMatrix::from_column_slice(xs.len(), 1, &xs);
        let config = LogisticConfig {
            ridge: 0.0,
            ..LogisticConfig::default()
        };
        let fit = fit_logistic(&features, &labels, &config).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-9);
        assert!((fit.coefficients[1] - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        let features = DMatrix::from_column_slice(4, 1, &[-1.0, -0.5, 0.5, 1.0]);
        let config = LogisticConfig {
            max_iter: 2,
            ..LogisticConfig::default()
        };
        let err = fit_logistic(&features, &[false, false, true, true], &config).unwrap_err();
        match err {
            DataError::Convergence {
                iterations,
                coefficients,
            } => {
                assert_eq!(iterations, 2);
                assert_eq!(coefficients.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
