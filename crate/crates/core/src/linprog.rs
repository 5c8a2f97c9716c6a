//! Dense bounded-variable primal simplex for small linear programs.
//!
//! Problems here have up to a few thousand box-bounded variables but only a
//! handful of general rows, so the whole tableau fits comfortably in memory
//! and every pivot is `O(rows * columns)`. Entering and leaving variables
//! follow Bland's rule (lowest index first), which rules out cycling. A
//! phase-1 auxiliary objective finds a feasible basis; basic values are
//! re-derived from the original data after each phase to shed accumulated
//! round-off.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pivot entries smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row {row} has {got} coefficients, expected {expected}")]
    RowLength { row: usize, got: usize, expected: usize },
    #[error("bounds vector has {got} entries, expected {expected}")]
    BoundsLength { got: usize, expected: usize },
    #[error("variable {var} has bounds [{lo}, {hi}]")]
    InvalidBounds { var: usize, lo: f64, hi: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("simplex did not terminate within {0} iterations")]
    IterationLimit(usize),
}

/// `coeffs . x (<= | =) rhs`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// Maximize `objective . x` subject to `ineq` rows (`<=`), `eq` rows, and
/// per-variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub ineq: Vec<Constraint>,
    pub eq: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// Empty program over `[0, 1]` boxes.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            ineq: Vec::new(),
            eq: Vec::new(),
            bounds: vec![(0.0, 1.0); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.ineq.push(Constraint { coeffs, rhs });
    }

    /// Stored as the negated `<=` row.
    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.ineq.push(Constraint {
            coeffs: coeffs.into_iter().map(|c| -c).collect(),
            rhs: -rhs,
        });
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.eq.push(Constraint { coeffs, rhs });
    }

    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if self.bounds.len() != n {
            return Err(LpError::BoundsLength {
                got: self.bounds.len(),
                expected: n,
            });
        }
        for (var, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(LpError::InvalidBounds { var, lo, hi });
            }
        }
        for (row, c) in self.ineq.iter().chain(&self.eq).enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::RowLength {
                    row,
                    got: c.coeffs.len(),
                    expected: n,
                });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite("constraint row"));
            }
        }
        Ok(())
    }

    /// Largest bound, inequality, or equality violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |c: &Constraint| c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        let bound = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        let ineq = self.ineq.iter().map(|c| (dot(c) - c.rhs).max(0.0));
        let eq = self.eq.iter().map(|c| (dot(c) - c.rhs).abs());
        bound.chain(ineq).chain(eq).fold(0.0, f64::max)
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `x` and `objective_value` are meaningful only when `status` is optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let mut tableau = Tableau::build(lp);
    match tableau.phase_one()? {
        PhaseOutcome::Unbounded => unreachable!("phase one objective is bounded above by zero"),
        PhaseOutcome::Optimal => {}
    }
    if !tableau.is_feasible() {
        return Ok(LpSolution {
            x: tableau.structural_values(),
            objective_value: f64::NAN,
            status: LpStatus::Infeasible,
        });
    }
    tableau.evict_artificials();
    let outcome = tableau.phase_two(&lp.objective)?;
    let x = tableau.structural_values();
    let status = match outcome {
        PhaseOutcome::Optimal => LpStatus::Optimal,
        PhaseOutcome::Unbounded => LpStatus::Unbounded,
    };
    Ok(LpSolution {
        objective_value: lp.objective_at(&x),
        x,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Column layout: structural variables, then one slack per `<=` row, then
/// one artificial per row.
struct Tableau {
    rows: usize,
    cols: usize,
    n: usize,
    /// Row-major `rows x cols`, the current `B^-1 A`.
    t: Vec<f64>,
    /// Original (signed) constraint matrix in the same layout.
    a: Vec<f64>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Values of the basic variables, by row.
    beta: Vec<f64>,
    /// Reduced costs for the active objective.
    d: Vec<f64>,
    cost: Vec<f64>,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let n_ineq = lp.ineq.len();
        let rows = n_ineq + lp.eq.len();
        let first_artificial = n + n_ineq;
        let cols = first_artificial + rows;

        let mut lo = vec![0.0; cols];
        let mut hi = vec![f64::INFINITY; cols];
        for (j, &(l, h)) in lp.bounds.iter().enumerate() {
            lo[j] = l;
            hi[j] = h;
        }
        let mut state = vec![VarState::AtLower; cols];
        let mut a = vec![0.0; rows * cols];
        let mut rhs = vec![0.0; rows];
        let mut basis = vec![0; rows];
        let mut beta = vec![0.0; rows];

        for (i, c) in lp.ineq.iter().chain(&lp.eq).enumerate() {
            let row = &mut a[i * cols..(i + 1) * cols];
            row[..n].copy_from_slice(&c.coeffs);
            let is_ineq = i < n_ineq;
            if is_ineq {
                row[n + i] = 1.0;
            }
            let residual = c.rhs - c.coeffs.iter().zip(&lo[..n]).map(|(x, l)| x * l).sum::<f64>();
            if is_ineq && residual >= 0.0 {
                // Slack starts basic; the artificial stays pinned at zero.
                basis[i] = n + i;
                beta[i] = residual;
                state[n + i] = VarState::Basic;
                hi[first_artificial + i] = 0.0;
            } else {
                let sign = if residual < 0.0 { -1.0 } else { 1.0 };
                row[first_artificial + i] = sign;
                basis[i] = first_artificial + i;
                beta[i] = residual.abs();
                state[first_artificial + i] = VarState::Basic;
            }
            rhs[i] = c.rhs;
        }

        // B is diagonal with entries +-1 here, so B^-1 A is a row scaling.
        let mut t = a.clone();
        for i in 0..rows {
            let pivot = a[i * cols + basis[i]];
            if pivot != 1.0 {
                for v in &mut t[i * cols..(i + 1) * cols] {
                    *v /= pivot;
                }
            }
        }

        Self {
            rows,
            cols,
            n,
            t,
            a,
            rhs,
            lo,
            hi,
            state,
            basis,
            beta,
            d: vec![0.0; cols],
            cost: vec![0.0; cols],
            first_artificial,
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lo[j],
            VarState::AtUpper => self.hi[j],
            VarState::Basic => {
                let r = self.basis.iter().position(|&b| b == j).expect("basic column");
                self.beta[r]
            }
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.n)
            .map(|j| match self.state[j] {
                VarState::AtLower => self.lo[j],
                VarState::AtUpper => self.hi[j],
                VarState::Basic => 0.0,
            })
            .collect();
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.beta[r].clamp(self.lo[b], self.hi[b]);
            }
        }
        x
    }

    fn artificial_sum(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.beta)
            .filter(|(&b, _)| b >= self.first_artificial)
            .map(|(_, &v)| v.max(0.0))
            .sum()
    }

    fn is_feasible(&self) -> bool {
        let scale = self.rhs.iter().fold(1.0f64, |m, r| m.max(r.abs()));
        self.artificial_sum() <= 1e-9 * scale
    }

    fn set_objective(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        for j in 0..self.cols {
            let mut dj = self.cost[j];
            for i in 0..self.rows {
                dj -= self.cost[self.basis[i]] * self.t[i * self.cols + j];
            }
            self.d[j] = dj;
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn phase_one(&mut self) -> Result<PhaseOutcome, LpError> {
        let mut cost = vec![0.0; self.cols];
        for c in &mut cost[self.first_artificial..] {
            *c = -1.0;
        }
        self.set_objective(cost);
        let outcome = self.iterate(1e-10)?;
        self.refresh_basic_values();
        Ok(outcome)
    }

    fn phase_two(&mut self, objective: &[f64]) -> Result<PhaseOutcome, LpError> {
        // Artificials may never re-enter.
        for j in self.first_artificial..self.cols {
            self.hi[j] = 0.0;
            self.lo[j] = 0.0;
        }
        let mut cost = vec![0.0; self.cols];
        cost[..self.n].copy_from_slice(objective);
        let scale = objective.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        self.set_objective(cost);
        let outcome = self.iterate(1e-10 * scale)?;
        self.refresh_basic_values();
        Ok(outcome)
    }

    /// Pivots zero-valued artificials out of the basis where some real
    /// column can take their place; rows where none can are redundant.
    fn evict_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let row = &self.t[r * self.cols..(r + 1) * self.cols];
            let best = (0..self.first_artificial)
                .filter(|&j| self.state[j] != VarState::Basic)
                .map(|j| (j, row[j].abs()))
                .filter(|&(_, v)| v > PIVOT_TOL)
                .fold(None, |acc: Option<(usize, f64)>, cand| match acc {
                    Some(a) if a.1 >= cand.1 => Some(a),
                    _ => Some(cand),
                });
            if let Some((j, _)) = best {
                let value = self.value(j);
                let leaving = self.basis[r];
                self.pivot(r, j);
                self.state[leaving] = VarState::AtLower;
                self.beta[r] = value;
            }
        }
        self.refresh_basic_values();
    }

    fn iterate(&mut self, opt_tol: f64) -> Result<PhaseOutcome, LpError> {
        let limit = 50 * (self.cols + self.rows) + 10_000;
        let mut start = 0;
        for _ in 0..limit {
            let Some(j) = self.entering(start, opt_tol) else {
                if start == 0 {
                    return Ok(PhaseOutcome::Optimal);
                }
                start = 0;
                continue;
            };
            let dir = if self.state[j] == VarState::AtLower { 1.0 } else { -1.0 };

            // Ratio test; ties go to the lowest-index basic variable.
            let mut theta = self.hi[j] - self.lo[j];
            let mut leave: Option<(usize, VarState)> = None;
            for i in 0..self.rows {
                let rate = -dir * self.t[i * self.cols + j];
                let b = self.basis[i];
                let (limit, bound) = if rate < -PIVOT_TOL {
                    ((self.beta[i] - self.lo[b]) / -rate, VarState::AtLower)
                } else if rate > PIVOT_TOL && self.hi[b].is_finite() {
                    ((self.hi[b] - self.beta[i]) / rate, VarState::AtUpper)
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = if !theta.is_finite() {
                    true
                } else {
                    let tie = 1e-12 * theta.abs().max(1.0);
                    match leave {
                        _ if limit < theta - tie => true,
                        Some((r, _)) if limit <= theta + tie => b < self.basis[r],
                        _ => false,
                    }
                };
                if better {
                    theta = limit;
                    leave = Some((i, bound));
                }
            }
            if !theta.is_finite() {
                return Ok(PhaseOutcome::Unbounded);
            }

            for i in 0..self.rows {
                let rate = -dir * self.t[i * self.cols + j];
                self.beta[i] += rate * theta;
            }
            match leave {
                None => {
                    self.state[j] = if dir > 0.0 {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    // Reduced costs are unchanged by a bound flip, so lower
                    // indices are still ineligible.
                    start = j + 1;
                }
                Some((r, bound)) => {
                    let entering_value = if dir > 0.0 {
                        self.lo[j] + theta
                    } else {
                        self.hi[j] - theta
                    };
                    let leaving = self.basis[r];
                    self.pivot(r, j);
                    self.state[leaving] = bound;
                    self.beta[r] = entering_value;
                    start = 0;
                }
            }
        }
        Err(LpError::IterationLimit(limit))
    }

    /// Lowest-index eligible column at or after `start`.
    fn entering(&self, start: usize, tol: f64) -> Option<usize> {
        (start..self.cols).find(|&j| {
            if self.hi[j] - self.lo[j] <= 0.0 {
                return false;
            }
            match self.state[j] {
                VarState::Basic => false,
                VarState::AtLower => self.d[j] > tol,
                VarState::AtUpper => self.d[j] < -tol,
            }
        })
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + j];
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (v, pv) in self.d.iter_mut().zip(pivot_row.iter()) {
                *v -= f * pv;
            }
        }
        self.d[j] = 0.0;
        self.basis[r] = j;
        self.state[j] = VarState::Basic;
    }

    /// Solves `B x_B = b - N x_N` against the original matrix.
    fn refresh_basic_values(&mut self) {
        let (m, cols) = (self.rows, self.cols);
        if m == 0 {
            return;
        }
        let mut rhs = self.rhs.clone();
        for j in 0..cols {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let v = self.value(j);
            if v != 0.0 {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= self.a[i * cols + j] * v;
                }
            }
        }
        let mut b: Vec<f64> = (0..m)
            .flat_map(|i| self.basis.iter().map(move |&col| (i, col)))
            .map(|(i, col)| self.a[i * cols + col])
            .collect();
        if let Some(x) = gauss_solve(&mut b, &mut rhs, m) {
            self.beta = x;
        }
    }
}

/// Gaussian elimination with partial pivoting on a dense `m x m` system.
fn gauss_solve(a: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for k in 0..m {
        let p = (k..m).max_by(|&x, &y| a[x * m + k].abs().total_cmp(&a[y * m + k].abs()))?;
        if a[p * m + k].abs() < 1e-14 {
            return None;
        }
        if p != k {
            for c in 0..m {
                a.swap(k * m + c, p * m + c);
            }
            b.swap(k, p);
        }
        for i in k + 1..m {
            let f = a[i * m + k] / a[k * m + k];
            if f != 0.0 {
                for c in k..m {
                    a[i * m + c] -= f * a[k * m + c];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|c| a[k * m + c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k * m + k];
    }
    Some(x)
}
