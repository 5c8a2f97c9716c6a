//! Brute-force references used to check the solver and evaluator.
//!
//! Both are exponential and only meant for tiny inputs.

use crate::linprog::LinearProgram;
use crate::model::{ProblemInstance, ScreeningPolicy, ThresholdPolicy};

/// Optimum of `lp` by enumerating every basic solution. `None` if infeasible.
pub fn lp_vertex_optimum(lp: &LinearProgram, tol: f64) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    planes.extend(lp.eq.iter().map(|r| (r.coeffs.clone(), r.rhs)));
    planes.extend(lp.ineq.iter().map(|r| (r.coeffs.clone(), r.rhs)));
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    if planes.len() < n {
        return None;
    }
    loop {
        let a: Vec<Vec<f64>> = pick.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&k| planes[k].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.max_violation(&x) <= tol {
                let v = lp.objective_at(&x);
                if best.is_none_or(|b| v > b) {
                    best = Some(v);
                }
            }
        }
        if !next_combination(&mut pick, planes.len()) {
            break;
        }
    }
    best
}

fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    for i in (0..k).rev() {
        if pick[i] < n - k + i {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (pivot_row, pivot_b) = (a[col].clone(), b[col]);
        for (r, (row, rhs)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
            let f = row[col] / pivot_row[col];
            if r != col && f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                *rhs -= f * pivot_b;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Expected `(utility, cost, per-group utility)` by summing over every joint
/// outcome of screening decisions, posterior draws and boundary coin flips.
pub fn enumerate_expectation(
    instance: &ProblemInstance,
    screening: &ScreeningPolicy,
    policy: &ThresholdPolicy,
) -> (f64, f64, Vec<f64>) {
    // Outcomes per applicant: (prob, screened, estimate, allocated).
    let per: Vec<Vec<(f64, bool, f64, bool)>> = instance
        .applicants
        .iter()
        .zip(&screening.probs)
        .map(|(a, &p)| {
            let mut states = vec![(1.0 - p, false, a.mu)];
            if let Some(post) = &a.posterior {
                states.extend(post.support.iter().zip(&post.probs).map(|(&v, &w)| (p * w, true, v)));
            }
            let (t, alpha) = (policy.thresholds[a.group], policy.boundary_probs[a.group]);
            let mut out = Vec::new();
            for (w, s, v) in states {
                let r = v / a.alloc_cost;
                let tol = 1e-12 * t.abs().max(1.0);
                let at = t.is_finite() && (r - t).abs() <= tol;
                if t == f64::NEG_INFINITY || (!at && r > t) {
                    out.push((w, s, v, true));
                } else if at {
                    out.push((w * alpha, s, v, true));
                    out.push((w * (1.0 - alpha), s, v, false));
                } else {
                    out.push((w, s, v, false));
                }
            }
            out.retain(|o| o.0 > 0.0);
            out
        })
        .collect();

    let m = instance.num_groups;
    let (mut u, mut c, mut groups) = (0.0, 0.0, vec![0.0; m]);
    let mut idx = vec![0usize; per.len()];
    if per.iter().any(Vec::is_empty) {
        return (0.0, 0.0, groups);
    }
    loop {
        let mut w = 1.0;
        let (mut uu, mut cc, mut gg) = (0.0, 0.0, vec![0.0; m]);
        for (i, a) in instance.applicants.iter().enumerate() {
            let (pw, s, v, alloc) = per[i][idx[i]];
            w *= pw;
            if s {
                cc += a.screen_cost;
            }
            if alloc {
                uu += v;
                cc += a.alloc_cost;
                gg[a.group] += v;
            }
        }
        u += w * uu;
        c += w * cc;
        for g in 0..m {
            groups[g] += w * gg[g];
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return (u, c, groups);
            }
            idx[k] += 1;
            if idx[k] < per[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::stylized_instance;

    #[test]
    fn vertex_knapsack() {
        let mut lp = LinearProgram::new(vec![60.0, 100.0, 120.0]);
        lp.add_le(vec![10.0, 20.0, 30.0], 50.0);
        assert!((lp_vertex_optimum(&lp, 1e-9).unwrap() - 240.0).abs() < 1e-9);
        lp.add_ge(vec![1.0, 1.0, 1.0], 4.0);
        assert_eq!(lp_vertex_optimum(&lp, 1e-9), None);
    }

    #[test]
    fn enumerate_small_stylized() {
        let mut inst = stylized_instance();
        inst.applicants.drain(2..12);
        let s = ScreeningPolicy {
            probs: vec![1.0, 0.5, 0.0],
        };
        let p = ThresholdPolicy {
            thresholds: vec![2.5, 1.875],
            boundary_probs: vec![1.0, 0.5],
        };
        let (u, c, g) = enumerate_expectation(&inst, &s, &p);
        assert_eq!(u, 500.0 + 250.0 + 375.0);
        assert_eq!(c, 50.0 + 200.0 + 25.0 + 100.0 + 200.0);
        assert_eq!(g, vec![750.0, 375.0]);
    }
}
