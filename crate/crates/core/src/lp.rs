//! Dense tableau simplex for `max cᵀz  s.t.  A z ≤ b, z ≥ 0` with `b ≥ 0`.
//!
//! The origin is always feasible, so no phase one is needed. Pivoting uses
//! Dantzig's rule and falls back to Bland's rule after a run of degenerate
//! pivots.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Nonnegative multipliers of the `≤` rows.
    pub dual: Vec<f64>,
    pub pivots: usize,
}

/// Solves the LP. `a` is row-major with `b.len()` rows of `c.len()` entries.
pub fn solve_lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("constraint matrix has the wrong shape".into()));
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument("right-hand side must be nonnegative".into()));
    }
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
    }
    {
        let obj = &mut t[m * width..];
        for j in 0..n {
            obj[j] = -c[j];
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut degenerate = 0usize;
    let mut bland = false;
    let limit = 50 * (n + m).max(10);
    let mut pivots = 0usize;
    loop {
        let obj = &t[m * width..];
        let entering = if bland {
            (0..n + m).find(|&j| obj[j] < -PIVOT_EPS)
        } else {
            (0..n + m)
                .filter(|&j| obj[j] < -PIVOT_EPS)
                .min_by(|&i, &j| obj[i].total_cmp(&obj[j]))
        };
        let Some(col) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + col];
            if aij > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / aij;
                let better = match leave {
                    None => true,
                    Some((k, r)) => {
                        ratio < r - 1e-15 || (ratio <= r + 1e-15 && basis[i] < basis[k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            return Err(Error::ConvergenceFailure("linear program is unbounded".into()));
        };
        if ratio <= 1e-15 {
            degenerate += 1;
            if degenerate >= DEGENERATE_RUN {
                bland = true;
            }
        } else {
            degenerate = 0;
        }
        pivot(&mut t, width, m, row, col);
        basis[row] = col;
        pivots += 1;
        if pivots > limit {
            return Err(Error::IterationLimit(limit));
        }
    }
    let mut primal = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            primal[bv] = t[i * width + width - 1];
        }
    }
    let obj = &t[m * width..];
    let dual = (0..m).map(|i| obj[n + i].max(0.0)).collect();
    Ok(LpSolution {
        objective: obj[width - 1],
        primal,
        dual,
        pivots,
    })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f != 0.0 {
            let r = &mut t[i * width..(i + 1) * width];
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            r[col] = 0.0;
        }
    }
}

/// Maximin weights: `max_ω min_k Σ_j C_kj ω_j` over the probability simplex.
/// Returns `(value, ω, λ)` where `λ` (summing to 1) is the minimising mixture
/// of rows, so that `max_j Σ_k λ_k C_kj = value`.
pub fn maximin_weights(costs: &[Vec<f64>]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let k = costs.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no cuts".into()));
    }
    let n = costs[0].len();
    // entries far above every row's typical size are capped; the cap only
    // lowers the model, and any dual mixture still bounds the true problem
    let cap = 1e6
        * costs
            .iter()
            .map(|r| {
                let mut s: Vec<f64> = r.iter().map(|v| v.abs()).collect();
                s.sort_by(f64::total_cmp);
                s[s.len() / 2]
            })
            .fold(0.0f64, f64::max);
    let capped: Vec<Vec<f64>>;
    let costs = if cap > 0.0 && costs.iter().flatten().any(|v| v.abs() > cap) {
        capped = costs
            .iter()
            .map(|r| r.iter().map(|v| v.clamp(-cap, cap)).collect())
            .collect();
        &capped[..]
    } else {
        costs
    };
    // each row t - Σ C_kj ω_j ≤ 0 is scaled by its own maximum, which leaves
    // the feasible set unchanged but keeps cuts of very different size
    // representable; the row duals are scaled back afterwards
    let scales: Vec<f64> = costs
        .iter()
        .map(|r| r.iter().fold(0.0f64, |a, &v| a.max(v.abs())))
        .collect();
    if scales.iter().any(|s| !(*s > 0.0)) {
        let zero = scales.iter().position(|s| !(*s > 0.0)).unwrap();
        let mut lambda = vec![0.0; k];
        lambda[zero] = 1.0;
        return Ok((0.0, vec![1.0 / n as f64; n], lambda));
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut a = Vec::with_capacity(k + 1);
    for (row, s) in costs.iter().zip(&scales) {
        let mut r: Vec<f64> = row.iter().map(|v| -v / s).collect();
        r.push(1.0 / s);
        a.push(r);
    }
    let mut sum_row = vec![1.0; n];
    sum_row.push(0.0);
    a.push(sum_row);
    let mut b = vec![0.0; k];
    b.push(1.0);
    let sol = solve_lp(&c, &a, &b)?;
    let mut w: Vec<f64> = sol.primal[..n].to_vec();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|v| *v /= total);
    } else {
        w = vec![1.0 / n as f64; n];
    }
    let mut lambda: Vec<f64> = sol.dual[..k].iter().zip(&scales).map(|(y, s)| y / s).collect();
    let lsum: f64 = lambda.iter().sum();
    if lsum > 0.0 {
        lambda.iter_mut().for_each(|v| *v /= lsum);
    } else {
        lambda = vec![1.0 / k as f64; k];
    }
    Ok((sol.objective, w, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let s = solve_lp(
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        )
        .unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.primal[0] - 2.0).abs() < 1e-12 && (s.primal[1] - 6.0).abs() < 1e-12);
        // dual (0, 3/2, 1) reproduces the objective
        let by: f64 = [4.0, 12.0, 18.0].iter().zip(&s.dual).map(|(b, y)| b * y).sum();
        assert!((by - 36.0).abs() < 1e-12);
        assert!((s.dual[1] - 1.5).abs() < 1e-12 && (s.dual[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        assert!(solve_lp(&[1.0], &[vec![-1.0]], &[1.0]).is_err());
    }

    #[test]
    fn matching_pennies() {
        let (v, w, l) = maximin_weights(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12 && (l[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn maximin_matches_brute_force() {
        let costs = vec![vec![3.0, 1.0, 0.5], vec![0.2, 2.0, 1.0], vec![1.0, 0.5, 4.0]];
        let (v, w, l) = maximin_weights(&costs).unwrap();
        let value_at = |w: &[f64]| {
            costs
                .iter()
                .map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        };
        assert!((value_at(&w) - v).abs() < 1e-12);
        let n = 200;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let p = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
                assert!(value_at(&p) <= v + 1e-12);
            }
        }
        let best_col = (0..3)
            .map(|j| (0..3).map(|k| l[k] * costs[k][j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best_col - v).abs() < 1e-12);
    }
}
