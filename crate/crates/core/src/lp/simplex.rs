//! Dense primal simplex for `max cᵀx, Ax ≤ b, x ≥ 0` with `b ≥ 0`, so the
//! all-slack basis is feasible from the start. Bland's rule prevents cycling.

use crate::error::{Error, Result};

pub const PIVOT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// Optimal dual values, one per row.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Numerical("inconsistent LP dimensions".into()));
    }
    if b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Numerical("right-hand sides must be finite and non-negative".into()));
    }
    let width = n + m + 1;
    let mut tab: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(&a[r]);
            row[n + r] = 1.0;
            row[width - 1] = b[r];
            row
        })
        .collect();
    // reduced costs z_j − c_j; optimal once none is negative
    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_pivots = 50 * (n + m).max(1) * (n + m).max(1);
    let mut pivots = 0;
    while let Some(enter) = (0..n + m).find(|&j| obj[j] < -PIVOT_TOLERANCE) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..m {
            let coef = tab[r][enter];
            if coef > PIVOT_TOLERANCE {
                let ratio = tab[r][width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - PIVOT_TOLERANCE || (ratio <= best + PIVOT_TOLERANCE && basis[r] < basis[l]),
                };
                if better {
                    best = best.min(ratio);
                    leave = Some(r);
                }
            }
        }
        let Some(pr) = leave else {
            return Err(Error::Numerical("LP is unbounded".into()));
        };
        pivot(&mut tab, &mut obj, pr, enter);
        basis[pr] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Numerical(format!("simplex did not converge in {max_pivots} pivots")));
        }
    }
    let mut x = vec![0.0; n];
    for (r, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tab[r][width - 1];
        }
    }
    let objective = obj[width - 1];
    if !objective.is_finite() {
        return Err(Error::Numerical("non-finite objective".into()));
    }
    Ok(LpSolution { objective, x, duals: obj[n..n + m].to_vec(), pivots })
}

fn pivot(tab: &mut [Vec<f64>], obj: &mut [f64], pr: usize, pc: usize) {
    let p = tab[pr][pc];
    for v in tab[pr].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab[pr].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r != pr && row[pc] != 0.0 {
            let f = row[pc];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    let f = obj[pc];
    if f != 0.0 {
        for (v, pv) in obj.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
    }
}
