//! Dense primal simplex for `max c·x` subject to `A x <= b`, `x >= 0`, `b >= 0`.
//!
//! The origin is feasible for every program of this shape, so the slack basis
//! starts the iteration and no phase one is needed. Pricing is Dantzig's rule,
//! switching to Bland's rule after a run of degenerate pivots.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// Row-major dense program. `a[r]` has one coefficient per variable.
#[derive(Clone, Debug, Default)]
pub struct DenseLp {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl DenseLp {
    pub fn new(c: Vec<f64>) -> Self {
        DenseLp { c, a: Vec::new(), b: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    /// Adds `row · x <= rhs`; `rhs` must be nonnegative.
    pub fn push(&mut self, row: Vec<f64>, rhs: f64) {
        self.a.push(row);
        self.b.push(rhs);
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.n_vars();
        let m = self.a.len();
        if self.a.iter().any(|r| r.len() != n) {
            return Err(Error::LinearProgram("ragged constraint matrix".into()));
        }
        if self.b.iter().any(|&v| !(v >= -PIVOT_TOL) || !v.is_finite()) {
            return Err(Error::LinearProgram("right-hand side must be nonnegative".into()));
        }
        let width = n + m + 1;
        let mut t = vec![0.0; (m + 1) * width];
        for r in 0..m {
            let row = &mut t[r * width..(r + 1) * width];
            row[..n].copy_from_slice(&self.a[r]);
            row[n + r] = 1.0;
            row[width - 1] = self.b[r].max(0.0);
        }
        // objective row stores reduced costs -c
        {
            let obj = &mut t[m * width..];
            for (o, c) in obj.iter_mut().zip(&self.c) {
                *o = -c;
            }
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        let max_pivots = 50 * (n + m) + 1000;
        let mut pivots = 0;
        let mut degenerate = 0;
        loop {
            let obj = &t[m * width..(m + 1) * width];
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..n + m).find(|&j| obj[j] < -COST_TOL)
            } else {
                let mut best = None;
                let mut best_val = -COST_TOL;
                for (j, &v) in obj[..n + m].iter().enumerate() {
                    if v < best_val {
                        best_val = v;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(e) = entering else { break };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let coef = t[r * width + e];
                if coef > PIVOT_TOL {
                    let ratio = t[r * width + width - 1] / coef;
                    let better = match leave {
                        None => true,
                        Some((lr, lv)) => ratio < lv - 1e-13 || (ratio <= lv + 1e-13 && basis[r] < basis[lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Err(Error::LinearProgram("is unbounded".into()));
            };
            if ratio <= 1e-13 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            pivot(&mut t, width, m + 1, pr, e);
            basis[pr] = e;
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::LinearProgram(format!("did not terminate after {pivots} pivots")));
            }
        }
        let mut x = vec![0.0; n];
        for (r, &bv) in basis.iter().enumerate() {
            if bv < n {
                x[bv] = t[r * width + width - 1];
            }
        }
        let objective = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
        Ok(LpSolution { x, objective, pivots })
    }
}

fn pivot(t: &mut [f64], width: usize, rows: usize, pr: usize, pc: usize) {
    let inv = 1.0 / t[pr * width + pc];
    for v in &mut t[pr * width..(pr + 1) * width] {
        *v *= inv;
    }
    let (head, rest) = t.split_at_mut(pr * width);
    let (prow, tail) = rest.split_at_mut(width);
    let nz: Vec<usize> = (0..width).filter(|&j| prow[j] != 0.0).collect();
    let eliminate = |row: &mut [f64]| {
        let f = row[pc];
        if f != 0.0 {
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[pc] = 0.0;
        }
    };
    for row in head.chunks_mut(width) {
        eliminate(row);
    }
    for row in tail.chunks_mut(width).take(rows - pr - 1) {
        eliminate(row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_program() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = DenseLp::new(vec![3.0, 5.0]);
        lp.push(vec![1.0, 0.0], 4.0);
        lp.push(vec![0.0, 2.0], 12.0);
        lp.push(vec![3.0, 2.0], 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = DenseLp::new(vec![1.0, 1.0]);
        lp.push(vec![1.0, -1.0], 1.0);
        assert!(matches!(lp.solve(), Err(Error::LinearProgram(_))));
    }

    #[test]
    fn degenerate_program_terminates() {
        // Classic cycling example for the largest-coefficient rule.
        let mut lp = DenseLp::new(vec![10.0, -57.0, -9.0, -24.0]);
        lp.push(vec![0.5, -5.5, -2.5, 9.0], 0.0);
        lp.push(vec![0.5, -1.5, -0.5, 1.0], 0.0);
        lp.push(vec![1.0, 0.0, 0.0, 0.0], 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }
}
