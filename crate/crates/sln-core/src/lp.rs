//! Separating-hyperplane linear program over a finite vertex set.
//!
//! Given a point v and classical vertices m_k, solve
//!
//! ```text
//! maximize   lambda . v - z
//! subject to lambda . m_k - z <= 0   for every vertex k
//!            -1 <= lambda_j <= 1
//! ```
//!
//! A positive optimum certifies that v lies outside the convex hull of the
//! m_k and hands back the witness direction; a nonpositive optimum proves
//! membership (for the grid; the continuous bound is re-checked upstream).
//!
//! The solver is a plain dense tableau simplex. The substitution
//! mu = lambda + 1 (so 0 <= mu <= 2) and z = z+ - z- makes every
//! right-hand side nonnegative — vertex coordinates are probabilities —
//! so the all-slack basis is feasible and no phase-1 is needed. Problem
//! sizes here are a few hundred rows, where dense pivoting is both fast
//! and easy to trust.

use crate::error::{Error, Result};
use crate::geometry::DIM;

#[derive(Debug, Clone, Copy)]
pub struct LpSolution {
    pub lambda: [f64; DIM],
    /// Optimal value of lambda . v - z (the best grid gap).
    pub objective: f64,
}

/// Reduced-cost threshold for optimality.
const COST_TOL: f64 = 1e-9;
/// Smallest pivot magnitude accepted in the ratio test.
const PIVOT_TOL: f64 = 1e-11;
const MAX_ITERS: usize = 10_000;

pub fn separate(v: &[f64; DIM], vertices: &[[f64; DIM]]) -> Result<LpSolution> {
    if vertices.is_empty() {
        return Err(Error::InvalidParams("need at least one vertex to separate from".into()));
    }
    // Structural variables: mu[0..8], z+, z-.
    const NS: usize = DIM + 2;
    let rows = vertices.len() + DIM;
    let cols = NS + rows; // structural + one slack per row
    let mut a = vec![vec![0.0f64; cols]; rows];
    let mut b = vec![0.0f64; rows];
    for (k, m) in vertices.iter().enumerate() {
        // (mu - 1) . m - z <= 0  =>  mu . m - z+ + z- <= sum(m)
        a[k][..DIM].copy_from_slice(m);
        a[k][DIM] = -1.0;
        a[k][DIM + 1] = 1.0;
        a[k][NS + k] = 1.0;
        b[k] = m.iter().sum();
        if b[k] < 0.0 {
            return Err(Error::InvalidParams(format!(
                "vertex {k} has negative coordinates; not a probability point"
            )));
        }
    }
    for j in 0..DIM {
        let r = vertices.len() + j;
        a[r][j] = 1.0;
        a[r][NS + r] = 1.0;
        b[r] = 2.0;
    }
    // Maximize mu . v - z+ + z- (the -1 . v constant is restored at the end).
    let mut cost = vec![0.0f64; cols];
    cost[..DIM].copy_from_slice(v);
    cost[DIM] = -1.0;
    cost[DIM + 1] = 1.0;

    let mut basis: Vec<usize> = (NS..NS + rows).collect();
    let mut value = 0.0f64;
    // Dantzig pricing to start; Bland's rule after a generous budget to
    // break any degenerate cycling (zero rows are common here: the
    // all-zero vertex makes its slack basic at level 0).
    let bland_after = 2 * (rows + cols);
    for iter in 0..MAX_ITERS {
        let entering = if iter < bland_after {
            let mut best = COST_TOL;
            let mut pick = None;
            for (j, &c) in cost.iter().enumerate() {
                if c > best {
                    best = c;
                    pick = Some(j);
                }
            }
            pick
        } else {
            cost.iter().position(|&c| c > COST_TOL)
        };
        let Some(j) = entering else {
            // Optimal.
            let mut mu = [0.0f64; DIM];
            for (r, &var) in basis.iter().enumerate() {
                if var < DIM {
                    mu[var] = b[r];
                }
            }
            let lambda: [f64; DIM] = std::array::from_fn(|i| mu[i] - 1.0);
            let shift: f64 = v.iter().sum();
            return Ok(LpSolution { lambda, objective: value - shift });
        };
        // Ratio test; ties broken by smallest basic-variable index, which
        // together with first-positive pricing is Bland's anti-cycling rule.
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            if a[r][j] > PIVOT_TOL {
                let ratio = b[r] / a[r][j];
                let better = match leave {
                    None => true,
                    Some((rb, best)) => {
                        ratio < best - 1e-15
                            || (ratio < best + 1e-15 && basis[r] < basis[rb])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Numerical(
                "separation LP unbounded; vertex data violates the box model".into(),
            ));
        };
        // Pivot on (r, j).
        let piv = a[r][j];
        for x in a[r].iter_mut() {
            *x /= piv;
        }
        b[r] /= piv;
        for i in 0..rows {
            if i != r {
                let f = a[i][j];
                if f != 0.0 {
                    for c in 0..cols {
                        a[i][c] -= f * a[r][c];
                    }
                    b[i] -= f * b[r];
                    if b[i] < 0.0 && b[i] > -1e-12 {
                        b[i] = 0.0;
                    }
                }
            }
        }
        let f = cost[j];
        for c in 0..cols {
            cost[c] -= f * a[r][c];
        }
        value += f * b[r];
        basis[r] = j;
    }
    Err(Error::Numerical(format!("separation LP did not converge in {MAX_ITERS} pivots")))
}
