//! Condition number of the projection operator, the scene-independent
//! figure of merit for a display configuration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::projection::ProjectionOperator;

/// Dense-materialization limit for the smaller Gram dimension.
pub const MAX_TILE: usize = 4096;

/// Ratio of extreme singular values of the operator restricted to its
/// active columns, computed from the smaller-side Gram matrix. Returns
/// `f64::INFINITY` when the smallest singular value falls below
/// 1e-12 times the largest.
pub fn condition_number(op: &ProjectionOperator) -> Result<f64> {
    let n = op.n_rows;
    let c = op.support.len();
    let small = n.min(c);
    if small == 0 {
        return Err(Error::Analysis("operator has no active entries".into()));
    }
    if small > MAX_TILE {
        return Err(Error::TileTooLarge {
            rows: n,
            cols: c,
            limit: MAX_TILE,
        });
    }

    let gram = if c <= n {
        // A^T A over active columns
        let mut g = DMatrix::<f64>::zeros(c, c);
        for row in 0..n {
            let entries: Vec<(usize, f64)> = op.row(row).collect();
            for &(i, wi) in &entries {
                for &(j, wj) in &entries {
                    g[(i, j)] += wi * wj;
                }
            }
        }
        g
    } else {
        // A A^T via per-column row lists
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); c];
        for row in 0..n {
            for (idx, w) in op.row(row) {
                cols[idx].push((row as u32, w));
            }
        }
        let mut g = DMatrix::<f64>::zeros(n, n);
        for col in &cols {
            for &(ri, wi) in col {
                for &(rj, wj) in col {
                    g[(ri as usize, rj as usize)] += wi * wj;
                }
            }
        }
        g
    };

    let eigs = gram.symmetric_eigenvalues();
    let mut lambda_max = 0.0f64;
    let mut lambda_min = f64::INFINITY;
    for &l in eigs.iter() {
        let l = l.max(0.0);
        lambda_max = lambda_max.max(l);
        lambda_min = lambda_min.min(l);
    }
    if lambda_max == 0.0 {
        return Err(Error::Analysis("operator is identically zero".into()));
    }
    let sigma_max = lambda_max.sqrt();
    let sigma_min = lambda_min.sqrt();
    if sigma_min < 1e-12 * sigma_max {
        return Ok(f64::INFINITY);
    }
    Ok(sigma_max / sigma_min)
}
