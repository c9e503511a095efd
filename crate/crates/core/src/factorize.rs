//! Box-constrained low-rank factorization of a light-field matrix given on
//! an active support.
//!
//! Multiplicative updates restricted to the active entries, followed by a
//! clip into [lower, 1]. The update minimizes an entrywise-separable
//! quadratic majorizer, so the clipped step keeps the weighted Frobenius
//! objective nonincreasing.

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::patterns::PatternSet;
use crate::projection::LightFieldSupport;
use crate::solver::SolverConfig;

const DEN_EPS: f64 = 1e-12;

/// Weighted Frobenius objective: sum over active entries of
/// (value - (F G^T))^2.
pub fn support_objective(
    support: &LightFieldSupport,
    values: &[f64],
    front: &Array2<f64>,
    rear: &Array2<f64>,
) -> f64 {
    let k = front.ncols();
    support
        .pairs
        .iter()
        .zip(values)
        .map(|(&(a, b), &v)| {
            let mut fg = 0.0;
            for j in 0..k {
                fg += front[(a as usize, j)] * rear[(b as usize, j)];
            }
            let d = v - fg;
            d * d
        })
        .sum()
}

/// One multiplicative alternation: update the front factor, then the rear,
/// each clipped into [lower, 1].
pub fn alternate_once(
    support: &LightFieldSupport,
    values: &[f64],
    front: &mut Array2<f64>,
    rear: &mut Array2<f64>,
    lower: f64,
) {
    update_factor(support, values, front, rear, lower, true);
    update_factor(support, values, front, rear, lower, false);
}

fn update_factor(
    support: &LightFieldSupport,
    values: &[f64],
    front: &mut Array2<f64>,
    rear: &mut Array2<f64>,
    lower: f64,
    update_front: bool,
) {
    let k = front.ncols();
    let m = front.nrows();
    let mut num = vec![0.0; m * k];
    let mut den = vec![0.0; m * k];
    for (&(a, b), &v) in support.pairs.iter().zip(values) {
        let (a, b) = (a as usize, b as usize);
        let mut fg = 0.0;
        for j in 0..k {
            fg += front[(a, j)] * rear[(b, j)];
        }
        let (target_row, other, other_row) = if update_front {
            (a, &*rear, b)
        } else {
            (b, &*front, a)
        };
        for j in 0..k {
            let o = other[(other_row, j)];
            num[target_row * k + j] += v * o;
            den[target_row * k + j] += fg * o;
        }
    }
    let target = if update_front { front } else { rear };
    for i in 0..m {
        for j in 0..k {
            let cur = target[(i, j)];
            let next = cur * num[i * k + j] / (den[i * k + j] + DEN_EPS);
            target[(i, j)] = next.clamp(lower, 1.0);
        }
    }
}

/// Deterministic factor initialization in [max(0.2, lower), 0.8].
pub fn seeded_factors(
    m: usize,
    k: usize,
    lower: f64,
    seed: u64,
) -> (Array2<f64>, Array2<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new(lower.max(0.2), 0.8);
    let mut front = Array2::zeros((m, k));
    let mut rear = Array2::zeros((m, k));
    for v in front.iter_mut() {
        *v = dist.sample(&mut rng);
    }
    for v in rear.iter_mut() {
        *v = dist.sample(&mut rng);
    }
    (front, rear)
}

/// Rank-K factorization of `values` on `support` with both factors bounded
/// in [lower, 1]. Deterministic for a fixed `cfg.seed`; runs
/// `cfg.fact_iters` alternations.
pub fn factorize_box(
    support: &LightFieldSupport,
    values: &[f64],
    panel_cols: usize,
    panel_rows: usize,
    k: usize,
    lower: f64,
    cfg: &SolverConfig,
) -> Result<PatternSet> {
    let m = panel_cols * panel_rows;
    if support.panel_pixels != m {
        return Err(Error::Dimension("support panel size mismatch".into()));
    }
    if values.len() != support.len() {
        return Err(Error::Dimension(format!(
            "values length {} != support {}",
            values.len(),
            support.len()
        )));
    }
    if k == 0 || k > m {
        return Err(Error::invalid(format!("rank {} must be in [1, {}]", k, m)));
    }
    if !(0.0..1.0).contains(&lower) {
        return Err(Error::invalid("lower bound must be in [0, 1)"));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("factorization target must be finite and >= 0"));
    }
    let (mut front, mut rear) = seeded_factors(m, k, lower, cfg.seed);
    for _ in 0..cfg.fact_iters {
        alternate_once(support, values, &mut front, &mut rear, lower);
    }
    PatternSet::new(front, rear, lower, panel_cols, panel_rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverConfig;

    fn full_support(cols: usize, rows: usize) -> LightFieldSupport {
        let m = (cols * rows) as u32;
        let pairs = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .collect();
        LightFieldSupport {
            panel_pixels: cols * rows,
            pairs,
        }
    }

    fn cfg_with_iters(iters: usize, seed: u64) -> SolverConfig {
        SolverConfig {
            fact_iters: iters,
            seed,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn exact_rank_one_input_recovered() {
        let (cols, rows) = (3, 3);
        let m = cols * rows;
        let f: Vec<f64> = (0..m).map(|i| 0.15 + 0.08 * i as f64).collect();
        let g: Vec<f64> = (0..m).map(|i| 0.9 - 0.07 * i as f64).collect();
        let support = full_support(cols, rows);
        let values: Vec<f64> = support
            .pairs
            .iter()
            .map(|&(a, b)| f[a as usize] * g[b as usize])
            .collect();
        let pat = factorize_box(&support, &values, cols, rows, 1, 0.0, &cfg_with_iters(4000, 7))
            .unwrap();
        let resid = support_objective(&support, &values, &pat.front, &pat.rear).sqrt();
        assert!(resid <= 1e-6, "residual {} too large", resid);
    }

    #[test]
    fn zero_matrix_reaches_zero_objective() {
        let support = full_support(2, 2);
        let values = vec![0.0; support.len()];
        let pat = factorize_box(&support, &values, 2, 2, 2, 0.0, &cfg_with_iters(5, 1)).unwrap();
        let obj = support_objective(&support, &values, &pat.front, &pat.rear);
        assert!(obj <= 1e-20, "objective {}", obj);
    }

    #[test]
    fn objective_monotone_under_alternations() {
        let support = full_support(4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let dist = Uniform::new(0.0, 1.0);
        let values: Vec<f64> = (0..support.len()).map(|_| dist.sample(&mut rng)).collect();
        for lower in [0.0, 0.15] {
            let (mut f, mut g) = seeded_factors(8, 2, lower, 3);
            let mut prev = support_objective(&support, &values, &f, &g);
            for step in 0..200 {
                alternate_once(&support, &values, &mut f, &mut g, lower);
                let cur = support_objective(&support, &values, &f, &g);
                assert!(
                    cur <= prev + 1e-9 * prev.max(1.0),
                    "objective rose at step {} (lower {}): {} -> {}",
                    step,
                    lower,
                    prev,
                    cur
                );
                prev = cur;
            }
        }
    }

    #[test]
    fn respects_lower_bound() {
        let support = full_support(3, 3);
        let values = vec![0.0; support.len()];
        let pat =
            factorize_box(&support, &values, 3, 3, 2, 0.25, &cfg_with_iters(50, 5)).unwrap();
        assert!(pat.front.iter().all(|&v| (0.25..=1.0).contains(&v)));
        assert!(pat.rear.iter().all(|&v| (0.25..=1.0).contains(&v)));
    }

    #[test]
    fn rank_larger_than_panel_rejected() {
        let support = full_support(2, 1);
        let values = vec![0.5; support.len()];
        assert!(factorize_box(&support, &values, 2, 1, 3, 0.0, &cfg_with_iters(1, 0)).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let support = full_support(3, 2);
        let values: Vec<f64> = (0..support.len()).map(|i| (i as f64 * 0.37).fract()).collect();
        let a = factorize_box(&support, &values, 3, 2, 2, 0.0, &cfg_with_iters(60, 42)).unwrap();
        let b = factorize_box(&support, &values, 3, 2, 2, 0.0, &cfg_with_iters(60, 42)).unwrap();
        assert_eq!(a.front, b.front);
        assert_eq!(a.rear, b.rear);
        let c = factorize_box(&support, &values, 3, 2, 2, 0.0, &cfg_with_iters(60, 43)).unwrap();
        assert_ne!(a.front, c.front);
    }

    // Oracle: projected alternating least squares with random restarts. Each
    // factor update solves the unconstrained least-squares column problem and
    // projects onto [0, 1]; independent of the multiplicative path.
    fn projected_als_objective(
        support: &LightFieldSupport,
        values: &[f64],
        m: usize,
        k: usize,
        iters: usize,
        seed: u64,
    ) -> f64 {
        let (mut f, mut g) = seeded_factors(m, k, 0.0, seed);
        for _ in 0..iters {
            for target_is_front in [true, false] {
                // normal equations per row of the factor being updated
                let mut gram = vec![0.0; m * k * k];
                let mut rhs = vec![0.0; m * k];
                for (&(a, b), &v) in support.pairs.iter().zip(values) {
                    let (row, other, orow) = if target_is_front {
                        (a as usize, &g, b as usize)
                    } else {
                        (b as usize, &f, a as usize)
                    };
                    for p in 0..k {
                        rhs[row * k + p] += v * other[(orow, p)];
                        for q in 0..k {
                            gram[row * k * k + p * k + q] +=
                                other[(orow, p)] * other[(orow, q)];
                        }
                    }
                }
                let target = if target_is_front { &mut f } else { &mut g };
                for row in 0..m {
                    let a = &gram[row * k * k..(row + 1) * k * k];
                    let b = &rhs[row * k..(row + 1) * k];
                    let x = solve_small(a, b, k);
                    for p in 0..k {
                        target[(row, p)] = x[p].clamp(0.0, 1.0);
                    }
                }
            }
        }
        support_objective(support, values, &f, &g)
    }

    fn solve_small(a: &[f64], b: &[f64], k: usize) -> Vec<f64> {
        // Gaussian elimination with partial pivoting and a ridge for
        // singular rows.
        let mut m = vec![0.0; k * (k + 1)];
        for i in 0..k {
            for j in 0..k {
                m[i * (k + 1) + j] = a[i * k + j] + if i == j { 1e-12 } else { 0.0 };
            }
            m[i * (k + 1) + k] = b[i];
        }
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&r, &s| {
                    m[r * (k + 1) + col]
                        .abs()
                        .partial_cmp(&m[s * (k + 1) + col].abs())
                        .unwrap()
                })
                .unwrap();
            if piv != col {
                for j in 0..=k {
                    m.swap(col * (k + 1) + j, piv * (k + 1) + j);
                }
            }
            let d = m[col * (k + 1) + col];
            if d.abs() < 1e-300 {
                continue;
            }
            for r in 0..k {
                if r == col {
                    continue;
                }
                let factor = m[r * (k + 1) + col] / d;
                for j in col..=k {
                    m[r * (k + 1) + j] -= factor * m[col * (k + 1) + j];
                }
            }
        }
        (0..k)
            .map(|i| {
                let d = m[i * (k + 1) + i];
                if d.abs() < 1e-300 {
                    0.0
                } else {
                    m[i * (k + 1) + k] / d
                }
            })
            .collect()
    }

    #[test]
    fn within_five_percent_of_multi_restart_als_oracle() {
        let (cols, rows) = (4, 2);
        let m = cols * rows;
        let support = full_support(cols, rows);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let dist = Uniform::new(0.0, 1.0);
        let values: Vec<f64> = (0..support.len()).map(|_| dist.sample(&mut rng)).collect();

        let best_oracle = (0..20)
            .map(|s| projected_als_objective(&support, &values, m, 2, 400, 1000 + s))
            .fold(f64::INFINITY, f64::min);

        let pat =
            factorize_box(&support, &values, cols, rows, 2, 0.0, &cfg_with_iters(2000, 11))
                .unwrap();
        let ours = support_objective(&support, &values, &pat.front, &pat.rear);
        assert!(
            ours <= best_oracle * 1.05 + 1e-12,
            "ours {} vs oracle {}",
            ours,
            best_oracle
        );
    }
}
