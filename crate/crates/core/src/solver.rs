//! Pattern synthesis: split the bounded low-rank deconvolution objective
//! with the intermediate light field as the splitting variable and alternate
//!
//!   1. light-field update  — relaxed SART sweeps on the stacked system
//!                            { L ~ F G^T ; projection(L) ~ target - dual },
//!                            projected onto L >= 0 after every sweep,
//!   2. factor update       — bounded multiplicative alternations fitting
//!                            F G^T to L on the active support,
//!   3. dual update         — u += projected(L) - target.
//!
//! L carries the summed (not averaged) frame products, matching the
//! factorization term; the projection of L is divided by K so it matches the
//! perceived image, which averages the K subframes.

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::metrics::psnr;
use crate::error::{Error, Result};
use crate::factorize::alternate_once;
use crate::image::ImagePlane;
use crate::patterns::PatternSet;
use crate::projection::{lightfield_on_support, ProjectionOperator};

/// Iteration budgets and numeric parameters for the splitting solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Outer splitting iterations.
    pub outer_iters: usize,
    /// SART sweeps per light-field update.
    pub sart_iters: usize,
    /// Factor alternations per factorization call.
    pub fact_iters: usize,
    /// Penalty weight on the projection consensus term.
    pub rho: f64,
    /// Early exit when the primal residual drops below tol * ||target||.
    pub tol_primal: f64,
    pub seed: u64,
    /// SART relaxation in (0, 2]; 0.5 is a safe default for inconsistent
    /// systems.
    pub relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            outer_iters: 100,
            sart_iters: 8,
            fact_iters: 1,
            rho: 1.0,
            tol_primal: 1e-6,
            seed: 0,
            relaxation: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 || self.sart_iters == 0 || self.fact_iters == 0 {
            return Err(Error::invalid("iteration counts must be >= 1"));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::invalid("rho must be > 0"));
        }
        if !(self.tol_primal > 0.0) {
            return Err(Error::invalid("tol_primal must be > 0"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 2.0) {
            return Err(Error::invalid("relaxation must be in (0, 2]"));
        }
        Ok(())
    }
}

/// Splitting state: the light field on the active support and the scaled
/// dual over target pixels.
#[derive(Debug, Clone)]
pub struct LightFieldVar {
    /// Summed-frame light field values over the support; >= 0.
    pub lf: Vec<f64>,
    /// Scaled dual variable, one entry per target pixel.
    pub dual: Vec<f64>,
    /// Penalty weight rho.
    pub rho: f64,
}

/// Per-outer-iteration progress record.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// ||projected(L) - target||_2.
    pub primal_residual: f64,
    /// ||F G^T - L||_F over the active support.
    pub fact_error: f64,
    /// PSNR of the pattern-set image against the target, dB.
    pub psnr_db: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SolveDiagnostics {
    pub iterations: Vec<IterationRecord>,
    /// True when the primal tolerance stopped the loop early.
    pub converged: bool,
}

impl SolveDiagnostics {
    pub fn csv(&self) -> String {
        let mut s = String::from("iter,primal_residual,fact_error,psnr\n");
        for r in &self.iterations {
            s.push_str(&format!(
                "{},{:.12e},{:.12e},{:.6}\n",
                r.iter, r.primal_residual, r.fact_error, r.psnr_db
            ));
        }
        s
    }
}

/// One relaxed SART pass over the stacked system. Returns the updated
/// projection image of L (length N, averaged scale).
fn sart_sweep(
    op: &ProjectionOperator,
    fg: &[f64],
    target_minus_dual: &[f64],
    lf: &mut Vec<f64>,
    rho: f64,
    k: usize,
    relaxation: f64,
) {
    let k_f = k as f64;
    let proj = op
        .apply_lightfield(lf)
        .expect("support length is fixed during sweeps");
    let residual: Vec<f64> = proj
        .iter()
        .zip(target_minus_dual)
        .map(|(p, y)| y - p / k_f)
        .collect();
    let back = op
        .apply_adjoint(&residual)
        .expect("residual length is fixed during sweeps");
    let col_sums = op.col_sums();
    for (idx, l) in lf.iter_mut().enumerate() {
        let denom = 1.0 + rho * col_sums[idx] / (k_f * k_f);
        let grad = (fg[idx] - *l) + (rho / k_f) * back[idx];
        *l = (*l + relaxation * grad / denom).max(0.0);
    }
}

/// Subproblem objective ||L - F G^T||^2 + rho ||projected(L) - y||^2 with
/// y = target - dual.
pub fn lightfield_subproblem_objective(
    op: &ProjectionOperator,
    fg: &[f64],
    target_minus_dual: &[f64],
    lf: &[f64],
    rho: f64,
    k: usize,
) -> f64 {
    let k_f = k as f64;
    let fit: f64 = lf.iter().zip(fg).map(|(l, f)| (l - f) * (l - f)).sum();
    let proj = op.apply_lightfield(lf).expect("support length matches");
    let data: f64 = proj
        .iter()
        .zip(target_minus_dual)
        .map(|(p, y)| {
            let d = p / k_f - y;
            d * d
        })
        .sum();
    fit + rho * data
}

/// Light-field update of the splitting scheme: `cfg.sart_iters` relaxed SART
/// sweeps with nonnegativity projection after each sweep. Accepts rho = 0
/// (pure proximal fit to F G^T); negative rho is rejected.
pub fn solve_lightfield_subproblem(
    state: &mut LightFieldVar,
    pat: &PatternSet,
    op: &ProjectionOperator,
    target: &ImagePlane,
    cfg: &SolverConfig,
) -> Result<()> {
    if !(state.rho >= 0.0) || !state.rho.is_finite() {
        return Err(Error::invalid("rho must be >= 0 and finite"));
    }
    if state.lf.len() != op.support.len() {
        return Err(Error::Dimension("light field / support mismatch".into()));
    }
    if target.pixel_count() != op.n_rows || target.channels != 1 {
        return Err(Error::Dimension("target / operator mismatch".into()));
    }
    let fg = summed_products(&op.support, pat);
    let y: Vec<f64> = target
        .data
        .iter()
        .zip(&state.dual)
        .map(|(i, u)| i - u)
        .collect();
    for _ in 0..cfg.sart_iters {
        sart_sweep(op, &fg, &y, &mut state.lf, state.rho, pat.k, cfg.relaxation);
    }
    Ok(())
}

/// F G^T (summed over frames, no 1/K) on the support.
pub fn summed_products(
    support: &crate::projection::LightFieldSupport,
    pat: &PatternSet,
) -> Vec<f64> {
    lightfield_on_support(support, pat)
        .into_iter()
        .map(|v| v * pat.k as f64)
        .collect()
}

/// Decompose a superresolved target into K bounded pattern pairs.
pub fn decompose_superres(
    target: &ImagePlane,
    op: &ProjectionOperator,
    k: usize,
    cfg: &SolverConfig,
) -> Result<(PatternSet, SolveDiagnostics)> {
    cfg.validate()?;
    if target.channels != 1 {
        return Err(Error::invalid(
            "decompose_superres expects a single-channel target",
        ));
    }
    if target.cols != op.target_cols || target.rows != op.target_rows {
        return Err(Error::Dimension(format!(
            "target {}x{} != operator target {}x{}",
            target.cols, target.rows, op.target_cols, op.target_rows
        )));
    }
    if target.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target contains non-finite values"));
    }
    let m = op.panel_pixels();
    if k == 0 || k > m {
        return Err(Error::invalid(format!("rank {} must be in [1, {}]", k, m)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dist = Uniform::new(0.2, 0.8);
    let mut front = Array2::zeros((m, k));
    let mut rear = Array2::zeros((m, k));
    for v in front.iter_mut() {
        *v = dist.sample(&mut rng);
    }
    for v in rear.iter_mut() {
        *v = dist.sample(&mut rng);
    }
    let mut pat = PatternSet::new(front, rear, 0.0, op.panel_cols, op.panel_rows)?;

    let mut state = LightFieldVar {
        lf: summed_products(&op.support, &pat),
        dual: vec![0.0; op.n_rows],
        rho: cfg.rho,
    };
    let target_norm = target.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut diags = SolveDiagnostics::default();

    for iter in 1..=cfg.outer_iters {
        solve_lightfield_subproblem(&mut state, &pat, op, target, cfg)?;

        for _ in 0..cfg.fact_iters {
            alternate_once(&op.support, &state.lf, &mut pat.front, &mut pat.rear, 0.0);
        }

        let proj = op.apply_lightfield(&state.lf)?;
        let k_f = k as f64;
        let mut primal_sq = 0.0;
        for n in 0..op.n_rows {
            let r = proj[n] / k_f - target.data[n];
            state.dual[n] += r;
            primal_sq += r * r;
        }
        let primal = primal_sq.sqrt();

        let fg = summed_products(&op.support, &pat);
        let fact_error = state
            .lf
            .iter()
            .zip(&fg)
            .map(|(l, f)| (l - f) * (l - f))
            .sum::<f64>()
            .sqrt();
        let shown = op.apply(&pat)?;
        let quality = psnr(&shown, target)?;

        let finite = state.lf.iter().all(|v| v.is_finite())
            && state.dual.iter().all(|v| v.is_finite())
            && pat.front.iter().all(|v| v.is_finite())
            && pat.rear.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::SolverDiverged { iter });
        }

        diags.iterations.push(IterationRecord {
            iter,
            primal_residual: primal,
            fact_error,
            psnr_db: quality,
        });

        if primal < cfg.tol_primal * target_norm {
            diags.converged = true;
            break;
        }
    }

    debug_assert!(state.lf.iter().all(|&v| v >= 0.0));
    Ok((pat, diags))
}
