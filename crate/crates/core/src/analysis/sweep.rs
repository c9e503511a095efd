//! Parameter sweeps over the display design space: conditioning landscapes
//! and reconstruction-quality curves.

use rayon::prelude::*;

use crate::analysis::conditioning::condition_number;
use crate::analysis::metrics::psnr;
use crate::config::DisplayConfig;
use crate::error::{Error, Result};
use crate::geometry::{DiffuserModel, DisplayGeometry};
use crate::image::ImagePlane;
use crate::projection::build_projection;
use crate::solver::{decompose_superres, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Condition number over (diffuser distance, diffuser spread).
    Conditioning,
    /// Reconstruction PSNR over the diffuser distance.
    DistancePsnr,
    /// Reconstruction PSNR over the light-field rank K.
    RankPsnr,
    /// Reconstruction PSNR over the superresolution factor.
    FactorPsnr,
}

impl SweepKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "conditioning" => Some(SweepKind::Conditioning),
            "distance" | "distance_psnr" => Some(SweepKind::DistancePsnr),
            "rank" | "rank_psnr" => Some(SweepKind::RankPsnr),
            "factor" | "factor_psnr" => Some(SweepKind::FactorPsnr),
            _ => None,
        }
    }
}

/// Grid specification; kinds read the axes they need.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub distances_mm: Vec<f64>,
    pub spreads_deg: Vec<f64>,
    pub ranks: Vec<usize>,
    pub factors: Vec<f64>,
    /// Rank used by the distance and factor sweeps.
    pub fixed_rank: usize,
    /// Conditioning tile edge in superpixels.
    pub tile_superpixels: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            distances_mm: vec![0.3, 0.6, 1.2, 2.5, 5.0, 10.0],
            spreads_deg: vec![1.0, 2.5, 5.0, 7.5, 10.0, 15.0, 20.0],
            ranks: vec![1, 2, 4, 6, 8],
            factors: vec![2.0, 3.0],
            fixed_rank: 4,
            tile_superpixels: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub axis_names: Vec<String>,
    pub axis_values: Vec<Vec<f64>>,
    pub metric_name: String,
    /// Row-major over the cartesian product of the axes.
    pub metric: Vec<f64>,
}

impl SweepResult {
    pub fn csv(&self) -> String {
        let mut s = self.axis_names.join(",");
        s.push(',');
        s.push_str(&self.metric_name);
        s.push('\n');
        let shape: Vec<usize> = self.axis_values.iter().map(|a| a.len()).collect();
        for (i, m) in self.metric.iter().enumerate() {
            let mut rem = i;
            let mut coords = vec![0usize; shape.len()];
            for d in (0..shape.len()).rev() {
                coords[d] = rem % shape[d];
                rem /= shape[d];
            }
            for (d, &c) in coords.iter().enumerate() {
                s.push_str(&format!("{},", self.axis_values[d][c]));
            }
            s.push_str(&format!("{}\n", m));
        }
        s
    }

    /// Coordinates of the minimum metric value.
    pub fn argmin(&self) -> Vec<f64> {
        let (best, _) = self
            .metric
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("non-empty sweep");
        let shape: Vec<usize> = self.axis_values.iter().map(|a| a.len()).collect();
        let mut rem = best;
        let mut coords = vec![0.0; shape.len()];
        for d in (0..shape.len()).rev() {
            coords[d] = self.axis_values[d][rem % shape[d]];
            rem /= shape[d];
        }
        coords
    }
}

/// Run a sweep. PSNR kinds require `image`; the factor sweep resamples it to
/// each target grid.
pub fn sweep(
    kind: SweepKind,
    grid: &SweepGrid,
    display: &DisplayConfig,
    image: Option<&ImagePlane>,
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    match kind {
        SweepKind::Conditioning => conditioning_sweep(grid, display),
        SweepKind::DistancePsnr => {
            let img = require_image(image)?;
            let points = grid.distances_mm.clone();
            let metric = run_points(&points, |&d| {
                let mut disp = display.clone();
                disp.geometry.gap_diffuser = d;
                psnr_for(&disp, img, grid.fixed_rank, cfg, true)
            })?;
            Ok(SweepResult {
                kind,
                axis_names: vec!["distance_mm".into()],
                axis_values: vec![points],
                metric_name: "psnr_db".into(),
                metric,
            })
        }
        SweepKind::RankPsnr => {
            let img = require_image(image)?;
            let points = grid.ranks.clone();
            let metric = run_points(&points, |&k| psnr_for(display, img, k, cfg, false))?;
            Ok(SweepResult {
                kind,
                axis_names: vec!["rank".into()],
                axis_values: vec![points.iter().map(|&k| k as f64).collect()],
                metric_name: "psnr_db".into(),
                metric,
            })
        }
        SweepKind::FactorPsnr => {
            let img = require_image(image)?;
            let points = grid.factors.clone();
            let metric = run_points(&points, |&f| {
                let mut disp = display.clone();
                disp.geometry.sr_factor = f;
                psnr_for(&disp, img, grid.fixed_rank, cfg, true)
            })?;
            Ok(SweepResult {
                kind,
                axis_names: vec!["sr_factor".into()],
                axis_values: vec![points],
                metric_name: "psnr_db".into(),
                metric,
            })
        }
    }
}

fn require_image(image: Option<&ImagePlane>) -> Result<&ImagePlane> {
    image.ok_or_else(|| Error::invalid("this sweep kind needs a test image"))
}

fn run_points<P: Sync, F: Sync + Fn(&P) -> Result<f64>>(
    points: &[P],
    eval: F,
) -> Result<Vec<f64>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            eval(p).map_err(|e| Error::Analysis(format!("at grid point {}: {}", i, e)))
        })
        .collect()
}

fn conditioning_sweep(grid: &SweepGrid, display: &DisplayConfig) -> Result<SweepResult> {
    let sr = display.geometry.sr_factor;
    let tile_panel = ((grid.tile_superpixels as f64 / sr).round() as usize).max(2);
    let points: Vec<(f64, f64)> = grid
        .distances_mm
        .iter()
        .flat_map(|&d| grid.spreads_deg.iter().map(move |&s| (d, s)))
        .collect();
    let metric = run_points(&points, |&(d, spread)| {
        let geom = DisplayGeometry::new(
            tile_panel,
            tile_panel,
            display.geometry.panel_pitch,
            display.geometry.gap_panels,
            d,
            sr,
        )?;
        let model =
            DiffuserModel::with_default_samples(spread, display.diffuser.profile, &geom)?;
        let op = build_projection(&geom, &model)?;
        condition_number(&op)
    })?;
    Ok(SweepResult {
        kind: SweepKind::Conditioning,
        axis_names: vec!["distance_mm".into(), "spread_deg".into()],
        axis_values: vec![grid.distances_mm.clone(), grid.spreads_deg.clone()],
        metric_name: "condition_number".into(),
        metric,
    })
}

fn psnr_for(
    display: &DisplayConfig,
    image: &ImagePlane,
    k: usize,
    cfg: &SolverConfig,
    resample: bool,
) -> Result<f64> {
    let geom = &display.geometry;
    let model = DiffuserModel::with_default_samples(
        display.diffuser.half_angle,
        display.diffuser.profile,
        geom,
    )?;
    let op = build_projection(geom, &model)?;
    let target = if resample {
        resample_area(image, geom.target_cols(), geom.target_rows())
    } else {
        image.clone()
    };
    let (pat, _) = decompose_superres(&target, &op, k, cfg)?;
    let shown = op.apply(&pat)?;
    psnr(&shown, &target)
}

/// Area-weighted resampling between arbitrary grid sizes (separable).
pub fn resample_area(img: &ImagePlane, new_cols: usize, new_rows: usize) -> ImagePlane {
    let wx = axis_overlap(img.cols, new_cols);
    let wy = axis_overlap(img.rows, new_rows);
    let mut out = ImagePlane::zeros(new_cols, new_rows);
    for (ny, wys) in wy.iter().enumerate() {
        for (nx, wxs) in wx.iter().enumerate() {
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for &(sy, vy) in wys {
                for &(sx, vx) in wxs {
                    acc += vy * vx * img.get(sx, sy);
                    wsum += vy * vx;
                }
            }
            out.set(nx, ny, acc / wsum);
        }
    }
    out
}

fn axis_overlap(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let lo = d as f64 * scale;
            let hi = (d + 1) as f64 * scale;
            let s0 = lo.floor() as usize;
            let s1 = (hi.ceil() as usize).min(src);
            let mut ws = Vec::new();
            for s in s0..s1 {
                let overlap = (hi.min((s + 1) as f64) - lo.max(s as f64)).max(0.0);
                if overlap > 1e-12 {
                    ws.push((s, overlap));
                }
            }
            ws
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::charts;
    use crate::config::parse_config;

    fn small_display() -> DisplayConfig {
        parse_config(
            "panel_cols = 8\npanel_rows = 8\npanel_pitch = 0.282\ngap_panels = 6.0\n\
             gap_diffuser = 1.0\nsr_factor = 2\nhalf_angle = 7.5\nprofile = cosine\n",
        )
        .unwrap()
    }

    fn quick_cfg() -> SolverConfig {
        SolverConfig {
            outer_iters: 30,
            sart_iters: 6,
            fact_iters: 1,
            seed: 7,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn single_point_grid_equals_direct_run() {
        let display = small_display();
        let img = charts::texture(16, 16, 11);
        let grid = SweepGrid {
            ranks: vec![2],
            ..SweepGrid::default()
        };
        let res = sweep(SweepKind::RankPsnr, &grid, &display, Some(&img), &quick_cfg()).unwrap();
        assert_eq!(res.metric.len(), 1);

        let direct = psnr_for(&display, &img, 2, &quick_cfg(), false).unwrap();
        assert_eq!(res.metric[0], direct);
    }

    #[test]
    fn conditioning_sweep_has_full_table() {
        let display = small_display();
        let grid = SweepGrid {
            distances_mm: vec![0.5, 2.0],
            spreads_deg: vec![5.0, 10.0],
            tile_superpixels: 8,
            ..SweepGrid::default()
        };
        let res = sweep(SweepKind::Conditioning, &grid, &display, None, &quick_cfg()).unwrap();
        assert_eq!(res.metric.len(), 4);
        assert!(res.metric.iter().all(|m| *m >= 1.0));
        let csv = res.csv();
        assert!(csv.starts_with("distance_mm,spread_deg,condition_number\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn missing_image_is_an_error() {
        let display = small_display();
        let grid = SweepGrid::default();
        assert!(sweep(SweepKind::RankPsnr, &grid, &display, None, &quick_cfg()).is_err());
    }

    #[test]
    fn resample_preserves_constants_and_means() {
        let img = ImagePlane::constant(9, 6, 0.4);
        let out = resample_area(&img, 4, 3);
        for v in &out.data {
            assert!((v - 0.4).abs() < 1e-12);
        }
        let tex = charts::texture(12, 12, 3);
        let down = resample_area(&tex, 6, 6);
        assert!((down.mean() - tex.mean()).abs() < 1e-9);
    }
}
