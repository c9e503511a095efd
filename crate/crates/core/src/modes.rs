//! Diffuser-off operating modes of the same hardware: high-dynamic-range 2D
//! display and glasses-free 3D light-field display.
//!
//! Both reduce to a bounded low-rank factorization of a light-field target
//! matrix. HDR builds a target with no angular variation; 3D fits a set of
//! per-view images over an integer-disparity view grid.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::factorize::factorize_box;
use crate::geometry::DisplayGeometry;
use crate::image::ImagePlane;
use crate::patterns::PatternSet;
use crate::projection::LightFieldSupport;
use crate::solver::SolverConfig;

/// Rectangular grid of view directions, spaced so that consecutive views
/// shift the rear panel by `disparity_step_px` pixels relative to the front
/// (integer steps keep rays exactly on pixel centers).
#[derive(Debug, Clone, PartialEq)]
pub struct ViewGrid {
    pub cols: usize,
    pub rows: usize,
    pub disparity_step_px: f64,
}

impl ViewGrid {
    pub fn new(cols: usize, rows: usize, disparity_step_px: f64) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::invalid("view grid must be non-empty"));
        }
        if !(disparity_step_px >= 0.0) || !disparity_step_px.is_finite() {
            return Err(Error::invalid("disparity step must be >= 0"));
        }
        Ok(ViewGrid {
            cols,
            rows,
            disparity_step_px,
        })
    }

    pub fn view_count(&self) -> usize {
        self.cols * self.rows
    }

    /// Centered integer view indices, row-major: (jx, jy).
    pub fn indices(&self) -> Vec<(i64, i64)> {
        let half = |n: usize| (n as i64 - 1) / 2;
        let (hx, hy) = (half(self.cols), half(self.rows));
        let mut out = Vec::with_capacity(self.view_count());
        for jy in 0..self.rows as i64 {
            for jx in 0..self.cols as i64 {
                out.push((jx - hx, jy - hy));
            }
        }
        out
    }

    /// Rear-panel pixel shift of view (jx, jy) per axis.
    pub fn shift_px(&self, j: (i64, i64)) -> (f64, f64) {
        (
            j.0 as f64 * self.disparity_step_px,
            j.1 as f64 * self.disparity_step_px,
        )
    }

    /// View direction in degrees for the given indices under `geom`.
    pub fn view_angle_deg(&self, j: (i64, i64), geom: &DisplayGeometry) -> (f64, f64) {
        let (sx_px, sy_px) = self.shift_px(j);
        let to_deg = |px: f64| {
            (px * geom.panel_pitch / geom.gap_panels).atan().to_degrees()
        };
        (to_deg(sx_px), to_deg(sy_px))
    }
}

/// Light-field target matrix: values on an active support, weight one per
/// active entry and zero elsewhere.
#[derive(Debug, Clone)]
pub struct LightFieldTarget {
    pub support: LightFieldSupport,
    pub values: Vec<f64>,
    pub panel_cols: usize,
    pub panel_rows: usize,
}

/// Build a light-field target from one image per view (row-major over the
/// grid), each at panel resolution. Every in-bounds ray (front pixel, view)
/// activates the rear pixel it lands on with the view image's value.
pub fn build_lightfield_target(
    views: &[ImagePlane],
    geom: &DisplayGeometry,
    grid: &ViewGrid,
) -> Result<LightFieldTarget> {
    if views.len() != grid.view_count() {
        return Err(Error::Dimension(format!(
            "{} view images for a {}x{} grid",
            views.len(),
            grid.cols,
            grid.rows
        )));
    }
    let pc = geom.panel_cols;
    let pr = geom.panel_rows;
    for v in views {
        if v.cols != pc || v.rows != pr || v.channels != 1 {
            return Err(Error::Dimension(
                "view images must be single-channel at panel resolution".into(),
            ));
        }
    }

    let mut acc: HashMap<(u32, u32), (f64, usize)> = HashMap::new();
    for (img, j) in views.iter().zip(grid.indices()) {
        let (dx, dy) = grid.shift_px(j);
        for ay in 0..pr {
            let by = ay as f64 - dy;
            let by_round = by.round();
            if (by - by_round).abs() > 1e-9 {
                return Err(Error::invalid(
                    "non-integer rear-pixel disparity; use an integer disparity step",
                ));
            }
            let by = by_round as i64;
            if by < 0 || by >= pr as i64 {
                continue;
            }
            for ax in 0..pc {
                let bx = ax as f64 - dx;
                let bx = bx.round() as i64;
                if bx < 0 || bx >= pc as i64 {
                    continue;
                }
                let a = (ay * pc + ax) as u32;
                let b = (by as usize * pc + bx as usize) as u32;
                let e = acc.entry((a, b)).or_insert((0.0, 0));
                e.0 += img.get(ax, ay);
                e.1 += 1;
            }
        }
    }
    if acc.is_empty() {
        return Err(Error::invalid("no view ray intersects both panels"));
    }
    let mut pairs: Vec<(u32, u32)> = acc.keys().copied().collect();
    pairs.sort_unstable();
    let values = pairs
        .iter()
        .map(|p| {
            let (sum, count) = acc[p];
            sum / count as f64
        })
        .collect();
    Ok(LightFieldTarget {
        support: LightFieldSupport {
            panel_pixels: pc * pr,
            pairs,
        },
        values,
        panel_cols: pc,
        panel_rows: pr,
    })
}

/// Target with no angular variation: every view shows `image`.
pub fn build_uniform_lightfield_target(
    image: &ImagePlane,
    geom: &DisplayGeometry,
    grid: &ViewGrid,
) -> Result<LightFieldTarget> {
    let views = vec![image.clone(); grid.view_count()];
    build_lightfield_target(&views, geom, grid)
}

/// Weighted box-constrained rank-K factorization of a light-field target.
pub fn decompose_3d(
    target: &LightFieldTarget,
    k: usize,
    cfg: &SolverConfig,
) -> Result<PatternSet> {
    decompose_lightfield(target, k, 0.0, cfg)
}

fn decompose_lightfield(
    target: &LightFieldTarget,
    k: usize,
    lower: f64,
    cfg: &SolverConfig,
) -> Result<PatternSet> {
    // the factors accumulate K frame products, so fit them to K times the
    // time-averaged target
    let summed: Vec<f64> = target.values.iter().map(|v| v * k as f64).collect();
    factorize_box(
        &target.support,
        &summed,
        target.panel_cols,
        target.panel_rows,
        k,
        lower,
        cfg,
    )
}

#[derive(Debug, Clone, Default)]
pub struct HdrReport {
    /// Pixels darker than the dual-layer floor black_level^2; their values
    /// cannot be reached by the display.
    pub unreachable_pixels: usize,
    /// Perceived floor black_level^2.
    pub perceived_floor: f64,
}

/// HDR mode: factorize the angularly uniform light field of `image` with
/// both panels floored at `black_level`. The perceived black approaches
/// black_level^2 instead of the native black_level.
pub fn decompose_hdr(
    image: &ImagePlane,
    k: usize,
    black_level: f64,
    geom: &DisplayGeometry,
    grid: &ViewGrid,
    cfg: &SolverConfig,
) -> Result<(PatternSet, HdrReport)> {
    if !(0.0..1.0).contains(&black_level) {
        return Err(Error::invalid("black_level must be in [0, 1)"));
    }
    let target = build_uniform_lightfield_target(image, geom, grid)?;
    let pat = decompose_lightfield(&target, k, black_level, cfg)?;
    let floor = black_level * black_level;
    let unreachable = image
        .data
        .iter()
        .filter(|&&v| v < floor - 1e-12)
        .count();
    Ok((
        pat,
        HdrReport {
            unreachable_pixels: unreachable,
            perceived_floor: floor,
        },
    ))
}

/// Perceived on-axis image of an HDR pattern set.
pub fn simulate_hdr(pat: &PatternSet, black_level: f64) -> Result<ImagePlane> {
    let min = pat
        .front
        .iter()
        .chain(pat.rear.iter())
        .fold(f64::INFINITY, |a, &b| a.min(b));
    if min < black_level - 1e-9 {
        return Err(Error::invalid(format!(
            "pattern floor {} below black level {}",
            min, black_level
        )));
    }
    Ok(pat.on_axis_image())
}

/// Companion comparison: the image a single floored panel would show.
pub fn single_panel_rendition(image: &ImagePlane, black_level: f64) -> ImagePlane {
    let mut out = image.clone();
    for v in &mut out.data {
        *v = v.max(black_level);
    }
    out
}

/// Mean PSNR over the views of a grid, comparing rendered views against the
/// per-view targets on the pixels whose rays stay inside both panels.
pub fn per_view_psnr(
    pat: &PatternSet,
    geom: &DisplayGeometry,
    grid: &ViewGrid,
    views: &[ImagePlane],
) -> Result<Vec<f64>> {
    if views.len() != grid.view_count() {
        return Err(Error::Dimension("view image count mismatch".into()));
    }
    let pc = geom.panel_cols;
    let pr = geom.panel_rows;
    let mut out = Vec::with_capacity(views.len());
    for (img, j) in views.iter().zip(grid.indices()) {
        let (dx, dy) = grid.shift_px(j);
        let mut se = 0.0;
        let mut count = 0usize;
        for ay in 0..pr {
            let by = (ay as f64 - dy).round() as i64;
            if by < 0 || by >= pr as i64 {
                continue;
            }
            for ax in 0..pc {
                let bx = (ax as f64 - dx).round() as i64;
                if bx < 0 || bx >= pc as i64 {
                    continue;
                }
                let a = ay * pc + ax;
                let b = by as usize * pc + bx as usize;
                let mut shown = 0.0;
                for kk in 0..pat.k {
                    shown += pat.front[(a, kk)] * pat.rear[(b, kk)];
                }
                shown /= pat.k as f64;
                let d = shown - img.get(ax, ay);
                se += d * d;
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::Analysis("view has no in-bounds rays".into()));
        }
        let mse = se / count as f64;
        out.push(if mse <= 0.0 {
            crate::analysis::metrics::PSNR_CAP_DB
        } else {
            (10.0 * (1.0 / mse).log10()).min(crate::analysis::metrics::PSNR_CAP_DB)
        });
    }
    Ok(out)
}

/// Synthetic two-plane parallax scene: a textured background plane at one
/// disparity and a brighter foreground card at another. Returns one image
/// per view of the grid.
pub fn parallax_scene(
    geom: &DisplayGeometry,
    grid: &ViewGrid,
    seed: u64,
) -> Vec<ImagePlane> {
    let pc = geom.panel_cols;
    let pr = geom.panel_rows;
    let base = crate::analysis::charts::texture(pc, pr, seed);
    let disparity_bg = 0i64; // background fixed to the rear plane
    let disparity_fg = 1i64; // foreground moves one pixel per view step

    let (x0, x1) = (pc / 4, pc - pc / 4);
    let (y0, y1) = (pr / 4, pr - pr / 4);
    grid.indices()
        .into_iter()
        .map(|(jx, jy)| {
            let mut img = ImagePlane::zeros(pc, pr);
            for y in 0..pr {
                for x in 0..pc {
                    let sx = (x as i64 - jx * disparity_bg).clamp(0, pc as i64 - 1) as usize;
                    let sy = (y as i64 - jy * disparity_bg).clamp(0, pr as i64 - 1) as usize;
                    img.set(x, y, 0.6 * base.get(sx, sy));
                }
            }
            // foreground card shifts against the background
            let fx = jx * disparity_fg;
            let fy = jy * disparity_fg;
            for y in y0..y1 {
                for x in x0..x1 {
                    let tx = x as i64 + fx;
                    let ty = y as i64 + fy;
                    if tx >= 0 && (tx as usize) < pc && ty >= 0 && (ty as usize) < pr {
                        let checker = ((x / 2 + y / 2) % 2) as f64;
                        img.set(tx as usize, ty as usize, 0.55 + 0.35 * checker);
                    }
                }
            }
            img
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::render_view;

    fn flat_geom(panel: usize) -> DisplayGeometry {
        // diffuser off: zero diffuser gap, unit superresolution
        DisplayGeometry::new(panel, panel, 0.282, 19.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn single_on_axis_view_activates_the_diagonal() {
        let geom = flat_geom(4);
        let grid = ViewGrid::new(1, 1, 1.0).unwrap();
        let img = ImagePlane::new(4, 4, 1, (0..16).map(|i| i as f64 / 15.0).collect()).unwrap();
        let t = build_uniform_lightfield_target(&img, &geom, &grid).unwrap();
        assert_eq!(t.support.len(), 16);
        for (idx, &(a, b)) in t.support.pairs.iter().enumerate() {
            assert_eq!(a, b);
            assert!((t.values[idx] - img.data[a as usize]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_image_fills_active_entries() {
        let geom = flat_geom(6);
        let grid = ViewGrid::new(3, 3, 1.0).unwrap();
        let img = ImagePlane::constant(6, 6, 0.7);
        let t = build_uniform_lightfield_target(&img, &geom, &grid).unwrap();
        assert!(t.values.iter().all(|v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn active_count_matches_ray_enumeration_oracle() {
        // brute-force ray enumeration with dedup
        let geom = flat_geom(8);
        let grid = ViewGrid::new(5, 3, 1.0).unwrap();
        let img = ImagePlane::constant(8, 8, 0.5);
        let t = build_uniform_lightfield_target(&img, &geom, &grid).unwrap();

        let mut oracle = std::collections::HashSet::new();
        for (jx, jy) in grid.indices() {
            for ay in 0..8i64 {
                for ax in 0..8i64 {
                    let bx = ax - jx;
                    let by = ay - jy;
                    if (0..8).contains(&bx) && (0..8).contains(&by) {
                        oracle.insert((ay * 8 + ax, by * 8 + bx));
                    }
                }
            }
        }
        assert_eq!(t.support.len(), oracle.len());
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(ViewGrid::new(0, 3, 1.0).is_err());
    }

    #[test]
    fn view_independent_rank_one_scene_recovered() {
        let geom = flat_geom(6);
        let grid = ViewGrid::new(3, 3, 1.0).unwrap();
        // rank-1 light field: outer product of two spatial profiles has no
        // angular variation along the ray constraint only if it is constant
        // per front pixel; a flat image is the simplest rank-1 case
        let img = ImagePlane::constant(6, 6, 0.36);
        let t = build_uniform_lightfield_target(&img, &geom, &grid).unwrap();
        let cfg = SolverConfig {
            fact_iters: 2000,
            seed: 3,
            ..SolverConfig::default()
        };
        let pat = decompose_3d(&t, 1, &cfg).unwrap();
        let resid = crate::factorize::support_objective(
            &t.support,
            &t.values,
            &pat.front,
            &pat.rear,
        )
        .sqrt();
        assert!(resid <= 1e-6, "residual {}", resid);
    }

    #[test]
    fn render_view_matches_factor_products_on_view_rays() {
        let geom = flat_geom(8);
        let grid = ViewGrid::new(3, 1, 1.0).unwrap();
        let views = parallax_scene(&geom, &grid, 17);
        let t = build_lightfield_target(&views, &geom, &grid).unwrap();
        let cfg = SolverConfig {
            fact_iters: 300,
            seed: 5,
            ..SolverConfig::default()
        };
        let pat = decompose_3d(&t, 4, &cfg).unwrap();

        for (img_idx, j) in grid.indices().into_iter().enumerate() {
            let nu = grid.view_angle_deg(j, &geom);
            let rendered = render_view(&pat, &geom, nu).unwrap();
            let (dx, dy) = grid.shift_px(j);
            for ay in 0..8usize {
                let by = (ay as f64 - dy).round() as i64;
                if by < 0 || by >= 8 {
                    continue;
                }
                for ax in 0..8usize {
                    let bx = (ax as f64 - dx).round() as i64;
                    if bx < 0 || bx >= 8 {
                        continue;
                    }
                    let a = ay * 8 + ax;
                    let b = by as usize * 8 + bx as usize;
                    let mut expect = 0.0;
                    for kk in 0..pat.k {
                        expect += pat.front[(a, kk)] * pat.rear[(b, kk)];
                    }
                    expect /= pat.k as f64;
                    let got = rendered.get(ax, ay);
                    assert!(
                        (got - expect).abs() < 1e-9,
                        "view {} pixel ({},{}): {} vs {}",
                        img_idx,
                        ax,
                        ay,
                        got,
                        expect
                    );
                }
            }
        }
    }

    #[test]
    fn hdr_zero_image_reaches_squared_floor() {
        let geom = flat_geom(6);
        let grid = ViewGrid::new(3, 3, 1.0).unwrap();
        let img = ImagePlane::zeros(6, 6);
        let cfg = SolverConfig {
            fact_iters: 400,
            seed: 9,
            ..SolverConfig::default()
        };
        let (pat, report) = decompose_hdr(&img, 4, 0.15, &geom, &grid, &cfg).unwrap();
        let perceived = simulate_hdr(&pat, 0.15).unwrap();
        for v in perceived.data {
            assert!((v - 0.0225).abs() < 1e-9, "perceived black {}", v);
        }
        // true zeros sit below the b^2 floor and are flagged
        assert_eq!(report.unreachable_pixels, 36);
        assert!((report.perceived_floor - 0.0225).abs() < 1e-15);
    }

    #[test]
    fn hdr_without_floor_recovers_flat_image() {
        let geom = flat_geom(5);
        let grid = ViewGrid::new(3, 1, 1.0).unwrap();
        let img = ImagePlane::constant(5, 5, 0.42);
        let cfg = SolverConfig {
            fact_iters: 6000,
            seed: 2,
            ..SolverConfig::default()
        };
        let (pat, _) = decompose_hdr(&img, 2, 0.0, &geom, &grid, &cfg).unwrap();
        let perceived = simulate_hdr(&pat, 0.0).unwrap();
        for v in perceived.data {
            assert!((v - 0.42).abs() < 1e-4, "{}", v);
        }
    }

    #[test]
    fn hdr_equals_3d_on_the_uniform_target() {
        let geom = flat_geom(6);
        let grid = ViewGrid::new(3, 3, 1.0).unwrap();
        let img = crate::analysis::charts::texture(6, 6, 21);
        let cfg = SolverConfig {
            fact_iters: 80,
            seed: 77,
            ..SolverConfig::default()
        };
        let (hdr_pat, _) = decompose_hdr(&img, 3, 0.0, &geom, &grid, &cfg).unwrap();
        let t = build_uniform_lightfield_target(&img, &geom, &grid).unwrap();
        let lf_pat = decompose_3d(&t, 3, &cfg).unwrap();
        assert_eq!(hdr_pat.front, lf_pat.front);
        assert_eq!(hdr_pat.rear, lf_pat.rear);
    }

    #[test]
    fn simulate_hdr_floor_and_full_on() {
        let pat_floor = PatternSet {
            lower_bound: 0.15,
            ..PatternSet::constant(0.15, 0.15, 4, 3, 3)
        };
        let img = simulate_hdr(&pat_floor, 0.15).unwrap();
        assert!(img.data.iter().all(|v| (v - 0.0225).abs() < 1e-15));

        let pat_on = PatternSet::constant(1.0, 1.0, 4, 3, 3);
        let img = simulate_hdr(&pat_on, 0.15).unwrap();
        assert!(img.data.iter().all(|v| (v - 1.0).abs() < 1e-15));

        let bad = PatternSet::constant(0.1, 0.5, 2, 3, 3);
        assert!(simulate_hdr(&bad, 0.15).is_err());
    }

    #[test]
    fn gradient_ramp_beats_native_black() {
        let geom = flat_geom(8);
        let grid = ViewGrid::new(3, 3, 1.0).unwrap();
        let mut img = ImagePlane::zeros(8, 8);
        for y in 0..8 {
            for x in 0..8 {
                img.set(x, y, x as f64 / 7.0);
            }
        }
        let cfg = SolverConfig {
            fact_iters: 500,
            seed: 4,
            ..SolverConfig::default()
        };
        let (pat, _) = decompose_hdr(&img, 4, 0.15, &geom, &grid, &cfg).unwrap();
        let perceived = simulate_hdr(&pat, 0.15).unwrap();
        assert!(
            perceived.min_value() < 0.15,
            "dual-layer black {} should beat the native floor",
            perceived.min_value()
        );
    }

    #[test]
    fn contrast_bound_property() {
        // any floored pattern set: perceived black <= b^2 is attainable and
        // white stays reachable, so the dynamic range gains at least 1/b
        let b: f64 = 0.15;
        let pat = PatternSet {
            lower_bound: b,
            ..PatternSet::constant(b, b, 2, 4, 4)
        };
        let img = simulate_hdr(&pat, b).unwrap();
        assert!(img.max_value() <= b * b + 1e-12);
        let white = PatternSet::constant(1.0, 1.0, 2, 4, 4);
        assert!((simulate_hdr(&white, 0.0).unwrap().min_value() - 1.0).abs() < 1e-12);
    }
}
