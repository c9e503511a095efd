//! Direct rendering of the displayed light field: single-view evaluation for
//! the 3D mode and the native-resolution comparison baseline.

use crate::error::{Error, Result};
use crate::geometry::DisplayGeometry;
use crate::image::ImagePlane;
use crate::patterns::PatternSet;

/// Evaluate the emitted light field for one view direction on the target
/// grid: l(x, nu) = (1/K) sum_k f_k(x - d*nu) * g_k(x - (d+d_l)*nu).
///
/// Panels are sampled bilinearly with clamp-to-edge borders. `nu_deg` is the
/// (horizontal, vertical) view angle in degrees; with `gap_diffuser` zero the
/// front panel itself is the parameterization plane.
pub fn render_view(pat: &PatternSet, geom: &DisplayGeometry, nu_deg: (f64, f64)) -> Result<ImagePlane> {
    if pat.panel_cols != geom.panel_cols || pat.panel_rows != geom.panel_rows {
        return Err(Error::Dimension("pattern/geometry panel shape mismatch".into()));
    }
    let (sx, sy) = (nu_deg.0.to_radians().tan(), nu_deg.1.to_radians().tan());
    let tc = geom.target_cols();
    let tr = geom.target_rows();
    let d_front = geom.gap_diffuser;
    let d_rear = geom.gap_diffuser + geom.gap_panels;
    let inv_k = 1.0 / pat.k as f64;

    let mut out = ImagePlane::zeros(tc, tr);
    for ny in 0..tr {
        let y = geom.target_coord(ny, geom.panel_rows, tr);
        let fy1 = geom.panel_pixel_pos(y - d_front * sy, geom.panel_rows);
        let fy2 = geom.panel_pixel_pos(y - d_rear * sy, geom.panel_rows);
        for nx in 0..tc {
            let x = geom.target_coord(nx, geom.panel_cols, tc);
            let fx1 = geom.panel_pixel_pos(x - d_front * sx, geom.panel_cols);
            let fx2 = geom.panel_pixel_pos(x - d_rear * sx, geom.panel_cols);
            let mut acc = 0.0;
            for k in 0..pat.k {
                let f = sample_bilinear(&pat.front, k, fx1, fy1, geom.panel_cols, geom.panel_rows);
                let g = sample_bilinear(&pat.rear, k, fx2, fy2, geom.panel_cols, geom.panel_rows);
                acc += f * g;
            }
            out.set(nx, ny, acc * inv_k);
        }
    }
    Ok(out)
}

fn sample_bilinear(
    frames: &ndarray::Array2<f64>,
    k: usize,
    px: f64,
    py: f64,
    cols: usize,
    rows: usize,
) -> f64 {
    let cx = px.clamp(0.0, (cols - 1) as f64);
    let cy = py.clamp(0.0, (rows - 1) as f64);
    let x0 = cx.floor() as usize;
    let y0 = cy.floor() as usize;
    let x1 = (x0 + 1).min(cols - 1);
    let y1 = (y0 + 1).min(rows - 1);
    let fx = cx - x0 as f64;
    let fy = cy - y0 as f64;
    let at = |x: usize, y: usize| frames[(y * cols + x, k)];
    (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x1, y0))
        + fy * ((1.0 - fx) * at(x0, y1) + fx * at(x1, y1))
}

/// Comparison baseline: the target shown at the native resolution of one
/// panel. Box-downsample (area-weighted, so non-integer factors align
/// exactly) then replicate each panel pixel over its footprint.
pub fn simulate_native(target: &ImagePlane, geom: &DisplayGeometry) -> Result<ImagePlane> {
    if target.channels != 1 {
        return Err(Error::invalid("simulate_native expects a single-channel plane"));
    }
    if target.cols != geom.target_cols() || target.rows != geom.target_rows() {
        return Err(Error::Dimension(format!(
            "target {}x{} does not match geometry target {}x{}",
            target.cols,
            target.rows,
            geom.target_cols(),
            geom.target_rows()
        )));
    }
    let wx = box_weights(geom.panel_cols, target.cols);
    let wy = box_weights(geom.panel_rows, target.rows);

    // downsample to panel resolution
    let mut low = vec![0.0; geom.panel_pixels()];
    for (py, wys) in wy.iter().enumerate() {
        for (px, wxs) in wx.iter().enumerate() {
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for &(ty, vy) in wys {
                for &(tx, vx) in wxs {
                    acc += vy * vx * target.get(tx, ty);
                    wsum += vy * vx;
                }
            }
            low[py * geom.panel_cols + px] = acc / wsum;
        }
    }

    // nearest upsample: each superpixel takes the panel pixel under its center
    let mut out = ImagePlane::zeros(target.cols, target.rows);
    for ny in 0..target.rows {
        let py = nearest_panel(ny, geom.panel_rows, target.rows);
        for nx in 0..target.cols {
            let px = nearest_panel(nx, geom.panel_cols, target.cols);
            out.set(nx, ny, low[py * geom.panel_cols + px]);
        }
    }
    Ok(out)
}

/// Panel pixel whose footprint contains the center of target pixel `n`.
pub(crate) fn nearest_panel(n: usize, panel_count: usize, target_count: usize) -> usize {
    let pos = (n as f64 + 0.5) * panel_count as f64 / target_count as f64;
    (pos.floor() as usize).min(panel_count - 1)
}

/// For each panel pixel along one axis, the target pixels it overlaps and
/// the overlap fraction (in panel-pixel units).
pub(crate) fn box_weights(panel_count: usize, target_count: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = target_count as f64 / panel_count as f64;
    (0..panel_count)
        .map(|p| {
            let lo = p as f64 * scale;
            let hi = (p + 1) as f64 * scale;
            let mut ws = Vec::new();
            let t0 = lo.floor() as usize;
            let t1 = (hi.ceil() as usize).min(target_count);
            for t in t0..t1 {
                let overlap = (hi.min((t + 1) as f64) - lo.max(t as f64)).max(0.0);
                if overlap > 1e-12 {
                    ws.push((t, overlap));
                }
            }
            ws
        })
        .collect()
}
