//! Comparison superresolution baselines: temporal wobulation and cubic
//! upsampling.

use crate::error::{Error, Result};
use crate::geometry::DisplayGeometry;
use crate::image::ImagePlane;
use crate::render::{box_weights, nearest_panel};

/// Keys cubic parameter. The sharp variant keeps the baseline's
/// characteristic overshoot above unit response through the box prefilter.
const CUBIC_SHARPNESS: f64 = -1.0;

/// Wobulation: K subpixel-shifted low-resolution subframes, temporally
/// averaged. The subframes are solved jointly as a bounded least-squares
/// problem against the target (projected Landweber on the normal equations),
/// which is the strongest reasonable version of this baseline.
pub fn baseline_wobulation(
    target: &ImagePlane,
    k: usize,
    geom: &DisplayGeometry,
) -> Result<ImagePlane> {
    if target.channels != 1 {
        return Err(Error::invalid("wobulation expects a single-channel target"));
    }
    let sr = geom.sr_factor;
    if (sr - sr.round()).abs() > 1e-9 || sr < 1.0 {
        return Err(Error::invalid(
            "wobulation shifts live on the superresolved grid: integer sr_factor required",
        ));
    }
    let sr = sr.round() as usize;
    if k == 0 {
        return Err(Error::invalid("subframe count must be >= 1"));
    }
    if k > sr * sr {
        return Err(Error::invalid(format!(
            "subframe count {} exceeds the {}^2 distinct phases",
            k, sr
        )));
    }
    let tc = geom.target_cols();
    let tr = geom.target_rows();
    if target.cols != tc || target.rows != tr {
        return Err(Error::Dimension("target does not match geometry".into()));
    }
    let pc = geom.panel_cols;
    let pr = geom.panel_rows;
    let m = pc * pr;
    let n = tc * tr;

    let phases = phase_schedule(sr, k);

    // per subframe: superpixel -> panel pixel under the shifted replication
    let maps: Vec<Vec<u32>> = phases
        .iter()
        .map(|&(dx, dy)| {
            let mut map = vec![0u32; n];
            for ny in 0..tr {
                let sy = (ny as i64 - dy as i64).clamp(0, tr as i64 - 1) as usize;
                let py = nearest_panel(sy, pr, tr);
                for nx in 0..tc {
                    let sx = (nx as i64 - dx as i64).clamp(0, tc as i64 - 1) as usize;
                    let px = nearest_panel(sx, pc, tc);
                    map[ny * tc + nx] = (py * pc + px) as u32;
                }
            }
            map
        })
        .collect();

    // column counts bound the forward operator norm
    let mut max_count = 1usize;
    for map in &maps {
        let mut counts = vec![0usize; m];
        for &p in map {
            counts[p as usize] += 1;
        }
        max_count = max_count.max(*counts.iter().max().unwrap());
    }
    let step = 0.9 * k as f64 / max_count as f64;

    let mut frames = vec![vec![0.5f64; m]; k];
    let inv_k = 1.0 / k as f64;
    let iters = 800;
    let mut recon = vec![0.0f64; n];
    for _ in 0..iters {
        for r in recon.iter_mut() {
            *r = 0.0;
        }
        for (frame, map) in frames.iter().zip(&maps) {
            for (r, &p) in recon.iter_mut().zip(map) {
                *r += frame[p as usize];
            }
        }
        for (r, t) in recon.iter_mut().zip(&target.data) {
            *r = t - *r * inv_k;
        }
        for (frame, map) in frames.iter_mut().zip(&maps) {
            let mut grad = vec![0.0f64; m];
            for (idx, &p) in map.iter().enumerate() {
                grad[p as usize] += recon[idx];
            }
            for (f, g) in frame.iter_mut().zip(&grad) {
                *f = (*f + step * inv_k * g).clamp(0.0, 1.0);
            }
        }
    }

    let mut out = ImagePlane::zeros(tc, tr);
    for (idx, o) in out.data.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (frame, map) in frames.iter().zip(&maps) {
            acc += frame[map[idx] as usize];
        }
        *o = acc * inv_k;
    }
    Ok(out)
}

/// First K phases of the sr x sr grid in golden-ratio (low-discrepancy)
/// order; phase 0 is always (0, 0).
fn phase_schedule(sr: usize, k: usize) -> Vec<(usize, usize)> {
    const PHI_FRAC: f64 = 0.6180339887498949;
    let mut order: Vec<usize> = (0..sr * sr).collect();
    order.sort_by(|&a, &b| {
        let fa = (a as f64 * PHI_FRAC).fract();
        let fb = (b as f64 * PHI_FRAC).fract();
        fa.partial_cmp(&fb).unwrap()
    });
    order.truncate(k);
    order.into_iter().map(|p| (p % sr, p / sr)).collect()
}

/// Cubic-upsampling reference: box-downsample to panel resolution, then
/// separable Keys cubic interpolation back to the target grid. Overshoot is
/// preserved (no clamping).
pub fn baseline_cubic(target: &ImagePlane, geom: &DisplayGeometry) -> Result<ImagePlane> {
    if target.channels != 1 {
        return Err(Error::invalid("cubic baseline expects a single-channel target"));
    }
    let tc = geom.target_cols();
    let tr = geom.target_rows();
    if target.cols != tc || target.rows != tr {
        return Err(Error::Dimension("target does not match geometry".into()));
    }
    let pc = geom.panel_cols;
    let pr = geom.panel_rows;

    // box downsample
    let wx = box_weights(pc, tc);
    let wy = box_weights(pr, tr);
    let mut low = vec![0.0; pc * pr];
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
            low[py * pc + px] = acc / wsum;
        }
    }

    // separable cubic upsample with clamp-to-edge
    let mut horiz = vec![0.0; tc * pr];
    for py in 0..pr {
        for nx in 0..tc {
            let p = (nx as f64 + 0.5) * pc as f64 / tc as f64 - 0.5;
            horiz[py * tc + nx] = cubic_axis(&low[py * pc..(py + 1) * pc], p);
        }
    }
    let mut out = ImagePlane::zeros(tc, tr);
    let mut column = vec![0.0; pr];
    for nx in 0..tc {
        for py in 0..pr {
            column[py] = horiz[py * tc + nx];
        }
        for ny in 0..tr {
            let p = (ny as f64 + 0.5) * pr as f64 / tr as f64 - 0.5;
            out.set(nx, ny, cubic_axis(&column, p));
        }
    }
    Ok(out)
}

fn cubic_axis(samples: &[f64], pos: f64) -> f64 {
    let count = samples.len();
    let i0 = pos.floor() as i64;
    let mut acc = 0.0;
    for i in i0 - 1..=i0 + 2 {
        let idx = i.clamp(0, count as i64 - 1) as usize;
        acc += samples[idx] * keys_kernel(pos - i as f64);
    }
    acc
}

fn keys_kernel(t: f64) -> f64 {
    let a = CUBIC_SHARPNESS;
    let t = t.abs();
    if t < 1.0 {
        (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        a * (t * t * t - 5.0 * t * t + 8.0 * t - 4.0)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::charts;
    use crate::analysis::metrics::psnr;
    use crate::analysis::mtf::mtf_slanted_edge;
    use crate::render::simulate_native;

    fn geom(panel: usize, sr: f64) -> DisplayGeometry {
        DisplayGeometry::new(panel, panel, 0.282, 19.0, 1.0, sr).unwrap()
    }

    #[test]
    fn phase_schedule_starts_aligned_and_covers_grid() {
        let ph = phase_schedule(3, 9);
        assert_eq!(ph[0], (0, 0));
        let mut sorted = ph.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 9);
    }

    #[test]
    fn single_frame_wobulation_equals_native() {
        let g = geom(8, 2.0);
        let target = charts::texture(16, 16, 3);
        let wob = baseline_wobulation(&target, 1, &g).unwrap();
        let native = simulate_native(&target, &g).unwrap();
        for (a, b) in wob.data.iter().zip(&native.data) {
            assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
        }
    }

    #[test]
    fn full_phase_coverage_reconstructs_band_limited_target() {
        // K = sr^2 shifts cover every phase; a smooth target is recovered
        // nearly exactly
        let g = geom(10, 2.0);
        let mut target = ImagePlane::zeros(20, 20);
        for y in 0..20 {
            for x in 0..20 {
                let u = x as f64 / 20.0;
                let v = y as f64 / 20.0;
                target.set(
                    x,
                    y,
                    0.5 + 0.2 * (2.0 * std::f64::consts::PI * u).sin()
                        + 0.15 * (2.0 * std::f64::consts::PI * v).cos(),
                );
            }
        }
        let wob = baseline_wobulation(&target, 4, &g).unwrap();
        let q = psnr(&wob, &target).unwrap();
        assert!(q >= 40.0, "full-phase wobulation reached only {:.2} dB", q);
    }

    #[test]
    fn too_many_subframes_rejected() {
        let g = geom(4, 2.0);
        let target = ImagePlane::constant(8, 8, 0.5);
        assert!(baseline_wobulation(&target, 5, &g).is_err());
        assert!(baseline_wobulation(&target, 0, &g).is_err());
    }

    #[test]
    fn cubic_constant_unchanged() {
        let g = geom(6, 3.0);
        let target = ImagePlane::constant(18, 18, 0.37);
        let out = baseline_cubic(&target, &g).unwrap();
        for v in out.data {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_identity_at_unit_factor() {
        let g = geom(12, 1.0);
        let target = charts::texture(12, 12, 9);
        let out = baseline_cubic(&target, &g).unwrap();
        for (a, b) in out.data.iter().zip(&target.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_overshoots_above_unit_response_below_nyquist() {
        let g = geom(40, 3.0);
        let chart = charts::slanted_edge(120, 120, 5.0, 0.1, 0.9, 0.0);
        let out = baseline_cubic(&chart, &g).unwrap();
        let curve = mtf_slanted_edge(&out, 5.0, 4, 3.0).unwrap();
        let max_below_nyquist = curve
            .frequencies
            .iter()
            .zip(&curve.magnitudes)
            .filter(|(f, _)| **f > 0.05 && **f < 1.0)
            .map(|(_, m)| *m)
            .fold(0.0f64, f64::max);
        assert!(
            max_below_nyquist > 1.0,
            "cubic baseline peaked at {:.4}",
            max_below_nyquist
        );
    }
}
