//! Deterministic test chart generators at the superresolved target
//! resolution.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::image::ImagePlane;

/// Near-vertical high-contrast edge, dark on the left, slanted by
/// `angle_deg` clockwise. Pixel values are the analytic coverage of the
/// half-plane, optionally softened by a Gaussian of `blur_sigma` pixels.
pub fn slanted_edge(
    cols: usize,
    rows: usize,
    angle_deg: f64,
    dark: f64,
    bright: f64,
    blur_sigma: f64,
) -> ImagePlane {
    let slope = angle_deg.to_radians().tan();
    let cx = cols as f64 / 2.0;
    let cy = rows as f64 / 2.0;
    let mut img = ImagePlane::zeros(cols, rows);
    for y in 0..rows {
        let edge_x = cx + (y as f64 + 0.5 - cy) * slope;
        for x in 0..cols {
            // signed distance from the pixel center to the edge along x
            let t = x as f64 + 0.5 - edge_x;
            let frac = if blur_sigma > 0.0 {
                gauss_cdf(t / blur_sigma)
            } else {
                // area coverage of a unit pixel by the half plane
                (t + 0.5).clamp(0.0, 1.0)
            };
            img.set(x, y, dark + (bright - dark) * frac);
        }
    }
    img
}

fn gauss_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Abramowitz-Stegun 7.1.26 rational approximation, |error| < 1.5e-7.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

/// Horizontal linear chirp: instantaneous frequency ramps from 0 up to
/// `max_cycles_per_lcd_pixel` across the width. `sr_factor` converts to the
/// superresolved sample grid.
pub fn chirp(cols: usize, rows: usize, sr_factor: f64, max_cycles_per_lcd_pixel: f64) -> ImagePlane {
    let mut img = ImagePlane::zeros(cols, rows);
    let f_max = max_cycles_per_lcd_pixel / sr_factor; // cycles per sample
    let w = cols as f64;
    for x in 0..cols {
        let xf = x as f64 + 0.5;
        // phase = 2*pi * integral of f(x) dx with f(x) = f_max * x / w
        let phase = std::f64::consts::PI * f_max * xf * xf / w;
        let v = 0.5 + 0.45 * phase.sin();
        for y in 0..rows {
            img.set(x, y, v);
        }
    }
    img
}

/// Checkerboard with `cell` superpixels per square.
pub fn checkerboard(cols: usize, rows: usize, cell: usize, low: f64, high: f64) -> ImagePlane {
    let mut img = ImagePlane::zeros(cols, rows);
    for y in 0..rows {
        for x in 0..cols {
            let on = ((x / cell) + (y / cell)) % 2 == 1;
            img.set(x, y, if on { high } else { low });
        }
    }
    img
}

/// Detailed synthetic photograph stand-in: multi-octave value noise with a
/// few hard edges and a smooth illumination ramp, all seeded.
pub fn texture(cols: usize, rows: usize, seed: u64) -> ImagePlane {
    let mut img = ImagePlane::zeros(cols, rows);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new(0.0, 1.0);

    // octaves of bilinearly interpolated noise, weight ~ 1/frequency
    let octaves = [(4usize, 0.45), (8, 0.3), (16, 0.2), (32, 0.12)];
    let mut grids: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    for &(n, w) in &octaves {
        let g: Vec<f64> = (0..(n + 1) * (n + 1)).map(|_| dist.sample(&mut rng)).collect();
        grids.push((n, w, g));
    }
    for y in 0..rows {
        for x in 0..cols {
            let u = x as f64 / cols as f64;
            let v = y as f64 / rows as f64;
            let mut val = 0.25 + 0.25 * u + 0.15 * v; // illumination ramp
            for (n, w, g) in &grids {
                let gx = u * *n as f64;
                let gy = v * *n as f64;
                let x0 = gx.floor() as usize;
                let y0 = gy.floor() as usize;
                let fx = gx - x0 as f64;
                let fy = gy - y0 as f64;
                let s = n + 1;
                let a = g[y0 * s + x0];
                let b = g[y0 * s + x0 + 1];
                let c = g[(y0 + 1) * s + x0];
                let d = g[(y0 + 1) * s + x0 + 1];
                let noise = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d);
                val += w * (noise - 0.5);
            }
            img.set(x, y, val);
        }
    }

    // hard structure: two bars and a diagonal edge for high-frequency content
    for y in 0..rows {
        for x in 0..cols {
            let in_bar = (x * 7 / cols) % 2 == 0 && y > rows / 8 && y < rows / 4;
            let diag = x + y > cols + rows / 2 && x + y < cols + rows / 2 + rows / 10;
            if in_bar {
                let v = img.get(x, y);
                img.set(x, y, (v + 0.4).min(0.95));
            }
            if diag {
                let v = img.get(x, y);
                img.set(x, y, (v - 0.35).max(0.05));
            }
        }
    }

    // keep values interior so clipping never interferes with comparisons
    for v in &mut img.data {
        *v = v.clamp(0.05, 0.95);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_spans_dark_to_bright() {
        let img = slanted_edge(32, 32, 5.0, 0.1, 0.9, 0.0);
        assert!((img.get(0, 16) - 0.1).abs() < 1e-9);
        assert!((img.get(31, 16) - 0.9).abs() < 1e-9);
    }

    #[test]
    fn edge_position_slants_with_rows() {
        let img = slanted_edge(33, 33, 5.0, 0.0, 1.0, 0.0);
        let crossing = |row: usize| {
            (0..33)
                .find(|&x| img.get(x, row) > 0.5)
                .unwrap_or(33) as f64
        };
        assert!(crossing(2) < crossing(30));
    }

    #[test]
    fn chirp_stays_in_range_and_oscillates() {
        let img = chirp(96, 8, 3.0, 3.0);
        assert!(img.min_value() >= 0.049 && img.max_value() <= 0.951);
        let mut sign_changes = 0;
        for x in 1..96 {
            if (img.get(x, 0) - 0.5).signum() != (img.get(x - 1, 0) - 0.5).signum() {
                sign_changes += 1;
            }
        }
        assert!(sign_changes > 10, "{} sign changes", sign_changes);
    }

    #[test]
    fn checkerboard_alternates() {
        let img = checkerboard(4, 4, 1, 0.0, 1.0);
        assert_eq!(img.get(0, 0), 0.0);
        assert_eq!(img.get(1, 0), 1.0);
        assert_eq!(img.get(0, 1), 1.0);
        assert_eq!(img.get(3, 3), 0.0);
    }

    #[test]
    fn texture_is_seed_deterministic_and_interior() {
        let a = texture(48, 48, 5);
        let b = texture(48, 48, 5);
        let c = texture(48, 48, 6);
        assert_eq!(a.data, b.data);
        assert_ne!(a.data, c.data);
        assert!(a.min_value() >= 0.05 && a.max_value() <= 0.95);
    }
}
