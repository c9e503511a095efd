//! Slanted-edge modulation transfer function measurement.
//!
//! Classic edge-gradient procedure: per-row subpixel edge localization by
//! derivative centroid, a least-squares line fit for the edge, projection of
//! every pixel onto the edge normal, binning into an oversampled edge spread
//! function, differentiation to the line spread function, Hamming windowing,
//! and the magnitude of the discrete Fourier transform normalized to one at
//! DC. The frequency axis is rescaled so the Nyquist limit of the native
//! panel grid sits at 1.

use crate::error::{Error, Result};
use crate::image::ImagePlane;

#[derive(Debug, Clone)]
pub struct MtfCurve {
    /// Normalized frequency; 1.0 is the panel Nyquist limit.
    pub frequencies: Vec<f64>,
    /// Modulation magnitudes, 1.0 at DC. Sharpening baselines may exceed 1.
    pub magnitudes: Vec<f64>,
    pub oversampling: usize,
    /// Fitted edge slant in degrees.
    pub slant_deg: f64,
    /// Set when the fitted slant falls outside the reliable 2-10 degree
    /// range.
    pub slant_warning: bool,
    /// Oversampled edge spread function the spectrum was computed from.
    pub esf: Vec<f64>,
    /// Normal distance of the first ESF bin center, image samples.
    pub esf_t0: f64,
    /// ESF bin width, image samples.
    pub esf_bin_width: f64,
    /// Fitted edge line x = slope*y + intercept.
    pub edge_slope: f64,
    pub edge_intercept: f64,
}

impl MtfCurve {
    /// Linear interpolation of the curve at a normalized frequency.
    pub fn at(&self, f: f64) -> f64 {
        let fs = &self.frequencies;
        if f <= fs[0] {
            return self.magnitudes[0];
        }
        for i in 1..fs.len() {
            if f <= fs[i] {
                let t = (f - fs[i - 1]) / (fs[i] - fs[i - 1]);
                return self.magnitudes[i - 1] * (1.0 - t) + self.magnitudes[i] * t;
            }
        }
        *self.magnitudes.last().unwrap()
    }

    /// ESF value at normal distance `t`, linearly interpolated with clamped
    /// ends.
    pub fn esf_at(&self, t: f64) -> f64 {
        let pos = (t - self.esf_t0) / self.esf_bin_width;
        if pos <= 0.0 {
            return self.esf[0];
        }
        let last = self.esf.len() - 1;
        if pos >= last as f64 {
            return self.esf[last];
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.esf[i] * (1.0 - frac) + self.esf[i + 1] * frac
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("frequency,magnitude\n");
        for (f, m) in self.frequencies.iter().zip(&self.magnitudes) {
            s.push_str(&format!("{:.9},{:.9}\n", f, m));
        }
        s
    }
}

/// Measure the MTF of a single near-vertical edge.
///
/// `edge_angle_hint_deg` documents the chart; the fitted slant is compared
/// against the reliable 2-10 degree range for the warning flag. `sr_factor`
/// is the superresolution factor of the image grid relative to the panel
/// grid and fixes the frequency normalization.
pub fn mtf_slanted_edge(
    image: &ImagePlane,
    edge_angle_hint_deg: f64,
    oversampling: usize,
    sr_factor: f64,
) -> Result<MtfCurve> {
    if image.channels != 1 {
        return Err(Error::invalid("mtf expects a single-channel image"));
    }
    if oversampling < 2 {
        return Err(Error::invalid("oversampling must be >= 2"));
    }
    if image.cols < 8 || image.rows < 4 {
        return Err(Error::Analysis("image too small for edge analysis".into()));
    }
    let _ = edge_angle_hint_deg;

    // per-row subpixel edge position from the derivative centroid
    let mut rows_fit: Vec<(f64, f64)> = Vec::with_capacity(image.rows);
    let mut total_energy = 0.0;
    for y in 0..image.rows {
        let mut wsum = 0.0;
        let mut xsum = 0.0;
        for x in 1..image.cols - 1 {
            let d = (image.get(x + 1, y) - image.get(x - 1, y)).abs();
            wsum += d;
            xsum += d * x as f64;
        }
        total_energy += wsum;
        if wsum > 1e-12 {
            rows_fit.push((y as f64, xsum / wsum));
        }
    }
    if total_energy < 1e-7 * image.rows as f64 || rows_fit.len() < 4 {
        return Err(Error::Analysis(
            "no detectable edge: derivative energy below threshold".into(),
        ));
    }

    // least-squares line x = slope*y + intercept
    let n = rows_fit.len() as f64;
    let mean_y = rows_fit.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_x = rows_fit.iter().map(|r| r.1).sum::<f64>() / n;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for &(y, x) in &rows_fit {
        syy += (y - mean_y) * (y - mean_y);
        sxy += (y - mean_y) * (x - mean_x);
    }
    let slope = if syy > 0.0 { sxy / syy } else { 0.0 };
    let intercept = mean_x - slope * mean_y;
    let slant_deg = slope.atan().to_degrees();
    let slant_warning = !(2.0..=10.0).contains(&slant_deg.abs());
    let cos_t = 1.0 / (1.0 + slope * slope).sqrt();

    // oversampled ESF over the signed distance to the edge
    let dist = |x: usize, y: usize| (x as f64 - (slope * y as f64 + intercept)) * cos_t;
    let mut tmin = f64::INFINITY;
    let mut tmax = f64::NEG_INFINITY;
    for y in 0..image.rows {
        let t_first = dist(0, y);
        let t_last = dist(image.cols - 1, y);
        tmin = tmin.min(t_first.min(t_last));
        tmax = tmax.max(t_first.max(t_last));
    }
    let bin_width = 1.0 / oversampling as f64;
    let nbins = ((tmax - tmin) / bin_width).floor() as usize;
    if nbins < 8 {
        return Err(Error::Analysis("edge region too narrow to oversample".into()));
    }
    let mut sums = vec![0.0; nbins];
    let mut counts = vec![0usize; nbins];
    for y in 0..image.rows {
        for x in 0..image.cols {
            let b = ((dist(x, y) - tmin) / bin_width).floor() as isize;
            if b >= 0 && (b as usize) < nbins {
                sums[b as usize] += image.get(x, y);
                counts[b as usize] += 1;
            }
        }
    }
    let mut esf = vec![0.0; nbins];
    let mut last_filled: Option<usize> = None;
    for i in 0..nbins {
        if counts[i] > 0 {
            esf[i] = sums[i] / counts[i] as f64;
            match last_filled {
                Some(prev) if i > prev + 1 => {
                    for j in prev + 1..i {
                        let t = (j - prev) as f64 / (i - prev) as f64;
                        esf[j] = esf[prev] * (1.0 - t) + esf[i] * t;
                    }
                }
                None if i > 0 => {
                    for j in 0..i {
                        esf[j] = esf[i];
                    }
                }
                _ => {}
            }
            last_filled = Some(i);
        }
    }
    match last_filled {
        Some(prev) => {
            for j in prev + 1..nbins {
                esf[j] = esf[prev];
            }
        }
        None => return Err(Error::Analysis("empty edge spread function".into())),
    }

    // LSF by centered differences, Hamming window centered on the energy
    // centroid (subpixel-stable, unlike the argmax bin)
    let mut lsf = vec![0.0; nbins];
    for i in 1..nbins - 1 {
        lsf[i] = (esf[i + 1] - esf[i - 1]) * 0.5;
    }
    let energy: f64 = lsf.iter().map(|v| v * v).sum();
    let center = if energy > 0.0 {
        lsf.iter()
            .enumerate()
            .map(|(i, v)| i as f64 * v * v)
            .sum::<f64>()
            / energy
    } else {
        nbins as f64 / 2.0
    };
    for (i, v) in lsf.iter_mut().enumerate() {
        let arg = 2.0 * std::f64::consts::PI * (i as f64 - center) / nbins as f64;
        *v *= 0.54 + 0.46 * arg.cos();
    }

    // magnitude spectrum, DC-normalized
    let nfreq = nbins / 2 + 1;
    let mut magnitudes = Vec::with_capacity(nfreq);
    for j in 0..nfreq {
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, &v) in lsf.iter().enumerate() {
            let ph = -2.0 * std::f64::consts::PI * (j as f64) * (i as f64) / nbins as f64;
            re += v * ph.cos();
            im += v * ph.sin();
        }
        magnitudes.push((re * re + im * im).sqrt());
    }
    let dc = magnitudes[0];
    if dc <= 0.0 {
        return Err(Error::Analysis("degenerate spectrum: zero DC response".into()));
    }
    for m in &mut magnitudes {
        *m /= dc;
    }

    // bin j is j / (nbins * bin_width) cycles per image sample; panel
    // Nyquist is 0.5/sr_factor cycles per sample
    let frequencies: Vec<f64> = (0..nfreq)
        .map(|j| j as f64 / (nbins as f64 * bin_width) * 2.0 * sr_factor)
        .collect();

    Ok(MtfCurve {
        frequencies,
        magnitudes,
        oversampling,
        slant_deg,
        slant_warning,
        esf,
        esf_t0: tmin + 0.5 * bin_width,
        esf_bin_width: bin_width,
        edge_slope: slope,
        edge_intercept: intercept,
    })
}
