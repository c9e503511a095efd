//! Physical layout of the two stacked LCD panels, the diffuser in front of
//! them, and the superresolved target grid observed on the diffuser.
//!
//! Distances are millimetres, angles degrees. Both panels share the same
//! resolution and pixel pitch; the target grid covers the same physical
//! extent at `sr_factor` times the pixel density per axis.

use crate::error::{Error, Result};

/// Angular weighting shape of the diffuser profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffuserProfile {
    /// Falls off as cos((pi/2) * theta / half_angle), 1 at center, 0 at the edge.
    Cosine,
    /// Constant 1 inside the half-angle, 0 outside.
    Uniform,
}

impl DiffuserProfile {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "cosine" => Some(DiffuserProfile::Cosine),
            "uniform" | "rect" => Some(DiffuserProfile::Uniform),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiffuserProfile::Cosine => "cosine",
            DiffuserProfile::Uniform => "uniform",
        }
    }
}

/// Display geometry: panel resolution/pitch, panel spacing, diffuser spacing,
/// and the per-axis superresolution factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayGeometry {
    /// Pixels per panel row (both panels).
    pub panel_cols: usize,
    /// Pixels per panel column (both panels).
    pub panel_rows: usize,
    /// Size of one LCD pixel in mm.
    pub panel_pitch: f64,
    /// Front-to-rear panel spacing d_l in mm.
    pub gap_panels: f64,
    /// Diffuser-to-front-panel spacing d in mm.
    pub gap_diffuser: f64,
    /// Superresolved pixels per LCD pixel per axis (>= 1, rational).
    pub sr_factor: f64,
}

impl DisplayGeometry {
    pub fn new(
        panel_cols: usize,
        panel_rows: usize,
        panel_pitch: f64,
        gap_panels: f64,
        gap_diffuser: f64,
        sr_factor: f64,
    ) -> Result<Self> {
        let g = DisplayGeometry {
            panel_cols,
            panel_rows,
            panel_pitch,
            gap_panels,
            gap_diffuser,
            sr_factor,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.panel_cols == 0 || self.panel_rows == 0 {
            return Err(Error::invalid("panel resolution must be positive"));
        }
        if !(self.panel_pitch > 0.0) || !self.panel_pitch.is_finite() {
            return Err(Error::invalid("panel_pitch must be > 0"));
        }
        if !(self.gap_panels > 0.0) || !self.gap_panels.is_finite() {
            return Err(Error::invalid("gap_panels must be > 0"));
        }
        if !(self.gap_diffuser >= 0.0) || !self.gap_diffuser.is_finite() {
            return Err(Error::invalid("gap_diffuser must be >= 0"));
        }
        if !(self.sr_factor >= 1.0) || !self.sr_factor.is_finite() {
            return Err(Error::invalid("sr_factor must be >= 1"));
        }
        Ok(())
    }

    /// Pixels per panel (M).
    pub fn panel_pixels(&self) -> usize {
        self.panel_cols * self.panel_rows
    }

    /// Columns of the superresolved target grid.
    pub fn target_cols(&self) -> usize {
        (self.sr_factor * self.panel_cols as f64).round() as usize
    }

    /// Rows of the superresolved target grid.
    pub fn target_rows(&self) -> usize {
        (self.sr_factor * self.panel_rows as f64).round() as usize
    }

    /// Pixels of the superresolved target grid (N).
    pub fn target_pixels(&self) -> usize {
        self.target_cols() * self.target_rows()
    }

    /// Physical center of panel pixel `idx` along an axis with `count` pixels,
    /// in mm relative to the display center.
    pub fn panel_coord(&self, idx: usize, count: usize) -> f64 {
        (idx as f64 + 0.5 - count as f64 / 2.0) * self.panel_pitch
    }

    /// Pitch of the superresolved grid along an axis, in mm.
    pub fn target_pitch(&self, panel_count: usize, target_count: usize) -> f64 {
        self.panel_pitch * panel_count as f64 / target_count as f64
    }

    /// Physical center of target pixel `idx` along an axis.
    pub fn target_coord(&self, idx: usize, panel_count: usize, target_count: usize) -> f64 {
        let pitch = self.target_pitch(panel_count, target_count);
        (idx as f64 + 0.5 - target_count as f64 / 2.0) * pitch
    }

    /// Continuous panel-pixel coordinate of a physical position (mm) along an
    /// axis; 0.0 is the center of pixel 0.
    pub fn panel_pixel_pos(&self, x_mm: f64, count: usize) -> f64 {
        x_mm / self.panel_pitch + count as f64 / 2.0 - 0.5
    }
}

/// Parametric diffuser: angular weight profile and sampling density.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffuserModel {
    /// Half of the field of view, degrees (0 < half_angle < 90).
    pub half_angle: f64,
    pub profile: DiffuserProfile,
    /// Rays per axis used to discretize the angular integral.
    pub angular_samples: usize,
}

impl DiffuserModel {
    pub fn new(half_angle: f64, profile: DiffuserProfile, angular_samples: usize) -> Result<Self> {
        let m = DiffuserModel {
            half_angle,
            profile,
            angular_samples,
        };
        m.validate()?;
        Ok(m)
    }

    /// Model with the sampling density derived from the geometry: enough rays
    /// per axis that every rear-panel pixel inside the footprint is hit.
    pub fn with_default_samples(
        half_angle: f64,
        profile: DiffuserProfile,
        geom: &DisplayGeometry,
    ) -> Result<Self> {
        let samples = default_angular_samples(geom, half_angle);
        DiffuserModel::new(half_angle, profile, samples)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_angle > 0.0 && self.half_angle < 90.0) {
            return Err(Error::invalid("half_angle must be in (0, 90) degrees"));
        }
        if self.angular_samples < 2 {
            return Err(Error::invalid("angular_samples must be >= 2"));
        }
        Ok(())
    }

    /// Angular weight at `theta` degrees.
    pub fn weight(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        let t = theta.abs();
        if t >= self.half_angle {
            return Ok(0.0);
        }
        Ok(match self.profile {
            DiffuserProfile::Cosine => {
                (std::f64::consts::FRAC_PI_2 * t / self.half_angle).cos()
            }
            DiffuserProfile::Uniform => 1.0,
        })
    }

    /// Midpoint angular grid over [-half_angle, +half_angle], degrees.
    ///
    /// Midpoints keep the discrete weight sum strictly positive for every
    /// profile (an inclusive grid would put cosine samples exactly on the
    /// zeros at the field-of-view edges).
    pub fn angle_grid(&self) -> Vec<f64> {
        let n = self.angular_samples;
        let step = 2.0 * self.half_angle / n as f64;
        (0..n)
            .map(|j| -self.half_angle + (j as f64 + 0.5) * step)
            .collect()
    }
}

/// Footprint sizes (s1, s2) in mm: the spatial extent on the front and rear
/// panel over which one diffuser point integrates light.
pub fn diffuser_footprints(geom: &DisplayGeometry, model: &DiffuserModel) -> (f64, f64) {
    let tan = model.half_angle.to_radians().tan();
    let s1 = 2.0 * geom.gap_diffuser * tan;
    let s2 = 2.0 * (geom.gap_diffuser + geom.gap_panels) * tan;
    (s1, s2)
}

/// Default rays per axis: 2*ceil(s2/pitch)+1, so the rear footprint is
/// sampled at least once per pixel.
pub fn default_angular_samples(geom: &DisplayGeometry, half_angle: f64) -> usize {
    let tan = half_angle.to_radians().tan();
    let s2 = 2.0 * (geom.gap_diffuser + geom.gap_panels) * tan;
    2 * (s2 / geom.panel_pitch).ceil().max(0.0) as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn prototype_geom(gap_diffuser: f64) -> DisplayGeometry {
        DisplayGeometry::new(32, 32, 0.282, 19.0, gap_diffuser, 2.0).unwrap()
    }

    fn cosine_model() -> DiffuserModel {
        DiffuserModel::new(7.5, DiffuserProfile::Cosine, 9).unwrap()
    }

    #[test]
    fn weight_peak_is_one() {
        assert_eq!(cosine_model().weight(0.0).unwrap(), 1.0);
    }

    #[test]
    fn weight_zero_at_field_of_view_edge() {
        assert_eq!(cosine_model().weight(7.5).unwrap(), 0.0);
        assert_eq!(cosine_model().weight(-7.5).unwrap(), 0.0);
        assert_eq!(cosine_model().weight(30.0).unwrap(), 0.0);
    }

    #[test]
    fn weight_half_way_matches_closed_form() {
        // cos((pi/2) * 3.75 / 7.5) = cos(pi/4)
        let expected = std::f64::consts::FRAC_PI_4.cos();
        assert_relative_eq!(
            cosine_model().weight(3.75).unwrap(),
            expected,
            max_relative = 1e-15
        );
        assert_relative_eq!(expected, 0.7071067811865476, max_relative = 1e-12);
    }

    #[test]
    fn uniform_weight_is_indicator() {
        let m = DiffuserModel::new(7.5, DiffuserProfile::Uniform, 5).unwrap();
        assert_eq!(m.weight(3.0).unwrap(), 1.0);
        assert_eq!(m.weight(-7.49).unwrap(), 1.0);
        assert_eq!(m.weight(7.5).unwrap(), 0.0);
    }

    #[test]
    fn weight_rejects_non_finite_angle() {
        assert!(cosine_model().weight(f64::NAN).is_err());
        assert!(cosine_model().weight(f64::INFINITY).is_err());
    }

    #[test]
    fn footprints_match_prototype_geometry() {
        // s = 2 * d * tan(theta_max), frozen from the closed form:
        // 2*6*tan(7.5 deg) = 1.57983, 2*(6+19)*tan(7.5 deg) = 6.58262
        let (s1, s2) = diffuser_footprints(&prototype_geom(6.0), &cosine_model());
        assert_relative_eq!(s1, 1.57982997104875, max_relative = 1e-12);
        assert_relative_eq!(s2, 6.582624879369792, max_relative = 1e-12);
        assert!((s1 - 1.580).abs() < 2e-3);
        assert!((s2 - 6.584).abs() < 2e-3);
        assert!(s2 >= s1);
    }

    #[test]
    fn footprint_zero_gap() {
        let (s1, _s2) = diffuser_footprints(&prototype_geom(0.0), &cosine_model());
        assert_eq!(s1, 0.0);
    }

    #[test]
    fn footprint_rank_analysis_spacing() {
        // 2*0.3*tan(7.5 deg) = 0.07899
        let (s1, _) = diffuser_footprints(&prototype_geom(0.3), &cosine_model());
        assert_relative_eq!(s1, 0.07899149855243749, max_relative = 1e-12);
        assert!((s1 - 0.079).abs() < 1e-3);
    }

    #[test]
    fn angle_grid_weight_sum_positive_even_at_minimum_samples() {
        let m = DiffuserModel::new(7.5, DiffuserProfile::Cosine, 2).unwrap();
        let sum: f64 = m.angle_grid().iter().map(|&t| m.weight(t).unwrap()).sum();
        assert!(sum > 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DisplayGeometry::new(0, 4, 0.282, 19.0, 6.0, 2.0).is_err());
        assert!(DisplayGeometry::new(4, 4, 0.0, 19.0, 6.0, 2.0).is_err());
        assert!(DisplayGeometry::new(4, 4, 0.282, 19.0, -1.0, 2.0).is_err());
        assert!(DisplayGeometry::new(4, 4, 0.282, 19.0, 6.0, 0.5).is_err());
        assert!(DiffuserModel::new(0.0, DiffuserProfile::Cosine, 5).is_err());
        assert!(DiffuserModel::new(90.0, DiffuserProfile::Cosine, 5).is_err());
        assert!(DiffuserModel::new(7.5, DiffuserProfile::Cosine, 1).is_err());
    }

    #[test]
    fn target_grid_dimensions() {
        let g = DisplayGeometry::new(32, 24, 0.282, 19.0, 6.0, 1.5).unwrap();
        assert_eq!(g.target_cols(), 48);
        assert_eq!(g.target_rows(), 36);
        assert_eq!(g.target_pixels(), 48 * 36);
        assert!(g.target_pixels() >= g.panel_pixels());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn footprints_increase_with_angle_and_distance(
                d in 0.1f64..20.0,
                dl in 0.5f64..40.0,
                theta in 1.0f64..45.0,
                dtheta in 0.1f64..10.0,
                dd in 0.1f64..5.0,
            ) {
                let geom = DisplayGeometry::new(8, 8, 0.282, dl, d, 2.0).unwrap();
                let model = DiffuserModel::new(theta, DiffuserProfile::Cosine, 5).unwrap();
                let (s1, s2) = diffuser_footprints(&geom, &model);

                let wider = DiffuserModel::new((theta + dtheta).min(89.0), DiffuserProfile::Cosine, 5).unwrap();
                let (s1w, s2w) = diffuser_footprints(&geom, &wider);
                prop_assert!(s1w > s1);
                prop_assert!(s2w > s2);

                let farther = DisplayGeometry::new(8, 8, 0.282, dl, d + dd, 2.0).unwrap();
                let (s1f, _) = diffuser_footprints(&farther, &model);
                prop_assert!(s1f > s1);

                let deeper = DisplayGeometry::new(8, 8, 0.282, dl + dd, d, 2.0).unwrap();
                let (_, s2d) = diffuser_footprints(&deeper, &model);
                prop_assert!(s2d > s2);
            }

            #[test]
            fn angular_weight_sum_strictly_positive(
                theta in 0.5f64..89.0,
                n in 2usize..64,
                uniform in proptest::bool::ANY,
            ) {
                let profile = if uniform { DiffuserProfile::Uniform } else { DiffuserProfile::Cosine };
                let m = DiffuserModel::new(theta, profile, n).unwrap();
                let sum: f64 = m.angle_grid().iter().map(|&t| m.weight(t).unwrap()).sum();
                prop_assert!(sum > 0.0);
            }

            #[test]
            fn weight_nonincreasing_in_magnitude(
                theta in 1.0f64..89.0,
                a in 0.0f64..1.0,
                b in 0.0f64..1.0,
            ) {
                let m = DiffuserModel::new(theta, DiffuserProfile::Cosine, 5).unwrap();
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let w_lo = m.weight(lo * theta).unwrap();
                let w_hi = m.weight(hi * theta).unwrap();
                prop_assert!(w_hi <= w_lo + 1e-15);
            }
        }
    }
}
