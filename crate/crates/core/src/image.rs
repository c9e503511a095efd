//! Row-major floating-point image planes with values nominally in [0,1].
//!
//! Values are clamped only at I/O boundaries; intermediate results may leave
//! the range (ringing, residuals) and are preserved exactly.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    pub cols: usize,
    pub rows: usize,
    /// 1 (gray) or 3 (RGB).
    pub channels: usize,
    /// Row-major, channel-interleaved.
    pub data: Vec<f64>,
}

impl ImagePlane {
    pub fn new(cols: usize, rows: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::invalid("channels must be 1 or 3"));
        }
        if data.len() != cols * rows * channels {
            return Err(Error::Dimension(format!(
                "image data length {} != {}x{}x{}",
                data.len(),
                cols,
                rows,
                channels
            )));
        }
        Ok(ImagePlane {
            cols,
            rows,
            channels,
            data,
        })
    }

    pub fn zeros(cols: usize, rows: usize) -> Self {
        ImagePlane {
            cols,
            rows,
            channels: 1,
            data: vec![0.0; cols * rows],
        }
    }

    pub fn constant(cols: usize, rows: usize, value: f64) -> Self {
        ImagePlane {
            cols,
            rows,
            channels: 1,
            data: vec![value; cols * rows],
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.cols * self.rows
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        debug_assert_eq!(self.channels, 1);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: f64) {
        debug_assert_eq!(self.channels, 1);
        self.data[row * self.cols + col] = v;
    }

    /// Clamp every value into [0,1]; used at I/O boundaries.
    pub fn clamped(&self) -> ImagePlane {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.clamp(0.0, 1.0);
        }
        out
    }

    pub fn same_shape(&self, other: &ImagePlane) -> bool {
        self.cols == other.cols && self.rows == other.rows && self.channels == other.channels
    }

    /// Split an interleaved image into per-channel planes.
    pub fn split_channels(&self) -> Vec<ImagePlane> {
        if self.channels == 1 {
            return vec![self.clone()];
        }
        (0..self.channels)
            .map(|c| {
                let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
                ImagePlane {
                    cols: self.cols,
                    rows: self.rows,
                    channels: 1,
                    data,
                }
            })
            .collect()
    }

    /// Rec. 709 luma of an RGB image; identity for single-channel input.
    pub fn to_luma(&self) -> ImagePlane {
        if self.channels == 1 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.pixel_count());
        for px in self.data.chunks_exact(3) {
            data.push(0.2126 * px[0] + 0.7152 * px[1] + 0.0722 * px[2]);
        }
        ImagePlane {
            cols: self.cols,
            rows: self.rows,
            channels: 1,
            data,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_validates_shape() {
        assert!(ImagePlane::new(2, 2, 1, vec![0.0; 4]).is_ok());
        assert!(ImagePlane::new(2, 2, 1, vec![0.0; 5]).is_err());
        assert!(ImagePlane::new(2, 2, 2, vec![0.0; 8]).is_err());
    }

    #[test]
    fn luma_of_gray_rgb_matches_gray() {
        let rgb = ImagePlane::new(2, 1, 3, vec![0.5; 6]).unwrap();
        let luma = rgb.to_luma();
        assert_eq!(luma.channels, 1);
        for v in luma.data {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn split_channels_roundtrips_values() {
        let rgb = ImagePlane::new(2, 1, 3, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let planes = rgb.split_channels();
        assert_eq!(planes.len(), 3);
        assert_eq!(planes[0].data, vec![0.1, 0.4]);
        assert_eq!(planes[2].data, vec![0.3, 0.6]);
    }

    #[test]
    fn clamp_bounds_values() {
        let img = ImagePlane::new(2, 1, 1, vec![-0.5, 1.5]).unwrap();
        assert_eq!(img.clamped().data, vec![0.0, 1.0]);
    }
}
