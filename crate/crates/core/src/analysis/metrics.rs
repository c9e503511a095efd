//! Peak signal-to-noise ratio for unit-range images.

use crate::error::{Error, Result};
use crate::image::ImagePlane;

/// PSNR cap returned for (near-)identical images; avoids infinities from
/// zero MSE.
pub const PSNR_CAP_DB: f64 = 99.0;

/// 10 log10(1 / MSE) for images with values in [0, 1], capped at
/// [`PSNR_CAP_DB`].
pub fn psnr(a: &ImagePlane, b: &ImagePlane) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::Dimension(format!(
            "psnr shapes differ: {}x{}x{} vs {}x{}x{}",
            a.cols, a.rows, a.channels, b.cols, b.rows, b.channels
        )));
    }
    let mse = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        / a.data.len() as f64;
    if mse <= 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}
