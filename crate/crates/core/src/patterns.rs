//! Time-multiplexed pattern pairs for the two LCD panels.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::image::ImagePlane;

/// K frame pairs of bounded panel transmittances. Column k of `front`/`rear`
/// is the k-th subframe shown on the front/rear panel; the perceived output
/// is the temporal average of the K rank-1 products.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    pub k: usize,
    /// M x K front-panel transmittances in [lower_bound, 1].
    pub front: Array2<f64>,
    /// M x K rear-panel transmittances in [lower_bound, 1].
    pub rear: Array2<f64>,
    /// Per-panel transmittance floor b in [0, 1).
    pub lower_bound: f64,
    pub panel_cols: usize,
    pub panel_rows: usize,
}

impl PatternSet {
    pub fn new(
        front: Array2<f64>,
        rear: Array2<f64>,
        lower_bound: f64,
        panel_cols: usize,
        panel_rows: usize,
    ) -> Result<Self> {
        let m = panel_cols * panel_rows;
        if front.nrows() != m || rear.nrows() != m {
            return Err(Error::Dimension(format!(
                "pattern rows {}/{} != panel pixels {}",
                front.nrows(),
                rear.nrows(),
                m
            )));
        }
        if front.ncols() != rear.ncols() || front.ncols() == 0 {
            return Err(Error::Dimension(
                "front/rear must share a positive frame count".into(),
            ));
        }
        if !(0.0..1.0).contains(&lower_bound) {
            return Err(Error::invalid("lower_bound must be in [0, 1)"));
        }
        let ps = PatternSet {
            k: front.ncols(),
            front,
            rear,
            lower_bound,
            panel_cols,
            panel_rows,
        };
        ps.check_bounds()?;
        Ok(ps)
    }

    pub fn constant(
        value_front: f64,
        value_rear: f64,
        k: usize,
        panel_cols: usize,
        panel_rows: usize,
    ) -> Self {
        let m = panel_cols * panel_rows;
        PatternSet {
            k,
            front: Array2::from_elem((m, k), value_front),
            rear: Array2::from_elem((m, k), value_rear),
            lower_bound: 0.0,
            panel_cols,
            panel_rows,
        }
    }

    pub fn panel_pixels(&self) -> usize {
        self.panel_cols * self.panel_rows
    }

    pub fn check_bounds(&self) -> Result<()> {
        let ok = |x: &f64| x.is_finite() && *x >= self.lower_bound - 1e-12 && *x <= 1.0 + 1e-12;
        if !self.front.iter().all(ok) || !self.rear.iter().all(ok) {
            return Err(Error::invalid(format!(
                "pattern values outside [{}, 1]",
                self.lower_bound
            )));
        }
        Ok(())
    }

    /// Subframe `k` of one panel as a panel-resolution image.
    pub fn frame_image(&self, k: usize, front: bool) -> ImagePlane {
        let col = if front {
            self.front.column(k)
        } else {
            self.rear.column(k)
        };
        ImagePlane {
            cols: self.panel_cols,
            rows: self.panel_rows,
            channels: 1,
            data: col.to_vec(),
        }
    }

    /// Perceived on-axis image at panel resolution: (1/K) sum_k F_k * G_k per
    /// aligned pixel pair.
    pub fn on_axis_image(&self) -> ImagePlane {
        let m = self.panel_pixels();
        let mut data = vec![0.0; m];
        for (i, v) in data.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..self.k {
                acc += self.front[(i, k)] * self.rear[(i, k)];
            }
            *v = acc / self.k as f64;
        }
        ImagePlane {
            cols: self.panel_cols,
            rows: self.panel_rows,
            channels: 1,
            data,
        }
    }
}
