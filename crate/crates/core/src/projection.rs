//! Discrete projection operator: maps the light-field matrix emitted by the
//! two panels to the superresolved image observed on the diffuser.
//!
//! For every superpixel center x the angular integral is discretized into
//! rays; a ray at angle theta intersects the front panel at x - d*nu and the
//! rear panel at x - (d + d_l)*nu with nu = tan(theta). Intersections are
//! assigned to the 1-2 nearest pixels per axis with bilinear weights,
//! coincident (front, rear) pairs are merged, and each output row is
//! normalized to unit sum so an all-ones light field maps to an all-ones
//! image. Because the angular profile is separable per axis, rows are built
//! as tensor products of per-axis ray tables.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DiffuserModel, DisplayGeometry};
use crate::image::ImagePlane;
use crate::patterns::PatternSet;

/// Set of (front, rear) pixel pairs reachable by at least one diffuser ray.
///
/// The light-field matrix is only ever optimized on this support; all other
/// entries are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LightFieldSupport {
    pub panel_pixels: usize,
    /// Sorted lexicographically by (front, rear).
    pub pairs: Vec<(u32, u32)>,
}

impl LightFieldSupport {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index_of(&self, front: u32, rear: u32) -> Option<usize> {
        self.pairs.binary_search(&(front, rear)).ok()
    }
}

/// Sparse N x M^2 projection operator in CSR-like form over the active
/// support.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    pub n_rows: usize,
    pub target_cols: usize,
    pub target_rows: usize,
    pub panel_cols: usize,
    pub panel_rows: usize,
    pub support: LightFieldSupport,
    pub row_normalized: bool,
    row_ptr: Vec<usize>,
    entry_support: Vec<u32>,
    entry_weight: Vec<f64>,
    /// Per support index: sum over rows of the entry weight (SART column sums).
    col_sums: Vec<f64>,
}

/// One merged per-axis ray contribution: (front pixel, rear pixel, weight).
type AxisEntry = (u32, u32, f64);

impl ProjectionOperator {
    /// Entries of one output row as (support index, weight) pairs.
    pub fn row(&self, n: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[n];
        let hi = self.row_ptr[n + 1];
        self.entry_support[lo..hi]
            .iter()
            .zip(&self.entry_weight[lo..hi])
            .map(|(&s, &w)| (s as usize, w))
    }

    pub fn nnz(&self) -> usize {
        self.entry_weight.len()
    }

    pub fn panel_pixels(&self) -> usize {
        self.panel_cols * self.panel_rows
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    /// Apply to a light field given as values over the active support.
    pub fn apply_lightfield(&self, lf: &[f64]) -> Result<Vec<f64>> {
        if lf.len() != self.support.len() {
            return Err(Error::Dimension(format!(
                "light field length {} != support {}",
                lf.len(),
                self.support.len()
            )));
        }
        let out: Vec<f64> = (0..self.n_rows)
            .into_par_iter()
            .map(|n| self.row(n).map(|(s, w)| w * lf[s]).sum())
            .collect();
        Ok(out)
    }

    /// Adjoint applied to an image-space residual, restricted to the active
    /// support.
    ///
    /// Rows are scattered into per-chunk accumulators of a fixed size and
    /// reduced in chunk order, so the result is bit-identical regardless of
    /// the thread count.
    pub fn apply_adjoint(&self, residual: &[f64]) -> Result<Vec<f64>> {
        if residual.len() != self.n_rows {
            return Err(Error::Dimension(format!(
                "residual length {} != rows {}",
                residual.len(),
                self.n_rows
            )));
        }
        const CHUNK: usize = 2048;
        let s = self.support.len();
        let partials: Vec<Vec<f64>> = (0..self.n_rows.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![0.0; s];
                let lo_row = c * CHUNK;
                let hi_row = (lo_row + CHUNK).min(self.n_rows);
                for n in lo_row..hi_row {
                    let r = residual[n];
                    if r == 0.0 {
                        continue;
                    }
                    for e in self.row_ptr[n]..self.row_ptr[n + 1] {
                        acc[self.entry_support[e] as usize] += self.entry_weight[e] * r;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0; s];
        for acc in partials {
            for (o, a) in out.iter_mut().zip(acc) {
                *o += a;
            }
        }
        Ok(out)
    }

    /// Evaluate the observed image for a pattern set: i = P vec(F G^T).
    pub fn apply(&self, pat: &PatternSet) -> Result<ImagePlane> {
        if pat.panel_pixels() != self.panel_pixels() {
            return Err(Error::Dimension(format!(
                "pattern panel pixels {} != operator {}",
                pat.panel_pixels(),
                self.panel_pixels()
            )));
        }
        let lf = lightfield_on_support(&self.support, pat);
        let data = self.apply_lightfield(&lf)?;
        Ok(ImagePlane {
            cols: self.target_cols,
            rows: self.target_rows,
            channels: 1,
            data,
        })
    }

    /// Build an operator from explicit row triples (row, front, rear, weight).
    /// Rows are not renormalized; `row_normalized` is detected from the data.
    pub fn from_triples(
        target_cols: usize,
        target_rows: usize,
        panel_cols: usize,
        panel_rows: usize,
        triples: &[(u32, u32, u32, f64)],
    ) -> Result<Self> {
        let n_rows = target_cols * target_rows;
        let m = (panel_cols * panel_rows) as u32;
        for &(row, a, b, w) in triples {
            if row as usize >= n_rows || a >= m || b >= m {
                return Err(Error::invalid("triple index out of bounds"));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid("triple weights must be positive finite"));
            }
        }
        let mut pairs: Vec<(u32, u32)> = triples.iter().map(|&(_, a, b, _)| (a, b)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let support = LightFieldSupport {
            panel_pixels: m as usize,
            pairs,
        };
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_rows];
        for &(row, a, b, w) in triples {
            let s = support.index_of(a, b).expect("pair collected above") as u32;
            rows[row as usize].push((s, w));
        }
        for r in &mut rows {
            r.sort_unstable_by_key(|&(s, _)| s);
            // merge duplicates
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(r.len());
            for &(s, w) in r.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == s => last.1 += w,
                    _ => merged.push((s, w)),
                }
            }
            *r = merged;
        }
        Ok(Self::assemble(
            target_cols,
            target_rows,
            panel_cols,
            panel_rows,
            support,
            rows,
            false,
        ))
    }

    fn assemble(
        target_cols: usize,
        target_rows: usize,
        panel_cols: usize,
        panel_rows: usize,
        support: LightFieldSupport,
        rows: Vec<Vec<(u32, f64)>>,
        normalized_by_construction: bool,
    ) -> Self {
        let n_rows = rows.len();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        row_ptr.push(0usize);
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut entry_support = Vec::with_capacity(nnz);
        let mut entry_weight = Vec::with_capacity(nnz);
        let mut col_sums = vec![0.0; support.len()];
        let mut normalized = true;
        for r in &rows {
            let mut sum = 0.0;
            for &(s, w) in r {
                entry_support.push(s);
                entry_weight.push(w);
                col_sums[s as usize] += w;
                sum += w;
            }
            if (sum - 1.0).abs() > 1e-9 {
                normalized = false;
            }
            row_ptr.push(entry_support.len());
        }
        ProjectionOperator {
            n_rows,
            target_cols,
            target_rows,
            panel_cols,
            panel_rows,
            support,
            row_normalized: normalized_by_construction || normalized,
            row_ptr,
            entry_support,
            entry_weight,
            col_sums,
        }
    }

    /// Serialize as a binary triple list: header (N, M, count) as u64 LE,
    /// then row-sorted (row: u32, front: u32, rear: u32, weight: f64 LE)
    /// records.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::with_capacity(24 + self.nnz() * 20);
        buf.extend_from_slice(&(self.n_rows as u64).to_le_bytes());
        buf.extend_from_slice(&(self.panel_pixels() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.nnz() as u64).to_le_bytes());
        for n in 0..self.n_rows {
            for e in self.row_ptr[n]..self.row_ptr[n + 1] {
                let (a, b) = self.support.pairs[self.entry_support[e] as usize];
                buf.extend_from_slice(&(n as u32).to_le_bytes());
                buf.extend_from_slice(&a.to_le_bytes());
                buf.extend_from_slice(&b.to_le_bytes());
                buf.extend_from_slice(&self.entry_weight[e].to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    /// Read an operator written by [`write_binary`]; the geometry supplies
    /// the target/panel grid shapes the flat header cannot carry.
    pub fn read_binary(path: &Path, geom: &DisplayGeometry) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 24 {
            return Err(Error::ImageFormat("operator file too short".into()));
        }
        let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        let m = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        if n != geom.target_pixels() || m != geom.panel_pixels() {
            return Err(Error::Dimension(format!(
                "operator is {}x{}^2, geometry expects {}x{}^2",
                n,
                m,
                geom.target_pixels(),
                geom.panel_pixels()
            )));
        }
        if bytes.len() != 24 + count * 20 {
            return Err(Error::ImageFormat(format!(
                "operator file length {} != expected {}",
                bytes.len(),
                24 + count * 20
            )));
        }
        let mut triples = Vec::with_capacity(count);
        for i in 0..count {
            let o = 24 + i * 20;
            let row = u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
            let a = u32::from_le_bytes(bytes[o + 4..o + 8].try_into().unwrap());
            let b = u32::from_le_bytes(bytes[o + 8..o + 12].try_into().unwrap());
            let w = f64::from_le_bytes(bytes[o + 12..o + 20].try_into().unwrap());
            triples.push((row, a, b, w));
        }
        Self::from_triples(
            geom.target_cols(),
            geom.target_rows(),
            geom.panel_cols,
            geom.panel_rows,
            &triples,
        )
    }
}

/// F G^T evaluated on the active support only.
pub fn lightfield_on_support(support: &LightFieldSupport, pat: &PatternSet) -> Vec<f64> {
    let inv_k = 1.0 / pat.k as f64;
    support
        .pairs
        .iter()
        .map(|&(a, b)| {
            let mut acc = 0.0;
            for k in 0..pat.k {
                acc += pat.front[(a as usize, k)] * pat.rear[(b as usize, k)];
            }
            acc * inv_k
        })
        .collect()
}

/// Per-axis ray table for one target index: merged (front, rear, weight)
/// entries, already normalized to unit sum.
fn axis_rays(
    geom: &DisplayGeometry,
    model: &DiffuserModel,
    panel_count: usize,
    target_count: usize,
    target_idx: usize,
) -> Vec<AxisEntry> {
    let x = geom.target_coord(target_idx, panel_count, target_count);
    let depth_front = geom.gap_diffuser;
    let depth_rear = geom.gap_diffuser + geom.gap_panels;

    // Zero diffuser gap collapses the footprint: the kernel degenerates to
    // the single axial ray, pinning front and rear pixel to the superpixel.
    let angles: Vec<(f64, f64)> = if geom.gap_diffuser == 0.0 {
        vec![(0.0, 1.0)]
    } else {
        model
            .angle_grid()
            .into_iter()
            .filter_map(|t| {
                let w = model.weight(t).expect("grid angles are finite");
                (w > 0.0).then_some((t, w))
            })
            .collect()
    };

    let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
    for (theta, w_ang) in angles {
        let slope = theta.to_radians().tan();
        let front_pos = geom.panel_pixel_pos(x - depth_front * slope, panel_count);
        let rear_pos = geom.panel_pixel_pos(x - depth_rear * slope, panel_count);
        for (a, wf) in bilinear_cells(front_pos, panel_count) {
            for (b, wr) in bilinear_cells(rear_pos, panel_count) {
                let w = w_ang * wf * wr;
                if w > 0.0 {
                    *acc.entry((a, b)).or_insert(0.0) += w;
                }
            }
        }
    }
    let mut entries: Vec<AxisEntry> = acc.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    entries.sort_unstable_by_key(|&(a, b, _)| (a, b));
    let sum: f64 = entries.iter().map(|e| e.2).sum();
    if sum > 0.0 {
        for e in &mut entries {
            e.2 /= sum;
        }
    }
    entries
}

/// The 1-2 pixels covering a continuous pixel coordinate, with bilinear
/// weights; cells outside the panel are dropped (border truncation).
fn bilinear_cells(pos: f64, count: usize) -> Vec<(u32, f64)> {
    let i0 = pos.floor();
    let frac = pos - i0;
    let mut cells = Vec::with_capacity(2);
    let lo = i0 as i64;
    if lo >= 0 && (lo as usize) < count && 1.0 - frac > 0.0 {
        cells.push((lo as u32, 1.0 - frac));
    }
    let hi = lo + 1;
    if hi >= 0 && (hi as usize) < count && frac > 0.0 {
        cells.push((hi as u32, frac));
    }
    cells
}

/// Construct the projection operator for the given geometry and diffuser.
pub fn build_projection(
    geom: &DisplayGeometry,
    model: &DiffuserModel,
) -> Result<ProjectionOperator> {
    geom.validate()?;
    model.validate()?;

    let tc = geom.target_cols();
    let tr = geom.target_rows();
    let pc = geom.panel_cols;
    let pr = geom.panel_rows;

    let rays_x: Vec<Vec<AxisEntry>> = (0..tc)
        .map(|n| axis_rays(geom, model, pc, tc, n))
        .collect();
    let rays_y: Vec<Vec<AxisEntry>> = (0..tr)
        .map(|n| axis_rays(geom, model, pr, tr, n))
        .collect();

    for (nx, r) in rays_x.iter().enumerate() {
        if r.is_empty() {
            return Err(Error::Build {
                row: nx,
                message: "footprint entirely outside the panels (x axis)".into(),
            });
        }
    }
    for (ny, r) in rays_y.iter().enumerate() {
        if r.is_empty() {
            return Err(Error::Build {
                row: ny * tc,
                message: "footprint entirely outside the panels (y axis)".into(),
            });
        }
    }

    // Support is the product of the per-axis pair sets; group rear pixels by
    // front pixel per axis to emit pairs in (front, rear) sorted order.
    let sup_x = axis_pair_map(&rays_x, pc);
    let sup_y = axis_pair_map(&rays_y, pr);
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for (ay, bys) in &sup_y {
        for (ax, bxs) in &sup_x {
            let a = ay * pc as u32 + ax;
            for by in bys {
                for bx in bxs {
                    pairs.push((a, by * pc as u32 + bx));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let support = LightFieldSupport {
        panel_pixels: pc * pr,
        pairs,
    };
    let index: HashMap<(u32, u32), u32> = support
        .pairs
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i as u32))
        .collect();

    let rows: Vec<Vec<(u32, f64)>> = (0..tc * tr)
        .into_par_iter()
        .map(|n| {
            let nx = n % tc;
            let ny = n / tc;
            let rx = &rays_x[nx];
            let ry = &rays_y[ny];
            let mut row = Vec::with_capacity(rx.len() * ry.len());
            let mut sum = 0.0;
            for &(ay, by, wy) in ry {
                for &(ax, bx, wx) in rx {
                    let a = ay * pc as u32 + ax;
                    let b = by * pc as u32 + bx;
                    let w = wy * wx;
                    sum += w;
                    row.push((index[&(a, b)], w));
                }
            }
            // exact unit row sum, so the all-ones invariant holds everywhere
            for e in &mut row {
                e.1 /= sum;
            }
            row.sort_unstable_by_key(|&(s, _)| s);
            row
        })
        .collect();

    Ok(ProjectionOperator::assemble(
        tc, tr, pc, pr, support, rows, true,
    ))
}

/// Distinct (front -> sorted rear list) pairs across all per-axis rows.
fn axis_pair_map(rows: &[Vec<AxisEntry>], _panel_count: usize) -> Vec<(u32, Vec<u32>)> {
    let mut map: HashMap<u32, Vec<u32>> = HashMap::new();
    for row in rows {
        for &(a, b, _) in row {
            map.entry(a).or_default().push(b);
        }
    }
    let mut out: Vec<(u32, Vec<u32>)> = map
        .into_iter()
        .map(|(a, mut bs)| {
            bs.sort_unstable();
            bs.dedup();
            (a, bs)
        })
        .collect();
    out.sort_unstable_by_key(|&(a, _)| a);
    out
}
