//! On-disk run artifacts: pattern images, the run manifest, and diagnostics
//! CSV.
//!
//! Patterns are written as K pairs of panel-resolution 16-bit grayscale
//! images plus a `manifest.txt` of `key = value` lines recording the rank,
//! bound, seed, and geometry hash. Quantization happens exactly once, at
//! write time.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::patterns::PatternSet;
use crate::pnm::{read_pnm, write_pnm, BitDepth};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplayMode {
    Superres,
    Hdr,
    LightField3d,
}

impl DisplayMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "superres" => Some(DisplayMode::Superres),
            "hdr" => Some(DisplayMode::Hdr),
            "lightfield3d" => Some(DisplayMode::LightField3d),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DisplayMode::Superres => "superres",
            DisplayMode::Hdr => "hdr",
            DisplayMode::LightField3d => "lightfield3d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub mode: DisplayMode,
    pub k: usize,
    pub lower_bound: f64,
    pub seed: u64,
    pub geometry_hash: u64,
    pub panel_cols: usize,
    pub panel_rows: usize,
    pub front_files: Vec<String>,
    pub rear_files: Vec<String>,
}

/// Write the K pattern pairs and the manifest into `dir`.
pub fn write_pattern_set(
    dir: &Path,
    pat: &PatternSet,
    mode: DisplayMode,
    seed: u64,
    geometry_hash: u64,
) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let mut front_files = Vec::with_capacity(pat.k);
    let mut rear_files = Vec::with_capacity(pat.k);
    for k in 0..pat.k {
        let fname = format!("front_{:02}.pgm", k);
        let rname = format!("rear_{:02}.pgm", k);
        write_pnm(&dir.join(&fname), &pat.frame_image(k, true), BitDepth::Sixteen)?;
        write_pnm(&dir.join(&rname), &pat.frame_image(k, false), BitDepth::Sixteen)?;
        front_files.push(fname);
        rear_files.push(rname);
    }
    let manifest = RunManifest {
        mode,
        k: pat.k,
        lower_bound: pat.lower_bound,
        seed,
        geometry_hash,
        panel_cols: pat.panel_cols,
        panel_rows: pat.panel_rows,
        front_files,
        rear_files,
    };
    fs::write(dir.join("manifest.txt"), manifest_text(&manifest))?;
    Ok(manifest)
}

fn manifest_text(m: &RunManifest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode = {}", m.mode.name());
    let _ = writeln!(s, "k = {}", m.k);
    let _ = writeln!(s, "lower_bound = {}", m.lower_bound);
    let _ = writeln!(s, "seed = {}", m.seed);
    let _ = writeln!(s, "geometry_hash = {:016x}", m.geometry_hash);
    let _ = writeln!(s, "panel_cols = {}", m.panel_cols);
    let _ = writeln!(s, "panel_rows = {}", m.panel_rows);
    for (k, f) in m.front_files.iter().enumerate() {
        let _ = writeln!(s, "front_{:02} = {}", k, f);
    }
    for (k, f) in m.rear_files.iter().enumerate() {
        let _ = writeln!(s, "rear_{:02} = {}", k, f);
    }
    s
}

/// Load a pattern set written by [`write_pattern_set`].
pub fn read_pattern_set(dir: &Path) -> Result<(PatternSet, RunManifest)> {
    let text = fs::read_to_string(dir.join("manifest.txt"))?;
    let mut map: HashMap<String, String> = HashMap::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |key: &str| -> Result<&String> {
        map.get(key)
            .ok_or_else(|| Error::config(key, "missing manifest key"))
    };
    let mode = DisplayMode::parse(get("mode")?)
        .ok_or_else(|| Error::config("mode", "unknown display mode"))?;
    let k: usize = parse_field(get("k")?, "k")?;
    let lower_bound: f64 = parse_field(get("lower_bound")?, "lower_bound")?;
    let seed: u64 = parse_field(get("seed")?, "seed")?;
    let geometry_hash = u64::from_str_radix(get("geometry_hash")?, 16)
        .map_err(|_| Error::config("geometry_hash", "not a hex value"))?;
    let panel_cols: usize = parse_field(get("panel_cols")?, "panel_cols")?;
    let panel_rows: usize = parse_field(get("panel_rows")?, "panel_rows")?;

    let m = panel_cols * panel_rows;
    let mut front = Array2::zeros((m, k));
    let mut rear = Array2::zeros((m, k));
    let mut front_files = Vec::with_capacity(k);
    let mut rear_files = Vec::with_capacity(k);
    for kk in 0..k {
        for (is_front, files) in [(true, &mut front_files), (false, &mut rear_files)] {
            let key = if is_front {
                format!("front_{:02}", kk)
            } else {
                format!("rear_{:02}", kk)
            };
            let fname = get(&key)?.clone();
            let img = read_pnm(&dir.join(&fname))?;
            if img.cols != panel_cols || img.rows != panel_rows || img.channels != 1 {
                return Err(Error::Dimension(format!(
                    "pattern file {} has shape {}x{}x{}",
                    fname, img.cols, img.rows, img.channels
                )));
            }
            let dst = if is_front { &mut front } else { &mut rear };
            for (i, v) in img.data.iter().enumerate() {
                dst[(i, kk)] = *v;
            }
            files.push(fname);
        }
    }
    // quantization may nudge a value one step below the recorded bound
    let safe_lower = (lower_bound - 1.0 / 65535.0).max(0.0);
    let pat = PatternSet::new(front, rear, safe_lower, panel_cols, panel_rows)?;
    Ok((
        pat,
        RunManifest {
            mode,
            k,
            lower_bound,
            seed,
            geometry_hash,
            panel_cols,
            panel_rows,
            front_files,
            rear_files,
        },
    ))
}

fn parse_field<T: std::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::config(key, format!("bad value {:?}", s)))
}

/// Files the manifest references, for existence checks and copying.
pub fn manifest_files(m: &RunManifest) -> Vec<PathBuf> {
    m.front_files
        .iter()
        .chain(m.rear_files.iter())
        .map(PathBuf::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorize::seeded_factors;

    #[test]
    fn roundtrip_preserves_quantized_patterns() {
        let (front, rear) = seeded_factors(12, 3, 0.1, 5);
        let pat = PatternSet::new(front, rear, 0.1, 4, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest =
            write_pattern_set(dir.path(), &pat, DisplayMode::Hdr, 42, 0xdeadbeef).unwrap();
        assert_eq!(manifest.front_files.len(), 3);

        let (back, m2) = read_pattern_set(dir.path()).unwrap();
        assert_eq!(m2.mode, DisplayMode::Hdr);
        assert_eq!(m2.seed, 42);
        assert_eq!(m2.geometry_hash, 0xdeadbeef);
        for (a, b) in pat.front.iter().zip(back.front.iter()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }

        // second write of the reloaded set is byte-identical
        let dir2 = tempfile::tempdir().unwrap();
        write_pattern_set(dir2.path(), &back, DisplayMode::Hdr, 42, 0xdeadbeef).unwrap();
        for f in manifest_files(&manifest) {
            let a = std::fs::read(dir.path().join(&f)).unwrap();
            let b = std::fs::read(dir2.path().join(&f)).unwrap();
            assert_eq!(a, b, "file {:?} changed across a write-read-write", f);
        }
    }

    #[test]
    fn missing_manifest_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("manifest.txt"), "mode = hdr\nk = 1\n").unwrap();
        let err = read_pattern_set(dir.path()).unwrap_err();
        assert!(err.to_string().contains("lower_bound"), "{}", err);
    }
}
