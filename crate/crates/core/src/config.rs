//! Flat `key = value` configuration for display geometry and diffuser.
//!
//! Units are fixed: millimetres for lengths, degrees for angles. `#` starts
//! a comment. Unknown keys are rejected so typos cannot silently fall back
//! to defaults.
//!
//! ```text
//! # 32x32 panels, prototype spacing
//! panel_cols   = 32
//! panel_rows   = 32
//! panel_pitch  = 0.282
//! gap_panels   = 19.0
//! gap_diffuser = 6.0
//! sr_factor    = 3
//! half_angle   = 7.5
//! profile      = cosine
//! # angular_samples = 37   (optional; default derived from the footprint)
//! ```

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{default_angular_samples, DiffuserModel, DiffuserProfile, DisplayGeometry};

#[derive(Debug, Clone, PartialEq)]
pub struct DisplayConfig {
    pub geometry: DisplayGeometry,
    pub diffuser: DiffuserModel,
}

const KEYS: &[&str] = &[
    "panel_cols",
    "panel_rows",
    "panel_pitch",
    "gap_panels",
    "gap_diffuser",
    "sr_factor",
    "half_angle",
    "profile",
    "angular_samples",
];

pub fn load_config(path: &Path) -> Result<DisplayConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<DisplayConfig> {
    let mut map: HashMap<String, String> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got {:?}", line),
            )
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::config(key, "duplicate key"));
        }
    }

    let geometry = DisplayGeometry::new(
        get_usize(&map, "panel_cols")?,
        get_usize(&map, "panel_rows")?,
        get_f64(&map, "panel_pitch")?,
        get_f64(&map, "gap_panels")?,
        get_f64(&map, "gap_diffuser")?,
        get_f64(&map, "sr_factor")?,
    )
    .map_err(|e| Error::config("geometry", e.to_string()))?;

    let half_angle = get_f64(&map, "half_angle")?;
    let profile_str = map
        .get("profile")
        .ok_or_else(|| Error::config("profile", "missing required key"))?;
    let profile = DiffuserProfile::parse(profile_str)
        .ok_or_else(|| Error::config("profile", format!("expected cosine|uniform, got {:?}", profile_str)))?;
    let angular_samples = match map.get("angular_samples") {
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| Error::config("angular_samples", format!("not an integer: {:?}", s)))?,
        None => default_angular_samples(&geometry, half_angle),
    };
    let diffuser = DiffuserModel::new(half_angle, profile, angular_samples)
        .map_err(|e| Error::config("diffuser", e.to_string()))?;

    Ok(DisplayConfig { geometry, diffuser })
}

/// Canonical one-line rendering used for the manifest geometry hash.
pub fn canonical_string(cfg: &DisplayConfig) -> String {
    format!(
        "panel_cols={};panel_rows={};panel_pitch={};gap_panels={};gap_diffuser={};sr_factor={};half_angle={};profile={};angular_samples={}",
        cfg.geometry.panel_cols,
        cfg.geometry.panel_rows,
        cfg.geometry.panel_pitch,
        cfg.geometry.gap_panels,
        cfg.geometry.gap_diffuser,
        cfg.geometry.sr_factor,
        cfg.diffuser.half_angle,
        cfg.diffuser.profile.name(),
        cfg.diffuser.angular_samples,
    )
}

/// FNV-1a over the canonical string; stable across platforms and runs.
pub fn geometry_hash(cfg: &DisplayConfig) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in canonical_string(cfg).bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn get_f64(map: &HashMap<String, String>, key: &str) -> Result<f64> {
    let s = map
        .get(key)
        .ok_or_else(|| Error::config(key, "missing required key"))?;
    s.parse::<f64>()
        .map_err(|_| Error::config(key, format!("not a number: {:?}", s)))
}

fn get_usize(map: &HashMap<String, String>, key: &str) -> Result<usize> {
    let s = map
        .get(key)
        .ok_or_else(|| Error::config(key, "missing required key"))?;
    s.parse::<usize>()
        .map_err(|_| Error::config(key, format!("not an integer: {:?}", s)))
}
