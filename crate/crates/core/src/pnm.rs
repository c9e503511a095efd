//! Binary PGM (P5) and PPM (P6) reading and writing at 8 or 16 bits.
//!
//! Quantization to the integer sample grid happens exactly once, at write
//! time; reading a file back yields bit-identical bytes when re-written with
//! the same depth.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::ImagePlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn maxval(&self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

/// Write a PGM (1 channel) or PPM (3 channels). Values are clamped to [0,1]
/// and quantized to the requested depth; 16-bit samples are big-endian per
/// the netpbm convention.
pub fn write_pnm(path: &Path, image: &ImagePlane, depth: BitDepth) -> Result<()> {
    let magic = match image.channels {
        1 => "P5",
        3 => "P6",
        _ => return Err(Error::invalid("pnm images must have 1 or 3 channels")),
    };
    let maxval = depth.maxval();
    let mut buf = Vec::with_capacity(image.data.len() * 2 + 32);
    write!(buf, "{}\n{} {}\n{}\n", magic, image.cols, image.rows, maxval)?;
    for &v in &image.data {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        match depth {
            BitDepth::Eight => buf.push(q as u8),
            BitDepth::Sixteen => buf.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Read a binary PGM/PPM file into an [`ImagePlane`].
pub fn read_pnm(path: &Path) -> Result<ImagePlane> {
    let bytes = fs::read(path)?;
    parse_pnm(&bytes)
}

pub fn parse_pnm(bytes: &[u8]) -> Result<ImagePlane> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)
        .ok_or_else(|| Error::ImageFormat("missing magic number".into()))?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        other => {
            return Err(Error::ImageFormat(format!(
                "unsupported magic {:?} (binary P5/P6 only)",
                other
            )))
        }
    };
    let cols = parse_dim(bytes, &mut pos, "width")?;
    let rows = parse_dim(bytes, &mut pos, "height")?;
    let maxval = parse_dim(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::ImageFormat(format!("invalid maxval {}", maxval)));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let samples = cols * rows * channels;
    let wide = maxval > 255;
    let need = samples * if wide { 2 } else { 1 };
    if bytes.len() < pos + need {
        return Err(Error::ImageFormat(format!(
            "raster truncated: need {} bytes, have {}",
            need,
            bytes.len().saturating_sub(pos)
        )));
    }
    let raster = &bytes[pos..pos + need];
    let scale = 1.0 / maxval as f64;
    let data: Vec<f64> = if wide {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
            .collect()
    } else {
        raster.iter().map(|&b| b as f64 * scale).collect()
    };
    ImagePlane::new(cols, rows, channels, data)
}

fn parse_dim(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)
        .ok_or_else(|| Error::ImageFormat(format!("missing {}", what)))?;
    tok.parse::<usize>()
        .map_err(|_| Error::ImageFormat(format!("bad {}: {:?}", what, tok)))
}

/// Next whitespace-delimited token, skipping `#` comment lines. Leaves `pos`
/// at the byte after the token.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_with_comments_parses() {
        let bytes = b"P5\n# a comment\n2 1\n# another\n255\n\x10\xff";
        let img = parse_pnm(bytes).unwrap();
        assert_eq!((img.cols, img.rows, img.channels), (2, 1, 1));
        assert!((img.data[0] - 16.0 / 255.0).abs() < 1e-12);
        assert_eq!(img.data[1], 1.0);
    }

    #[test]
    fn truncated_raster_is_an_error() {
        assert!(parse_pnm(b"P5\n4 4\n255\n\x00").is_err());
    }

    #[test]
    fn rejects_ascii_variants() {
        assert!(parse_pnm(b"P2\n1 1\n255\n0\n").is_err());
    }

    proptest! {
        // Quantization is applied once at write; a written file read back and
        // re-written is byte-identical.
        #[test]
        fn write_read_write_is_stable(
            vals in proptest::collection::vec(0.0f64..=1.0, 12),
            wide in proptest::bool::ANY,
        ) {
            let img = ImagePlane::new(4, 3, 1, vals).unwrap();
            let depth = if wide { BitDepth::Sixteen } else { BitDepth::Eight };
            let dir = tempfile::tempdir().unwrap();
            let p1 = dir.path().join("a.pgm");
            let p2 = dir.path().join("b.pgm");
            write_pnm(&p1, &img, depth).unwrap();
            let back = read_pnm(&p1).unwrap();
            write_pnm(&p2, &back, depth).unwrap();
            prop_assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        }

        #[test]
        fn rgb_roundtrip_preserves_quantized_values(
            vals in proptest::collection::vec(0.0f64..=1.0, 6),
        ) {
            let img = ImagePlane::new(2, 1, 3, vals.clone()).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("a.ppm");
            write_pnm(&p, &img, BitDepth::Sixteen).unwrap();
            let back = read_pnm(&p).unwrap();
            for (a, b) in vals.iter().zip(back.data.iter()) {
                prop_assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
            }
        }
    }
}
