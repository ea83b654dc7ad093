//! File formats: the EMK1 grid dump, 8-bit PGM/PNG charge images, and
//! rendered PGM/PNG exports.
//!
//! EMK1 layout: `"EMK1"`, one `u8` rank, one `u32` LE extent per axis,
//! then the values as `f64` LE in row-major order. No alignment padding.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use image::{ColorType, ImageBuffer, ImageFormat, Luma, Rgb};
use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::field::ChargeImage;
use crate::grid::{pad, Mask, RealGrid};

pub const MAGIC: &[u8; 4] = b"EMK1";
pub const LOAD_PADDING: usize = 2;

fn header_len(rank: usize) -> usize {
    5 + 4 * rank
}

pub fn encode_emk1(grid: &RealGrid) -> Vec<u8> {
    let rank = grid.ndim();
    let mut out = Vec::with_capacity(header_len(rank) + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.push(rank as u8);
    for &e in grid.shape() {
        out.extend_from_slice(&(e as u32).to_le_bytes());
    }
    for v in grid.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_emk1(bytes: &[u8]) -> Result<RealGrid> {
    let fail = |m: &str| Error::Format(format!("EMK1: {m}"));
    if bytes.len() < 5 || &bytes[..4] != MAGIC {
        return Err(fail("bad magic"));
    }
    let rank = bytes[4] as usize;
    if rank == 0 {
        return Err(fail("rank 0"));
    }
    let start = header_len(rank);
    if bytes.len() < start {
        return Err(fail("truncated header"));
    }
    let shape: Vec<usize> = bytes[5..5 + 4 * rank]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    let len: usize = shape.iter().product();
    if bytes.len() != start + 8 * len {
        return Err(fail("payload size does not match extents"));
    }
    let values = bytes[start..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ArrayD::from_shape_vec(IxDyn(&shape), values).map_err(|e| fail(&e.to_string()))
}

pub fn write_emk1(grid: &RealGrid, path: &Path) -> Result<()> {
    Ok(fs::write(path, encode_emk1(grid))?)
}

pub fn read_emk1(path: &Path) -> Result<RealGrid> {
    decode_emk1(&fs::read(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// `value >= threshold` becomes +1, everything else 0.
    Binary,
    /// `[0, 255]` onto `[-1, 1]`.
    Signed,
    /// `[0, 255]` onto `[0, 1]`.
    Grayscale,
}

impl FromStr for LoadMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Self::Binary),
            "signed" => Ok(Self::Signed),
            "grayscale" => Ok(Self::Grayscale),
            _ => Err(Error::InvalidInput(format!("unknown load mode {s:?}"))),
        }
    }
}

impl LoadMode {
    pub fn map(self, value: f64, threshold: f64) -> f64 {
        match self {
            Self::Binary => f64::from(u8::from(value >= threshold)),
            Self::Signed => value / 127.5 - 1.0,
            Self::Grayscale => value / 255.0,
        }
    }
}

fn skip_pnm_space(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() {
        match bytes[i] {
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => break,
        }
    }
    i
}

fn pnm_token(bytes: &[u8], i: &mut usize) -> Result<usize> {
    *i = skip_pnm_space(bytes, *i);
    let start = *i;
    while *i < bytes.len() && bytes[*i].is_ascii_digit() {
        *i += 1;
    }
    std::str::from_utf8(&bytes[start..*i])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("PGM: malformed header".into()))
}

/// Decodes a P2 or P5 PGM with maxval 255 into raw intensities.
pub fn decode_pgm(bytes: &[u8]) -> Result<RealGrid> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(Error::Format("PGM: expected P2 or P5".into())),
    };
    let mut i = 2;
    let w = pnm_token(bytes, &mut i)?;
    let h = pnm_token(bytes, &mut i)?;
    let maxval = pnm_token(bytes, &mut i)?;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "PGM: unsupported maxval {maxval}, need 8-bit"
        )));
    }
    let values: Vec<f64> = if binary {
        let data = bytes
            .get(i + 1..i + 1 + w * h)
            .ok_or_else(|| Error::Format("PGM: truncated".into()))?;
        data.iter().map(|&b| f64::from(b)).collect()
    } else {
        (0..w * h)
            .map(|_| pnm_token(bytes, &mut i).map(|v| v as f64))
            .collect::<Result<_>>()?
    };
    Ok(ArrayD::from_shape_vec(IxDyn(&[h, w]), values).expect("w*h values"))
}

fn decode_png(bytes: &[u8]) -> Result<RealGrid> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    if img.color() != ColorType::L8 {
        return Err(Error::Format(format!(
            "PNG: need 8-bit grayscale, got {:?}",
            img.color()
        )));
    }
    let g = img.into_luma8();
    let (w, h) = (g.width() as usize, g.height() as usize);
    let values = g.into_raw().into_iter().map(f64::from).collect();
    Ok(ArrayD::from_shape_vec(IxDyn(&[h, w]), values).expect("w*h values"))
}

/// Raw intensities of a PGM/PNG image or the values of an EMK1 grid.
pub fn read_intensities(path: &Path) -> Result<RealGrid> {
    let bytes = fs::read(path)?;
    match bytes.get(..4) {
        Some(m) if m == MAGIC => decode_emk1(&bytes),
        Some(m) if m == b"\x89PNG" => decode_png(&bytes),
        Some(m) if m.starts_with(b"P5") || m.starts_with(b"P2") => decode_pgm(&bytes),
        _ => Err(Error::Format(format!(
            "{}: not PGM, PNG or EMK1",
            path.display()
        ))),
    }
}

/// Loads a charge image and pads it with a zero border of
/// [`LOAD_PADDING`] pixels.
///
/// EMK1 grids are mapped with the same rule as 8-bit images, so a voxel
/// grid stored as 0/255 or 0/1 (binary, threshold 1) both work. An
/// all-zero result is returned as is; callers decide whether to warn.
pub fn load_charge_image(path: &Path, mode: LoadMode, threshold: f64) -> Result<ChargeImage> {
    let raw = read_intensities(path)?;
    let mapped = raw.mapv(|v| mode.map(v, threshold));
    ChargeImage::new(pad(&mapped, LOAD_PADDING, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Render {
    Raw,
    PgmNorm,
    PngDiverging,
}

impl FromStr for Render {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "pgm_norm" => Ok(Self::PgmNorm),
            "png_diverging" => Ok(Self::PngDiverging),
            _ => Err(Error::InvalidInput(format!("unknown render {s:?}"))),
        }
    }
}

/// Min-max normalization to bytes. A constant grid maps to zeros.
pub fn normalize_u8(grid: &RealGrid) -> Vec<u8> {
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let range = hi - lo;
    grid.iter()
        .map(|&v| {
            if range > 0.0 {
                ((v - lo) / range * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect()
}

/// Values divided by `max |value|`, so they fall in `[-1, 1]`.
pub fn diverging_levels(grid: &RealGrid) -> Vec<f64> {
    let m = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    grid.iter()
        .map(|&v| if m > 0.0 { v / m } else { 0.0 })
        .collect()
}

/// Blue (-1) through white (0) to red (+1).
pub fn diverging_color(t: f64) -> [u8; 3] {
    let fade = |a: f64| (255.0 * (1.0 - a.abs().min(1.0))).round() as u8;
    if t >= 0.0 {
        [255, fade(t), fade(t)]
    } else {
        [fade(t), fade(t), 255]
    }
}

fn require_2d(grid: &RealGrid) -> Result<(u32, u32)> {
    match grid.shape() {
        &[h, w] => Ok((w as u32, h as u32)),
        s => Err(Error::InvalidInput(format!(
            "image export needs a 2D grid, got shape {s:?}"
        ))),
    }
}

fn image_error(e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(e) => Error::Io(e),
        e => Error::Format(e.to_string()),
    }
}

pub fn save_grid(grid: &RealGrid, path: &Path, render: Render) -> Result<()> {
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("grid has non-finite values".into()));
    }
    match render {
        Render::Raw => write_emk1(grid, path),
        Render::PgmNorm => {
            let (w, h) = require_2d(grid)?;
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(normalize_u8(grid));
            Ok(fs::write(path, out)?)
        }
        Render::PngDiverging => {
            let (w, h) = require_2d(grid)?;
            let data: Vec<u8> = diverging_levels(grid)
                .into_iter()
                .flat_map(diverging_color)
                .collect();
            let img: ImageBuffer<Rgb<u8>, _> =
                ImageBuffer::from_raw(w, h, data).expect("w*h*3 bytes");
            img.save_with_format(path, ImageFormat::Png)
                .map_err(image_error)
        }
    }
}

/// Writes an 8-bit grayscale PNG (used by tests and fixtures).
pub fn save_gray_png(values: &ArrayD<u8>, path: &Path) -> Result<()> {
    let (h, w) = match values.shape() {
        &[h, w] => (h as u32, w as u32),
        s => {
            return Err(Error::InvalidInput(format!(
                "PNG needs a 2D grid, got {s:?}"
            )))
        }
    };
    let img: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(w, h, values.iter().copied().collect::<Vec<u8>>())
            .expect("w*h bytes");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(image_error)
}

/// Alpha-blends coloured masks (alpha 0.5) over a gray rendering of
/// `base`, later layers on top.
pub fn save_overlay(base: &Mask, layers: &[(&Mask, [u8; 3])], path: &Path) -> Result<()> {
    let (h, w) = match base.shape() {
        &[h, w] => (h, w),
        s => {
            return Err(Error::InvalidInput(format!(
                "overlay needs a 2D mask, got {s:?}"
            )))
        }
    };
    let mut data = Vec::with_capacity(3 * h * w);
    for (i, &b) in base.indexed_iter() {
        let mut px = if b { [96.0f64; 3] } else { [0.0; 3] };
        for (mask, color) in layers {
            if mask[&i] {
                for c in 0..3 {
                    px[c] = 0.5 * px[c] + 0.5 * f64::from(color[c]);
                }
            }
        }
        data.extend(px.map(|v| v.round() as u8));
    }
    let img: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(w as u32, h as u32, data).expect("w*h*3 bytes");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(image_error)
}
