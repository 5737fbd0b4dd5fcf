use std::io::Cursor;
use std::path::Path;

use anyhow::Context;
use demix_core::io::write_atomic;
use image::{DynamicImage, GrayImage, ImageFormat, ImageReader};
use serde::Serialize;

use crate::input_error;

pub const MNIST_SIDE: u32 = 28;

/// Shortest decimal that parses back to the same `f64`, switching to
/// exponent form for very large or small magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// One check with its verdict, as stored in verify and phase reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

pub fn all_passed(assertions: &[Assertion]) -> bool {
    assertions.iter().all(|a| a.passed)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().context("flushing csv")?;
    Ok(write_atomic(path, &bytes)?)
}

pub fn write_png(path: &Path, img: DynamicImage) -> anyhow::Result<()> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(write_atomic(path, buf.get_ref())?)
}

/// Reads an 8-bit grayscale `side × side` PNG as intensities in `[0, 1]`, row-major.
pub fn load_gray_png(path: &Path, side: u32) -> anyhow::Result<Vec<f64>> {
    let img = ImageReader::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .with_guessed_format()?
        .decode()
        .with_context(|| format!("decoding {}", path.display()))?;
    let DynamicImage::ImageLuma8(gray) = img else {
        return Err(input_error(format!(
            "{}: expected 8-bit grayscale, found {:?}",
            path.display(),
            img.color()
        )));
    };
    if gray.dimensions() != (side, side) {
        let (w, h) = gray.dimensions();
        return Err(input_error(format!("{}: expected {side}×{side}, found {w}×{h}", path.display())));
    }
    Ok(gray.pixels().map(|p| p.0[0] as f64 / 255.0).collect())
}

/// Writes intensities as an 8-bit grayscale PNG, clamping to `[0, 1]`.
pub fn save_gray_png(path: &Path, values: &[f64], side: u32) -> anyhow::Result<()> {
    anyhow::ensure!(values.len() == (side * side) as usize, "image needs {} values, got {}", side * side, values.len());
    let bytes: Vec<u8> = values.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    let img = GrayImage::from_raw(side, side, bytes).expect("length checked");
    write_png(path, DynamicImage::ImageLuma8(img))
}

pub fn clip_unit(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 2.0f64.sqrt()] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn gray_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let values: Vec<f64> = (0..16).map(|i| i as f64 * 17.0 / 255.0).collect();
        save_gray_png(&path, &values, 4).unwrap();
        let back = load_gray_png(&path, 4).unwrap();
        assert_eq!(back, values);
        assert!(load_gray_png(&path, 28).is_err());
    }
}
