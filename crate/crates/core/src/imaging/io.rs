use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, Luma, Rgb};

use super::{GrayFrame, RgbImage};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<image::DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(image::load_from_memory_with_format(&bytes, ImageFormat::Png)?)
}

pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let img = read(path.as_ref())?.into_rgb8();
    let (w, h) = img.dimensions();
    RgbImage::new(w, h, img.pixels().map(|p| p.0).collect())
}

/// Loads an 8-bit grayscale PNG (color input is converted to luma).
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayFrame> {
    let img = read(path.as_ref())?.into_luma8();
    let (w, h) = img.dimensions();
    GrayFrame::from_vec(w, h, img.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect())
}

pub fn encode_gray_png(frame: &GrayFrame) -> Result<Vec<u8>> {
    let buf = image::ImageBuffer::<Luma<u8>, _>::from_raw(frame.width(), frame.height(), frame.to_u8())
        .expect("buffer sized from frame");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>> {
    let raw: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    let buf = image::ImageBuffer::<Rgb<u8>, _>::from_raw(img.width(), img.height(), raw)
        .expect("buffer sized from image");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn save_gray(frame: &GrayFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_gray_png(frame)?).map_err(|e| Error::io(path, e))
}

pub fn save_rgb(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_rgb_png(img)?).map_err(|e| Error::io(path, e))
}
