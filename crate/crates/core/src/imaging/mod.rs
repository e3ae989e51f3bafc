//! Deterministic image preprocessing: color conversion, luma equalization,
//! bilinear resizing and Canny edge extraction.

mod canny;
mod color;
mod io;
mod resize;

pub use canny::{canny_edges, gaussian_kernel, EdgeParams};
pub use color::{equalize_luma, rgb_to_yuv, yuv_to_rgb, YuvImage};
pub use io::{encode_gray_png, encode_rgb_png, load_gray, load_rgb, save_gray, save_rgb};
pub use resize::{resize_gray, resize_rgb};

use crate::error::{Error, Result};

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "pixel buffer has {} entries, expected {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self { width, height, pixels: vec![color; width as usize * height as usize] })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        self.pixels[y as usize * self.width as usize + x as usize] = rgb;
    }

    /// BT.601 luma scaled to [0, 1].
    pub fn to_gray(&self) -> GrayFrame {
        let yuv = rgb_to_yuv(self);
        let data = yuv.y.iter().map(|&y| f64::from(y) / 255.0).collect();
        GrayFrame { width: self.width, height: self.height, data }
    }
}

/// Single-channel raster with intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl GrayFrame {
    pub fn zeros(width: u32, height: u32) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self { width, height, data: vec![0.0; width as usize * height as usize] })
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Result<Self> {
        let mut f = Self::zeros(width, height)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("intensity {value} outside [0, 1]")));
        }
        f.data.fill(value);
        Ok(f)
    }

    /// Builds a frame from row-major data; every value must lie in [0, 1].
    pub fn from_vec(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "buffer has {} entries, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("intensity {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> f64) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Ok(Self { width, height, data })
    }

    /// Wraps a buffer the caller guarantees is in range.
    pub(crate) fn from_raw(width: u32, height: u32, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width as usize * height as usize);
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: f64) {
        self.data[y as usize * self.width as usize + x as usize] = v.clamp(0.0, 1.0);
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Quantizes to 8 bits with rounding.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect()
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("dimensions must be positive, got {width}x{height}")));
    }
    Ok(())
}
