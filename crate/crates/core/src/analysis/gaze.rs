use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{encode_gray_png, GrayFrame};
use crate::maskstore::GazePoint;

pub const DEFAULT_GRID: usize = 32;

/// Normalized gaze histogram over a square grid laid on the stimulus, with
/// its Shannon entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyGrid {
    pub grid_size: usize,
    /// Row-major, row 0 at the top of the image.
    pub probabilities: Vec<f64>,
    pub entropy_bits: f64,
}

impl EntropyGrid {
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.probabilities[row * self.grid_size + col]
    }
}

fn cell(v: f64, extent: u32, grid: usize) -> usize {
    let c = (v / extent as f64 * grid as f64).floor();
    if c.is_nan() || c < 0.0 {
        0
    } else {
        (c as usize).min(grid - 1)
    }
}

fn check_frame(width: u32, height: u32, grid_size: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("frame dimensions must be positive"));
    }
    if grid_size == 0 {
        return Err(Error::invalid("grid size must be positive"));
    }
    Ok(())
}

/// Fraction of samples per cell. Samples outside the frame fall in the
/// nearest border cell.
pub fn gaze_histogram(trace: &[GazePoint], width: u32, height: u32, grid_size: usize) -> Result<Vec<f64>> {
    check_frame(width, height, grid_size)?;
    if trace.is_empty() {
        return Err(Error::UndefinedMetric("empty gaze trace".into()));
    }
    let mut counts = vec![0u64; grid_size * grid_size];
    for g in trace {
        counts[cell(g.y, height, grid_size) * grid_size + cell(g.x, width, grid_size)] += 1;
    }
    let n = trace.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// −Σ P log2 P, skipping empty cells.
pub fn shannon_bits(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum();
    h.max(0.0)
}

pub fn gaze_entropy(trace: &[GazePoint], width: u32, height: u32, grid_size: usize) -> Result<EntropyGrid> {
    let probabilities = gaze_histogram(trace, width, height, grid_size)?;
    let entropy_bits = shannon_bits(&probabilities);
    Ok(EntropyGrid { grid_size, probabilities, entropy_bits })
}

/// Smoothed gaze density on the entropy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeMap {
    pub grid_size: usize,
    /// Kernel standard deviation along x and y, in cells.
    pub bandwidth: [f64; 2],
    pub density: Vec<f64>,
}

impl GazeMap {
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.density[row * self.grid_size + col]
    }

    pub fn argmax(&self) -> (usize, usize) {
        let i = self
            .density
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > self.density[best] { i } else { best });
        (i % self.grid_size, i / self.grid_size)
    }

    /// 8-bit grayscale PNG, peak density at 255, each cell `scale` pixels wide.
    pub fn to_png(&self, scale: u32) -> Result<Vec<u8>> {
        if scale == 0 {
            return Err(Error::invalid("heatmap scale must be positive"));
        }
        let peak = self.density.iter().cloned().fold(0.0, f64::max);
        let side = self.grid_size as u32 * scale;
        let frame = GrayFrame::from_fn(side, side, |x, y| {
            let v = self.at((x / scale) as usize, (y / scale) as usize);
            if peak > 0.0 {
                v / peak
            } else {
                0.0
            }
        })?;
        encode_gray_png(&frame)
    }
}

/// Scott's rule on the histogram: per-axis weighted standard deviation of the
/// cell coordinates times n_eff^(−1/6), with n_eff = 1 / ΣP².
pub fn scott_bandwidth(p: &[f64], grid_size: usize) -> [f64; 2] {
    let n_eff = 1.0 / p.iter().map(|v| v * v).sum::<f64>();
    let factor = n_eff.powf(-1.0 / 6.0);
    let mut m = [0.0; 2];
    for (i, &w) in p.iter().enumerate() {
        m[0] += w * (i % grid_size) as f64;
        m[1] += w * (i / grid_size) as f64;
    }
    let mut var = [0.0; 2];
    for (i, &w) in p.iter().enumerate() {
        var[0] += w * ((i % grid_size) as f64 - m[0]).powi(2);
        var[1] += w * ((i / grid_size) as f64 - m[1]).powi(2);
    }
    // Unbiased weighted variance, as for weighted KDE samples.
    let correction = if n_eff > 1.0 { n_eff / (n_eff - 1.0) } else { 1.0 };
    [factor * (var[0] * correction).sqrt(), factor * (var[1] * correction).sqrt()]
}

/// Floor applied to a degenerate (zero-spread) bandwidth.
const MIN_BANDWIDTH: f64 = 1e-3;

fn kernel(h: f64, grid: usize) -> Vec<f64> {
    let r = ((4.0 * h).ceil() as usize).min(grid);
    (0..=2 * r)
        .map(|i| {
            let d = i as f64 - r as f64;
            (-0.5 * d * d / (h * h)).exp()
        })
        .collect()
}

fn convolve_axis(src: &[f64], grid: usize, k: &[f64], along_x: bool) -> Vec<f64> {
    let r = (k.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for row in 0..grid {
        for col in 0..grid {
            let mut acc = 0.0;
            for (j, w) in k.iter().enumerate() {
                let off = j as isize - r;
                let (c, rr) = if along_x { (col as isize + off, row as isize) } else { (col as isize, row as isize + off) };
                if c >= 0 && rr >= 0 && (c as usize) < grid && (rr as usize) < grid {
                    acc += w * src[rr as usize * grid + c as usize];
                }
            }
            out[row * grid + col] = acc;
        }
    }
    out
}

/// Gaussian KDE of the gaze histogram, renormalized to unit mass.
/// `bandwidth` is the kernel standard deviation in cells (both axes); `None`
/// picks Scott's rule.
pub fn gaze_map(
    trace: &[GazePoint],
    width: u32,
    height: u32,
    grid_size: usize,
    bandwidth: Option<f64>,
) -> Result<GazeMap> {
    if let Some(h) = bandwidth {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
        }
    }
    let p = gaze_histogram(trace, width, height, grid_size)?;
    let bw = match bandwidth {
        Some(h) => [h, h],
        None => scott_bandwidth(&p, grid_size).map(|h| h.max(MIN_BANDWIDTH)),
    };
    let smoothed = convolve_axis(&p, grid_size, &kernel(bw[0], grid_size), true);
    let mut density = convolve_axis(&smoothed, grid_size, &kernel(bw[1], grid_size), false);
    let total: f64 = density.iter().sum();
    for v in &mut density {
        *v /= total;
    }
    Ok(GazeMap { grid_size, bandwidth: bw, density })
}
