use super::{GrayFrame, RgbImage};
use crate::error::{Error, Result};

/// Per-output-coordinate source taps: (lower index, upper index, weight of upper).
fn taps(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
    let scale = f64::from(src) / f64::from(dst);
    let last = (src - 1) as f64;
    (0..dst)
        .map(|i| {
            // Pixel-center alignment.
            let s = ((f64::from(i) + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = s.floor();
            let hi = (lo + 1.0).min(last);
            (lo as usize, hi as usize, s - lo)
        })
        .collect()
}

fn check_target(w: u32, h: u32) -> Result<()> {
    if w == 0 || h == 0 {
        return Err(Error::invalid(format!("resize target must be positive, got {w}x{h}")));
    }
    Ok(())
}

fn bilinear(w: u32, h: u32, sw: u32, sh: u32, mut sample: impl FnMut(usize, usize, usize, usize, f64, f64)) {
    let xt = taps(sw, w);
    let yt = taps(sh, h);
    for &(y0, y1, fy) in &yt {
        for &(x0, x1, fx) in &xt {
            sample(x0, x1, y0, y1, fx, fy);
        }
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a * (1.0 - t) + b * t
}

pub fn resize_gray(frame: &GrayFrame, w: u32, h: u32) -> Result<GrayFrame> {
    check_target(w, h)?;
    let sw = frame.width() as usize;
    let src = frame.data();
    let mut out = Vec::with_capacity(w as usize * h as usize);
    bilinear(w, h, frame.width(), frame.height(), |x0, x1, y0, y1, fx, fy| {
        let top = lerp(src[y0 * sw + x0], src[y0 * sw + x1], fx);
        let bottom = lerp(src[y1 * sw + x0], src[y1 * sw + x1], fx);
        out.push(lerp(top, bottom, fy).clamp(0.0, 1.0));
    });
    Ok(GrayFrame::from_raw(w, h, out))
}

pub fn resize_rgb(img: &RgbImage, w: u32, h: u32) -> Result<RgbImage> {
    check_target(w, h)?;
    let sw = img.width() as usize;
    let src = img.pixels();
    let mut out = Vec::with_capacity(w as usize * h as usize);
    bilinear(w, h, img.width(), img.height(), |x0, x1, y0, y1, fx, fy| {
        let mut px = [0u8; 3];
        for (c, slot) in px.iter_mut().enumerate() {
            let at = |x: usize, y: usize| f64::from(src[y * sw + x][c]);
            let top = lerp(at(x0, y0), at(x1, y0), fx);
            let bottom = lerp(at(x0, y1), at(x1, y1), fx);
            *slot = lerp(top, bottom, fy).round().clamp(0.0, 255.0) as u8;
        }
        out.push(px);
    });
    RgbImage::new(w, h, out)
}
