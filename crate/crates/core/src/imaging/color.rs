use super::RgbImage;

/// Planar 8-bit YUV (full-range BT.601, the JPEG/JFIF variant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YuvImage {
    pub width: u32,
    pub height: u32,
    pub y: Vec<u8>,
    pub u: Vec<u8>,
    pub v: Vec<u8>,
}

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn rgb_to_yuv(img: &RgbImage) -> YuvImage {
    let n = img.pixels().len();
    let (mut y, mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &[r, g, b] in img.pixels() {
        let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
        let luma = KR * r + KG * g + KB * b;
        y.push(to_u8(luma));
        u.push(to_u8(128.0 + 0.5 * (b - luma) / (1.0 - KB)));
        v.push(to_u8(128.0 + 0.5 * (r - luma) / (1.0 - KR)));
    }
    YuvImage { width: img.width(), height: img.height(), y, u, v }
}

pub fn yuv_to_rgb(img: &YuvImage) -> RgbImage {
    let pixels = img
        .y
        .iter()
        .zip(&img.u)
        .zip(&img.v)
        .map(|((&y, &u), &v)| {
            let y = f64::from(y);
            let cb = f64::from(u) - 128.0;
            let cr = f64::from(v) - 128.0;
            let r = y + 2.0 * (1.0 - KR) * cr;
            let b = y + 2.0 * (1.0 - KB) * cb;
            let g = (y - KR * r - KB * b) / KG;
            [to_u8(r), to_u8(g), to_u8(b)]
        })
        .collect();
    RgbImage::new(img.width, img.height, pixels).expect("dimensions carried over from a valid image")
}

/// Cumulative-histogram equalization of the Y plane over 256 bins.
///
/// Mapping: `h(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255)` where
/// `cdf_min` is the cdf at the darkest occupied level. A constant plane has
/// `N == cdf_min` and is returned unchanged.
pub fn equalize_luma(img: &YuvImage) -> YuvImage {
    let mut hist = [0u64; 256];
    for &y in &img.y {
        hist[y as usize] += 1;
    }
    let n = img.y.len() as u64;
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (c, h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    let cdf_min = hist.iter().zip(cdf).find(|(h, _)| **h > 0).map(|(_, c)| c).unwrap_or(0);
    if n == cdf_min {
        return img.clone();
    }
    let denom = (n - cdf_min) as f64;
    let mut lut = [0u8; 256];
    for (level, slot) in lut.iter_mut().enumerate() {
        let c = cdf[level].saturating_sub(cdf_min) as f64;
        *slot = to_u8(c / denom * 255.0);
    }
    YuvImage {
        y: img.y.iter().map(|&y| lut[y as usize]).collect(),
        ..img.clone()
    }
}
