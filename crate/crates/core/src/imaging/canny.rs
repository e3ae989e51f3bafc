use serde::{Deserialize, Serialize};

use super::GrayFrame;
use crate::error::{Error, Result};

/// Canny parameters. Thresholds are in 8-bit gradient units: intensities are
/// scaled to [0, 255] and differentiated with the unnormalized 3x3 Sobel
/// operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub gaussian_sigma: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self { low_threshold: 25.0, high_threshold: 50.0, gaussian_sigma: 5.0 }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.low_threshold >= 0.0 && self.low_threshold <= self.high_threshold) {
            return Err(Error::invalid(format!(
                "thresholds must satisfy 0 <= low <= high, got low={} high={}",
                self.low_threshold, self.high_threshold
            )));
        }
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(Error::invalid(format!("gaussian_sigma must be > 0, got {}", self.gaussian_sigma)));
        }
        Ok(())
    }
}

/// Sampled Gaussian truncated at 4 sigma, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma + 0.5) as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// One separable pass. Out-of-frame taps are dropped and the remaining
/// weights renormalized, so constant regions stay constant up to the border.
fn blur_pass(src: &[f64], w: usize, h: usize, kernel: &[f64], horizontal: bool) -> Vec<f64> {
    let r = kernel.len() / 2;
    let mut out = vec![0.0; src.len()];
    let (len, lines) = if horizontal { (w, h) } else { (h, w) };
    let idx = |line: usize, pos: usize| if horizontal { line * w + pos } else { pos * w + line };
    for line in 0..lines {
        for pos in 0..len {
            let lo = pos.saturating_sub(r);
            let hi = (pos + r).min(len - 1);
            let mut acc = 0.0;
            let mut norm = 0.0;
            for q in lo..=hi {
                let wgt = kernel[q + r - pos];
                acc += wgt * src[idx(line, q)];
                norm += wgt;
            }
            out[idx(line, pos)] = acc / norm;
        }
    }
    out
}

pub fn canny_edges(frame: &GrayFrame, p: &EdgeParams) -> Result<GrayFrame> {
    p.validate()?;
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    if w < 3 || h < 3 {
        return Err(Error::invalid(format!("Canny needs at least 3x3, got {w}x{h}")));
    }
    let kernel = gaussian_kernel(p.gaussian_sigma);
    if w < kernel.len() || h < kernel.len() {
        return Err(Error::invalid(format!(
            "frame {w}x{h} smaller than Gaussian support {0}x{0} for sigma {1}",
            kernel.len(),
            p.gaussian_sigma
        )));
    }

    let scaled: Vec<f64> = frame.data().iter().map(|v| v * 255.0).collect();
    let smoothed = blur_pass(&blur_pass(&scaled, w, h, &kernel, true), w, h, &kernel, false);

    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        smoothed[y * w + x]
    };
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            mag[i] = gx[i].hypot(gy[i]);
        }
    }

    // Non-maximum suppression along the quantized gradient direction; the
    // one-pixel frame border never carries an edge.
    const TAN_22_5: f64 = 0.414_213_562_373_095_1;
    let mut thin = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m < p.low_threshold || m == 0.0 {
                continue;
            }
            let (ax, ay) = (gx[i].abs(), gy[i].abs());
            let (dx, dy): (isize, isize) = if ay <= TAN_22_5 * ax {
                (1, 0)
            } else if ax <= TAN_22_5 * ay {
                (0, 1)
            } else if gx[i] * gy[i] > 0.0 {
                (1, 1)
            } else {
                (1, -1)
            };
            let n1 = mag[((y as isize + dy) as usize) * w + (x as isize + dx) as usize];
            let n2 = mag[((y as isize - dy) as usize) * w + (x as isize - dx) as usize];
            if m >= n1 && m >= n2 {
                thin[i] = m;
            }
        }
    }

    // Hysteresis: grow from strong pixels through 8-connected weak ones.
    let mut out = vec![0.0; w * h];
    let mut stack: Vec<usize> = Vec::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= p.high_threshold && m > 0.0 && out[i] == 0.0 {
            out[i] = 1.0;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (jx, jy) = ((j % w) as isize, (j / w) as isize);
                for ny in jy - 1..=jy + 1 {
                    for nx in jx - 1..=jx + 1 {
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let k = ny as usize * w + nx as usize;
                        if out[k] == 0.0 && thin[k] >= p.low_threshold && thin[k] > 0.0 {
                            out[k] = 1.0;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    Ok(GrayFrame::from_raw(frame.width(), frame.height(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn defaults() {
        let p = EdgeParams::default();
        assert_eq!((p.low_threshold, p.high_threshold, p.gaussian_sigma), (25.0, 50.0, 5.0));
    }

    #[test]
    fn kernel_support_is_four_sigma() {
        assert_eq!(gaussian_kernel(5.0).len(), 41);
        assert_eq!(gaussian_kernel(1.0).len(), 9);
        assert!((gaussian_kernel(2.5).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_frame_has_no_edges() {
        let f = GrayFrame::filled(64, 64, 0.6).unwrap();
        assert!(canny_edges(&f, &EdgeParams::default()).unwrap().is_zero());
    }

    #[test]
    fn rejects_small_frames_and_bad_params() {
        let f = GrayFrame::zeros(30, 30).unwrap();
        assert!(matches!(canny_edges(&f, &EdgeParams::default()), Err(Error::InvalidArgument(_))));
        let tiny = GrayFrame::zeros(2, 8).unwrap();
        let p = EdgeParams { gaussian_sigma: 0.5, ..Default::default() };
        assert!(canny_edges(&tiny, &p).is_err());
        let inverted = EdgeParams { low_threshold: 60.0, ..Default::default() };
        assert!(canny_edges(&GrayFrame::zeros(64, 64).unwrap(), &inverted).is_err());
        let flat = EdgeParams { gaussian_sigma: 0.0, ..Default::default() };
        assert!(flat.validate().is_err());
    }

    #[test]
    fn output_is_binary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = GrayFrame::from_fn(48, 48, |_, _| rng.random::<f64>()).unwrap();
        let p = EdgeParams { gaussian_sigma: 1.0, ..Default::default() };
        let e = canny_edges(&f, &p).unwrap();
        assert!(e.data().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(!e.is_zero());
    }

    #[test]
    fn invariant_to_constant_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            let base: Vec<f64> = (0..48 * 48).map(|_| rng.random_range(0.0..0.5)).collect();
            let shifted: Vec<f64> = base.iter().map(|v| v + 0.25).collect();
            let p = EdgeParams { low_threshold: 10.0, high_threshold: 30.0, gaussian_sigma: 1.0 };
            let a = canny_edges(&GrayFrame::from_vec(48, 48, base).unwrap(), &p).unwrap();
            let b = canny_edges(&GrayFrame::from_vec(48, 48, shifted).unwrap(), &p).unwrap();
            assert_eq!(a, b);
        }
    }

    /// 4-connected components of the non-edge pixels: (sizes, touches-border flags).
    fn complement_components(e: &GrayFrame) -> Vec<(usize, bool)> {
        let (w, h) = (e.width() as usize, e.height() as usize);
        let mut seen = vec![false; w * h];
        let mut comps = Vec::new();
        for start in 0..w * h {
            if seen[start] || e.data()[start] == 1.0 {
                continue;
            }
            seen[start] = true;
            let (mut size, mut border) = (0, false);
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                size += 1;
                let (x, y) = (i % w, i / w);
                border |= x == 0 || y == 0 || x == w - 1 || y == h - 1;
                let mut visit = |j: usize| {
                    if !seen[j] && e.data()[j] == 0.0 {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if x > 0 { visit(i - 1); }
                if x + 1 < w { visit(i + 1); }
                if y > 0 { visit(i - w); }
                if y + 1 < h { visit(i + w); }
            }
            comps.push((size, border));
        }
        comps
    }

    #[test]
    fn square_gives_one_closed_contour() {
        let f = GrayFrame::from_fn(200, 200, |x, y| {
            if (50..150).contains(&x) && (50..150).contains(&y) { 1.0 } else { 0.0 }
        })
        .unwrap();
        let e = canny_edges(&f, &EdgeParams::default()).unwrap();
        let comps = complement_components(&e);
        let interior: Vec<_> = comps.iter().filter(|c| !c.1).collect();
        assert_eq!(comps.len(), 2, "{comps:?}");
        assert_eq!(interior.len(), 1);
        let n = interior[0].0 as f64;
        assert!((n - 10_000.0).abs() <= 1_500.0, "interior {n}");
    }
}
