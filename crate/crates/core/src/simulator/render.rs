use super::{brightness, phosphene_size, ElectrodeLayout, SimParams};
use crate::error::{Error, Result};
use crate::imaging::GrayFrame;
use crate::maskstore::GazePoint;

/// Rasterized Gaussians are clipped at this many sigma (tail < 1.2% of peak).
const TRUNCATE_SIGMA: f64 = 3.0;
/// Sub-pixel phosphenes are drawn and sampled at this sigma so they stay
/// visible on the pixel grid.
const MIN_SIGMA_PX: f64 = 0.5;

fn check_compatible(layout: &ElectrodeLayout, p: &SimParams) -> Result<()> {
    p.validate()?;
    let lp = &layout.params;
    if layout.centers.len() != p.n_electrodes
        || lp.field_radius_deg != p.field_radius_deg
        || lp.magnification_a_deg != p.magnification_a_deg
        || lp.magnification_k_mm != p.magnification_k_mm
    {
        return Err(Error::invalid(format!(
            "layout ({} electrodes, {} deg) does not match params ({} electrodes, {} deg)",
            layout.centers.len(),
            lp.field_radius_deg,
            p.n_electrodes,
            p.field_radius_deg
        )));
    }
    Ok(())
}

/// Gaussian-weighted mean stimulus intensity under each electrode. The
/// stimulus width spans the full field diameter; the electrode's
/// visual-field offset is applied relative to the gaze point and pixels
/// outside the stimulus read as 0.
pub fn electrode_activations(
    stimulus: &GrayFrame,
    gaze: &GazePoint,
    layout: &ElectrodeLayout,
    p: &SimParams,
) -> Result<Vec<f64>> {
    check_compatible(layout, p)?;
    let (w, h) = (stimulus.width() as i64, stimulus.height() as i64);
    let ppd = f64::from(stimulus.width()) / (2.0 * p.field_radius_deg);
    let data = stimulus.data();
    Ok(layout
        .centers
        .iter()
        .map(|c| {
            let sx = gaze.x + c.x_deg * ppd;
            let sy = gaze.y - c.y_deg * ppd;
            let sigma = (phosphene_size(c.eccentricity, p) * ppd).max(MIN_SIGMA_PX);
            let r = (TRUNCATE_SIGMA * sigma).ceil() as i64;
            let (cx, cy) = (sx.floor() as i64, sy.floor() as i64);
            let inv = -0.5 / (sigma * sigma);
            let (mut acc, mut norm) = (0.0, 0.0);
            for py in cy - r..=cy + r {
                let dy = py as f64 + 0.5 - sy;
                for px in cx - r..=cx + r {
                    let dx = px as f64 + 0.5 - sx;
                    let wgt = ((dx * dx + dy * dy) * inv).exp();
                    norm += wgt;
                    if px >= 0 && py >= 0 && px < w && py < h {
                        acc += wgt * data[(py * w + px) as usize];
                    }
                }
            }
            if norm > 0.0 {
                acc / norm
            } else {
                0.0
            }
        })
        .collect())
}

/// Screen-space phosphene centers in output pixels; these never depend on gaze.
pub fn electrode_screen_positions(layout: &ElectrodeLayout, p: &SimParams) -> Vec<(f64, f64)> {
    let ppd = f64::from(p.output_size) / (2.0 * p.field_radius_deg);
    let c = f64::from(p.output_size) / 2.0;
    layout.centers.iter().map(|e| (c + e.x_deg * ppd, c - e.y_deg * ppd)).collect()
}

/// Renders one phosphene frame of `output_size` x `output_size` pixels,
/// black outside the circular field aperture.
pub fn render_frame(
    stimulus: &GrayFrame,
    gaze: &GazePoint,
    layout: &ElectrodeLayout,
    p: &SimParams,
) -> Result<GrayFrame> {
    let activations = electrode_activations(stimulus, gaze, layout, p)?;
    let n = p.output_size as i64;
    let ppd = f64::from(p.output_size) / (2.0 * p.field_radius_deg);
    let mut out = vec![0.0f64; (n * n) as usize];
    for ((c, (sx, sy)), act) in layout.centers.iter().zip(electrode_screen_positions(layout, p)).zip(activations) {
        let peak = brightness(act, p);
        if peak <= 0.0 || p.current_ua <= 0.0 {
            continue;
        }
        let sigma = (phosphene_size(c.eccentricity, p) * ppd).max(MIN_SIGMA_PX);
        let r = (TRUNCATE_SIGMA * sigma).ceil() as i64;
        let inv = -0.5 / (sigma * sigma);
        let (cx, cy) = (sx.floor() as i64, sy.floor() as i64);
        for py in (cy - r).max(0)..=(cy + r).min(n - 1) {
            let dy = py as f64 + 0.5 - sy;
            let row = (py * n) as usize;
            for px in (cx - r).max(0)..=(cx + r).min(n - 1) {
                let dx = px as f64 + 0.5 - sx;
                out[row + px as usize] += peak * ((dx * dx + dy * dy) * inv).exp();
            }
        }
    }
    let half = f64::from(p.output_size) / 2.0;
    for py in 0..n {
        let dy = py as f64 + 0.5 - half;
        for px in 0..n {
            let dx = px as f64 + 0.5 - half;
            let v = &mut out[(py * n + px) as usize];
            *v = if dx * dx + dy * dy > half * half { 0.0 } else { v.min(1.0) };
        }
    }
    Ok(GrayFrame::from_raw(p.output_size, p.output_size, out))
}
