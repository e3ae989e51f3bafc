use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeCenter {
    pub eccentricity: f64,
    /// Radians, counter-clockwise from the right horizontal meridian.
    pub polar_angle: f64,
    pub x_deg: f64,
    /// Positive upward in the visual field.
    pub y_deg: f64,
}

/// Electrode positions in visual-field coordinates, fixed for a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeLayout {
    pub seed: u64,
    pub params: SimParams,
    pub centers: Vec<ElectrodeCenter>,
}

/// Unnormalized integral of `e / (e + a)^2` from 0 to `e`.
fn density_integral(e: f64, a: f64) -> f64 {
    ((e + a) / a).ln() + a / (e + a) - 1.0
}

/// CDF of electrode eccentricity on (0, field radius]. The density is
/// proportional to `e * M(e)^2`, i.e. uniform over the cortical surface.
pub fn eccentricity_cdf(e: f64, p: &SimParams) -> f64 {
    let a = p.magnification_a_deg;
    let e = e.clamp(0.0, p.field_radius_deg);
    density_integral(e, a) / density_integral(p.field_radius_deg, a)
}

fn inverse_cdf(u: f64, p: &SimParams) -> f64 {
    let (mut lo, mut hi) = (0.0, p.field_radius_deg);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if eccentricity_cdf(mid, p) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * p.field_radius_deg {
            break;
        }
    }
    hi
}

/// Draws `n_electrodes` centers by inverse-transform sampling of the
/// eccentricity CDF and a uniform polar angle.
pub fn sample_layout(p: &SimParams, seed: u64) -> Result<ElectrodeLayout> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = (0..p.n_electrodes)
        .map(|_| {
            // u in (0, 1] keeps eccentricities strictly positive.
            let u = 1.0 - rng.random::<f64>();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            let e = inverse_cdf(u, p).max(f64::MIN_POSITIVE);
            ElectrodeCenter { eccentricity: e, polar_angle: theta, x_deg: e * theta.cos(), y_deg: e * theta.sin() }
        })
        .collect();
    Ok(ElectrodeLayout { seed, params: p.clone(), centers })
}

impl ElectrodeLayout {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let layout: Self = serde_json::from_str(text)?;
        layout.params.validate()?;
        if layout.centers.len() != layout.params.n_electrodes {
            return Err(Error::invalid(format!(
                "layout lists {} centers but n_electrodes = {}",
                layout.centers.len(),
                layout.params.n_electrodes
            )));
        }
        Ok(layout)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_and_bounds() {
        let p = SimParams::default();
        let l = sample_layout(&p, 1).unwrap();
        assert_eq!(l.centers.len(), 600);
        for c in &l.centers {
            assert!(c.eccentricity > 0.0 && c.eccentricity <= 4.0);
            assert!((0.0..std::f64::consts::TAU).contains(&c.polar_angle));
            assert!((c.x_deg.hypot(c.y_deg) - c.eccentricity).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let p = SimParams::default();
        assert_eq!(sample_layout(&p, 99).unwrap(), sample_layout(&p, 99).unwrap());
        assert_ne!(sample_layout(&p, 99).unwrap(), sample_layout(&p, 100).unwrap());
    }

    #[test]
    fn cdf_endpoints_and_inverse() {
        let p = SimParams::default();
        assert_eq!(eccentricity_cdf(0.0, &p), 0.0);
        assert!((eccentricity_cdf(4.0, &p) - 1.0).abs() < 1e-15);
        for u in [0.01, 0.25, 0.5, 0.9, 1.0] {
            assert!((eccentricity_cdf(inverse_cdf(u, &p), &p) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let l = sample_layout(&SimParams { n_electrodes: 50, ..Default::default() }, 5).unwrap();
        let back = ElectrodeLayout::from_json(&l.to_json().unwrap()).unwrap();
        assert_eq!(back, l);
        assert_eq!(back.to_json().unwrap(), l.to_json().unwrap());
    }

    #[test]
    fn json_count_mismatch_rejected() {
        let mut l = sample_layout(&SimParams { n_electrodes: 5, ..Default::default() }, 5).unwrap();
        l.centers.pop();
        let text = serde_json::to_string(&l).unwrap();
        assert!(ElectrodeLayout::from_json(&text).is_err());
    }
}
