use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stimulation and geometry parameters of the simulated implant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub n_electrodes: usize,
    /// Radius of the simulated visual field in degrees.
    pub field_radius_deg: f64,
    pub pulse_freq_hz: f64,
    /// Stimulation current, identical on every electrode.
    pub current_ua: f64,
    /// When enabled, electrodes whose effective current falls below
    /// `threshold_ua` produce no phosphene.
    pub thresholding: bool,
    pub threshold_ua: f64,
    pub magnification_a_deg: f64,
    pub magnification_k_mm: f64,
    /// Excitability constant K (µA/mm²) of the current-spread law.
    pub excitability_ua_mm2: f64,
    /// Side of the square output frame in pixels.
    pub output_size: u32,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            n_electrodes: 600,
            field_radius_deg: 4.0,
            pulse_freq_hz: 300.0,
            current_ua: 60.0,
            thresholding: false,
            threshold_ua: 20.0,
            magnification_a_deg: 0.75,
            magnification_k_mm: 17.3,
            excitability_ua_mm2: 675.0,
            output_size: 640,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be > 0, got {v}")))
            }
        };
        if self.n_electrodes == 0 {
            return Err(Error::invalid("n_electrodes must be > 0"));
        }
        positive("field_radius_deg", self.field_radius_deg)?;
        positive("pulse_freq_hz", self.pulse_freq_hz)?;
        positive("magnification_a_deg", self.magnification_a_deg)?;
        positive("magnification_k_mm", self.magnification_k_mm)?;
        positive("excitability_ua_mm2", self.excitability_ua_mm2)?;
        if !(self.current_ua >= 0.0 && self.current_ua.is_finite()) {
            return Err(Error::invalid(format!("current_ua must be >= 0, got {}", self.current_ua)));
        }
        if self.threshold_ua.is_nan() || self.threshold_ua < 0.0 {
            return Err(Error::invalid(format!("threshold_ua must be >= 0, got {}", self.threshold_ua)));
        }
        if self.output_size < 2 {
            return Err(Error::invalid(format!("output_size must be >= 2, got {}", self.output_size)));
        }
        Ok(())
    }
}

/// Cortical magnification in mm/degree.
pub fn magnification(e: f64, p: &SimParams) -> f64 {
    p.magnification_k_mm / (e + p.magnification_a_deg)
}

/// Gaussian sigma of a phosphene in degrees: half the current-spread radius
/// `sqrt(I / K)` (mm) converted to visual angle.
pub fn phosphene_size(e: f64, p: &SimParams) -> f64 {
    (p.current_ua / p.excitability_ua_mm2).sqrt() / magnification(e, p) / 2.0
}

// Drive at the default operating point (activation 1, 60 µA, 300 Hz) that
// maps to 0.9 under x / (x + 0.5).
const REFERENCE_DRIVE: f64 = 4.5;
const REFERENCE_CURRENT_UA: f64 = 60.0;
const REFERENCE_FREQ_HZ: f64 = 300.0;
const HALF_SATURATION: f64 = 0.5;

/// Peak phosphene brightness in [0, 1) for a sampled stimulus activation.
pub fn brightness(activation: f64, p: &SimParams) -> f64 {
    let activation = activation.clamp(0.0, 1.0);
    if p.thresholding && activation * p.current_ua < p.threshold_ua {
        return 0.0;
    }
    let drive = activation
        * REFERENCE_DRIVE
        * (p.current_ua / REFERENCE_CURRENT_UA)
        * (p.pulse_freq_hz / REFERENCE_FREQ_HZ);
    drive / (drive + HALF_SATURATION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn magnification_values() {
        let p = SimParams::default();
        assert_relative_eq!(magnification(0.0, &p), 23.066_666_666_666_666, max_relative = 1e-12);
        assert_relative_eq!(magnification(4.0, &p), 3.642_105_263_157_894_7, max_relative = 1e-12);
        assert!(magnification(1.0, &p) > magnification(2.0, &p));
    }

    #[test]
    fn phosphene_size_values() {
        let p = SimParams::default();
        let expected = (60.0f64 / 675.0).sqrt() / (17.3 / 0.75) / 2.0;
        assert_relative_eq!(phosphene_size(0.0, &p), expected, max_relative = 1e-12);
        assert!((phosphene_size(0.0, &p) - 0.006_46).abs() < 5e-6);
        assert!(phosphene_size(3.0, &p) > phosphene_size(1.0, &p));
        let off = SimParams { current_ua: 0.0, ..p };
        for e in [0.0, 1.0, 4.0] {
            assert_eq!(phosphene_size(e, &off), 0.0);
        }
    }

    #[test]
    fn brightness_operating_point() {
        let p = SimParams::default();
        assert_eq!(brightness(0.0, &p), 0.0);
        assert_relative_eq!(brightness(1.0, &p), 0.9, max_relative = 1e-12);
    }

    #[test]
    fn thresholding_cuts_weak_drive() {
        let p = SimParams { thresholding: true, ..Default::default() };
        assert_eq!(brightness(0.2, &p), 0.0);
        assert!(brightness(0.5, &p) > 0.0);
        // Disabled: nothing is cut.
        assert!(brightness(0.01, &SimParams::default()) > 0.0);
    }

    #[test]
    fn validation() {
        assert!(SimParams::default().validate().is_ok());
        assert!(SimParams { n_electrodes: 0, ..Default::default() }.validate().is_err());
        assert!(SimParams { field_radius_deg: 0.0, ..Default::default() }.validate().is_err());
        assert!(SimParams { current_ua: -1.0, ..Default::default() }.validate().is_err());
        assert!(SimParams { pulse_freq_hz: 0.0, ..Default::default() }.validate().is_err());
    }

    proptest! {
        #[test]
        fn size_monotone(e1 in 0.0f64..4.0, de in 1e-3f64..4.0, i1 in 1.0f64..200.0, di in 1e-3f64..100.0) {
            let p = SimParams { current_ua: i1, ..Default::default() };
            prop_assert!(phosphene_size(e1 + de, &p) > phosphene_size(e1, &p));
            let q = SimParams { current_ua: i1 + di, ..Default::default() };
            prop_assert!(phosphene_size(e1, &q) > phosphene_size(e1, &p));
        }

        #[test]
        fn brightness_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let p = SimParams::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(brightness(lo, &p) <= brightness(hi, &p));
            prop_assert!(brightness(hi, &p) < 1.0);
        }
    }
}
