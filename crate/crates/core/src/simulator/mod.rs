//! Phosphene rendering through a cortically placed electrode grid.
//!
//! Electrodes are placed uniformly on the cortical sheet and mapped back to
//! the visual field through the magnification law `M(e) = k / (e + a)`
//! (mm of cortex per degree at eccentricity `e`). Each electrode samples the
//! stimulus around its visual-field position relative to the gaze point, and
//! its phosphene is drawn at a fixed screen position whose size follows the
//! current spread `sqrt(I / K)` divided by the local magnification.

mod layout;
mod params;
mod render;

pub use layout::{eccentricity_cdf, sample_layout, ElectrodeCenter, ElectrodeLayout};
pub use params::{brightness, magnification, phosphene_size, SimParams};
pub use render::{electrode_activations, electrode_screen_positions, render_frame};
