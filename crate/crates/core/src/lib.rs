//! Gaze-contingent phosphene vision engine and object-search experiment harness.
//!
//! The pipeline runs left to right:
//!
//! * [`imaging`] prepares scene images (luma equalization, resizing, Canny edges).
//! * [`maskstore`] holds precomputed segmentation masks and composes the
//!   gaze-controlled stimulus: the object under the gaze point is highlighted
//!   and faint edges carry peripheral context.
//! * [`simulator`] turns a stimulus into a phosphene frame through a
//!   cortically placed electrode grid.
//! * [`experiment`] runs the object-search protocol as a state machine and
//!   writes JSON Lines trial logs.
//! * [`analysis`] computes accuracy, classification reports, breakdowns,
//!   gaze entropy, gaze maps and the paired t / two-way ANOVA tests.
//! * [`service`] serves interactive sessions over HTTP and WebSocket.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod imaging;
pub mod maskstore;
pub mod service;
pub mod simulator;

pub use error::{Error, FormatError, Result};
