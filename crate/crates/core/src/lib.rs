//! Simulator and power optimizer for a quantum-well optical-interconnect
//! transmitter: a rate-equation laser model integrated with fixed-step RK4,
//! a reflective electroabsorption modulator with its contrast/insertion-loss
//! trade-off, eye-diagram signal metrics, and design-space sweeps that find
//! minimum-power operating points per bit rate.

// validation uses `!(x > 0.0)` throughout so NaN inputs fail the checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod laser;
pub mod metrics;
pub mod modulator;
pub mod optimizer;
pub mod output;
pub mod sim;
pub mod waveform;

pub use config::Config;
pub use error::{Error, Result};
