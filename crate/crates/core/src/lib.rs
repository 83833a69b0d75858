//! Simulator for a coherent frequency diverse array (FDA) airborne radar.
//!
//! Each transmit element radiates its own carrier `f_c + m df` and a slow-time
//! phase code that parks its return in a dedicated Doppler band. The receiver
//! mixes every element's signal down with all carriers, pulse-compresses,
//! strips the codes and low-pass filters in slow time, which separates the
//! aliased carriers and yields an `N_T * N_R * L` range-space-time snapshot.
//! Clutter, barrage jamming and noise covariances built on that snapshot model
//! drive MVDR range-space-time adaptive processing.
//!
//! * [`geometry`]: angles and delays
//! * [`waveform`]: LFM pulse, ambiguity function, matched filter
//! * [`phasecode`]: Doppler band allocation
//! * [`chain`]: time-domain transmit/receive simulation
//! * [`model`]: analytic steering vectors
//! * [`scene`]: scenario and covariance matrices
//! * [`stap`]: MVDR weights, SINR, patterns and SINR loss
//! * [`config`] and [`cli`]: run configuration and the command-line driver

pub mod chain;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod model;
pub mod phasecode;
pub mod scene;
pub mod selftest;
pub mod stap;
pub mod system;
pub mod waveform;

pub use error::{Error, Result};
pub use model::ArrayMode;
pub use system::{SystemConfig, C64, SPEED_OF_LIGHT};
