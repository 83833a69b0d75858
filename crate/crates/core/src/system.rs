//! Radar system parameters shared by every stage of the simulator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type C64 = Complex64;

/// `exp(j*2*pi*cycles)`, with the integer part of `cycles` discarded first so
/// that large phase arguments (carrier times delay) keep full precision.
#[inline]
pub fn cis_cycles(cycles: f64) -> C64 {
    let frac = cycles - cycles.round();
    C64::from_polar(1.0, std::f64::consts::TAU * frac)
}

/// Derives an independent 64-bit seed for the stream named `label` from a
/// run seed, so that adding a consumer never perturbs the others.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let digest = Sha256::new()
        .chain_update(seed.to_le_bytes())
        .chain_update(label.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has at least 8 bytes"))
}

/// Array, carrier and pulse parameters of a side-looking airborne FDA radar.
///
/// Transmit and receive elements are indexed from zero here, so element `m`
/// radiates at `carrier_hz + m * freq_offset_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub d_tx_m: f64,
    pub d_rx_m: f64,
    pub pulse_width_s: f64,
    pub bandwidth_hz: f64,
    /// Fast-time sample rate; defaults to twice the chirp bandwidth.
    pub sample_rate_hz: f64,
    pub carrier_hz: f64,
    pub freq_offset_hz: f64,
    pub prf_hz: f64,
    /// Wavelength used for Doppler/velocity conversions. Kept separate from
    /// `carrier_hz` because the nominal parameter set lists both.
    pub wavelength_m: f64,
    pub pulses: usize,
    pub platform_mps: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_tx: 5,
            n_rx: 5,
            d_tx_m: 0.125,
            d_rx_m: 0.125,
            pulse_width_s: 1e-6,
            bandwidth_hz: 20e6,
            sample_rate_hz: 40e6,
            carrier_hz: 1.2e9,
            freq_offset_hz: 1e6,
            prf_hz: 7e3,
            wavelength_m: 0.25,
            pulses: 180,
            platform_mps: 100.0,
        }
    }
}

impl SystemConfig {
    pub fn pri(&self) -> f64 {
        1.0 / self.prf_hz
    }

    /// Slow time of pulse `l` (zero-based).
    pub fn slow_time(&self, l: usize) -> f64 {
        l as f64 / self.prf_hz
    }

    /// Carrier of transmit element `m` (zero-based).
    pub fn element_carrier(&self, m: usize) -> f64 {
        self.carrier_hz + m as f64 * self.freq_offset_hz
    }

    /// Length of the FDA range-space-time snapshot, `N_T * N_R * L`.
    pub fn snapshot_dim(&self) -> usize {
        self.n_tx * self.n_rx * self.pulses
    }

    /// Maximum clutter Doppler, `2 v_a / lambda`.
    pub fn max_clutter_doppler(&self) -> f64 {
        2.0 * self.platform_mps / self.wavelength_m
    }

    pub fn with_pulses(mut self, pulses: usize) -> Self {
        self.pulses = pulses;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("system.d_tx_m", self.d_tx_m),
            ("system.d_rx_m", self.d_rx_m),
            ("system.pulse_width_s", self.pulse_width_s),
            ("system.sample_rate_hz", self.sample_rate_hz),
            ("system.carrier_hz", self.carrier_hz),
            ("system.prf_hz", self.prf_hz),
            ("system.wavelength_m", self.wavelength_m),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {value}")));
            }
        }
        for (field, value) in [
            ("system.bandwidth_hz", self.bandwidth_hz),
            ("system.freq_offset_hz", self.freq_offset_hz),
            ("system.platform_mps", self.platform_mps),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(field, format!("must be finite and non-negative, got {value}")));
            }
        }
        for (field, value) in [
            ("system.n_tx", self.n_tx),
            ("system.n_rx", self.n_rx),
            ("system.pulses", self.pulses),
        ] {
            if value == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.pulse_width_s >= self.pri() {
            return Err(Error::config(
                "system.pulse_width_s",
                "pulse must be shorter than the pulse repetition interval",
            ));
        }
        Ok(())
    }
}
