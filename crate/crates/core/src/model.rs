//! Closed-form range-space-time steering vectors.
//!
//! Snapshots are ordered pulse-major, then receive element, then transmit
//! channel: entry `(l, n, m)` lives at `(l * N_R + n) * N_T + m`, which is the
//! layout of `b_dop ⊗ (a_R ⊗ a_T)`.
//!
//! Every steering vector is normalised so its first entry is real and
//! positive; the constant phase is absorbed by the complex amplitude.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{round_trip_delay, rx_step_delay, tx_step_delay};
use crate::system::{cis_cycles, SystemConfig, C64};

fn normalize_phase(v: &mut [C64]) {
    if let Some(first) = v.first().copied() {
        let n = first.norm();
        if n > 0.0 {
            let rot = first.conj() / n;
            v.iter_mut().for_each(|x| *x *= rot);
        }
    }
}

fn check_range(range_m: f64) -> Result<()> {
    if range_m > 0.0 && range_m.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("range must be positive, got {range_m} m")))
    }
}

/// Range-angle transmit steering `a_T(r, psi)`: element `m` carries
/// `exp(j 2 pi f_m (m xi_T(psi) - xi(r)))` with `f_m = f_c + m df`.
pub fn steering_transmit(range_m: f64, conic: f64, cfg: &SystemConfig) -> Result<Vec<C64>> {
    check_range(range_m)?;
    let xi_t = tx_step_delay(conic, cfg);
    let xi = round_trip_delay(range_m);
    let mut a: Vec<C64> = (0..cfg.n_tx)
        .map(|m| {
            let f = cfg.element_carrier(m);
            cis_cycles(f * m as f64 * xi_t - f * xi)
        })
        .collect();
    normalize_phase(&mut a);
    Ok(a)
}

/// Angle-only transmit steering of a single-carrier array.
pub fn steering_transmit_angle(conic: f64, cfg: &SystemConfig) -> Vec<C64> {
    let xi_t = tx_step_delay(conic, cfg);
    (0..cfg.n_tx)
        .map(|m| cis_cycles(cfg.carrier_hz * m as f64 * xi_t))
        .collect()
}

/// Receive steering `a_R(psi)`: element `n` carries `exp(j 2 pi f_c n xi_R(psi))`.
pub fn steering_receive(conic: f64, cfg: &SystemConfig) -> Vec<C64> {
    let xi_r = rx_step_delay(conic, cfg);
    (0..cfg.n_rx)
        .map(|n| cis_cycles(cfg.carrier_hz * n as f64 * xi_r))
        .collect()
}

/// Slow-time Doppler steering: pulse `l` carries `exp(j 2 pi f_d l / PRF)`.
pub fn steering_doppler(doppler_hz: f64, pulses: usize, prf_hz: f64) -> Vec<C64> {
    (0..pulses)
        .map(|l| cis_cycles(doppler_hz * l as f64 / prf_hz))
        .collect()
}

/// Kronecker product of two vectors, `a ⊗ b`.
pub fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

fn check_weights(weights: &[C64], cfg: &SystemConfig) -> Result<()> {
    if weights.len() != cfg.n_tx {
        return Err(Error::DimensionMismatch {
            what: "transmit weights",
            expected: cfg.n_tx,
            got: weights.len(),
        });
    }
    Ok(())
}

/// `b_dop(f_d) ⊗ (a_R(psi) ⊗ [w ⊙ a_T(r, psi)])`.
pub fn composite_steering(
    range_m: f64,
    conic: f64,
    doppler_hz: f64,
    weights: &[C64],
    cfg: &SystemConfig,
) -> Result<DVector<C64>> {
    check_weights(weights, cfg)?;
    let tx: Vec<C64> = steering_transmit(range_m, conic, cfg)?
        .iter()
        .zip(weights)
        .map(|(a, w)| a * w)
        .collect();
    let spatial = kron(&steering_receive(conic, cfg), &tx);
    let b = steering_doppler(doppler_hz, cfg.pulses, cfg.prf_hz);
    Ok(DVector::from_vec(kron(&b, &spatial)))
}

/// Composite steering without the separable approximation of the element
/// phase: entry `(m, n)` uses `exp(j 2 pi f_m (m xi_T + n xi_R))` with the
/// transmit carrier on the receive term as well.
pub fn composite_steering_exact(
    range_m: f64,
    conic: f64,
    doppler_hz: f64,
    weights: &[C64],
    cfg: &SystemConfig,
) -> Result<DVector<C64>> {
    check_weights(weights, cfg)?;
    check_range(range_m)?;
    let xi_t = tx_step_delay(conic, cfg);
    let xi_r = rx_step_delay(conic, cfg);
    let xi = round_trip_delay(range_m);
    let mut spatial = Vec::with_capacity(cfg.n_tx * cfg.n_rx);
    for n in 0..cfg.n_rx {
        for m in 0..cfg.n_tx {
            let f = cfg.element_carrier(m);
            let phase = f * (m as f64 * xi_t + n as f64 * xi_r) - f * xi;
            spatial.push(weights[m] * cis_cycles(phase));
        }
    }
    let rot = {
        let first = cis_cycles(-cfg.carrier_hz * xi);
        first.conj()
    };
    spatial.iter_mut().for_each(|x| *x *= rot);
    let b = steering_doppler(doppler_hz, cfg.pulses, cfg.prf_hz);
    Ok(DVector::from_vec(kron(&b, &spatial)))
}

/// `C(r, psi, f_d) = (b_dop ⊗ I_{N_T N_R}) (a_R ⊗ I_{N_T}) diag(a_T(r, psi))`,
/// so that `C w` is the composite steering for transmit weights `w`.
pub fn steering_matrix_c(range_m: f64, conic: f64, doppler_hz: f64, cfg: &SystemConfig) -> Result<DMatrix<C64>> {
    let a_t = steering_transmit(range_m, conic, cfg)?;
    let a_r = steering_receive(conic, cfg);
    let b = steering_doppler(doppler_hz, cfg.pulses, cfg.prf_hz);
    let (nt, nr) = (cfg.n_tx, cfg.n_rx);
    let mut c = DMatrix::zeros(cfg.snapshot_dim(), nt);
    for (l, bl) in b.iter().enumerate() {
        for (n, an) in a_r.iter().enumerate() {
            let s = bl * an;
            for (m, am) in a_t.iter().enumerate() {
                c[((l * nr + n) * nt + m, m)] = s * am;
            }
        }
    }
    Ok(c)
}

/// Array configuration used to build steering vectors and covariances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArrayMode {
    /// Frequency diverse array with the joint space-time receiver.
    #[default]
    Fda,
    /// Same pipeline with zero frequency offset: transmit spatial degrees of
    /// freedom but no range dependence.
    Mimo,
    /// One coherent transmit beam steered to a look direction; the receiver
    /// sees a single channel per element.
    #[serde(rename = "pa")]
    PhasedArray,
}

impl std::fmt::Display for ArrayMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ArrayMode::Fda => "fda",
            ArrayMode::Mimo => "mimo",
            ArrayMode::PhasedArray => "pa",
        })
    }
}

impl std::str::FromStr for ArrayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fda" => Ok(ArrayMode::Fda),
            "mimo" => Ok(ArrayMode::Mimo),
            "pa" | "phased-array" => Ok(ArrayMode::PhasedArray),
            other => Err(Error::config("mode", format!("unknown mode `{other}` (fda, mimo, pa)"))),
        }
    }
}

/// Steering vectors for one array mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringModel {
    cfg: SystemConfig,
    mode: ArrayMode,
    weights: Vec<C64>,
    /// Conic angle of the phased-array transmit beam.
    look_conic: f64,
}

impl SteeringModel {
    /// Uniform transmit weights. `look_conic` only matters for the phased array.
    pub fn new(cfg: &SystemConfig, mode: ArrayMode, look_conic: f64) -> Self {
        let weights = vec![C64::new(1.0, 0.0); cfg.n_tx];
        Self::with_weights(cfg, mode, look_conic, weights).expect("uniform weights have the right length")
    }

    pub fn with_weights(cfg: &SystemConfig, mode: ArrayMode, look_conic: f64, weights: Vec<C64>) -> Result<Self> {
        check_weights(&weights, cfg)?;
        let mut cfg = cfg.clone();
        if mode != ArrayMode::Fda {
            cfg.freq_offset_hz = 0.0;
        }
        Ok(SteeringModel {
            cfg,
            mode,
            weights,
            look_conic,
        })
    }

    pub fn mode(&self) -> ArrayMode {
        self.mode
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Channels per receive element.
    pub fn channels(&self) -> usize {
        match self.mode {
            ArrayMode::PhasedArray => 1,
            _ => self.cfg.n_tx,
        }
    }

    pub fn dim(&self) -> usize {
        self.channels() * self.cfg.n_rx * self.cfg.pulses
    }

    /// Per-channel transmit factor: `w ⊙ a_T(r, psi)` or the scalar beam gain
    /// `a_T(psi_0)^H diag(w') a_T(psi)` of the phased array.
    pub fn transmit(&self, range_m: f64, conic: f64) -> Result<Vec<C64>> {
        match self.mode {
            ArrayMode::PhasedArray => {
                check_range(range_m)?;
                let look = steering_transmit_angle(self.look_conic, &self.cfg);
                let here = steering_transmit_angle(conic, &self.cfg);
                let gain: C64 = look
                    .iter()
                    .zip(&here)
                    .zip(&self.weights)
                    .map(|((a0, a), w)| a0.conj() * a * w)
                    .sum();
                Ok(vec![gain])
            }
            _ => Ok(steering_transmit(range_m, conic, &self.cfg)?
                .iter()
                .zip(&self.weights)
                .map(|(a, w)| a * w)
                .collect()),
        }
    }

    /// Space-only part `a_R(psi) ⊗ transmit(r, psi)`.
    pub fn spatial(&self, range_m: f64, conic: f64) -> Result<Vec<C64>> {
        Ok(kron(&steering_receive(conic, &self.cfg), &self.transmit(range_m, conic)?))
    }

    pub fn steering(&self, range_m: f64, conic: f64, doppler_hz: f64) -> Result<DVector<C64>> {
        let b = steering_doppler(doppler_hz, self.cfg.pulses, self.cfg.prf_hz);
        Ok(DVector::from_vec(kron(&b, &self.spatial(range_m, conic)?)))
    }
}
