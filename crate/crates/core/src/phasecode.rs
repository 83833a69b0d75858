//! Slow-time phase codes that move each transmit channel into its own
//! Doppler band of width `PRF / N_T`.
//!
//! After mixing with the carrier of channel `m'` and removing that channel's
//! code, the return of transmit element `m` sits at the slow-time frequency
//! `D_m - D_m'`, where
//!
//! ```text
//! D_m = (f_c + (m-1) df) / f_c * f_td + m df + phi_m
//! ```
//!
//! (one-based `m`). Only `D_m mod PRF` is observable in slow time.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::SystemConfig;

/// Gap slack that absorbs the `(df / f_c) f_td` drift of a moving target.
///
/// The wrap-around gap between the first and last band shrinks by
/// `(N_T - 1) (df / f_c) f_td`, 2 Hz for the nominal array at 600 Hz.
pub const DEFAULT_GAP_SLACK_HZ: f64 = 2.5;

/// Per-element slow-time Doppler codes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCode {
    /// `phi_m`, Hz, applied as `exp(j 2 pi phi_m t_l)`.
    pub phi: Vec<f64>,
    /// `D_m mod PRF` at `design_f_td`, Hz.
    pub band_centers: Vec<f64>,
    pub design_f_td: f64,
}

impl PhaseCode {
    /// Builds a code from explicit `phi` values, evaluating its band centres at `f_td`.
    pub fn from_phi(phi: Vec<f64>, design_f_td: f64, cfg: &SystemConfig) -> Result<Self> {
        if phi.len() != cfg.n_tx {
            return Err(Error::DimensionMismatch {
                what: "phase code",
                expected: cfg.n_tx,
                got: phi.len(),
            });
        }
        let band_centers = centers(&phi, design_f_td, cfg);
        Ok(PhaseCode {
            phi,
            band_centers,
            design_f_td,
        })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// Unreduced `D_m` for zero-based element `m`.
fn raw_center(phi_m: f64, m: usize, f_td: f64, cfg: &SystemConfig) -> f64 {
    cfg.element_carrier(m) / cfg.carrier_hz * f_td + (m + 1) as f64 * cfg.freq_offset_hz + phi_m
}

fn centers(phi: &[f64], f_td: f64, cfg: &SystemConfig) -> Vec<f64> {
    phi.iter()
        .enumerate()
        .map(|(m, &p)| raw_center(p, m, f_td, cfg).rem_euclid(cfg.prf_hz))
        .collect()
}

/// Band centres `D_m mod PRF` in `[0, PRF)` for a target Doppler `f_td`.
pub fn doppler_centers(code: &PhaseCode, f_td: f64, cfg: &SystemConfig) -> Result<Vec<f64>> {
    if code.len() != cfg.n_tx {
        return Err(Error::DimensionMismatch {
            what: "phase code",
            expected: cfg.n_tx,
            got: code.len(),
        });
    }
    Ok(centers(&code.phi, f_td, cfg))
}

/// `phi_m = (m-1) PRF / N_T - m df`: spaces the bands exactly `PRF / N_T`
/// apart for a stationary target and maps channel 1 to DC.
pub fn design_phase_codes(cfg: &SystemConfig) -> PhaseCode {
    let spacing = cfg.prf_hz / cfg.n_tx as f64;
    let phi = (0..cfg.n_tx)
        .map(|m| m as f64 * spacing - (m + 1) as f64 * cfg.freq_offset_hz)
        .collect::<Vec<_>>();
    let band_centers = centers(&phi, 0.0, cfg);
    PhaseCode {
        phi,
        band_centers,
        design_f_td: 0.0,
    }
}

/// Which family of band-separation constraints is binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapConstraint {
    /// Gap between two bands that are adjacent inside `[0, PRF)`.
    Adjacent,
    /// Gap that wraps through `PRF` back to the lowest band.
    WrapAround,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCodeReport {
    pub feasible: bool,
    /// Smallest circular gap between band centres over the Doppler interval, Hz.
    pub min_gap_hz: f64,
    pub required_gap_hz: f64,
    /// Target Doppler at which `min_gap_hz` occurs.
    pub worst_f_td: f64,
    /// Constraint attaining the minimum gap, and the zero-based elements on
    /// either side of it (lower centre first).
    pub binding: Option<(GapConstraint, usize, usize)>,
    /// Set when the minimum gap falls short of the requirement.
    pub violated: Option<GapConstraint>,
}

/// Smallest circular gap at one Doppler, with the constraint that attains it.
fn circular_gaps(code: &[f64], f_td: f64, cfg: &SystemConfig) -> (f64, Option<(GapConstraint, usize, usize)>) {
    let prf = cfg.prf_hz;
    let d = centers(code, f_td, cfg);
    if d.len() < 2 {
        return (prf, None);
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut best = (f64::INFINITY, None);
    for w in order.windows(2) {
        let gap = d[w[1]] - d[w[0]];
        if gap < best.0 {
            best = (gap, Some((GapConstraint::Adjacent, w[0], w[1])));
        }
    }
    let (first, last) = (order[0], order[order.len() - 1]);
    let wrap = d[first] + prf - d[last];
    if wrap < best.0 {
        best = (wrap, Some((GapConstraint::WrapAround, last, first)));
    }
    best
}

/// Checks that all bands stay at least `PRF / N_T - slack_hz` apart for every
/// target Doppler in `[-f_td_max, f_td_max]`.
///
/// Pairwise separations are affine in `f_td`, so the circular gap can only be
/// minimised at the interval ends or where two centres coincide modulo PRF;
/// those are the only Dopplers examined.
pub fn validate_phase_codes(
    code: &PhaseCode,
    f_td_max: f64,
    slack_hz: f64,
    cfg: &SystemConfig,
) -> Result<PhaseCodeReport> {
    if code.len() != cfg.n_tx {
        return Err(Error::DimensionMismatch {
            what: "phase code",
            expected: cfg.n_tx,
            got: code.len(),
        });
    }
    let required = cfg.prf_hz / cfg.n_tx as f64;
    if !(f_td_max >= 0.0) || slack_hz < 0.0 {
        return Err(Error::domain("f_td_max and slack must be non-negative"));
    }
    if f_td_max >= required {
        return Err(Error::Precondition(format!(
            "target Doppler bound {f_td_max} Hz is not below PRF/N_T = {required} Hz"
        )));
    }

    let mut candidates = vec![-f_td_max, 0.0, f_td_max];
    let prf = cfg.prf_hz;
    for a in 0..code.len() {
        for b in a + 1..code.len() {
            // D_b - D_a = offset + slope * f_td
            let slope = (cfg.element_carrier(b) - cfg.element_carrier(a)) / cfg.carrier_hz;
            if slope == 0.0 {
                continue;
            }
            let offset = raw_center(code.phi[b], b, 0.0, cfg) - raw_center(code.phi[a], a, 0.0, cfg);
            let lo = offset + slope * -f_td_max;
            let hi = offset + slope * f_td_max;
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let mut k = (lo / prf).ceil();
            while k * prf <= hi {
                candidates.push((k * prf - offset) / slope);
                k += 1.0;
            }
        }
    }

    let mut min_gap = f64::INFINITY;
    let mut worst_f_td = 0.0;
    let mut binding = None;
    for f in candidates {
        let (gap, which) = circular_gaps(&code.phi, f, cfg);
        if gap < min_gap {
            min_gap = gap;
            worst_f_td = f;
            binding = which;
        }
    }
    let feasible = min_gap >= required - slack_hz;
    Ok(PhaseCodeReport {
        feasible,
        min_gap_hz: min_gap,
        required_gap_hz: required,
        worst_f_td,
        binding,
        violated: if feasible { None } else { binding.map(|b| b.0) },
    })
}
