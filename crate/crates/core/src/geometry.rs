//! Angle conventions and propagation delays for a side-looking linear array
//! aligned with the platform velocity.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::system::{SystemConfig, SPEED_OF_LIGHT};

const ANGLE_SLACK: f64 = 1e-12;

/// Azimuth, depression and the derived conic angle, all in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub azimuth: f64,
    pub depression: f64,
    pub conic: f64,
}

impl Angles {
    pub fn new(azimuth: f64, depression: f64) -> Result<Self> {
        let conic = conic_angle(azimuth, depression)?;
        Ok(Angles {
            azimuth,
            depression,
            conic,
        })
    }

    pub fn from_degrees(azimuth_deg: f64, depression_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), depression_deg.to_radians())
    }
}

/// Conic angle between the array axis and the line of sight:
/// `cos(psi) = cos(azimuth) * cos(depression)`.
pub fn conic_angle(azimuth: f64, depression: f64) -> Result<f64> {
    if !(-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&azimuth) {
        return Err(Error::domain(format!("azimuth {azimuth} rad outside [0, pi]")));
    }
    if !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&depression) {
        return Err(Error::domain(format!(
            "depression {depression} rad outside [0, pi/2]"
        )));
    }
    Ok(conic_from_cosines(azimuth.cos(), depression.cos()))
}

#[inline]
pub(crate) fn conic_from_cosines(cos_azimuth: f64, cos_depression: f64) -> f64 {
    (cos_azimuth * cos_depression).clamp(-1.0, 1.0).acos()
}

/// Delay components of a point scatterer, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySet {
    /// Two-way range delay `2r/c`.
    pub round_trip: f64,
    /// Inter-element transmit delay `-d_t cos(psi) / c` (signed).
    pub tx_step: f64,
    /// Inter-element receive delay `-d_r cos(psi) / c` (signed).
    pub rx_step: f64,
}

pub fn round_trip_delay(range_m: f64) -> f64 {
    2.0 * range_m / SPEED_OF_LIGHT
}

pub fn tx_step_delay(conic: f64, cfg: &SystemConfig) -> f64 {
    -cfg.d_tx_m * conic.cos() / SPEED_OF_LIGHT
}

pub fn rx_step_delay(conic: f64, cfg: &SystemConfig) -> f64 {
    -cfg.d_rx_m * conic.cos() / SPEED_OF_LIGHT
}

pub fn delays(range_m: f64, conic: f64, cfg: &SystemConfig) -> Result<DelaySet> {
    if !(range_m > 0.0 && range_m.is_finite()) {
        return Err(Error::domain(format!("range must be positive, got {range_m} m")));
    }
    Ok(DelaySet {
        round_trip: round_trip_delay(range_m),
        tx_step: tx_step_delay(conic, cfg),
        rx_step: rx_step_delay(conic, cfg),
    })
}

/// Two-way Doppler of a radial velocity.
pub fn doppler_from_velocity(velocity_mps: f64, wavelength_m: f64) -> Result<f64> {
    if !(wavelength_m > 0.0) {
        return Err(Error::domain(format!(
            "wavelength must be positive, got {wavelength_m} m"
        )));
    }
    Ok(2.0 * velocity_mps / wavelength_m)
}

/// Outcome of the frequency-decorrelation check for a linear frequency offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecorrelationCheck {
    pub pass: bool,
    /// Largest admissible offset `c / (4 (N_T - 1) extent)`, Hz.
    pub bound_hz: f64,
    /// `bound_hz - freq_offset_hz`; negative when the check fails.
    pub margin_hz: f64,
}

/// Sufficient condition for the target reflectivity to stay correlated across
/// the transmitted carriers, given the target extent along boresight.
pub fn check_decorrelation(freq_offset_hz: f64, n_tx: usize, extent_m: f64) -> Result<DecorrelationCheck> {
    if n_tx < 2 {
        return Err(Error::domain("decorrelation bound needs at least two transmit elements"));
    }
    if !(extent_m > 0.0) {
        return Err(Error::domain(format!("target extent must be positive, got {extent_m} m")));
    }
    let bound_hz = SPEED_OF_LIGHT / (4.0 * (n_tx - 1) as f64 * extent_m);
    Ok(DecorrelationCheck {
        pass: freq_offset_hz <= bound_hz,
        bound_hz,
        margin_hz: bound_hz - freq_offset_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn conic_angle_examples() {
        assert!((conic_angle(deg(45.0), deg(45.0)).unwrap() - deg(60.0)).abs() < 1e-12);
        assert!((conic_angle(deg(90.0), deg(13.0)).unwrap() - deg(90.0)).abs() < 1e-12);
        assert!((conic_angle(0.0, deg(45.0)).unwrap() - deg(45.0)).abs() < 1e-12);
    }

    #[test]
    fn conic_angle_rejects_out_of_range() {
        assert!(matches!(conic_angle(-0.1, 0.2), Err(Error::Domain(_))));
        assert!(matches!(conic_angle(3.2, 0.2), Err(Error::Domain(_))));
        assert!(matches!(conic_angle(1.0, 1.6), Err(Error::Domain(_))));
        assert!(conic_angle(PI, FRAC_PI_2).is_ok());
    }

    #[test]
    fn delay_examples() {
        let cfg = SystemConfig::default();
        let d = delays(3000.0, deg(90.0), &cfg).unwrap();
        assert!((d.round_trip - 20.0138e-6).abs() < 1e-10);
        assert!(d.tx_step.abs() < 1e-20 && d.rx_step.abs() < 1e-20);

        let d = delays(3000.0, deg(60.0), &cfg).unwrap();
        assert!((d.tx_step - (-0.125 * 0.5 / SPEED_OF_LIGHT)).abs() < 1e-24);
        assert!((d.tx_step - (-2.0848e-10)).abs() < 1e-14);
        assert!(matches!(delays(0.0, 1.0, &cfg), Err(Error::Domain(_))));
        assert!(matches!(delays(-5.0, 1.0, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn doppler_examples() {
        assert!((doppler_from_velocity(50.0, 0.25).unwrap() - 400.0).abs() < 1e-12);
        assert_eq!(doppler_from_velocity(0.0, 0.25).unwrap(), 0.0);
        assert!((doppler_from_velocity(100.0, 0.25).unwrap() - 800.0).abs() < 1e-12);
        assert!(doppler_from_velocity(1.0, 0.0).is_err());
    }

    #[test]
    fn decorrelation_examples() {
        let ok = check_decorrelation(1e6, 5, 10.0).unwrap();
        assert!(ok.pass);
        assert!((ok.bound_hz - 1.8737e6).abs() < 50.0);
        assert!(!check_decorrelation(2e6, 5, 10.0).unwrap().pass);
        let two = check_decorrelation(1.0, 2, 7.0).unwrap();
        assert_eq!(two.bound_hz, SPEED_OF_LIGHT / (4.0 * 7.0));
        assert!(check_decorrelation(1.0, 1, 7.0).is_err());
    }

    proptest! {
        #[test]
        fn conic_identity(az in 0.0..PI, dep in 0.0..FRAC_PI_2) {
            let psi = conic_angle(az, dep).unwrap();
            prop_assert!((psi.cos() - az.cos() * dep.cos()).abs() < 1e-12);
            prop_assert!((0.0..=PI).contains(&psi));
            // cos is even: reflecting the azimuth about zero gives the same cone
            prop_assert_eq!(conic_from_cosines((-az).cos(), dep.cos()), psi);
        }

        #[test]
        fn conic_monotone_in_azimuth(a in 0.0..PI, b in 0.0..PI, dep in 0.0..FRAC_PI_2) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(conic_angle(lo, dep).unwrap() <= conic_angle(hi, dep).unwrap() + 1e-12);
        }

        #[test]
        fn round_trip_is_linear(r in 1.0..1e5f64, psi in 0.0..PI) {
            let cfg = SystemConfig::default();
            let one = delays(r, psi, &cfg).unwrap();
            let two = delays(2.0 * r, psi, &cfg).unwrap();
            prop_assert!((two.round_trip - 2.0 * one.round_trip).abs() <= 1e-12 * two.round_trip);
            prop_assert!((one.tx_step + cfg.d_tx_m * psi.cos() / SPEED_OF_LIGHT).abs() < 1e-24);
        }
    }
}
