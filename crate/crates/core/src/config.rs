//! Run configuration read from JSON.
//!
//! Every section is optional; an empty file yields the nominal five-element
//! system, the default scenario and the default evaluation grid.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::check_decorrelation;
use crate::model::ArrayMode;
use crate::phasecode::{design_phase_codes, validate_phase_codes, DEFAULT_GAP_SLACK_HZ};
use crate::scene::Scene;
use crate::stap::{GridSpec, LossConvention};
use crate::system::SystemConfig;

/// Doppler sweep at a fixed azimuth for SINR-loss curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinrLossSpec {
    pub azimuth_deg: f64,
    pub doppler_min_hz: f64,
    pub doppler_max_hz: f64,
    pub doppler_step_hz: f64,
    pub convention: LossConvention,
}

impl Default for SinrLossSpec {
    fn default() -> Self {
        SinrLossSpec {
            azimuth_deg: 90.0,
            doppler_min_hz: -800.0,
            doppler_max_hz: 800.0,
            doppler_step_hz: 10.0,
            convention: LossConvention::Virtual,
        }
    }
}

impl SinrLossSpec {
    pub fn dopplers(&self) -> Result<Vec<f64>> {
        let grid = GridSpec {
            azimuth_min_deg: self.azimuth_deg,
            azimuth_max_deg: self.azimuth_deg,
            azimuth_step_deg: 1.0,
            doppler_min_hz: self.doppler_min_hz,
            doppler_max_hz: self.doppler_max_hz,
            doppler_step_hz: self.doppler_step_hz,
        };
        grid.dopplers().map_err(|e| match e {
            Error::Config { field, message } => Error::Config {
                field: field.replace("grid.doppler", "sinr_loss.doppler"),
                message,
            },
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=180.0).contains(&self.azimuth_deg) {
            return Err(Error::config("sinr_loss.azimuth_deg", format!("must lie in [0, 180], got {}", self.azimuth_deg)));
        }
        self.dopplers().map(|_| ())
    }
}

/// Positions of the two pattern cuts; unset values fall back to the target.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutSpec {
    pub azimuth_deg: Option<f64>,
    pub doppler_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub scene: Scene,
    pub grid: GridSpec,
    pub mode: ArrayMode,
    pub seed: u64,
    /// Diagonal loading added to the covariance before factoring.
    pub loading: f64,
    pub sinr_loss: SinrLossSpec,
    pub cut: CutSpec,
    /// Target extent along boresight for the decorrelation check, m.
    pub target_extent_m: f64,
    /// Tolerance on the phase-code Doppler gap, Hz.
    pub phase_code_slack_hz: f64,
    /// Largest accepted snapshot dimension `N_T N_R L`.
    pub max_snapshot_dim: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemConfig::default(),
            scene: Scene::default(),
            grid: GridSpec::default(),
            mode: ArrayMode::Fda,
            seed: 0,
            loading: 0.0,
            sinr_loss: SinrLossSpec::default(),
            cut: CutSpec::default(),
            target_extent_m: 10.0,
            phase_code_slack_hz: DEFAULT_GAP_SLACK_HZ,
            max_snapshot_dim: 4500,
        }
    }
}

impl RunConfig {
    /// Parses JSON text; blank input gives the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(RunConfig::default());
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Hard errors on invalid fields; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.system.validate()?;
        self.scene.validate()?;
        self.grid.validate()?;
        self.sinr_loss.validate()?;
        if !(self.loading.is_finite() && self.loading >= 0.0) {
            return Err(Error::config("loading", format!("must be finite and non-negative, got {}", self.loading)));
        }
        if !(self.target_extent_m.is_finite() && self.target_extent_m > 0.0) {
            return Err(Error::config("target_extent_m", "must be positive"));
        }
        if !(self.phase_code_slack_hz.is_finite() && self.phase_code_slack_hz >= 0.0) {
            return Err(Error::config("phase_code_slack_hz", "must be finite and non-negative"));
        }
        let dim = self.system.snapshot_dim();
        if dim > self.max_snapshot_dim {
            return Err(Error::config(
                "system.pulses",
                format!(
                    "snapshot dimension {} x {} x {} = {dim} exceeds max_snapshot_dim {}",
                    self.system.n_tx, self.system.n_rx, self.system.pulses, self.max_snapshot_dim
                ),
            ));
        }

        let mut warnings = Vec::new();
        if self.system.n_tx >= 2 {
            let d = check_decorrelation(self.system.freq_offset_hz, self.system.n_tx, self.target_extent_m)?;
            if !d.pass {
                warnings.push(format!(
                    "frequency offset {} Hz exceeds the decorrelation bound {:.1} Hz for a {} m target",
                    self.system.freq_offset_hz, d.bound_hz, self.target_extent_m
                ));
            }
        }
        let f_td = self.scene.target.doppler_hz(&self.system)?.abs();
        let report = validate_phase_codes(&design_phase_codes(&self.system), f_td, self.phase_code_slack_hz, &self.system)?;
        if !report.feasible {
            warnings.push(format!(
                "phase code infeasible up to {f_td} Hz: min_gap {:.3} Hz < required {:.3} Hz",
                report.min_gap_hz, report.required_gap_hz
            ));
        }
        Ok(warnings)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Reads and validates a config file, returning it with any warnings.
pub fn load_config(path: &Path) -> Result<(RunConfig, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = RunConfig::from_json(&text)?;
    let warnings = cfg.validate()?;
    Ok((cfg, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_the_default() {
        for text in ["", "  \n", "{}"] {
            let cfg = RunConfig::from_json(text).unwrap();
            assert_eq!(cfg, RunConfig::default());
            assert_eq!(cfg.system.n_tx, 5);
            assert_eq!(cfg.system.prf_hz, 7000.0);
            assert_eq!(cfg.scene.target.azimuth_deg, 45.0);
            assert_eq!(cfg.scene.target.doppler_hz(&cfg.system).unwrap(), 400.0);
            assert_eq!(cfg.scene.target.snr_db, 0.0);
            assert!(cfg.validate().unwrap().is_empty());
        }
    }

    #[test]
    fn pulse_override() {
        let cfg = RunConfig::from_json(r#"{"system": {"pulses": 32}}"#).unwrap();
        assert_eq!(cfg.system.snapshot_dim(), 800);
        assert_eq!(cfg.system.n_rx, 5);
    }

    #[test]
    fn errors_name_the_field() {
        let cfg = RunConfig::from_json(r#"{"grid": {"doppler_step_hz": -5}}"#).unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("grid.doppler_step_hz"), "{msg}");

        let err = RunConfig::from_json("{\n  \"system\": {\"n_tx\": \"five\"}\n}").unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("line 2"), "{err}");

        let err = RunConfig::from_json(r#"{"system": {"ntx": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("ntx"), "{err}");

        let cfg = RunConfig::from_json(r#"{"sinr_loss": {"doppler_min_hz": 5, "doppler_max_hz": 1}}"#).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("sinr_loss.doppler_max"));
    }

    #[test]
    fn memory_budget() {
        let cfg = RunConfig::from_json(r#"{"system": {"pulses": 181}}"#).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("system.pulses"));
        let cfg = RunConfig::from_json(r#"{"system": {"pulses": 181}, "max_snapshot_dim": 5000}"#).unwrap();
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn warnings() {
        let cfg = RunConfig::from_json(r#"{"system": {"freq_offset_hz": 3e6}}"#).unwrap();
        let w = cfg.validate().unwrap();
        assert!(w.iter().any(|m| m.contains("decorrelation")), "{w:?}");
        let cfg = RunConfig::from_json(r#"{"phase_code_slack_hz": 0}"#).unwrap();
        let w = cfg.validate().unwrap();
        assert!(w.iter().any(|m| m.contains("min_gap")), "{w:?}");
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.mode = ArrayMode::PhasedArray;
        cfg.seed = 99;
        cfg.cut.doppler_hz = Some(120.0);
        cfg.sinr_loss.convention = LossConvention::Matched;
        cfg.scene.cnr_mode = crate::scene::CnrMode::Total;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        cfg.save(&path).unwrap();
        let (back, _) = load_config(&path).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_ne!(RunConfig::default().hash(), cfg.hash());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_config(Path::new("/nonexistent/run.json")).unwrap_err();
        assert!(!err.is_validation());
        assert!(err.to_string().contains("/nonexistent/run.json"));
    }
}
