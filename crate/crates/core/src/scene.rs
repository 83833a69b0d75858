//! Scenario description and the clutter, jamming and noise covariances.
//!
//! Covariances are normalised to unit receiver noise, so the noise term is the
//! identity and clutter and jamming enter through their CNR and JNR.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{conic_angle, doppler_from_velocity};
use crate::model::{steering_receive, SteeringModel};
use crate::system::{SystemConfig, C64};

/// Converts decibels to a power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The target whose range cell is processed. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Target {
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub depression_deg: f64,
    /// Radial velocity, positive when closing.
    pub velocity_mps: f64,
    pub snr_db: f64,
}

impl Default for Target {
    fn default() -> Self {
        Target {
            range_m: 3000.0,
            azimuth_deg: 45.0,
            depression_deg: 45.0,
            velocity_mps: 50.0,
            snr_db: 0.0,
        }
    }
}

impl Target {
    pub fn conic(&self) -> Result<f64> {
        conic_angle(self.azimuth_deg.to_radians(), self.depression_deg.to_radians())
    }

    pub fn doppler_hz(&self, cfg: &SystemConfig) -> Result<f64> {
        doppler_from_velocity(self.velocity_mps, cfg.wavelength_m)
    }
}

/// Ground patches of one iso-range ring, spread uniformly in azimuth with
/// both span endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterRing {
    pub range_m: f64,
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub patches: usize,
    pub depression_deg: f64,
    pub cnr_db: f64,
}

impl Default for ClutterRing {
    fn default() -> Self {
        ClutterRing {
            range_m: 3006.0,
            azimuth_min_deg: 0.0,
            azimuth_max_deg: 180.0,
            patches: 181,
            depression_deg: 45.0,
            cnr_db: 20.0,
        }
    }
}

/// A barrage noise jammer. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Jammer {
    pub azimuth_deg: f64,
    pub depression_deg: f64,
    pub jnr_db: f64,
}

impl Default for Jammer {
    fn default() -> Self {
        Jammer {
            azimuth_deg: 120.0,
            depression_deg: 45.0,
            jnr_db: 20.0,
        }
    }
}

impl Jammer {
    pub fn conic(&self) -> Result<f64> {
        conic_angle(self.azimuth_deg.to_radians(), self.depression_deg.to_radians())
    }
}

/// Whether a ring's CNR applies to each patch or to the ring as a whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CnrMode {
    #[default]
    PerPatch,
    Total,
}

impl std::str::FromStr for CnrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-patch" => Ok(CnrMode::PerPatch),
            "total" => Ok(CnrMode::Total),
            other => Err(Error::config("cnr_mode", format!("unknown CNR mode `{other}` (per-patch, total)"))),
        }
    }
}

impl std::fmt::Display for CnrMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CnrMode::PerPatch => "per-patch",
            CnrMode::Total => "total",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scene {
    pub target: Target,
    pub clutter: Vec<ClutterRing>,
    pub jammers: Vec<Jammer>,
    pub cnr_mode: CnrMode,
}

impl Default for Scene {
    fn default() -> Self {
        Scene {
            target: Target::default(),
            clutter: vec![ClutterRing::default()],
            jammers: vec![Jammer::default()],
            cnr_mode: CnrMode::PerPatch,
        }
    }
}

fn check_angle(field: String, deg: f64, max: f64) -> Result<()> {
    if !(deg.is_finite() && (0.0..=max).contains(&deg)) {
        return Err(Error::config(field, format!("must lie in [0, {max}] degrees, got {deg}")));
    }
    Ok(())
}

fn check_finite(field: String, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::config(field, format!("must be finite, got {value}")));
    }
    Ok(())
}

fn check_range(field: String, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::config(field, format!("must be positive, got {value}")));
    }
    Ok(())
}

impl Scene {
    /// Target and interference-free scene.
    pub fn target_only(target: Target) -> Self {
        Scene {
            target,
            clutter: Vec::new(),
            jammers: Vec::new(),
            cnr_mode: CnrMode::PerPatch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.target;
        check_range("scene.target.range_m".into(), t.range_m)?;
        check_angle("scene.target.azimuth_deg".into(), t.azimuth_deg, 180.0)?;
        check_angle("scene.target.depression_deg".into(), t.depression_deg, 90.0)?;
        check_finite("scene.target.velocity_mps".into(), t.velocity_mps)?;
        check_finite("scene.target.snr_db".into(), t.snr_db)?;
        for (i, ring) in self.clutter.iter().enumerate() {
            let f = |name: &str| format!("scene.clutter[{i}].{name}");
            check_range(f("range_m"), ring.range_m)?;
            check_angle(f("azimuth_min_deg"), ring.azimuth_min_deg, 180.0)?;
            check_angle(f("azimuth_max_deg"), ring.azimuth_max_deg, 180.0)?;
            check_angle(f("depression_deg"), ring.depression_deg, 90.0)?;
            check_finite(f("cnr_db"), ring.cnr_db)?;
            if ring.patches == 0 {
                return Err(Error::config(f("patches"), "must be at least 1"));
            }
            if ring.azimuth_max_deg < ring.azimuth_min_deg || (ring.patches > 1 && ring.azimuth_max_deg == ring.azimuth_min_deg) {
                return Err(Error::config(f("azimuth_max_deg"), "azimuth span is empty"));
            }
        }
        for (i, j) in self.jammers.iter().enumerate() {
            let f = |name: &str| format!("scene.jammers[{i}].{name}");
            check_angle(f("azimuth_deg"), j.azimuth_deg, 180.0)?;
            check_angle(f("depression_deg"), j.depression_deg, 90.0)?;
            check_finite(f("jnr_db"), j.jnr_db)?;
        }
        Ok(())
    }
}

/// One ground patch with its geometry and linear CNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterPatch {
    pub range_m: f64,
    /// Azimuth, radians.
    pub azimuth: f64,
    pub conic: f64,
    pub doppler_hz: f64,
    pub cnr: f64,
}

/// Patches of a ring with Doppler `(2 v_a / lambda) cos psi`.
pub fn clutter_patches(ring: &ClutterRing, cnr_mode: CnrMode, cfg: &SystemConfig) -> Result<Vec<ClutterPatch>> {
    if ring.patches == 0 {
        return Err(Error::Empty("clutter patches"));
    }
    let (lo, hi) = (ring.azimuth_min_deg, ring.azimuth_max_deg);
    if hi < lo || (ring.patches > 1 && hi == lo) {
        return Err(Error::domain(format!("empty azimuth span [{lo}, {hi}] degrees")));
    }
    let depression = ring.depression_deg.to_radians();
    let mut cnr = db_to_linear(ring.cnr_db);
    if cnr_mode == CnrMode::Total {
        cnr /= ring.patches as f64;
    }
    let f_max = cfg.max_clutter_doppler();
    (0..ring.patches)
        .map(|i| {
            let az_deg = if ring.patches == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (ring.patches - 1) as f64
            };
            let azimuth = az_deg.to_radians();
            let conic = conic_angle(azimuth, depression)?;
            Ok(ClutterPatch {
                range_m: ring.range_m,
                azimuth,
                conic,
                doppler_hz: f_max * conic.cos(),
                cnr,
            })
        })
        .collect()
}

/// All patches of every ring of the scene.
pub fn scene_patches(scene: &Scene, cfg: &SystemConfig) -> Result<Vec<ClutterPatch>> {
    let mut out = Vec::new();
    for ring in &scene.clutter {
        out.extend(clutter_patches(ring, scene.cnr_mode, cfg)?);
    }
    Ok(out)
}

/// Copies the lower triangle onto the upper one so the result is exactly
/// Hermitian with a real diagonal.
fn make_hermitian(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
}

/// Steering vectors of the patches as matrix columns.
pub fn patch_steering(patches: &[ClutterPatch], model: &SteeringModel) -> Result<DMatrix<C64>> {
    let mut q = DMatrix::zeros(model.dim(), patches.len());
    for (j, p) in patches.iter().enumerate() {
        q.set_column(j, &model.steering(p.range_m, p.conic, p.doppler_hz)?);
    }
    Ok(q)
}

/// `sum_i CNR_i q_i q_i^H` with `q_i` the patch steering under `model`.
pub fn covariance_clutter(patches: &[ClutterPatch], model: &SteeringModel) -> Result<DMatrix<C64>> {
    let dim = model.dim();
    if patches.is_empty() {
        return Ok(DMatrix::zeros(dim, dim));
    }
    let q = patch_steering(patches, model)?;
    let mut scaled = q.clone();
    for (j, p) in patches.iter().enumerate() {
        scaled.column_mut(j).scale_mut(p.cnr);
    }
    let mut r = scaled * q.adjoint();
    make_hermitian(&mut r);
    Ok(r)
}

/// Spatial core `sum_j JNR_j a_R a_R^H` of the jamming covariance.
pub fn jamming_core(jammers: &[Jammer], cfg: &SystemConfig) -> Result<DMatrix<C64>> {
    let mut core = DMatrix::zeros(cfg.n_rx, cfg.n_rx);
    for j in jammers {
        let a = DVector::from_vec(steering_receive(j.conic()?, cfg));
        core += &a * a.adjoint() * C64::new(db_to_linear(j.jnr_db), 0.0);
    }
    Ok(core)
}

/// Adds `I_L ⊗ core ⊗ I_C` to `m`, `C` being the channels per receive element.
fn add_kron_identity(m: &mut DMatrix<C64>, core: &DMatrix<C64>, pulses: usize, channels: usize) {
    let nr = core.nrows();
    for l in 0..pulses {
        for n in 0..nr {
            for k in 0..nr {
                let v = core[(n, k)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..channels {
                    m[((l * nr + n) * channels + c, (l * nr + k) * channels + c)] += v;
                }
            }
        }
    }
}

/// `I_L ⊗ [sum_j JNR_j a_R(psi_j) a_R(psi_j)^H] ⊗ I_C`.
pub fn covariance_jamming(jammers: &[Jammer], model: &SteeringModel) -> Result<DMatrix<C64>> {
    let cfg = model.config();
    let mut m = DMatrix::zeros(model.dim(), model.dim());
    add_kron_identity(&mut m, &jamming_core(jammers, cfg)?, cfg.pulses, model.channels());
    Ok(m)
}

/// One draw of `alpha u_bar ⊗ a_R ⊗ u_tilde` with Gaussian `u_bar` (length L),
/// `u_tilde` (length N_T) and `|alpha|^2 = JNR`, uniformly random phase.
pub fn sample_jamming_snapshot(jammer: &Jammer, cfg: &SystemConfig, rng: &mut impl Rng) -> Result<DVector<C64>> {
    let a_r = steering_receive(jammer.conic()?, cfg);
    let mut gauss = || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    };
    let u_bar: Vec<C64> = (0..cfg.pulses).map(|_| gauss()).collect();
    let u_tilde: Vec<C64> = (0..cfg.n_tx).map(|_| gauss()).collect();
    let phase: f64 = rng.gen();
    let alpha = crate::system::cis_cycles(phase) * db_to_linear(jammer.jnr_db).sqrt();
    let mut v = Vec::with_capacity(cfg.snapshot_dim());
    for ul in &u_bar {
        for an in &a_r {
            for um in &u_tilde {
                v.push(alpha * ul * an * um);
            }
        }
    }
    Ok(DVector::from_vec(v))
}

/// Same as [`sample_jamming_snapshot`] from a fixed seed.
pub fn sample_jamming_snapshot_seeded(jammer: &Jammer, cfg: &SystemConfig, seed: u64) -> Result<DVector<C64>> {
    sample_jamming_snapshot(jammer, cfg, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Contribution kinds retained by [`CovarianceModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Clutter,
    Jamming,
    Noise,
    Loading,
}

/// Label and trace of one additive covariance term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceTerm {
    pub kind: TermKind,
    pub trace: f64,
}

/// Interference-plus-noise covariance normalised to unit noise power.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    pub matrix: DMatrix<C64>,
    pub terms: Vec<CovarianceTerm>,
    pub loading: f64,
}

impl CovarianceModel {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `R = R_clutter + R_jamming + I + loading I` for the steering model.
pub fn covariance_total(scene: &Scene, model: &SteeringModel, loading: f64) -> Result<CovarianceModel> {
    if !(loading.is_finite() && loading >= 0.0) {
        return Err(Error::config("loading", format!("must be finite and non-negative, got {loading}")));
    }
    let cfg = model.config();
    let dim = model.dim();
    let patches = scene_patches(scene, cfg)?;
    let mut matrix = covariance_clutter(&patches, model)?;
    let clutter_trace = matrix.trace().re;
    let core = jamming_core(&scene.jammers, cfg)?;
    add_kron_identity(&mut matrix, &core, cfg.pulses, model.channels());
    let jamming_trace = core.trace().re * (cfg.pulses * model.channels()) as f64;
    for i in 0..dim {
        matrix[(i, i)] += C64::new(1.0 + loading, 0.0);
    }
    let mut terms = vec![
        CovarianceTerm { kind: TermKind::Clutter, trace: clutter_trace },
        CovarianceTerm { kind: TermKind::Jamming, trace: jamming_trace },
        CovarianceTerm { kind: TermKind::Noise, trace: dim as f64 },
    ];
    if loading > 0.0 {
        terms.push(CovarianceTerm { kind: TermKind::Loading, trace: loading * dim as f64 });
    }
    Ok(CovarianceModel { matrix, terms, loading })
}
