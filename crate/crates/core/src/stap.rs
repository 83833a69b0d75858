//! MVDR range-space-time adaptive processing on the analytic covariance.
//!
//! The covariance is factored once per scene; every grid evaluation reuses
//! the factor. Snapshots are `b_dop(f_d) ⊗ s(r, psi)` with `s` the spatial
//! part, so scanning a Doppler-azimuth grid only needs one spatial vector per
//! azimuth and one Doppler vector per Doppler cell.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::conic_angle;
use crate::model::{steering_doppler, steering_matrix_c, steering_receive, ArrayMode, SteeringModel};
use crate::scene::{covariance_total, db_to_linear, jamming_core, scene_patches, CovarianceModel, Scene};
use crate::system::{SystemConfig, C64};

/// Cholesky factor of a Hermitian positive definite covariance.
#[derive(Debug, Clone)]
pub struct FactoredCovariance {
    chol: Cholesky<C64, Dyn>,
    lower: DMatrix<C64>,
}

impl FactoredCovariance {
    /// Factors `r + loading I`.
    pub fn new(r: &DMatrix<C64>, loading: f64) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::DimensionMismatch {
                what: "covariance columns",
                expected: r.nrows(),
                got: r.ncols(),
            });
        }
        if !(loading.is_finite() && loading >= 0.0) {
            return Err(Error::config("loading", format!("must be finite and non-negative, got {loading}")));
        }
        let mut m = r.clone();
        if loading > 0.0 {
            for i in 0..m.nrows() {
                m[(i, i)] += C64::new(loading, 0.0);
            }
        }
        let chol = Cholesky::new(m).ok_or(Error::Singular)?;
        let lower = chol.l();
        // complex square roots let indefinite inputs through
        let tol = 1e-12 * lower.diagonal().iter().map(|d| d.norm()).fold(0.0, f64::max);
        if lower.diagonal().iter().any(|d| !(d.re.is_finite() && d.re > 0.0 && d.im.abs() <= tol)) {
            return Err(Error::Singular);
        }
        Ok(FactoredCovariance { chol, lower })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    fn check(&self, q: &DVector<C64>) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "steering vector",
                expected: self.dim(),
                got: q.len(),
            });
        }
        Ok(())
    }

    /// `R^{-1} b`.
    pub fn solve(&self, b: &DVector<C64>) -> Result<DVector<C64>> {
        self.check(b)?;
        Ok(self.chol.solve(b))
    }

    /// `q^H R^{-1} q`, through the whitened vector `L^{-1} q`.
    pub fn inverse_quadratic(&self, q: &DVector<C64>) -> Result<f64> {
        self.check(q)?;
        let z = self.lower.solve_lower_triangular(q).ok_or(Error::Singular)?;
        Ok(z.norm_squared())
    }

    /// Explicit inverse, used only for grid scans where it is much cheaper
    /// than one solve per cell.
    pub fn inverse(&self) -> DMatrix<C64> {
        self.chol.inverse()
    }
}

/// `v = R^{-1} q / (q^H R^{-1} q)`.
pub fn mvdr_weights(r: &FactoredCovariance, q: &DVector<C64>) -> Result<DVector<C64>> {
    let x = r.solve(q)?;
    let denom = q.dotc(&x).re;
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::Singular);
    }
    Ok(x / C64::new(denom, 0.0))
}

/// Linear output SINR `snr |v^H q|^2 / (v^H R v)`.
pub fn sinr(v: &DVector<C64>, q: &DVector<C64>, r: &DMatrix<C64>, snr_linear: f64) -> Result<f64> {
    if v.len() != q.len() || r.nrows() != v.len() {
        return Err(Error::DimensionMismatch {
            what: "receive weights",
            expected: r.nrows(),
            got: v.len(),
        });
    }
    let num = v.dotc(q).norm_sqr();
    let den = v.dotc(&(r * v)).re;
    if !(den > 0.0) {
        return Err(Error::Singular);
    }
    Ok(snr_linear * num / den)
}

fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn transmit_weights(w: &[C64], cfg: &SystemConfig) -> Result<SteeringModel> {
    SteeringModel::with_weights(cfg, ArrayMode::Fda, 0.0, w.to_vec())
}

/// Output SINR in dB of receive weights `v` with transmit weights `w`.
pub fn output_sinr(v: &DVector<C64>, w: &[C64], scene: &Scene, cfg: &SystemConfig) -> Result<f64> {
    let model = transmit_weights(w, cfg)?;
    let t = &scene.target;
    let q = model.steering(t.range_m, t.conic()?, t.doppler_hz(cfg)?)?;
    let r = covariance_total(scene, &model, 0.0)?;
    Ok(to_db(sinr(v, &q, &r.matrix, db_to_linear(t.snr_db))?))
}

/// Transmit-weight quadratic forms for fixed receive weights `v`:
/// the SINR is `snr (w^H C_t w) / (w^H C_c w + eta)`.
#[derive(Debug, Clone)]
pub struct QuadraticForms {
    pub c_t: DMatrix<C64>,
    pub c_c: DMatrix<C64>,
    pub eta: f64,
}

impl QuadraticForms {
    /// Linear SINR for transmit weights `w`.
    pub fn sinr(&self, w: &[C64], snr_linear: f64) -> Result<f64> {
        if w.len() != self.c_t.nrows() {
            return Err(Error::DimensionMismatch {
                what: "transmit weights",
                expected: self.c_t.nrows(),
                got: w.len(),
            });
        }
        let w = DVector::from_column_slice(w);
        let num = w.dotc(&(&self.c_t * &w)).re;
        let den = w.dotc(&(&self.c_c * &w)).re + self.eta;
        Ok(snr_linear * num / den)
    }
}

fn outer(x: &DVector<C64>) -> DMatrix<C64> {
    x * x.adjoint()
}

/// `C_t = (C^H v)(C^H v)^H` at the target, `C_c` the CNR-weighted sum of the
/// same over clutter patches and `eta = v^H R_jam v + v^H v`.
pub fn sinr_quadratic_forms(v: &DVector<C64>, scene: &Scene, cfg: &SystemConfig) -> Result<QuadraticForms> {
    if v.len() != cfg.snapshot_dim() {
        return Err(Error::DimensionMismatch {
            what: "receive weights",
            expected: cfg.snapshot_dim(),
            got: v.len(),
        });
    }
    let t = &scene.target;
    let c = steering_matrix_c(t.range_m, t.conic()?, t.doppler_hz(cfg)?, cfg)?;
    let c_t = outer(&c.ad_mul(v));
    let mut c_c = DMatrix::zeros(cfg.n_tx, cfg.n_tx);
    for p in scene_patches(scene, cfg)? {
        let c = steering_matrix_c(p.range_m, p.conic, p.doppler_hz, cfg)?;
        c_c += outer(&c.ad_mul(v)) * C64::new(p.cnr, 0.0);
    }
    let core = jamming_core(&scene.jammers, cfg)?;
    let (nt, nr) = (cfg.n_tx, cfg.n_rx);
    let mut jam = 0.0;
    for l in 0..cfg.pulses {
        for m in 0..nt {
            let x = DVector::from_iterator(nr, (0..nr).map(|n| v[(l * nr + n) * nt + m]));
            jam += x.dotc(&(&core * &x)).re;
        }
    }
    Ok(QuadraticForms {
        c_t,
        c_c,
        eta: jam + v.norm_squared(),
    })
}

/// Doppler-azimuth evaluation grid; both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub azimuth_step_deg: f64,
    pub doppler_min_hz: f64,
    pub doppler_max_hz: f64,
    pub doppler_step_hz: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            azimuth_min_deg: 0.0,
            azimuth_max_deg: 180.0,
            azimuth_step_deg: 1.0,
            doppler_min_hz: -800.0,
            doppler_max_hz: 800.0,
            doppler_step_hz: 10.0,
        }
    }
}

fn axis(field: &str, unit: &str, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::config(format!("grid.{field}_max_{unit}"), format!("range [{lo}, {hi}] is empty")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::config(format!("grid.{field}_step_{unit}"), format!("must be positive, got {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

impl GridSpec {
    pub fn azimuths(&self) -> Result<Vec<f64>> {
        axis("azimuth", "deg", self.azimuth_min_deg, self.azimuth_max_deg, self.azimuth_step_deg)
    }

    pub fn dopplers(&self) -> Result<Vec<f64>> {
        axis("doppler", "hz", self.doppler_min_hz, self.doppler_max_hz, self.doppler_step_hz)
    }

    pub fn validate(&self) -> Result<()> {
        let az = self.azimuths()?;
        if az[0] < 0.0 || az[az.len() - 1] > 180.0 {
            return Err(Error::config("grid.azimuth_min_deg", "azimuths must lie in [0, 180] degrees"));
        }
        self.dopplers().map(|_| ())
    }
}

/// What a grid holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// `1 / (q^H R^{-1} q)`.
    InterferenceSpectrum,
    /// `|v^H q|^2` with the target MVDR weights.
    AdaptedPattern,
}

/// Values on a Doppler-azimuth grid, rows indexed by azimuth.
#[derive(Debug, Clone)]
pub struct AdaptedPatternGrid {
    pub kind: GridKind,
    pub mode: ArrayMode,
    pub range_m: f64,
    pub azimuth_deg: Vec<f64>,
    pub doppler_hz: Vec<f64>,
    /// Linear power, `azimuth_deg.len() x doppler_hz.len()`.
    pub values: DMatrix<f64>,
}

impl AdaptedPatternGrid {
    pub fn db(&self, i: usize, j: usize) -> f64 {
        to_db(self.values[(i, j)])
    }

    /// Grid cell holding the largest value.
    pub fn peak(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                if self.values[(i, j)] > best.2 {
                    best = (i, j, self.values[(i, j)]);
                }
            }
        }
        best
    }

    /// dB values relative to the grid peak.
    pub fn normalized_db(&self) -> DMatrix<f64> {
        let peak = self.peak().2;
        self.values.map(|x| to_db(x / peak))
    }

    /// Index of the grid line nearest to `at` on an axis.
    fn nearest(axis: &[f64], at: f64, name: &str) -> Result<usize> {
        let (lo, hi) = (axis[0], axis[axis.len() - 1]);
        if !(at >= lo && at <= hi) {
            return Err(Error::OutOfRange(format!("{name} {at} is outside the grid [{lo}, {hi}]")));
        }
        Ok(axis
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - at).abs().total_cmp(&(b.1 - at).abs()))
            .map(|(i, _)| i)
            .expect("grid axes are non-empty"))
    }

    pub fn azimuth_index(&self, deg: f64) -> Result<usize> {
        Self::nearest(&self.azimuth_deg, deg, "azimuth")
    }

    pub fn doppler_index(&self, hz: f64) -> Result<usize> {
        Self::nearest(&self.doppler_hz, hz, "Doppler")
    }
}

/// Direction of a one-dimensional cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutAxis {
    /// Fixed azimuth (degrees), values along Doppler.
    Azimuth,
    /// Fixed Doppler (Hz), values along azimuth.
    Doppler,
}

/// One row or column of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCut {
    pub axis: CutAxis,
    /// Grid line actually used.
    pub at: f64,
    /// Coordinates along the cut.
    pub coords: Vec<f64>,
    /// Linear values.
    pub values: Vec<f64>,
}

/// Extracts the row or column nearest to `at`.
pub fn pattern_cut(grid: &AdaptedPatternGrid, axis: CutAxis, at: f64) -> Result<PatternCut> {
    match axis {
        CutAxis::Azimuth => {
            let i = grid.azimuth_index(at)?;
            Ok(PatternCut {
                axis,
                at: grid.azimuth_deg[i],
                coords: grid.doppler_hz.clone(),
                values: grid.values.row(i).iter().copied().collect(),
            })
        }
        CutAxis::Doppler => {
            let j = grid.doppler_index(at)?;
            Ok(PatternCut {
                axis,
                at: grid.doppler_hz[j],
                coords: grid.azimuth_deg.clone(),
                values: grid.values.column(j).iter().copied().collect(),
            })
        }
    }
}

/// Reference used to express SINR loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossConvention {
    /// `20 log10(|v^H q| / (N_T N_R L))` with `v = R^{-1} q`, which is
    /// `20 log10(q^H R^{-1} q / (N_T N_R L))`; zero without interference.
    #[default]
    Virtual,
    /// `10 log10(q^H R^{-1} q / ||q||^2)`: SINR against the matched-filter
    /// bound of the same steering vector.
    Matched,
}

impl std::str::FromStr for LossConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "virtual" => Ok(LossConvention::Virtual),
            "matched" => Ok(LossConvention::Matched),
            other => Err(Error::config("loss_convention", format!("unknown convention `{other}` (virtual, matched)"))),
        }
    }
}

/// Steering model, covariance and its factor for one scene and mode.
#[derive(Debug, Clone)]
pub struct Processor {
    cfg: SystemConfig,
    scene: Scene,
    model: SteeringModel,
    covariance: CovarianceModel,
    factor: FactoredCovariance,
}

impl Processor {
    /// Processor whose phased-array beam (if any) looks at the target.
    pub fn new(cfg: &SystemConfig, scene: &Scene, mode: ArrayMode, loading: f64) -> Result<Self> {
        Self::with_look(cfg, scene, mode, loading, scene.target.azimuth_deg)
    }

    /// Processor with the phased-array beam at `look_azimuth_deg` and the
    /// target depression.
    pub fn with_look(cfg: &SystemConfig, scene: &Scene, mode: ArrayMode, loading: f64, look_azimuth_deg: f64) -> Result<Self> {
        cfg.validate()?;
        scene.validate()?;
        let look = conic_angle(look_azimuth_deg.to_radians(), scene.target.depression_deg.to_radians())?;
        let model = SteeringModel::new(cfg, mode, look);
        let covariance = covariance_total(scene, &model, loading)?;
        let factor = FactoredCovariance::new(&covariance.matrix, 0.0)?;
        Ok(Processor {
            cfg: cfg.clone(),
            scene: scene.clone(),
            model,
            covariance,
            factor,
        })
    }

    pub fn model(&self) -> &SteeringModel {
        &self.model
    }

    pub fn covariance(&self) -> &CovarianceModel {
        &self.covariance
    }

    pub fn factor(&self) -> &FactoredCovariance {
        &self.factor
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    fn depression(&self) -> f64 {
        self.scene.target.depression_deg.to_radians()
    }

    fn conic_at(&self, azimuth_deg: f64) -> Result<f64> {
        conic_angle(azimuth_deg.to_radians(), self.depression())
    }

    /// Steering vector at the target range for azimuth and Doppler.
    pub fn steering_at(&self, azimuth_deg: f64, doppler_hz: f64) -> Result<DVector<C64>> {
        self.model.steering(self.scene.target.range_m, self.conic_at(azimuth_deg)?, doppler_hz)
    }

    pub fn target_steering(&self) -> Result<DVector<C64>> {
        let t = &self.scene.target;
        self.steering_at(t.azimuth_deg, t.doppler_hz(&self.cfg)?)
    }

    /// MVDR weights toward the target.
    pub fn mvdr(&self) -> Result<DVector<C64>> {
        mvdr_weights(&self.factor, &self.target_steering()?)
    }

    /// Linear SINR of receive weights `v` against the target.
    pub fn sinr(&self, v: &DVector<C64>) -> Result<f64> {
        sinr(v, &self.target_steering()?, &self.covariance.matrix, db_to_linear(self.scene.target.snr_db))
    }

    fn spatial(&self, azimuth_deg: f64) -> Result<Vec<C64>> {
        self.model.spatial(self.scene.target.range_m, self.conic_at(azimuth_deg)?)
    }

    fn grid(&self, kind: GridKind, values: DMatrix<f64>, az: Vec<f64>, dop: Vec<f64>) -> AdaptedPatternGrid {
        AdaptedPatternGrid {
            kind,
            mode: self.model.mode(),
            range_m: self.scene.target.range_m,
            azimuth_deg: az,
            doppler_hz: dop,
            values,
        }
    }

    /// `1 / (q^H R^{-1} q)` over the grid.
    pub fn interference_spectrum(&self, spec: &GridSpec) -> Result<AdaptedPatternGrid> {
        let (az, dop) = (spec.azimuths()?, spec.dopplers()?);
        let pulses = self.cfg.pulses;
        let dim = self.model.dim();
        let s_len = dim / pulses;
        let rinv = self.factor.inverse();
        let dvecs: Vec<DVector<C64>> = dop
            .iter()
            .map(|f| DVector::from_vec(steering_doppler(*f, pulses, self.cfg.prf_hz)))
            .collect();
        let mut values = DMatrix::zeros(az.len(), dop.len());
        let mut y = DMatrix::<C64>::zeros(dim, pulses);
        for (i, a) in az.iter().enumerate() {
            let s = self.spatial(*a)?;
            // y = R^{-1} (I_L ⊗ s); m = (I_L ⊗ s)^H y
            y.fill(C64::new(0.0, 0.0));
            for lp in 0..pulses {
                let mut col = y.column_mut(lp);
                for (k, sk) in s.iter().enumerate() {
                    col.axpy(*sk, &rinv.column(lp * s_len + k), C64::new(1.0, 0.0));
                }
            }
            let mut m = DMatrix::<C64>::zeros(pulses, pulses);
            for l in 0..pulses {
                for lp in 0..pulses {
                    m[(l, lp)] = (0..s_len).map(|k| s[k].conj() * y[(l * s_len + k, lp)]).sum();
                }
            }
            for (j, b) in dvecs.iter().enumerate() {
                let quad = b.dotc(&(&m * b)).re;
                values[(i, j)] = 1.0 / quad;
            }
        }
        Ok(self.grid(GridKind::InterferenceSpectrum, values, az, dop))
    }

    /// `|v^H q(r_t, psi, f_d)|^2` over the grid with `v` the MVDR weights
    /// toward the target.
    pub fn adapted_pattern(&self, spec: &GridSpec) -> Result<AdaptedPatternGrid> {
        let v = self.mvdr()?;
        self.pattern_of(&v, spec)
    }

    /// `|v^H q|^2` over the grid for arbitrary receive weights.
    pub fn pattern_of(&self, v: &DVector<C64>, spec: &GridSpec) -> Result<AdaptedPatternGrid> {
        let (az, dop) = (spec.azimuths()?, spec.dopplers()?);
        let pulses = self.cfg.pulses;
        let s_len = self.model.dim() / pulses;
        if v.len() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                what: "receive weights",
                expected: self.model.dim(),
                got: v.len(),
            });
        }
        let dvecs: Vec<Vec<C64>> = dop.iter().map(|f| steering_doppler(*f, pulses, self.cfg.prf_hz)).collect();
        let mut values = DMatrix::zeros(az.len(), dop.len());
        for (i, a) in az.iter().enumerate() {
            let s = self.spatial(*a)?;
            let c: Vec<C64> = (0..pulses)
                .map(|l| (0..s_len).map(|k| v[l * s_len + k].conj() * s[k]).sum())
                .collect();
            for (j, b) in dvecs.iter().enumerate() {
                let y: C64 = c.iter().zip(b).map(|(x, y)| x * y).sum();
                values[(i, j)] = y.norm_sqr();
            }
        }
        Ok(self.grid(GridKind::AdaptedPattern, values, az, dop))
    }

    /// SINR loss in dB of a target at `azimuth_deg` for each Doppler.
    pub fn sinr_loss(&self, azimuth_deg: f64, dopplers: &[f64], convention: LossConvention) -> Result<Vec<f64>> {
        if dopplers.is_empty() {
            return Err(Error::Empty("Doppler list"));
        }
        let full = self.cfg.snapshot_dim() as f64;
        dopplers
            .iter()
            .map(|f| {
                let q = self.steering_at(azimuth_deg, *f)?;
                let quad = self.factor.inverse_quadratic(&q)?;
                Ok(match convention {
                    LossConvention::Virtual => 20.0 * (quad / full).log10(),
                    LossConvention::Matched => to_db(quad / q.norm_squared()),
                })
            })
            .collect()
    }
}

pub fn interference_spectrum(scene: &Scene, cfg: &SystemConfig, grid: &GridSpec, loading: f64) -> Result<AdaptedPatternGrid> {
    Processor::new(cfg, scene, ArrayMode::Fda, loading)?.interference_spectrum(grid)
}

pub fn adapted_pattern(scene: &Scene, cfg: &SystemConfig, grid: &GridSpec, mode: ArrayMode, loading: f64) -> Result<AdaptedPatternGrid> {
    Processor::new(cfg, scene, mode, loading)?.adapted_pattern(grid)
}

/// SINR loss along Doppler at a fixed azimuth. A phased array points its
/// transmit beam at that azimuth.
pub fn sinr_loss_curve(
    scene: &Scene,
    cfg: &SystemConfig,
    dopplers: &[f64],
    theta_fixed_deg: f64,
    mode: ArrayMode,
    loading: f64,
    convention: LossConvention,
) -> Result<Vec<f64>> {
    Processor::with_look(cfg, scene, mode, loading, theta_fixed_deg)?.sinr_loss(theta_fixed_deg, dopplers, convention)
}

/// Spatial receive steering toward a jammer, re-exported for diagnostics.
pub fn jammer_receive_steering(azimuth_deg: f64, depression_deg: f64, cfg: &SystemConfig) -> Result<Vec<C64>> {
    Ok(steering_receive(conic_angle(azimuth_deg.to_radians(), depression_deg.to_radians())?, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ClutterRing, Jammer, Target};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> SystemConfig {
        SystemConfig { n_tx: 3, n_rx: 2, pulses: 8, ..SystemConfig::default() }
    }

    fn small_scene() -> Scene {
        Scene {
            clutter: vec![ClutterRing { patches: 19, ..ClutterRing::default() }],
            ..Scene::default()
        }
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
        DVector::from_iterator(n, (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
    }

    #[test]
    fn mvdr_on_identity_is_the_scaled_steering_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_vec(&mut rng, 10);
        let f = FactoredCovariance::new(&DMatrix::identity(10, 10), 0.0).unwrap();
        let v = mvdr_weights(&f, &q).unwrap();
        assert!((&v - &q / C64::new(q.norm_squared(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mvdr_is_distortionless_and_optimal() {
        let cfg = small();
        let p = Processor::new(&cfg, &small_scene(), ArrayMode::Fda, 0.0).unwrap();
        let q = p.target_steering().unwrap();
        let v = p.mvdr().unwrap();
        assert!((v.dotc(&q) - C64::new(1.0, 0.0)).norm() < 1e-10);
        let best = p.sinr(&v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let mut r = random_vec(&mut rng, v.len());
            r /= C64::new(r.norm(), 0.0);
            assert!(p.sinr(&r).unwrap() <= best * (1.0 + 1e-12));
        }
        let scaled = &v * C64::new(-3.0, 2.0);
        assert!((p.sinr(&scaled).unwrap() / best - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matched_filter_reaches_full_coherent_gain() {
        let cfg = small();
        let scene = Scene::target_only(Target { snr_db: 3.0, ..Target::default() });
        let t = &scene.target;
        let q = SteeringModel::new(&cfg, ArrayMode::Fda, 0.0)
            .steering(t.range_m, t.conic().unwrap(), t.doppler_hz(&cfg).unwrap())
            .unwrap();
        let v = &q / C64::new(q.norm_squared(), 0.0);
        let ones = vec![C64::new(1.0, 0.0); 3];
        let db = output_sinr(&v, &ones, &scene, &cfg).unwrap();
        assert!((db - (3.0 + to_db(48.0))).abs() < 1e-9);
    }

    #[test]
    fn quadratic_forms_reproduce_the_output_sinr() {
        let cfg = small();
        let scene = small_scene();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = random_vec(&mut rng, cfg.snapshot_dim());
            let w: Vec<C64> = random_vec(&mut rng, 3).iter().copied().collect();
            let forms = sinr_quadratic_forms(&v, &scene, &cfg).unwrap();
            let a = forms.sinr(&w, 1.0).unwrap();
            let b = db_to_linear(output_sinr(&v, &w, &scene, &cfg).unwrap());
            assert!((a / b - 1.0).abs() < 1e-9, "{a} {b}");
            let sv = forms.c_t.clone().singular_values();
            assert!(sv.iter().filter(|s| **s > 1e-9 * sv.max()).count() <= 1);
        }
        let clean = Scene { clutter: vec![], ..scene };
        let v = random_vec(&mut rng, cfg.snapshot_dim());
        assert_eq!(sinr_quadratic_forms(&v, &clean, &cfg).unwrap().c_c, DMatrix::zeros(3, 3));
    }

    #[test]
    fn grids_match_brute_force() {
        let cfg = small();
        let p = Processor::new(&cfg, &small_scene(), ArrayMode::Fda, 0.0).unwrap();
        let spec = GridSpec {
            azimuth_min_deg: 10.0,
            azimuth_max_deg: 170.0,
            azimuth_step_deg: 40.0,
            doppler_min_hz: -600.0,
            doppler_max_hz: 600.0,
            doppler_step_hz: 300.0,
        };
        let spectrum = p.interference_spectrum(&spec).unwrap();
        let pattern = p.adapted_pattern(&spec).unwrap();
        let v = p.mvdr().unwrap();
        for (i, a) in spectrum.azimuth_deg.iter().enumerate() {
            for (j, f) in spectrum.doppler_hz.iter().enumerate() {
                let q = p.steering_at(*a, *f).unwrap();
                let direct = 1.0 / p.factor().inverse_quadratic(&q).unwrap();
                assert!((spectrum.values[(i, j)] / direct - 1.0).abs() < 1e-9);
                let direct = v.dotc(&q).norm_sqr();
                assert!((pattern.values[(i, j)] - direct).abs() < 1e-9 * direct.max(1e-12));
            }
        }
    }

    #[test]
    fn empty_scene_spectrum_is_flat() {
        let cfg = small();
        let p = Processor::new(&cfg, &Scene::target_only(Target::default()), ArrayMode::Fda, 0.0).unwrap();
        let g = p.interference_spectrum(&GridSpec { azimuth_step_deg: 30.0, doppler_step_hz: 200.0, ..GridSpec::default() }).unwrap();
        assert!(g.values.iter().all(|x| (x * 48.0 - 1.0).abs() < 1e-9));
    }

    #[test]
    fn target_cell_is_distortionless() {
        let cfg = small();
        let p = Processor::new(&cfg, &small_scene(), ArrayMode::Fda, 0.0).unwrap();
        let g = p.adapted_pattern(&GridSpec::default()).unwrap();
        let (i, j) = (g.azimuth_index(45.0).unwrap(), g.doppler_index(400.0).unwrap());
        assert!((g.values[(i, j)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cuts() {
        let g = AdaptedPatternGrid {
            kind: GridKind::AdaptedPattern,
            mode: ArrayMode::Fda,
            range_m: 3000.0,
            azimuth_deg: vec![0.0, 1.0, 2.0],
            doppler_hz: vec![-10.0, 0.0, 10.0, 20.0],
            values: DMatrix::from_element(3, 4, 2.5),
        };
        let c = pattern_cut(&g, CutAxis::Azimuth, 1.2).unwrap();
        assert_eq!(c.at, 1.0);
        assert_eq!(c.values, vec![2.5; 4]);
        let c = pattern_cut(&g, CutAxis::Doppler, 14.0).unwrap();
        assert_eq!((c.at, c.values.len()), (10.0, 3));
        assert!(pattern_cut(&g, CutAxis::Doppler, 30.0).is_err());
        assert!(pattern_cut(&g, CutAxis::Azimuth, -0.5).is_err());
    }

    #[test]
    fn grid_spec_validation() {
        let g = GridSpec::default();
        assert_eq!(g.azimuths().unwrap().len(), 181);
        assert_eq!(g.dopplers().unwrap().len(), 161);
        let bad = GridSpec { doppler_step_hz: 0.0, ..GridSpec::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("grid.doppler_step_hz"));
        let bad = GridSpec { doppler_min_hz: 10.0, doppler_max_hz: -10.0, ..GridSpec::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("grid.doppler_max_hz"));
    }

    #[test]
    fn interference_free_loss_is_zero() {
        let cfg = small();
        let scene = Scene::target_only(Target::default());
        for conv in [LossConvention::Virtual, LossConvention::Matched] {
            let l = sinr_loss_curve(&scene, &cfg, &[-300.0, 0.0, 250.0], 90.0, ArrayMode::Fda, 0.0, conv).unwrap();
            assert!(l.iter().all(|x| x.abs() < 1e-9), "{l:?}");
        }
        assert!(sinr_loss_curve(&scene, &cfg, &[], 90.0, ArrayMode::Fda, 0.0, LossConvention::Virtual).is_err());
    }

    #[test]
    fn zero_offset_fda_equals_mimo() {
        let cfg = small();
        let zero = SystemConfig { freq_offset_hz: 0.0, ..cfg.clone() };
        let spec = GridSpec { azimuth_step_deg: 20.0, doppler_step_hz: 100.0, ..GridSpec::default() };
        let a = adapted_pattern(&small_scene(), &zero, &spec, ArrayMode::Fda, 0.0).unwrap();
        let b = adapted_pattern(&small_scene(), &cfg, &spec, ArrayMode::Mimo, 0.0).unwrap();
        assert!((&a.values - &b.values).norm() <= 1e-9 * a.values.norm());
    }

    #[test]
    fn loading_changes_the_factor() {
        let r = DMatrix::<C64>::identity(4, 4);
        let f = FactoredCovariance::new(&r, 1.0).unwrap();
        let q = DVector::from_element(4, C64::new(1.0, 0.0));
        assert!((f.inverse_quadratic(&q).unwrap() - 2.0).abs() < 1e-12);
        let mut bad = DMatrix::<C64>::identity(3, 3);
        bad[(2, 2)] = C64::new(-1.0, 0.0);
        assert!(matches!(FactoredCovariance::new(&bad, 0.0), Err(Error::Singular)));
    }

    #[test]
    fn jammer_steering_helper() {
        let cfg = small();
        let j = Jammer::default();
        assert_eq!(jammer_receive_steering(j.azimuth_deg, j.depression_deg, &cfg).unwrap().len(), 2);
    }
}
