//! Fast internal consistency checks run by the `selftest` subcommand.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{aligned_error, lowpass_matrix, lowpass_snapshot, simulate_snapshot, ChainSettings, GateAlignment, Scatterer};
use crate::error::Result;
use crate::model::{composite_steering, ArrayMode, SteeringModel};
use crate::phasecode::{design_phase_codes, doppler_centers};
use crate::scene::{covariance_jamming, db_to_linear, sample_jamming_snapshot, ClutterRing, Jammer, Scene};
use crate::stap::{output_sinr, sinr_quadratic_forms, Processor};
use crate::system::{derive_seed, SystemConfig, C64};
use crate::waveform::lfm_baseband;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn small() -> SystemConfig {
    SystemConfig {
        n_tx: 3,
        n_rx: 2,
        pulses: 8,
        ..SystemConfig::default()
    }
}

fn small_scene() -> Scene {
    Scene {
        clutter: vec![ClutterRing {
            patches: 19,
            ..ClutterRing::default()
        }],
        ..Scene::default()
    }
}

fn ambiguity(cfg: &SystemConfig) -> Result<Check> {
    let w = lfm_baseband(cfg.pulse_width_s, cfg.bandwidth_hz, cfg.sample_rate_hz)?;
    let g0 = w.ambiguity(0.0, 0.0).norm();
    let worst = (-10..=10)
        .flat_map(|i| (-4..=4).map(move |j| (i as f64 * 0.1e-6, j as f64 * 0.5e6)))
        .map(|(t, f)| w.ambiguity(t, f).norm())
        .fold(0.0, f64::max);
    Ok(check(
        "ambiguity",
        (g0 - 1.0).abs() < 1e-9 && worst <= 1.0 + 1e-9,
        format!("|G(0,0)| = {g0:.12}, max |G| = {worst:.12}"),
    ))
}

fn phase_code_gaps(cfg: &SystemConfig) -> Result<Check> {
    let code = design_phase_codes(cfg);
    let mut c = doppler_centers(&code, 0.0, cfg)?;
    c.sort_by(f64::total_cmp);
    let want = cfg.prf_hz / cfg.n_tx as f64;
    let worst = (0..c.len())
        .map(|i| {
            let next = if i + 1 < c.len() { c[i + 1] } else { c[0] + cfg.prf_hz };
            (next - c[i] - want).abs()
        })
        .fold(0.0, f64::max);
    Ok(check("phase-code gaps", worst < 1e-9, format!("max deviation from {want} Hz: {worst:.3e} Hz")))
}

fn lowpass(cfg: &SystemConfig) -> Check {
    let p = lowpass_matrix(cfg.pulses, cfg.prf_hz / cfg.n_tx as f64, cfg.prf_hz);
    let idem = (&p * &p - &p).norm();
    let herm = (&p - p.adjoint()).norm();
    check("low-pass projector", idem < 1e-12 && herm < 1e-12, format!("||P^2 - P|| = {idem:.2e}, ||P - P^H|| = {herm:.2e}"))
}

fn chain(cfg: &SystemConfig) -> Result<Check> {
    let cfg = SystemConfig { pulses: 16, ..cfg.clone() };
    let code = design_phase_codes(&cfg);
    let w = vec![C64::new(1.0, 0.0); cfg.n_tx];
    let t = Scatterer {
        range_m: 3000.0,
        azimuth: 45f64.to_radians(),
        depression: 45f64.to_radians(),
        doppler_hz: 400.0,
        amplitude: C64::new(1.0, 0.0),
    };
    let settings = ChainSettings {
        alignment: GateAlignment::Exact,
        ..ChainSettings::default()
    };
    let out = simulate_snapshot(&cfg, &code, &w, &t, settings)?;
    let model = composite_steering(t.range_m, 60f64.to_radians(), t.doppler_hz, &w, &cfg)?;
    let err = aligned_error(out.snapshot.as_vector(), &lowpass_snapshot(&model, &cfg)?).1;
    Ok(check("chain vs filtered model", err < 1e-2, format!("relative error {:.4} %", 100.0 * err)))
}

fn mvdr(cfg: &SystemConfig, scene: &Scene) -> Result<Check> {
    let p = Processor::new(cfg, scene, ArrayMode::Fda, 0.0)?;
    let v = p.mvdr()?;
    let gain = v.dotc(&p.target_steering()?);
    let dev = (gain - C64::new(1.0, 0.0)).norm();
    Ok(check("mvdr distortionless", dev < 1e-10, format!("|v^H q - 1| = {dev:.2e}")))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
    DVector::from_iterator(n, (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
}

fn quadratic_forms(cfg: &SystemConfig, scene: &Scene, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "selftest.forms"));
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let v = random_vec(&mut rng, cfg.snapshot_dim());
        let w: Vec<C64> = random_vec(&mut rng, cfg.n_tx).iter().copied().collect();
        let a = sinr_quadratic_forms(&v, scene, cfg)?.sinr(&w, db_to_linear(scene.target.snr_db))?;
        let b = db_to_linear(output_sinr(&v, &w, scene, cfg)?);
        worst = worst.max((a / b - 1.0).abs());
    }
    Ok(check("sinr quadratic forms", worst < 1e-9, format!("max relative deviation {worst:.2e}")))
}

fn jammer(seed: u64) -> Result<Check> {
    let cfg = SystemConfig {
        n_tx: 2,
        n_rx: 3,
        pulses: 4,
        ..SystemConfig::default()
    };
    let j = Jammer::default();
    let model = SteeringModel::new(&cfg, ArrayMode::Fda, 0.0);
    let want = covariance_jamming(std::slice::from_ref(&j), &model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "selftest.jammer"));
    let draws = 4000;
    let mut acc = DMatrix::<C64>::zeros(cfg.snapshot_dim(), cfg.snapshot_dim());
    for _ in 0..draws {
        let x = sample_jamming_snapshot(&j, &cfg, &mut rng)?;
        acc += &x * x.adjoint();
    }
    acc /= C64::new(draws as f64, 0.0);
    let err = (&acc - &want).norm() / want.norm();
    Ok(check("jammer covariance", err < 0.1, format!("{draws} draws, Frobenius error {:.2} %", 100.0 * err)))
}

/// Runs every check on reduced-size problems.
pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    let cfg = small();
    let scene = small_scene();
    Ok(vec![
        ambiguity(&cfg)?,
        phase_code_gaps(&SystemConfig::default())?,
        lowpass(&cfg),
        chain(&cfg)?,
        mvdr(&cfg, &scene)?,
        quadratic_forms(&cfg, &scene, seed)?,
        jammer(seed)?,
    ])
}
