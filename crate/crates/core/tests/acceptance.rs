//! Acceptance criteria A1 to A10. Each test prints one PASS/FAIL line.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdastap::chain::{cross_channel_leakage, lowpass_matrix, verify_chain, ChainSettings, Scatterer};
use fdastap::geometry::{conic_angle, delays, doppler_from_velocity};
use fdastap::model::{ArrayMode, SteeringModel};
use fdastap::phasecode::{design_phase_codes, doppler_centers};
use fdastap::scene::{clutter_patches, covariance_jamming, db_to_linear, sample_jamming_snapshot, ClutterRing, Jammer, Scene, Target};
use fdastap::stap::{output_sinr, sinr_loss_curve, sinr_quadratic_forms, AdaptedPatternGrid, GridSpec, LossConvention, Processor};
use fdastap::waveform::lfm_baseband;
use fdastap::{SystemConfig, C64, SPEED_OF_LIGHT};

fn report(id: &str, pass: bool, detail: String) {
    println!("{id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id}: {detail}");
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn desk() -> SystemConfig {
    SystemConfig {
        pulses: 32,
        ..SystemConfig::default()
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
    let v = DVector::from_iterator(n, (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

#[test]
fn a1_chain_matches_model() {
    let start = Instant::now();
    let cfg = SystemConfig {
        n_tx: 3,
        n_rx: 2,
        pulses: 16,
        ..SystemConfig::default()
    };
    let target = Scatterer {
        range_m: 3000.0,
        azimuth: deg(45.0),
        depression: deg(45.0),
        doppler_hz: 400.0,
        amplitude: C64::new(1.0, 0.0),
    };
    let w = vec![C64::new(1.0, 0.0); cfg.n_tx];
    let v = verify_chain(&cfg, &design_phase_codes(&cfg), &w, &target, ChainSettings::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    report(
        "A1",
        v.relative_error <= 0.05 && secs <= 60.0,
        format!("relative L2 error {:.3} % (limit 5 %), runtime {secs:.2} s", 100.0 * v.relative_error),
    );
}

#[test]
fn a2_phase_code_gaps() {
    let cfg = SystemConfig::default();
    let mut c = doppler_centers(&design_phase_codes(&cfg), 0.0, &cfg).unwrap();
    c.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = (0..c.len())
        .map(|i| if i + 1 < c.len() { c[i + 1] - c[i] } else { c[0] + cfg.prf_hz - c[i] })
        .collect();
    let worst = gaps.iter().map(|g| (g - 1400.0).abs()).fold(0.0, f64::max);
    report("A2", worst <= 1e-9, format!("gaps {gaps:?} Hz, max deviation from 1400 Hz {worst:.2e}"));
}

#[test]
fn a3_aliased_suppression() {
    let cfg = SystemConfig::default();
    let target = Scatterer {
        range_m: 3000.0,
        azimuth: deg(45.0),
        depression: deg(45.0),
        doppler_hz: 0.0,
        amplitude: C64::new(1.0, 0.0),
    };
    let r = cross_channel_leakage(&cfg, &design_phase_codes(&cfg), &target, ChainSettings::default()).unwrap();
    report(
        "A3",
        r.post_lowpass_db <= -40.0,
        format!("cross-channel energy {:.1} dB after low-pass ({:.1} dB before), limit -40 dB", r.post_lowpass_db, r.pre_lowpass_db),
    );
}

fn desk_pattern(mode: ArrayMode) -> (Processor, AdaptedPatternGrid) {
    let p = Processor::new(&desk(), &Scene::default(), mode, 0.0).unwrap();
    let g = p.adapted_pattern(&GridSpec::default()).unwrap();
    (p, g)
}

fn ridge_points() -> Vec<(f64, f64)> {
    let f_max = doppler_from_velocity(100.0, 0.25).unwrap() * deg(45.0).cos();
    (0..20)
        .map(|k| {
            let theta = 5.0 + 9.0 * k as f64;
            (theta, f_max * deg(theta).cos())
        })
        .collect()
}

#[test]
fn a4_adapted_pattern_peak_and_nulls() {
    let (p, g) = desk_pattern(ArrayMode::Fda);
    let (pi, pj, peak) = g.peak();
    let (ti, tj) = (g.azimuth_index(45.0).unwrap(), g.doppler_index(400.0).unwrap());
    let target = g.values[(ti, tj)];
    let argmax_ok = (pi, pj) == (ti, tj);

    let ridge = ridge_points();
    let ridge_mean = ridge
        .iter()
        .map(|(a, f)| g.values[(g.azimuth_index(*a).unwrap(), g.doppler_index(*f).unwrap())])
        .sum::<f64>()
        / ridge.len() as f64;
    let ridge_db = db(ridge_mean / target);

    let ji = g.azimuth_index(120.0).unwrap();
    let jam_max = g.values.row(ji).iter().copied().fold(0.0, f64::max);
    let jam_db = db(jam_max / peak);

    // response toward the clutter sources themselves, at the ring range
    let v = p.mvdr().unwrap();
    let ring = &Scene::default().clutter[0];
    let sources = ridge
        .iter()
        .map(|(a, f)| {
            let q = p.model().steering(ring.range_m, conic_angle(deg(*a), deg(ring.depression_deg)).unwrap(), *f).unwrap();
            v.dotc(&q).norm_sqr()
        })
        .sum::<f64>()
        / ridge.len() as f64;

    report(
        "A4",
        argmax_ok && ridge_db <= -40.0 && jam_db <= -40.0,
        format!(
            "argmax at ({} deg, {} Hz) {:+.1} dB vs target cell (want 45 deg, 400 Hz); ridge mean {ridge_db:.1} dB (limit -40); \
             jammer line max {jam_db:.1} dB (limit -40); clutter-source response at {} m {:.1} dB",
            g.azimuth_deg[pi],
            g.doppler_hz[pj],
            db(peak / target),
            ring.range_m,
            db(sources / target)
        ),
    );
}

/// Strict local maxima (8-neighbour) within `da` cells of azimuth and `dd`
/// cells of Doppler around `(i0, j0)`.
fn local_maxima(g: &AdaptedPatternGrid, i0: usize, j0: usize, da: usize, dd: usize) -> Vec<(usize, usize, f64)> {
    let (na, nd) = (g.values.nrows(), g.values.ncols());
    let mut out = Vec::new();
    for i in i0.saturating_sub(da)..=(i0 + da).min(na - 1) {
        for j in j0.saturating_sub(dd)..=(j0 + dd).min(nd - 1) {
            let x = g.values[(i, j)];
            let is_max = (i.saturating_sub(1)..=(i + 1).min(na - 1))
                .all(|a| (j.saturating_sub(1)..=(j + 1).min(nd - 1)).all(|d| (a, d) == (i, j) || g.values[(a, d)] < x));
            if is_max {
                out.push((i, j, x));
            }
        }
    }
    out
}

#[test]
fn a5_mode_contrast() {
    let (_, fda) = desk_pattern(ArrayMode::Fda);
    let (ti, tj) = (fda.azimuth_index(45.0).unwrap(), fda.doppler_index(400.0).unwrap());
    let reference = fda.values[(ti, tj)];
    let mut ok = true;
    let mut detail = Vec::new();
    for mode in [ArrayMode::Mimo, ArrayMode::PhasedArray] {
        let (_, g) = desk_pattern(mode);
        let peaks: Vec<f64> = local_maxima(&g, ti, tj, 2, 2).iter().map(|p| db(p.2 / reference)).collect();
        let bad = peaks.iter().any(|x| *x > -10.0);
        ok &= !bad;
        detail.push(format!("{mode}: {} local maxima near target {peaks:.1?}", peaks.len()));
    }
    let scene = Scene::default();
    let loss = |mode| sinr_loss_curve(&scene, &desk(), &[0.0], 90.0, mode, 0.0, LossConvention::Virtual).unwrap()[0];
    let (f, m, p) = (loss(ArrayMode::Fda), loss(ArrayMode::Mimo), loss(ArrayMode::PhasedArray));
    ok &= f - m >= 10.0 && f - p >= 10.0;
    detail.push(format!("SINR loss at 90 deg, 0 Hz: FDA {f:.1} dB, MIMO {m:.1} dB, PA {p:.1} dB"));
    report("A5", ok, detail.join("; "));
}

#[test]
fn a6_clutter_doppler_span() {
    let cfg = SystemConfig::default();
    let patches = clutter_patches(&ClutterRing::default(), Default::default(), &cfg).unwrap();
    let lo = patches.iter().map(|p| p.doppler_hz).fold(f64::INFINITY, f64::min);
    let hi = patches.iter().map(|p| p.doppler_hz).fold(f64::NEG_INFINITY, f64::max);
    let bound = 800.0 * deg(45.0).cos();
    let ok = (hi - bound).abs() <= 1e-6 && (lo + bound).abs() <= 1e-6 && (hi - 565.0).abs() <= 1.0 && (lo + 565.0).abs() <= 1.0;
    report("A6", ok, format!("span ({lo:.3}, {hi:.3}) Hz, analytic bound {bound:.3} Hz, stated 565 Hz"));
}

fn random_small_scene(rng: &mut ChaCha8Rng) -> Scene {
    Scene {
        target: Target {
            range_m: rng.gen_range(2000.0..5000.0),
            azimuth_deg: rng.gen_range(0.0..180.0),
            depression_deg: rng.gen_range(10.0..60.0),
            velocity_mps: rng.gen_range(-80.0..80.0),
            snr_db: rng.gen_range(-10.0..10.0),
        },
        clutter: vec![ClutterRing {
            range_m: rng.gen_range(2000.0..5000.0),
            patches: 31,
            depression_deg: rng.gen_range(10.0..60.0),
            cnr_db: rng.gen_range(10.0..30.0),
            ..ClutterRing::default()
        }],
        jammers: vec![Jammer {
            azimuth_deg: rng.gen_range(0.0..180.0),
            depression_deg: rng.gen_range(0.0..60.0),
            jnr_db: rng.gen_range(0.0..30.0),
        }],
        ..Scene::default()
    }
}

#[test]
fn a7_sinr_quadratic_identity() {
    let cfg = SystemConfig {
        n_tx: 3,
        n_rx: 2,
        pulses: 8,
        ..SystemConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scene = random_small_scene(&mut rng);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let v = random_unit(&mut rng, cfg.snapshot_dim());
        let w: Vec<C64> = random_unit(&mut rng, cfg.n_tx).iter().copied().collect();
        let forms = sinr_quadratic_forms(&v, &scene, &cfg).unwrap();
        let a = forms.sinr(&w, db_to_linear(scene.target.snr_db)).unwrap();
        let b = db_to_linear(output_sinr(&v, &w, &scene, &cfg).unwrap());
        worst = worst.max((a / b - 1.0).abs());
    }
    report("A7", worst <= 1e-9, format!("max relative deviation {worst:.2e} over 20 random (v, w)"));
}

#[test]
fn a8_jammer_covariance() {
    let cfg = SystemConfig {
        n_tx: 2,
        n_rx: 3,
        pulses: 4,
        ..SystemConfig::default()
    };
    let jammer = Jammer::default();
    let want = covariance_jamming(std::slice::from_ref(&jammer), &SteeringModel::new(&cfg, ArrayMode::Fda, 0.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(fdastap::system::derive_seed(0, "acceptance.a8"));
    let draws = 10_000;
    let mut acc = DMatrix::<C64>::zeros(cfg.snapshot_dim(), cfg.snapshot_dim());
    for _ in 0..draws {
        let x = sample_jamming_snapshot(&jammer, &cfg, &mut rng).unwrap();
        acc += &x * x.adjoint();
    }
    acc /= C64::new(draws as f64, 0.0);
    let err = (&acc - &want).norm() / want.norm();
    report("A8", err <= 0.05, format!("{draws} draws, relative Frobenius error {:.2} % (limit 5 %)", 100.0 * err));
}

#[test]
fn a9_mvdr_contracts() {
    let small = SystemConfig {
        n_tx: 3,
        n_rx: 2,
        pulses: 8,
        ..SystemConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let scenes = vec![
        ("table scene L=32", desk(), Scene::default()),
        ("small clutter+jammer", small.clone(), random_small_scene(&mut rng)),
        ("small noise only", small.clone(), Scene::target_only(Target::default())),
        (
            "small jammer only",
            small,
            Scene {
                clutter: vec![],
                ..Scene::default()
            },
        ),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, cfg, scene) in scenes {
        for mode in [ArrayMode::Fda, ArrayMode::Mimo, ArrayMode::PhasedArray] {
            let p = Processor::new(&cfg, &scene, mode, 0.0).unwrap();
            let v = p.mvdr().unwrap();
            let dev = (v.dotc(&p.target_steering().unwrap()) - C64::new(1.0, 0.0)).norm();
            let best = p.sinr(&v).unwrap();
            let beaten = (0..100).filter(|_| p.sinr(&random_unit(&mut rng, v.len())).unwrap() > best).count();
            ok &= dev <= 1e-10 && beaten == 0;
            detail.push(format!("{name}/{mode}: |v^H q - 1| {dev:.1e}, beaten {beaten}/100"));
        }
    }
    report("A9", ok, detail.join("; "));
}

#[test]
fn a10_invariants() {
    let cfg = SystemConfig::default();
    let w = lfm_baseband(cfg.pulse_width_s, cfg.bandwidth_hz, cfg.sample_rate_hz).unwrap();
    let g0 = w.ambiguity(0.0, 0.0).norm();
    let g_max = (-40..=40)
        .flat_map(|i| (-20..=20).map(move |j| (i as f64 * 25e-9, j as f64 * 0.25e6)))
        .map(|(t, f)| w.ambiguity(t, f).norm())
        .fold(0.0, f64::max);

    let mut lp_err: f64 = 0.0;
    for (l, n_tx) in [(16, 3), (32, 5), (180, 5), (7, 2)] {
        let p = lowpass_matrix(l, cfg.prf_hz / n_tx as f64, cfg.prf_hz);
        lp_err = lp_err.max((&p * &p - &p).norm()).max((&p - p.adjoint()).norm());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut geo_err: f64 = 0.0;
    for _ in 0..1000 {
        let (az, dep, r) = (rng.gen_range(0.0..180.0), rng.gen_range(0.0..90.0), rng.gen_range(100.0..1e5));
        let psi = conic_angle(deg(az), deg(dep)).unwrap();
        geo_err = geo_err.max((psi.cos() - deg(az).cos() * deg(dep).cos()).abs());
        let d = delays(r, psi, &cfg).unwrap();
        geo_err = geo_err
            .max((d.round_trip * SPEED_OF_LIGHT / (2.0 * r) - 1.0).abs())
            .max((d.tx_step * SPEED_OF_LIGHT + cfg.d_tx_m * psi.cos()).abs())
            .max((d.rx_step * SPEED_OF_LIGHT + cfg.d_rx_m * psi.cos()).abs());
    }

    let ok = (g0 - 1.0).abs() <= 1e-9 && g_max <= 1.0 + 1e-9 && lp_err <= 1e-12 && geo_err <= 1e-12;
    report(
        "A10",
        ok,
        format!("|G(0,0)| - 1 = {:.1e}, max |G| = {g_max:.12}, projector error {lp_err:.1e}, geometry error {geo_err:.1e}", g0 - 1.0),
    );
}
