//! Time-domain simulation of the transmit and receive chain.
//!
//! Signals are complex envelopes relative to the reference carrier `f_c`;
//! element `m` sits at `+m df` in that representation. Every phase that
//! depends on `f_c` is computed analytically, so nothing is ever sampled at
//! RF. Fast-time samples of pulse `l` are taken at absolute time
//! `t_l + tau_k`, which is what produces the slow-time carrier residues the
//! phase code has to separate.
//!
//! The receiver mirrors the analytic snapshot model: multi-carrier mixing,
//! matched filtering, range gating, Doppler demodulation and an ideal
//! slow-time low-pass, stacked in the canonical snapshot order.

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{conic_angle, round_trip_delay, rx_step_delay, tx_step_delay};
use crate::model::composite_steering;
use crate::phasecode::PhaseCode;
use crate::system::{cis_cycles, SystemConfig, C64};
use crate::waveform::{lfm_baseband, BasebandWaveform, MatchedFilter};

/// How the fast-time sampling grid relates to the range gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GateAlignment {
    /// The ADC grid is fixed at multiples of `1 / fs` after pulse start and
    /// the gate is the sample nearest to the round-trip delay.
    #[default]
    NearestBin,
    /// The grid is shifted so that one sample falls exactly on the gate.
    Exact,
}

/// A block of fast-time samples `tau_k = start + k / fs`, `k < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastTimeWindow {
    pub start_s: f64,
    pub len: usize,
    pub sample_rate: f64,
}

impl FastTimeWindow {
    /// Window holding `margin` samples on either side of a pulse-length echo
    /// starting at `gate_s`.
    pub fn around(gate_s: f64, pulse_len: usize, margin: usize, alignment: GateAlignment, sample_rate: f64) -> Self {
        let start_s = match alignment {
            GateAlignment::NearestBin => ((gate_s * sample_rate).round() - margin as f64) / sample_rate,
            GateAlignment::Exact => gate_s - margin as f64 / sample_rate,
        };
        FastTimeWindow {
            start_s,
            len: pulse_len + 2 * margin,
            sample_rate,
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start_s + k as f64 / self.sample_rate
    }

    /// Index of the sample nearest to `delay_s`.
    pub fn gate_index(&self, delay_s: f64) -> Result<usize> {
        let k = ((delay_s - self.start_s) * self.sample_rate).round();
        if k < 0.0 || k >= self.len as f64 {
            return Err(Error::OutOfRange(format!(
                "range gate at {delay_s} s lies outside the sampled window [{}, {}) s",
                self.start_s,
                self.time(self.len)
            )));
        }
        Ok(k as usize)
    }
}

/// Transmitted signals of every element over one CPI.
///
/// Element `m`, pulse `l` is `w_m u(tau) exp(j 2 pi phi_m t_l)` on carrier
/// `f_c + m df`; the carrier itself is kept symbolically.
#[derive(Debug, Clone)]
pub struct PulseTrain {
    cfg: SystemConfig,
    waveform: BasebandWaveform,
    weights: Vec<C64>,
    phi: Vec<f64>,
}

impl PulseTrain {
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn waveform(&self) -> &BasebandWaveform {
        &self.waveform
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn phase_code(&self) -> &[f64] {
        &self.phi
    }

    pub fn elements(&self) -> usize {
        self.weights.len()
    }

    pub fn pulses(&self) -> usize {
        self.cfg.pulses
    }

    pub fn carrier(&self, m: usize) -> f64 {
        self.cfg.element_carrier(m)
    }

    /// Complex weight of element `m` on pulse `l`: `w_m exp(j 2 pi phi_m t_l)`.
    pub fn slow_time_factor(&self, m: usize, l: usize) -> C64 {
        self.weights[m] * cis_cycles(self.phi[m] * self.cfg.slow_time(l))
    }

    /// Pulse samples of element `m` on pulse `l`, carrier excluded.
    pub fn element_pulse(&self, m: usize, l: usize) -> Vec<C64> {
        let s = self.slow_time_factor(m, l);
        self.waveform.samples().iter().map(|u| u * s).collect()
    }
}

/// Builds the transmit pulse train for weights `w` and phase code `code`.
pub fn synthesize_transmit(cfg: &SystemConfig, code: &PhaseCode, weights: &[C64]) -> Result<PulseTrain> {
    if code.len() != cfg.n_tx {
        return Err(Error::DimensionMismatch {
            what: "phase code",
            expected: cfg.n_tx,
            got: code.len(),
        });
    }
    if weights.len() != cfg.n_tx {
        return Err(Error::DimensionMismatch {
            what: "transmit weights",
            expected: cfg.n_tx,
            got: weights.len(),
        });
    }
    if cfg.pulse_width_s > cfg.pri() {
        return Err(Error::domain("pulse width exceeds the pulse repetition interval"));
    }
    let waveform = lfm_baseband(cfg.pulse_width_s, cfg.bandwidth_hz, cfg.sample_rate_hz)?;
    Ok(PulseTrain {
        cfg: cfg.clone(),
        waveform,
        weights: weights.to_vec(),
        phi: code.phi.clone(),
    })
}

/// A point scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub range_m: f64,
    pub azimuth: f64,
    pub depression: f64,
    /// Doppler at the reference carrier, Hz.
    pub doppler_hz: f64,
    pub amplitude: C64,
}

impl Scatterer {
    /// Scatterer with radial velocity `v` (m/s) at wavelength `lambda`.
    pub fn from_velocity(range_m: f64, azimuth: f64, depression: f64, velocity_mps: f64, wavelength_m: f64, amplitude: C64) -> Result<Self> {
        if velocity_mps.abs() >= crate::system::SPEED_OF_LIGHT {
            return Err(Error::domain("scatterer speed must be below the speed of light"));
        }
        Ok(Scatterer {
            range_m,
            azimuth,
            depression,
            doppler_hz: crate::geometry::doppler_from_velocity(velocity_mps, wavelength_m)?,
            amplitude,
        })
    }
}

/// Fast-time samples of one receive element or receiver channel: one row per
/// pulse, all on the same window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveStream {
    pub window: FastTimeWindow,
    pub pulses: Vec<Vec<C64>>,
}

impl ReceiveStream {
    pub fn zeros(window: FastTimeWindow, pulses: usize) -> Self {
        ReceiveStream {
            window,
            pulses: vec![vec![C64::new(0.0, 0.0); window.len]; pulses],
        }
    }

    /// Samples of every pulse at fast-time index `k`.
    pub fn gate(&self, k: usize) -> Vec<C64> {
        self.pulses.iter().map(|p| p[k]).collect()
    }

    /// `self + scale * other`, for streams on the same window.
    pub fn add_scaled(&mut self, other: &ReceiveStream, scale: C64) -> Result<()> {
        if self.window != other.window || self.pulses.len() != other.pulses.len() {
            return Err(Error::Precondition("streams must share window and pulse count".into()));
        }
        for (a, b) in self.pulses.iter_mut().zip(&other.pulses) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += scale * y);
        }
        Ok(())
    }
}

/// Echo of one scatterer at every receive element.
///
/// Element `m` contributes `delta w_m u(tau - xi) a_{m,n}(psi)` with the
/// exact phase `f_m (m xi_T + n xi_R)`, the carrier delay `-f_m xi`, the
/// slow-time Doppler `(f_m / f_c) f_d t_l` and its phase code. The envelope
/// is delayed by the round trip only; intrapulse Doppler is not modelled.
pub fn simulate_point_echo(tx: &PulseTrain, target: &Scatterer, window: FastTimeWindow) -> Result<Vec<ReceiveStream>> {
    let cfg = &tx.cfg;
    if !(target.range_m > 0.0 && target.range_m.is_finite()) {
        return Err(Error::domain(format!("range must be positive, got {} m", target.range_m)));
    }
    if (window.sample_rate - cfg.sample_rate_hz).abs() > 1e-9 * cfg.sample_rate_hz {
        return Err(Error::Precondition("window sample rate differs from the system sample rate".into()));
    }
    let xi = round_trip_delay(target.range_m);
    if xi + tx.waveform.duration() > cfg.pri() {
        return Err(Error::Unsupported(format!(
            "echo from {} m extends beyond the pulse repetition interval",
            target.range_m
        )));
    }
    let conic = conic_angle(target.azimuth, target.depression)?;
    let (xi_t, xi_r) = (tx_step_delay(conic, cfg), rx_step_delay(conic, cfg));
    let n_tx = tx.elements();

    let envelope: Vec<C64> = (0..window.len).map(|k| tx.waveform.eval(window.time(k) - xi)).collect();
    let offsets: Vec<Vec<C64>> = (0..n_tx)
        .map(|m| {
            let df = m as f64 * cfg.freq_offset_hz;
            (0..window.len).map(|k| cis_cycles(df * window.time(k))).collect()
        })
        .collect();

    let mut out = Vec::with_capacity(cfg.n_rx);
    for n in 0..cfg.n_rx {
        let mut stream = ReceiveStream::zeros(window, cfg.pulses);
        for (l, row) in stream.pulses.iter_mut().enumerate() {
            let t_l = cfg.slow_time(l);
            for m in 0..n_tx {
                let f_m = tx.carrier(m);
                let m_df = m as f64 * cfg.freq_offset_hz;
                let cycles = f_m * (m as f64 * xi_t + n as f64 * xi_r) - (cfg.carrier_hz * xi).fract() - m_df * xi
                    + (f_m / cfg.carrier_hz) * target.doppler_hz * t_l
                    + m_df * t_l;
                let coef = target.amplitude * tx.slow_time_factor(m, l) * cis_cycles(cycles);
                for ((y, e), o) in row.iter_mut().zip(&envelope).zip(&offsets[m]) {
                    *y += coef * e * o;
                }
            }
        }
        out.push(stream);
    }
    Ok(out)
}

/// Mixes one receive stream down with every transmit carrier: channel `m'`
/// is the input times `exp(-j 2 pi m' df t)` at absolute time `t = t_l + tau`.
pub fn mix_channels(rx: &ReceiveStream, cfg: &SystemConfig) -> Vec<ReceiveStream> {
    let window = rx.window;
    (0..cfg.n_tx)
        .map(|mp| {
            let df = mp as f64 * cfg.freq_offset_hz;
            let pulses = rx
                .pulses
                .iter()
                .enumerate()
                .map(|(l, row)| {
                    let t_l = cfg.slow_time(l);
                    let slow = cis_cycles(-df * t_l);
                    row.iter()
                        .enumerate()
                        .map(|(k, x)| x * slow * cis_cycles(-df * window.time(k)))
                        .collect()
                })
                .collect();
            ReceiveStream { window, pulses }
        })
        .collect()
}

/// Matched-filters every pulse of a channel stream. Sample `k` of the output
/// is the filter response for an echo starting at `tau_k`.
pub fn pulse_compress(chan: &ReceiveStream, pulse: &BasebandWaveform) -> Result<ReceiveStream> {
    let filter = MatchedFilter::new(pulse, chan.window.len)?;
    pulse_compress_with(chan, &filter)
}

fn pulse_compress_with(chan: &ReceiveStream, filter: &MatchedFilter) -> Result<ReceiveStream> {
    let pulses = chan.pulses.iter().map(|p| filter.apply(p)).collect::<Result<Vec<_>>>()?;
    Ok(ReceiveStream {
        window: chan.window,
        pulses,
    })
}

/// Removes the phase code of channel `m'`: pulse `l` is multiplied by
/// `exp(-j 2 pi phi_{m'} t_l)`.
pub fn doppler_demodulate(gated: &[C64], phi: f64, prf_hz: f64) -> Vec<C64> {
    gated
        .iter()
        .enumerate()
        .map(|(l, x)| x * cis_cycles(-phi * l as f64 / prf_hz))
        .collect()
}

/// Centred frequencies of the `pulses` slow-time DFT bins.
fn bin_frequencies(pulses: usize, prf_hz: f64) -> impl Iterator<Item = f64> {
    (0..pulses).map(move |k| {
        let kc = if 2 * k <= pulses { k as f64 } else { k as f64 - pulses as f64 };
        kc * prf_hz / pulses as f64
    })
}

/// Ideal slow-time low-pass: keeps the DFT bins whose centred frequency lies
/// strictly inside `(-cutoff / 2, cutoff / 2)`.
///
/// A cutoff at or above the PRF passes every bin.
pub fn slow_time_lowpass(x: &[C64], cutoff_hz: f64, prf_hz: f64) -> Vec<C64> {
    let len = x.len();
    if len == 0 || cutoff_hz >= prf_hz {
        return x.to_vec();
    }
    let mut planner = FftPlanner::new();
    let mut buf = x.to_vec();
    planner.plan_fft_forward(len).process(&mut buf);
    let half = 0.5 * cutoff_hz - 1e-9 * prf_hz;
    for (b, f) in buf.iter_mut().zip(bin_frequencies(len, prf_hz)) {
        if f.abs() >= half {
            *b = C64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    buf.iter_mut().for_each(|b| *b *= scale);
    buf
}

/// The low-pass as an `L x L` matrix.
pub fn lowpass_matrix(pulses: usize, cutoff_hz: f64, prf_hz: f64) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(pulses, pulses);
    for j in 0..pulses {
        let mut e = vec![C64::new(0.0, 0.0); pulses];
        e[j] = C64::new(1.0, 0.0);
        for (i, v) in slow_time_lowpass(&e, cutoff_hz, prf_hz).into_iter().enumerate() {
            p[(i, j)] = v;
        }
    }
    p
}

/// Applies the slow-time low-pass to every (receive element, channel) series
/// of a snapshot-ordered vector.
pub fn lowpass_snapshot(v: &DVector<C64>, cfg: &SystemConfig) -> Result<DVector<C64>> {
    let (nt, nr, pulses) = (cfg.n_tx, cfg.n_rx, cfg.pulses);
    if v.len() != cfg.snapshot_dim() {
        return Err(Error::DimensionMismatch {
            what: "snapshot",
            expected: cfg.snapshot_dim(),
            got: v.len(),
        });
    }
    let cutoff = cfg.prf_hz / nt as f64;
    let mut out = DVector::zeros(v.len());
    for n in 0..nr {
        for m in 0..nt {
            let series: Vec<C64> = (0..pulses).map(|l| v[(l * nr + n) * nt + m]).collect();
            for (l, y) in slow_time_lowpass(&series, cutoff, cfg.prf_hz).into_iter().enumerate() {
                out[(l * nr + n) * nt + m] = y;
            }
        }
    }
    Ok(out)
}

/// Range-space-time snapshot of length `N_T N_R L`, entry `(l, n, m)` at
/// `(l N_R + n) N_T + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    data: DVector<C64>,
    n_tx: usize,
    n_rx: usize,
    pulses: usize,
}

impl Snapshot {
    pub fn zeros(n_tx: usize, n_rx: usize, pulses: usize) -> Self {
        Snapshot {
            data: DVector::zeros(n_tx * n_rx * pulses),
            n_tx,
            n_rx,
            pulses,
        }
    }

    pub fn index(&self, l: usize, n: usize, m: usize) -> usize {
        (l * self.n_rx + n) * self.n_tx + m
    }

    pub fn get(&self, l: usize, n: usize, m: usize) -> C64 {
        self.data[self.index(l, n, m)]
    }

    pub fn set(&mut self, l: usize, n: usize, m: usize, v: C64) {
        let i = self.index(l, n, m);
        self.data[i] = v;
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.data
    }
}

/// Gated slow-time series of every (receive element, channel) pair, before
/// and after the low-pass.
#[derive(Debug, Clone)]
pub struct ReceiverOutput {
    /// `demodulated[n][m']`, length `L` each.
    pub demodulated: Vec<Vec<Vec<C64>>>,
    pub snapshot: Snapshot,
}

/// Runs mixing, matched filtering, gating at `gate_s`, demodulation and the
/// slow-time low-pass on the receive streams and stacks the snapshot.
pub fn receive(
    streams: &[ReceiveStream],
    gate_s: f64,
    pulse: &BasebandWaveform,
    code: &PhaseCode,
    cfg: &SystemConfig,
) -> Result<ReceiverOutput> {
    if streams.len() != cfg.n_rx {
        return Err(Error::DimensionMismatch {
            what: "receive streams",
            expected: cfg.n_rx,
            got: streams.len(),
        });
    }
    if code.len() != cfg.n_tx {
        return Err(Error::DimensionMismatch {
            what: "phase code",
            expected: cfg.n_tx,
            got: code.len(),
        });
    }
    let window = streams.first().ok_or(Error::Empty("receive streams"))?.window;
    let gate = window.gate_index(gate_s)?;
    let filter = MatchedFilter::new(pulse, window.len)?;
    let cutoff = cfg.prf_hz / cfg.n_tx as f64;
    let mut snapshot = Snapshot::zeros(cfg.n_tx, cfg.n_rx, cfg.pulses);
    let mut demodulated = Vec::with_capacity(cfg.n_rx);
    for (n, stream) in streams.iter().enumerate() {
        if stream.window != window || stream.pulses.len() != cfg.pulses {
            return Err(Error::Precondition("receive streams must share one window and pulse count".into()));
        }
        let mut per_channel = Vec::with_capacity(cfg.n_tx);
        for (mp, chan) in mix_channels(stream, cfg).iter().enumerate() {
            let compressed = pulse_compress_with(chan, &filter)?;
            let demod = doppler_demodulate(&compressed.gate(gate), code.phi[mp], cfg.prf_hz);
            for (l, v) in slow_time_lowpass(&demod, cutoff, cfg.prf_hz).into_iter().enumerate() {
                snapshot.set(l, n, mp, v);
            }
            per_channel.push(demod);
        }
        demodulated.push(per_channel);
    }
    Ok(ReceiverOutput { demodulated, snapshot })
}

/// Fast-time settings of a chain run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSettings {
    pub alignment: GateAlignment,
    /// Samples kept on either side of the echo.
    pub margin_samples: usize,
}

impl Default for ChainSettings {
    fn default() -> Self {
        ChainSettings {
            alignment: GateAlignment::NearestBin,
            margin_samples: 16,
        }
    }
}

/// Simulates one scatterer through the whole chain, gating at its own range.
pub fn simulate_snapshot(
    cfg: &SystemConfig,
    code: &PhaseCode,
    weights: &[C64],
    target: &Scatterer,
    settings: ChainSettings,
) -> Result<ReceiverOutput> {
    let tx = synthesize_transmit(cfg, code, weights)?;
    let gate = round_trip_delay(target.range_m);
    let window = FastTimeWindow::around(gate, tx.waveform.len(), settings.margin_samples, settings.alignment, cfg.sample_rate_hz);
    let streams = simulate_point_echo(&tx, target, window)?;
    receive(&streams, gate, &tx.waveform, code, cfg)
}

/// Chain snapshot compared with the analytic composite steering vector.
#[derive(Debug, Clone)]
pub struct ChainVerification {
    /// `||s - alpha q|| / ||s||` after least-squares scalar alignment.
    pub relative_error: f64,
    pub alpha: C64,
    pub chain: Snapshot,
    pub model: DVector<C64>,
}

/// Least-squares scalar `alpha` minimising `||s - alpha m||` and the
/// resulting relative residual.
pub fn aligned_error(s: &DVector<C64>, m: &DVector<C64>) -> (C64, f64) {
    let mm = m.dotc(m);
    let alpha = if mm.norm() > 0.0 { m.dotc(s) / mm } else { C64::new(0.0, 0.0) };
    let sn = s.norm();
    let err = if sn > 0.0 { (s - m * alpha).norm() / sn } else { 0.0 };
    (alpha, err)
}

pub fn verify_chain(
    cfg: &SystemConfig,
    code: &PhaseCode,
    weights: &[C64],
    target: &Scatterer,
    settings: ChainSettings,
) -> Result<ChainVerification> {
    let out = simulate_snapshot(cfg, code, weights, target, settings)?;
    let conic = conic_angle(target.azimuth, target.depression)?;
    let model = composite_steering(target.range_m, conic, target.doppler_hz, weights, cfg)?;
    let (alpha, relative_error) = aligned_error(out.snapshot.as_vector(), &model);
    Ok(ChainVerification {
        relative_error,
        alpha,
        chain: out.snapshot,
        model,
    })
}

/// Cross-channel energy with a single element transmitting, relative to the
/// energy of its own channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageReport {
    /// Before the slow-time low-pass, dB.
    pub pre_lowpass_db: f64,
    /// After the slow-time low-pass, dB.
    pub post_lowpass_db: f64,
}

/// Runs the chain once per transmit element with `w = e_m` and sums the
/// energy that lands in channels `m' != m` against the energy in channel `m`.
pub fn cross_channel_leakage(cfg: &SystemConfig, code: &PhaseCode, target: &Scatterer, settings: ChainSettings) -> Result<LeakageReport> {
    let (mut desired_pre, mut desired_post) = (0.0, 0.0);
    let (mut leak_pre, mut leak_post) = (0.0, 0.0);
    for m in 0..cfg.n_tx {
        let mut w = vec![C64::new(0.0, 0.0); cfg.n_tx];
        w[m] = C64::new(1.0, 0.0);
        let out = simulate_snapshot(cfg, code, &w, target, settings)?;
        for n in 0..cfg.n_rx {
            for mp in 0..cfg.n_tx {
                let pre: f64 = out.demodulated[n][mp].iter().map(|x| x.norm_sqr()).sum();
                let post: f64 = (0..cfg.pulses).map(|l| out.snapshot.get(l, n, mp).norm_sqr()).sum();
                if mp == m {
                    desired_pre += pre;
                    desired_post += post;
                } else {
                    leak_pre += pre;
                    leak_post += post;
                }
            }
        }
    }
    let db = |x: f64, y: f64| 10.0 * (x / y).log10();
    Ok(LeakageReport {
        pre_lowpass_db: db(leak_pre, desired_pre),
        post_lowpass_db: db(leak_post, desired_post),
    })
}
