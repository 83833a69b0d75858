//! Unit-energy baseband pulses, their ambiguity function and fast-time
//! matched filtering.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::system::{cis_cycles, C64};

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// `exp(j*pi*rate*(t - T/2)^2)` on the pulse support.
    Lfm { chirp_rate: f64 },
    /// Arbitrary samples, held constant over each sample interval.
    Sampled,
}

/// A sampled pulse `u` with `sum |u[k]|^2 / fs = 1`.
///
/// The pulse is causal: its support is `[0, len / fs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandWaveform {
    samples: Vec<C64>,
    sample_rate: f64,
    bandwidth: f64,
    gain: f64,
    duration: f64,
    shape: Shape,
}

/// Linear FM chirp of duration `duration_s` sweeping `bandwidth_hz`, centred on
/// baseband and normalised to unit energy.
pub fn lfm_baseband(duration_s: f64, bandwidth_hz: f64, sample_rate_hz: f64) -> Result<BasebandWaveform> {
    if !(sample_rate_hz > 0.0 && duration_s > 0.0 && bandwidth_hz >= 0.0) {
        return Err(Error::domain(format!(
            "invalid pulse: T_p = {duration_s} s, B = {bandwidth_hz} Hz, fs = {sample_rate_hz} Hz"
        )));
    }
    if sample_rate_hz < bandwidth_hz {
        return Err(Error::Undersampled {
            fs: sample_rate_hz,
            bandwidth: bandwidth_hz,
        });
    }
    let len = (duration_s * sample_rate_hz).round() as usize;
    if len < 8 {
        return Err(Error::domain(format!(
            "pulse has {len} samples; at least 8 are required"
        )));
    }
    let chirp_rate = bandwidth_hz / duration_s;
    let gain = (sample_rate_hz / len as f64).sqrt();
    let mut wf = BasebandWaveform {
        samples: Vec::new(),
        sample_rate: sample_rate_hz,
        bandwidth: bandwidth_hz,
        gain,
        duration: len as f64 / sample_rate_hz,
        shape: Shape::Lfm { chirp_rate },
    };
    wf.samples = (0..len).map(|k| wf.eval(k as f64 / sample_rate_hz)).collect();
    Ok(wf)
}

impl BasebandWaveform {
    /// Wraps arbitrary pulse samples, rescaling them to unit energy.
    pub fn from_samples(samples: Vec<C64>, sample_rate_hz: f64, bandwidth_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("pulse samples"));
        }
        let energy: f64 = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / sample_rate_hz;
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::domain("pulse samples must have finite, non-zero energy"));
        }
        let scale = energy.sqrt().recip();
        let duration = samples.len() as f64 / sample_rate_hz;
        Ok(BasebandWaveform {
            samples: samples.into_iter().map(|s| s * scale).collect(),
            sample_rate: sample_rate_hz,
            bandwidth: bandwidth_hz,
            gain: scale,
            duration,
            shape: Shape::Sampled,
        })
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Support length `len / fs`, seconds.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.sample_rate
    }

    /// Continuous-time pulse value; zero outside the support.
    pub fn eval(&self, t: f64) -> C64 {
        let duration = self.duration;
        if !(0.0..duration).contains(&t) {
            return C64::new(0.0, 0.0);
        }
        match self.shape {
            Shape::Lfm { chirp_rate } => {
                let x = t - 0.5 * duration;
                cis_cycles(0.5 * chirp_rate * x * x) * self.gain
            }
            Shape::Sampled => {
                let k = ((t * self.sample_rate) as usize).min(self.samples.len() - 1);
                self.samples[k]
            }
        }
    }

    /// Ambiguity function `G(delay, doppler) = int u(t) e^{j 2 pi f' t} u*(t - delay) dt`,
    /// evaluated as a Riemann sum on the sample grid.
    pub fn ambiguity(&self, delay_s: f64, doppler_hz: f64) -> C64 {
        if delay_s.abs() >= self.duration() {
            return C64::new(0.0, 0.0);
        }
        let fs = self.sample_rate;
        let sum: C64 = (0..self.samples.len())
            .map(|k| {
                let t = k as f64 / fs;
                self.samples[k] * cis_cycles(doppler_hz * t) * self.eval(t - delay_s).conj()
            })
            .sum();
        sum / fs
    }
}

/// Fast-time matched filter for one pulse shape and a fixed input length,
/// implemented as FFT correlation.
///
/// Output sample `k` is `(1/fs) * sum_j x[k + j] * conj(u[j])`, so an echo
/// starting at sample `k0` peaks at index `k0`.
pub struct MatchedFilter {
    input_len: usize,
    fft_len: usize,
    sample_rate: f64,
    reference: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MatchedFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatchedFilter")
            .field("input_len", &self.input_len)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl MatchedFilter {
    pub fn new(pulse: &BasebandWaveform, input_len: usize) -> Result<Self> {
        if input_len == 0 {
            return Err(Error::Empty("matched filter input"));
        }
        if input_len < pulse.len() {
            return Err(Error::DimensionMismatch {
                what: "matched filter input (must be at least the pulse length)",
                expected: pulse.len(),
                got: input_len,
            });
        }
        let fft_len = (input_len + pulse.len() - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut reference = vec![C64::new(0.0, 0.0); fft_len];
        reference[..pulse.len()].copy_from_slice(pulse.samples());
        forward.process(&mut reference);
        // fold conj, the 1/fs quadrature weight and the inverse FFT scale into one spectrum
        let scale = 1.0 / (pulse.sample_rate() * fft_len as f64);
        for r in reference.iter_mut() {
            *r = r.conj() * scale;
        }
        Ok(MatchedFilter {
            input_len,
            fft_len,
            sample_rate: pulse.sample_rate(),
            reference,
            forward,
            inverse,
        })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.input_len {
            return Err(Error::DimensionMismatch {
                what: "matched filter input",
                expected: self.input_len,
                got: x.len(),
            });
        }
        let mut buf = vec![C64::new(0.0, 0.0); self.fft_len];
        buf[..x.len()].copy_from_slice(x);
        self.forward.process(&mut buf);
        for (b, r) in buf.iter_mut().zip(&self.reference) {
            *b *= r;
        }
        self.inverse.process(&mut buf);
        buf.truncate(self.input_len);
        Ok(buf)
    }
}

/// Matched-filters `x` with `pulse` (FFT correlation, same-length output).
pub fn matched_filter(x: &[C64], pulse: &BasebandWaveform) -> Result<Vec<C64>> {
    if x.is_empty() {
        return Err(Error::Empty("matched filter input"));
    }
    MatchedFilter::new(pulse, x.len())?.apply(x)
}

/// Direct-sum reference for [`matched_filter`].
pub fn matched_filter_direct(x: &[C64], pulse: &BasebandWaveform) -> Result<Vec<C64>> {
    if x.is_empty() {
        return Err(Error::Empty("matched filter input"));
    }
    let u = pulse.samples();
    let inv_fs = 1.0 / pulse.sample_rate();
    Ok((0..x.len())
        .map(|k| {
            let s: C64 = u
                .iter()
                .enumerate()
                .take_while(|(j, _)| k + j < x.len())
                .map(|(j, uj)| x[k + j] * uj.conj())
                .sum();
            s * inv_fs
        })
        .collect())
}
