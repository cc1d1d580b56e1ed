//! Hann-windowed STFT with overlap-add resynthesis.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_length: 512,
            hop: 256,
        }
    }
}

impl StftConfig {
    /// Only the half-overlap periodic Hann layout is accepted; it sums to one
    /// under overlap-add, which is what makes resynthesis exact.
    pub fn validate(&self) -> Result<()> {
        if self.window_length < 2 || !self.window_length.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "STFT window length must be even and >= 2, got {}",
                self.window_length
            )));
        }
        if self.hop == 0 || self.hop != self.window_length / 2 {
            return Err(Error::InvalidParameter(format!(
                "STFT hop must be window_length/2 = {}, got {}",
                self.window_length / 2,
                self.hop
            )));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.window_length / 2 + 1
    }
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect()
}

/// One-sided spectra of every frame, plus what is needed to invert them.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    /// `frames[t][k]` for `k` in `0..=window_length/2`.
    pub frames: Vec<Vec<Complex64>>,
    signal_len: usize,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }
}

pub struct Stft {
    config: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            window: hann(config.window_length),
            forward: planner.plan_fft_forward(config.window_length),
            inverse: planner.plan_fft_inverse(config.window_length),
        })
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    /// The signal is padded with `hop` zeros in front and enough at the end
    /// that every original sample is covered by exactly two frames.
    pub fn analyze(&self, signal: &[f64]) -> Spectrogram {
        let n = self.config.window_length;
        let hop = self.config.hop;
        let padded_len = hop + signal.len() + n;
        let n_frames = (padded_len - n) / hop + 1;
        let mut padded = vec![0.0; hop];
        padded.extend_from_slice(signal);
        padded.resize(padded_len, 0.0);

        let mut frames = Vec::with_capacity(n_frames);
        let mut buf = vec![Complex64::default(); n];
        for t in 0..n_frames {
            let start = t * hop;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(padded[start + i] * self.window[i], 0.0);
            }
            self.forward.process(&mut buf);
            frames.push(buf[..self.config.n_bins()].to_vec());
        }
        Spectrogram {
            frames,
            signal_len: signal.len(),
        }
    }

    pub fn synthesize(&self, spec: &Spectrogram) -> Vec<f64> {
        let n = self.config.window_length;
        let hop = self.config.hop;
        let bins = self.config.n_bins();
        let total = (spec.frames.len() - 1) * hop + n;
        let mut out = vec![0.0; total];
        let mut norm = vec![0.0; total];
        let mut buf = vec![Complex64::default(); n];
        for (t, frame) in spec.frames.iter().enumerate() {
            buf[..bins].copy_from_slice(frame);
            for k in bins..n {
                buf[k] = frame[n - k].conj();
            }
            self.inverse.process(&mut buf);
            let start = t * hop;
            for i in 0..n {
                out[start + i] += buf[i].re / n as f64;
                norm[start + i] += self.window[i];
            }
        }
        out.iter()
            .zip(&norm)
            .skip(hop)
            .take(spec.signal_len)
            .map(|(&v, &w)| if w > 1e-12 { v / w } else { 0.0 })
            .collect()
    }
}
