//! Seeded colored-noise synthesis and a Welch-based PSD slope estimator.
//!
//! Noise is shaped in the frequency domain: Gaussian white noise is
//! transformed, each bin is weighted by `f^0` (white), `f^-1/2` (pink) or
//! `f^1` (violet) in amplitude, DC is zeroed, and the inverse transform is
//! normalized to unit RMS.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::stft::hann;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseColor {
    #[default]
    White,
    Pink,
    Violet,
}

impl NoiseColor {
    pub const ALL: [NoiseColor; 3] = [NoiseColor::White, NoiseColor::Pink, NoiseColor::Violet];

    /// Exponent applied to frequency in the amplitude domain.
    fn amplitude_exponent(self) -> f64 {
        match self {
            NoiseColor::White => 0.0,
            NoiseColor::Pink => -0.5,
            NoiseColor::Violet => 1.0,
        }
    }

    /// Theoretical PSD slope in dB per octave.
    pub fn nominal_slope_db_per_octave(self) -> f64 {
        20.0 * self.amplitude_exponent() * 2f64.log10()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseColor::White => "white",
            NoiseColor::Pink => "pink",
            NoiseColor::Violet => "violet",
        }
    }
}

impl std::fmt::Display for NoiseColor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NoiseColor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "white" => Ok(NoiseColor::White),
            "pink" => Ok(NoiseColor::Pink),
            "violet" => Ok(NoiseColor::Violet),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise color {other:?} (expected white, pink or violet)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub color: NoiseColor,
    pub length: usize,
    pub sample_rate: u32,
    pub seed: u64,
}

impl NoiseSpec {
    /// A single sample cannot be both zero-mean and unit-RMS, so `length >= 2`.
    pub fn new(color: NoiseColor, length: usize, sample_rate: u32, seed: u64) -> Result<Self> {
        if length < 2 {
            return Err(Error::InvalidParameter(format!(
                "noise length must be at least 2 samples, got {length}"
            )));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidParameter(
                "sample rate must be positive".into(),
            ));
        }
        Ok(Self {
            color,
            length,
            sample_rate,
            seed,
        })
    }
}

pub fn generate(spec: &NoiseSpec) -> Result<Waveform> {
    let n = spec.length;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut buf: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let exponent = spec.color.amplitude_exponent();
    let bin_hz = f64::from(spec.sample_rate) / n as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let m = k.min(n - k);
        if m == 0 {
            *c = Complex64::default();
        } else if exponent != 0.0 {
            *c *= (m as f64 * bin_hz).powf(exponent);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let mut samples: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    samples.iter_mut().for_each(|s| *s -= mean);
    let rms = (samples.iter().map(|s| s * s).sum::<f64>() / n as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::Degenerate("shaped noise has zero energy".into()));
    }
    samples.iter_mut().for_each(|s| *s /= rms);
    Waveform::new(samples, spec.sample_rate)
}

const MIN_WELCH_FRAMES: usize = 8;
const MAX_SEGMENT: usize = 4096;
const MIN_SEGMENT: usize = 256;

/// Welch power spectral density (Hann, 50 % overlap), one-sided bins `0..=seg/2`.
/// Returns `(bin_hz, psd)`.
pub fn welch_psd(w: &Waveform) -> Result<(f64, Vec<f64>)> {
    let len = w.len();
    let frames_for = |seg: usize| {
        if len < seg {
            0
        } else {
            (len - seg) / (seg / 2) + 1
        }
    };
    let mut seg = MAX_SEGMENT;
    while frames_for(seg) < MIN_WELCH_FRAMES && seg > MIN_SEGMENT {
        seg /= 2;
    }
    let n_frames = frames_for(seg);
    if n_frames < MIN_WELCH_FRAMES {
        return Err(Error::SignalTooShort(format!(
            "{len} samples give {n_frames} Welch frames of {seg}; need {MIN_WELCH_FRAMES}"
        )));
    }

    let window = hann(seg);
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let mut psd = vec![0.0; seg / 2 + 1];
    let mut buf = vec![Complex64::default(); seg];
    for t in 0..n_frames {
        let start = t * seg / 2;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(w.samples()[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in psd.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
    }
    psd.iter_mut().for_each(|p| *p /= n_frames as f64);
    Ok((f64::from(w.sample_rate()) / seg as f64, psd))
}

/// Least-squares slope of `10·log10(PSD)` against `log2(f)` over `[f_lo, f_hi]`,
/// i.e. dB per octave.
pub fn psd_slope(w: &Waveform, f_lo: f64, f_hi: f64) -> Result<f64> {
    let nyquist = f64::from(w.sample_rate()) / 2.0;
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi < nyquist) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < f_lo < f_hi < {nyquist} Hz, got [{f_lo}, {f_hi}]"
        )));
    }
    let (bin_hz, psd) = welch_psd(w)?;
    let points: Vec<(f64, f64)> = psd
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| {
            let f = k as f64 * bin_hz;
            (f >= f_lo && f <= f_hi && p > 0.0).then(|| (f.log2(), 10.0 * p.log10()))
        })
        .collect();
    if points.len() < 2 {
        return Err(Error::SignalTooShort(format!(
            "band [{f_lo}, {f_hi}] Hz contains {} usable bins at {bin_hz} Hz resolution",
            points.len()
        )));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let spec = NoiseSpec::new(NoiseColor::Pink, 4096, 16_000, 11).unwrap();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = NoiseSpec { seed: 12, ..spec };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn unit_rms_and_zero_mean() {
        for color in NoiseColor::ALL {
            for (len, seed) in [(2, 0), (3, 1), (1000, 2), (65_537, 3)] {
                let w = generate(&NoiseSpec::new(color, len, 16_000, seed).unwrap()).unwrap();
                assert_eq!(w.len(), len);
                assert!((w.rms() - 1.0).abs() < 1e-9, "{color} len {len}");
                let mean = w.samples().iter().sum::<f64>() / len as f64;
                assert!(mean.abs() <= 3.0 / (len as f64).sqrt());
            }
        }
    }

    #[test]
    fn rejects_single_sample() {
        assert!(NoiseSpec::new(NoiseColor::White, 1, 16_000, 0).is_err());
        assert!(NoiseSpec::new(NoiseColor::White, 10, 0, 0).is_err());
    }

    #[test]
    fn nominal_slopes() {
        assert!((NoiseColor::White.nominal_slope_db_per_octave()).abs() < 1e-12);
        assert!((NoiseColor::Pink.nominal_slope_db_per_octave() + 3.0103).abs() < 1e-3);
        assert!((NoiseColor::Violet.nominal_slope_db_per_octave() - 6.0206).abs() < 1e-3);
    }

    #[test]
    fn sinusoid_slope_is_finite() {
        let sr = 16_000;
        let w = Waveform::new(
            (0..40_000)
                .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / sr as f64).sin())
                .collect(),
            sr,
        )
        .unwrap();
        assert!(psd_slope(&w, 100.0, 6000.0).unwrap().is_finite());
    }

    #[test]
    fn slope_errors() {
        let w = generate(&NoiseSpec::new(NoiseColor::White, 1000, 16_000, 0).unwrap()).unwrap();
        assert!(matches!(
            psd_slope(&w, 100.0, 6000.0),
            Err(Error::SignalTooShort(_))
        ));
        let w = generate(&NoiseSpec::new(NoiseColor::White, 40_000, 16_000, 0).unwrap()).unwrap();
        assert!(psd_slope(&w, 6000.0, 100.0).is_err());
        assert!(psd_slope(&w, 100.0, 9000.0).is_err());
        assert!(matches!(
            psd_slope(&w, 100.0, 101.0),
            Err(Error::SignalTooShort(_))
        ));
    }

    #[test]
    fn parses_colors() {
        for c in NoiseColor::ALL {
            assert_eq!(c.as_str().parse::<NoiseColor>().unwrap(), c);
        }
        assert!("brown".parse::<NoiseColor>().is_err());
    }
}
