//! Synthetic bona fide / spoof corpus.
//!
//! Bona fide items are harmonic-plus-noise pseudo-speech: a gliding harmonic
//! series shaped by random formants, gated by a syllabic envelope, over a
//! low-level pink noise floor. Spoof items come from the same generator
//! followed by an artifact injector. Every item is a pure function of the
//! spec seed and its utterance id.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::{write_wav, WavEncoding, Waveform};
use crate::config::derive_seed;
use crate::error::{Error, Result};
use crate::manifest::{write_manifest, ManifestEntry};
use crate::metrics::Label;
use crate::noise::{generate, NoiseColor, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    /// Adds a delayed copy, giving a spectral ripple with period `sr / delay`.
    CombFilter,
    /// Re-quantizes to fewer amplitude levels.
    Quantization,
    /// Zeroes the FFT bins lying wholly inside a band around [`NOTCH_CENTER_HZ`].
    BandNotch,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::CombFilter => "comb_filter",
            ArtifactKind::Quantization => "quantization",
            ArtifactKind::BandNotch => "band_notch",
        }
    }
}

impl std::str::FromStr for ArtifactKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comb_filter" => Ok(ArtifactKind::CombFilter),
            "quantization" => Ok(ArtifactKind::Quantization),
            "band_notch" => Ok(ArtifactKind::BandNotch),
            other => Err(Error::InvalidParameter(format!(
                "unknown artifact kind {other:?}"
            ))),
        }
    }
}

pub const DEFAULT_STRENGTH: f64 = 0.3;
pub const DEFAULT_COMB_DELAY: usize = 40;
pub const NOTCH_CENTER_HZ: f64 = 3000.0;
pub const NOTCH_MAX_WIDTH_HZ: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_bonafide: usize,
    pub n_spoof: usize,
    pub duration_s: f64,
    pub sample_rate: u32,
    pub artifact_kind: ArtifactKind,
    /// In `(0, 1]`.
    pub artifact_strength: f64,
    pub seed: u64,
    pub id_prefix: String,
    /// Comb-filter delay in samples.
    pub comb_delay: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_bonafide: 10,
            n_spoof: 10,
            duration_s: 4.0,
            sample_rate: 16_000,
            artifact_kind: ArtifactKind::CombFilter,
            artifact_strength: DEFAULT_STRENGTH,
            seed: 0,
            id_prefix: "synth".into(),
            comb_delay: DEFAULT_COMB_DELAY,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_bonafide == 0 || self.n_spoof == 0 {
            return Err(Error::InvalidParameter(
                "need at least one item per class".into(),
            ));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if self.sample_rate < 8_000 {
            return Err(Error::InvalidParameter(
                "sample rate must be at least 8 kHz".into(),
            ));
        }
        if !(self.artifact_strength > 0.0 && self.artifact_strength <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "artifact strength must lie in (0, 1], got {}",
                self.artifact_strength
            )));
        }
        if self.comb_delay == 0 {
            return Err(Error::InvalidParameter(
                "comb delay must be positive".into(),
            ));
        }
        if self.id_prefix.is_empty() || self.id_prefix.contains(char::is_whitespace) {
            return Err(Error::InvalidParameter(
                "id prefix must be non-empty without whitespace".into(),
            ));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        crate::audio::target_len(self.duration_s, self.sample_rate).max(1)
    }

    pub fn utterance_id(&self, index: usize) -> String {
        format!("{}_{index:05}", self.id_prefix)
    }

    /// Bona fide items take indices `0..n_bonafide`, spoofs follow.
    pub fn label_of(&self, index: usize) -> Label {
        if index < self.n_bonafide {
            Label::Bonafide
        } else {
            Label::Spoof
        }
    }
}

/// Pseudo-speech before any artifact: RMS 0.1 scaled by a random ±3 dB gain.
pub fn pseudo_speech(seed: u64, n_samples: usize, sample_rate: u32) -> Result<Waveform> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = f64::from(sample_rate);

    let f0 = rng.random_range(90.0..220.0);
    let glide_rate = rng.random_range(0.3..1.5);
    let glide_depth = rng.random_range(0.03..0.12);
    let glide_phase = rng.random_range(0.0..2.0 * PI);
    let formants: Vec<(f64, f64)> = [(300.0, 900.0), (900.0, 2500.0), (2300.0, 3600.0)]
        .iter()
        .map(|&(lo, hi)| (rng.random_range(lo..hi), rng.random_range(80.0..220.0)))
        .collect();
    let syllable_rate = rng.random_range(2.5..5.0);
    let syllable_phase = rng.random_range(0.0..2.0 * PI);
    let floor_db = rng.random_range(-38.0..-30.0);
    let gain_db = rng.random_range(-3.0..3.0);
    let noise_seed = rng.random::<u64>();

    let envelope_db = |f: f64| -> f64 {
        let tilt = -6.0 * (f / 200.0).max(1.0).log2();
        let peaks: f64 = formants
            .iter()
            .map(|&(fc, bw)| 18.0 * (-0.5 * ((f - fc) / bw).powi(2)).exp())
            .sum();
        tilt + peaks
    };

    const BLOCK: usize = 64;
    let max_harmonic_hz = 0.45 * sr;
    let mut voiced = vec![0.0; n_samples];
    let mut phase = 0.0f64;
    let mut amps: Vec<f64> = Vec::new();
    for (n, out) in voiced.iter_mut().enumerate() {
        let t = n as f64 / sr;
        let f = f0 * (1.0 + glide_depth * (2.0 * PI * glide_rate * t + glide_phase).sin());
        if n % BLOCK == 0 {
            let k_max = (max_harmonic_hz / f).floor() as usize;
            amps = (1..=k_max)
                .map(|k| 10f64.powf(envelope_db(k as f64 * f) / 20.0))
                .collect();
        }
        phase = (phase + 2.0 * PI * f / sr) % (2.0 * PI);
        let step = Complex64::from_polar(1.0, phase);
        let mut rot = step;
        let mut acc = 0.0;
        for a in &amps {
            acc += a * rot.im;
            rot *= step;
        }
        let gate = (2.0 * PI * syllable_rate * t + syllable_phase)
            .sin()
            .max(0.0)
            .powf(1.5);
        *out = acc * gate;
    }

    let rms_voiced = (voiced.iter().map(|v| v * v).sum::<f64>() / n_samples as f64).sqrt();
    let floor = if n_samples >= 2 {
        generate(&NoiseSpec::new(
            NoiseColor::Pink,
            n_samples,
            sample_rate,
            noise_seed,
        )?)?
        .into_samples()
    } else {
        vec![0.0; n_samples]
    };
    let floor_gain = rms_voiced.max(1e-12) * 10f64.powf(floor_db / 20.0);
    let mut samples: Vec<f64> = voiced
        .iter()
        .zip(&floor)
        .map(|(v, n)| v + floor_gain * n)
        .collect();

    let rms = (samples.iter().map(|v| v * v).sum::<f64>() / n_samples as f64).sqrt();
    let target = 0.1 * 10f64.powf(gain_db / 20.0);
    if rms > 0.0 {
        samples.iter_mut().for_each(|s| *s *= target / rms);
    }
    Waveform::new(samples, sample_rate)
}

fn match_rms(samples: &mut [f64], reference_rms: f64) {
    let rms = (samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64).sqrt();
    if rms > 0.0 {
        samples.iter_mut().for_each(|s| *s *= reference_rms / rms);
    }
}

/// Applies the artifact and restores the input RMS, so level alone never
/// separates the classes.
pub fn inject_artifact(
    w: &Waveform,
    kind: ArtifactKind,
    strength: f64,
    comb_delay: usize,
) -> Result<Waveform> {
    let x = w.samples();
    let mut out: Vec<f64> = match kind {
        ArtifactKind::CombFilter => (0..x.len())
            .map(|n| {
                x[n] + if n >= comb_delay {
                    strength * x[n - comb_delay]
                } else {
                    0.0
                }
            })
            .collect(),
        ArtifactKind::Quantization => {
            let bits = (16.0 * (1.0 - strength)).round().max(1.0);
            let levels = 2f64.powf(bits);
            let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak == 0.0 {
                x.to_vec()
            } else {
                let step = 2.0 * peak / levels;
                x.iter().map(|v| (v / step).round() * step).collect()
            }
        }
        ArtifactKind::BandNotch => {
            let n = x.len();
            let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let mut planner = FftPlanner::new();
            planner.plan_fft_forward(n).process(&mut buf);
            let bin_hz = f64::from(w.sample_rate()) / n as f64;
            let half_width = 0.5 * strength * NOTCH_MAX_WIDTH_HZ;
            for (k, c) in buf.iter_mut().enumerate() {
                let f = k.min(n - k) as f64 * bin_hz;
                if (f - NOTCH_CENTER_HZ).abs() + 0.5 * bin_hz <= half_width {
                    *c = Complex64::default();
                }
            }
            planner.plan_fft_inverse(n).process(&mut buf);
            buf.iter().map(|c| c.re / n as f64).collect()
        }
    };
    match_rms(&mut out, w.rms());
    Waveform::new(out, w.sample_rate())
}

pub fn synth_utterance(spec: &SynthSpec, index: usize) -> Result<(ManifestEntry, Waveform)> {
    spec.validate()?;
    let id = spec.utterance_id(index);
    let label = spec.label_of(index);
    let base = pseudo_speech(
        derive_seed(spec.seed, &id, "synth"),
        spec.n_samples(),
        spec.sample_rate,
    )?;
    let (audio, attack_id) = match label {
        Label::Bonafide => (base, "-".to_string()),
        Label::Spoof => (
            inject_artifact(
                &base,
                spec.artifact_kind,
                spec.artifact_strength,
                spec.comb_delay,
            )?,
            spec.artifact_kind.as_str().to_string(),
        ),
    };
    let entry = ManifestEntry {
        path: format!("{id}.wav").into(),
        utterance_id: id,
        label,
        attack_id,
    };
    Ok((entry, audio))
}

/// All items in manifest order, in memory.
pub fn synth_in_memory(spec: &SynthSpec) -> Result<Vec<(ManifestEntry, Waveform)>> {
    use rayon::prelude::*;
    spec.validate()?;
    (0..spec.n_bonafide + spec.n_spoof)
        .into_par_iter()
        .map(|i| synth_utterance(spec, i))
        .collect()
}

/// Writes float32 WAVs and `manifest.tsv` into `out_dir`; returns the manifest path.
pub fn synth_corpus(spec: &SynthSpec, out_dir: impl AsRef<Path>) -> Result<std::path::PathBuf> {
    let out_dir = out_dir.as_ref();
    spec.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Unwritable {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let items = synth_in_memory(spec)?;
    let mut entries = Vec::with_capacity(items.len());
    for (mut entry, audio) in items {
        let path = out_dir.join(&entry.path);
        write_wav(&audio, &path, WavEncoding::Float32)?;
        entry.path = path;
        entries.push(entry);
    }
    let manifest = out_dir.join("manifest.tsv");
    write_manifest(&entries, &manifest)?;
    Ok(manifest)
}
