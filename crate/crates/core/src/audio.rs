//! Signal container, WAV I/O, crop/pad and SNR measurement.
//!
//! Samples are always held as `f64` regardless of the file encoding so that
//! the projection arithmetic downstream is not limited by quantization.

use std::io::ErrorKind;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, non-empty mono signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidWaveform("no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidWaveform(
                "sample rate must be positive".into(),
            ));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidWaveform(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a `Waveform` holds at least one sample.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Squared L2 norm.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn rms(&self) -> f64 {
        (self.energy() / self.len() as f64).sqrt()
    }

    pub fn dot(&self, other: &Waveform) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn scaled(&self, gain: f64) -> Result<Waveform> {
        Waveform::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
        )
    }

    /// Same length and sample rate.
    pub fn check_compatible(&self, other: &Waveform) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::SampleRateMismatch {
                left: self.sample_rate,
                right: other.sample_rate,
            });
        }
        Ok(())
    }

    /// Truncates or zero-pads at the end to exactly `len` samples.
    pub fn fit_length(&self, len: usize) -> Result<Waveform> {
        let mut samples = self.samples.clone();
        samples.resize(len, 0.0);
        Waveform::new(samples, self.sample_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WavEncoding {
    Pcm16,
    #[default]
    Float32,
}

impl std::str::FromStr for WavEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm16" => Ok(WavEncoding::Pcm16),
            "float32" => Ok(WavEncoding::Float32),
            other => Err(Error::InvalidParameter(format!(
                "unknown WAV encoding {other:?} (expected pcm16 or float32)"
            ))),
        }
    }
}

const PCM16_SCALE: f64 = 32768.0;

/// Reads a 16-bit integer or 32-bit float PCM WAV file, averaging channels to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let map_err = |e: hound::Error| -> Error {
        match e {
            // hound reports short reads as `Other` rather than `UnexpectedEof`.
            hound::Error::IoError(io)
                if matches!(io.kind(), ErrorKind::UnexpectedEof | ErrorKind::Other) =>
            {
                Error::MalformedHeader {
                    path: path.to_path_buf(),
                    reason: format!("truncated file: {io}"),
                }
            }
            hound::Error::IoError(io) => Error::io(path, io),
            hound::Error::FormatError(reason) => Error::MalformedHeader {
                path: path.to_path_buf(),
                reason: reason.into(),
            },
            hound::Error::Unsupported => Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                format: "unrecognised format tag",
                bits: 0,
            },
            other => Error::MalformedHeader {
                path: path.to_path_buf(),
                reason: other.to_string(),
            },
        }
    };

    let reader = hound::WavReader::open(path).map_err(map_err)?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if channels == 0 {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: "zero channels".into(),
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / PCM16_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_err)?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_err)?,
        (hound::SampleFormat::Int, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                format: "integer PCM",
                bits,
            })
        }
        (hound::SampleFormat::Float, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                format: "IEEE float",
                bits,
            })
        }
    };

    downmix(path, interleaved, channels, spec.sample_rate)
}

fn downmix(
    path: &Path,
    interleaved: Vec<f64>,
    channels: usize,
    sample_rate: u32,
) -> Result<Waveform> {
    if !interleaved.len().is_multiple_of(channels) {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: "data chunk holds a partial frame".into(),
        });
    }
    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    Waveform::new(mono, sample_rate)
}

/// Reads a FLAC file of any bit depth, averaging channels to mono.
pub fn read_flac(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let malformed = |e: claxon::Error| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut reader = claxon::FlacReader::open(path).map_err(malformed)?;
    let info = reader.streaminfo();
    let scale = f64::from(1u32 << (info.bits_per_sample - 1));
    let interleaved: Vec<f64> = reader
        .samples()
        .map(|s| s.map(|v| f64::from(v) / scale))
        .collect::<std::result::Result<_, _>>()
        .map_err(malformed)?;
    downmix(path, interleaved, info.channels as usize, info.sample_rate)
}

/// [`read_flac`] for `.flac` paths, [`read_wav`] otherwise.
pub fn read_audio(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let is_flac = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("flac"));
    if is_flac {
        read_flac(path)
    } else {
        read_wav(path)
    }
}

/// Writes a mono WAV file. `pcm16` clamps to `[-1, 1 - 2^-15]` before quantizing.
pub fn write_wav(w: &Waveform, path: impl AsRef<Path>, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let (bits_per_sample, sample_format) = match encoding {
        WavEncoding::Pcm16 => (16, hound::SampleFormat::Int),
        WavEncoding::Float32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: w.sample_rate(),
        bits_per_sample,
        sample_format,
    };
    let unwritable = |e: hound::Error| match e {
        hound::Error::IoError(source) => Error::Unwritable {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Unwritable {
            path: path.to_path_buf(),
            source: std::io::Error::other(other.to_string()),
        },
    };

    let mut writer = hound::WavWriter::create(path, spec).map_err(unwritable)?;
    match encoding {
        WavEncoding::Pcm16 => {
            let hi = 1.0 - 1.0 / PCM16_SCALE;
            for &s in w.samples() {
                let q = (s.clamp(-1.0, hi) * PCM16_SCALE).round() as i16;
                writer.write_sample(q).map_err(unwritable)?;
            }
        }
        WavEncoding::Float32 => {
            for &s in w.samples() {
                writer.write_sample(s as f32).map_err(unwritable)?;
            }
        }
    }
    writer.finalize().map_err(unwritable)
}

/// Number of samples a crop of `seconds` occupies at `sample_rate`.
pub fn target_len(seconds: f64, sample_rate: u32) -> usize {
    (seconds * f64::from(sample_rate)).round() as usize
}

/// Crops a seeded random window when too long, tiles the signal when too short.
pub fn crop_or_pad(w: &Waveform, target_seconds: f64, rng_seed: u64) -> Result<Waveform> {
    if !(target_seconds > 0.0 && target_seconds.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "crop length must be positive, got {target_seconds}"
        )));
    }
    let target = target_len(target_seconds, w.sample_rate());
    if target == 0 {
        return Err(Error::InvalidParameter(format!(
            "crop of {target_seconds} s is shorter than one sample"
        )));
    }
    let len = w.len();
    let samples = match len.cmp(&target) {
        std::cmp::Ordering::Equal => return Ok(w.clone()),
        std::cmp::Ordering::Greater => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let start = rng.random_range(0..=len - target);
            w.samples()[start..start + target].to_vec()
        }
        std::cmp::Ordering::Less => w.samples().iter().copied().cycle().take(target).collect(),
    };
    Waveform::new(samples, w.sample_rate())
}

/// `10·log10(‖clean‖² / ‖mixture − clean‖²)` in dB.
pub fn measure_snr(clean: &Waveform, mixture: &Waveform) -> Result<f64> {
    clean.check_compatible(mixture)?;
    let signal = clean.energy();
    if signal == 0.0 {
        return Err(Error::ZeroEnergy("clean signal"));
    }
    let noise: f64 = clean
        .samples()
        .iter()
        .zip(mixture.samples())
        .map(|(c, m)| (m - c) * (m - c))
        .sum();
    if noise == 0.0 {
        return Err(Error::InfiniteSnr);
    }
    Ok(10.0 * (signal / noise).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wf(samples: &[f64]) -> Waveform {
        Waveform::new(samples.to_vec(), 16_000).unwrap()
    }

    fn write_raw_pcm16(path: &Path, channels: u16, samples: &[i16]) {
        let spec = hound::WavSpec {
            channels,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn waveform_rejects_invalid() {
        assert!(Waveform::new(vec![], 16_000).is_err());
        assert!(Waveform::new(vec![0.0], 0).is_err());
        assert!(Waveform::new(vec![0.0, f64::NAN], 16_000).is_err());
        assert!(Waveform::new(vec![f64::INFINITY], 16_000).is_err());
    }

    #[test]
    fn reads_pcm16_mono_scaled() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_raw_pcm16(&p, 1, &[0, 16384, -16384]);
        let w = read_wav(&p).unwrap();
        assert_eq!(w.samples(), &[0.0, 0.5, -0.5]);
        assert_eq!(w.sample_rate(), 16_000);
    }

    #[test]
    fn stereo_is_channel_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8_000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(1.0f32).unwrap();
        w.write_sample(0.0f32).unwrap();
        w.finalize().unwrap();
        let w = read_wav(&p).unwrap();
        assert_eq!(w.samples(), &[0.5]);
        assert_eq!(w.sample_rate(), 8_000);
    }

    #[test]
    fn truncated_header_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.wav");
        write_raw_pcm16(&p, 1, &[1, 2, 3]);
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..20]).unwrap();
        let r = read_wav(&p);
        assert!(matches!(r, Err(Error::MalformedHeader { .. })), "{r:?}");

        std::fs::write(&p, b"not a wav file at all, just text").unwrap();
        assert!(matches!(read_wav(&p), Err(Error::MalformedHeader { .. })));
    }

    #[test]
    fn missing_and_unsupported_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            read_wav(dir.path().join("nope.wav")),
            Err(Error::FileNotFound(_))
        ));

        let p = dir.path().join("24.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 24,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(100i32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(
            read_wav(&p),
            Err(Error::UnsupportedEncoding { bits: 24, .. })
        ));
    }

    #[test]
    fn float32_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.wav");
        let w = wf(&[0.0, 0.5]);
        write_wav(&w, &p, WavEncoding::Float32).unwrap();
        assert_eq!(read_wav(&p).unwrap(), w);
    }

    #[test]
    fn pcm16_clamps_overrange() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.wav");
        write_wav(&wf(&[2.0, -3.0]), &p, WavEncoding::Pcm16).unwrap();
        let back = read_wav(&p).unwrap();
        assert_eq!(back.samples(), &[32767.0 / 32768.0, -1.0]);
        assert!((back.samples()[0] - 0.99997).abs() < 1e-5);
    }

    #[test]
    fn write_to_missing_dir_is_unwritable() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gone").join("x.wav");
        assert!(matches!(
            write_wav(&wf(&[0.0]), &p, WavEncoding::Float32),
            Err(Error::Unwritable { .. })
        ));
    }

    #[test]
    fn crop_is_deterministic_and_exact_length() {
        let sr = 100;
        let w = Waveform::new((0..600).map(f64::from).collect(), sr).unwrap();
        let a = crop_or_pad(&w, 4.0, 7).unwrap();
        let b = crop_or_pad(&w, 4.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 400);
        // contiguous window
        let first = a.samples()[0];
        assert!(a
            .samples()
            .iter()
            .enumerate()
            .all(|(i, &v)| v == first + i as f64));
    }

    #[test]
    fn short_input_is_tiled() {
        let w = Waveform::new(vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
        let out = crop_or_pad(&w, 4.0, 0).unwrap();
        assert_eq!(out.samples(), &[1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn exact_length_is_identity() {
        let w = Waveform::new(vec![0.25; 8], 2).unwrap();
        assert_eq!(crop_or_pad(&w, 4.0, 99).unwrap(), w);
        assert!(crop_or_pad(&w, 0.0, 0).is_err());
    }

    #[test]
    fn snr_examples() {
        let clean = wf(&[1.0, 1.0, 1.0, 1.0]);
        let mix = wf(&[2.0, 0.0, 2.0, 0.0]);
        assert_eq!(measure_snr(&clean, &mix).unwrap(), 0.0);

        let clean = wf(&[1.0, 0.0]);
        let mix = wf(&[1.1, 0.0]);
        assert!((measure_snr(&clean, &mix).unwrap() - 20.0).abs() < 1e-9);

        assert!(matches!(
            measure_snr(&clean, &clean),
            Err(Error::InfiniteSnr)
        ));
        assert!(matches!(
            measure_snr(&wf(&[0.0, 0.0]), &clean),
            Err(Error::ZeroEnergy(_))
        ));
        assert!(matches!(
            measure_snr(&wf(&[1.0]), &clean),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
