//! Speech-enhancement stage.
//!
//! The classical enhancers estimate the noise magnitude per bin as the 10th
//! percentile of frame magnitudes over the whole utterance, so they need no
//! external noise profile. Neural enhancers plug in through
//! [`EnhancerKind::External`], which round-trips audio through a command.

use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, write_wav, WavEncoding, Waveform};
use crate::error::{Error, Result};
use crate::stft::{Stft, StftConfig};

pub const NOISE_PERCENTILE: f64 = 0.10;

fn default_subtraction_factor() -> f64 {
    1.0
}
fn default_subtraction_floor() -> f64 {
    0.02
}
fn default_wiener_floor() -> f64 {
    0.01
}
fn default_timeout_s() -> f64 {
    600.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnhancerKind {
    Identity,
    /// Returns the reference clean signal; a perfect enhancer.
    OracleClean,
    SpectralSubtraction {
        #[serde(default = "default_subtraction_factor")]
        factor: f64,
        /// Fraction of the noisy magnitude kept as a spectral floor.
        #[serde(default = "default_subtraction_floor")]
        floor: f64,
    },
    Wiener {
        #[serde(default = "default_wiener_floor")]
        floor: f64,
    },
    External {
        /// Shell command with `{in}` and `{out}` placeholders.
        command: String,
        #[serde(default = "default_timeout_s")]
        timeout_s: f64,
    },
}

impl Default for EnhancerKind {
    fn default() -> Self {
        EnhancerKind::wiener()
    }
}

impl EnhancerKind {
    pub fn spectral_subtraction() -> Self {
        EnhancerKind::SpectralSubtraction {
            factor: default_subtraction_factor(),
            floor: default_subtraction_floor(),
        }
    }

    pub fn wiener() -> Self {
        EnhancerKind::Wiener {
            floor: default_wiener_floor(),
        }
    }

    pub fn external(command: impl Into<String>) -> Self {
        EnhancerKind::External {
            command: command.into(),
            timeout_s: default_timeout_s(),
        }
    }

    /// Builds a kind from its CLI name; `command` is needed only for `external`.
    pub fn from_name(name: &str, command: Option<&str>) -> Result<Self> {
        let kind = match name {
            "identity" => EnhancerKind::Identity,
            "oracle_clean" => EnhancerKind::OracleClean,
            "spectral_subtraction" => EnhancerKind::spectral_subtraction(),
            "wiener" => EnhancerKind::wiener(),
            "external" => EnhancerKind::external(command.ok_or_else(|| {
                Error::InvalidParameter("external enhancer needs a command template".into())
            })?),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown enhancer {other:?}"
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnhancerKind::Identity => "identity",
            EnhancerKind::OracleClean => "oracle_clean",
            EnhancerKind::SpectralSubtraction { .. } => "spectral_subtraction",
            EnhancerKind::Wiener { .. } => "wiener",
            EnhancerKind::External { .. } => "external",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnhancerKind::SpectralSubtraction { factor, floor } => {
                if !(factor.is_finite() && *factor >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "subtraction factor must be >= 0, got {factor}"
                    )));
                }
                check_floor(*floor)
            }
            EnhancerKind::Wiener { floor } => check_floor(*floor),
            EnhancerKind::External { command, timeout_s } => {
                if command.trim().is_empty() {
                    return Err(Error::InvalidParameter("empty external command".into()));
                }
                if !command.contains("{in}") || !command.contains("{out}") {
                    return Err(Error::InvalidParameter(format!(
                        "external command must contain {{in}} and {{out}}: {command:?}"
                    )));
                }
                if !(timeout_s.is_finite() && *timeout_s > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "timeout must be positive, got {timeout_s}"
                    )));
                }
                Ok(())
            }
            EnhancerKind::Identity | EnhancerKind::OracleClean => Ok(()),
        }
    }
}

fn check_floor(floor: f64) -> Result<()> {
    if (0.0..=1.0).contains(&floor) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "gain floor must lie in [0, 1], got {floor}"
        )))
    }
}

/// Runs the enhancer. The output always has the input's length and sample rate.
pub fn enhance(
    kind: &EnhancerKind,
    y: &Waveform,
    reference_clean: Option<&Waveform>,
) -> Result<Waveform> {
    kind.validate()?;
    match kind {
        EnhancerKind::Identity => Ok(y.clone()),
        EnhancerKind::OracleClean => {
            let clean = reference_clean.ok_or(Error::MissingReference)?;
            y.check_compatible(clean)?;
            Ok(clean.clone())
        }
        EnhancerKind::SpectralSubtraction { factor, floor } => {
            let (factor, floor) = (*factor, *floor);
            apply_gain(y, |mag, noise| {
                if mag == 0.0 {
                    return floor;
                }
                (mag - factor * noise).max(floor * mag) / mag
            })
        }
        EnhancerKind::Wiener { floor } => {
            let floor = *floor;
            apply_gain(y, |mag, noise| {
                if mag == 0.0 {
                    return floor;
                }
                (1.0 - (noise * noise) / (mag * mag)).max(floor)
            })
        }
        EnhancerKind::External { command, timeout_s } => run_external(command, y, *timeout_s),
    }
}

/// Linear-interpolated quantile of `values` (which is sorted in place).
fn quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let pos = q * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}

/// Per-bin RMS noise magnitude from the 10th percentile over frames.
///
/// A noise-only bin has Rayleigh-distributed magnitude, whose q-quantile is
/// `rms·sqrt(-ln(1 - q))`; the percentile is divided by that factor.
pub fn estimate_noise_profile(frames: &[Vec<rustfft::num_complex::Complex64>]) -> Vec<f64> {
    let bins = frames.first().map_or(0, Vec::len);
    let rayleigh = (-(1.0 - NOISE_PERCENTILE).ln()).sqrt();
    let mut column = vec![0.0; frames.len()];
    (0..bins)
        .map(|k| {
            for (c, frame) in column.iter_mut().zip(frames) {
                *c = frame[k].norm();
            }
            quantile(&mut column, NOISE_PERCENTILE) / rayleigh
        })
        .collect()
}

fn apply_gain(y: &Waveform, gain: impl Fn(f64, f64) -> f64) -> Result<Waveform> {
    let stft = Stft::new(StftConfig::default())?;
    let mut spec = stft.analyze(y.samples());
    let noise = estimate_noise_profile(&spec.frames);
    for frame in &mut spec.frames {
        for (c, &n) in frame.iter_mut().zip(&noise) {
            *c *= gain(c.norm(), n);
        }
    }
    Waveform::new(stft.synthesize(&spec), y.sample_rate())
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn kill_tree(child: &mut std::process::Child) {
    // The shell leads its own process group; take its children down with it.
    #[cfg(unix)]
    if let Ok(pgid) = libc::pid_t::try_from(child.id()) {
        if pgid > 0 {
            // SAFETY: plain syscall on a process group this call spawned.
            unsafe {
                libc::killpg(pgid, libc::SIGKILL);
            }
        }
    }
    let _ = child.kill();
    let _ = child.wait();
}

/// Writes `y` as float32 WAV, runs `command_template` through `sh -c` with
/// `{in}`/`{out}` substituted, and reads the result back, trimmed or
/// zero-padded to the input length.
pub fn run_external(command_template: &str, y: &Waveform, timeout_s: f64) -> Result<Waveform> {
    EnhancerKind::External {
        command: command_template.to_string(),
        timeout_s,
    }
    .validate()?;

    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let in_path = dir.path().join("in.wav");
    let out_path = dir.path().join("out.wav");
    write_wav(y, &in_path, WavEncoding::Float32)?;

    let command = command_template
        .replace("{in}", &shell_quote(&in_path.to_string_lossy()))
        .replace("{out}", &shell_quote(&out_path.to_string_lossy()));
    log::debug!("running external enhancer: {command}");

    let mut cmd = Command::new("sh");
    cmd.arg("-c").arg(&command);
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut cmd, 0);
    let mut child = cmd
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::ExternalFailed {
            status: format!("spawn error: {e}"),
            stderr: String::new(),
        })?;

    let mut stderr_pipe = child.stderr.take().expect("stderr is piped");
    let (stderr_tx, stderr_rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr_pipe.read_to_end(&mut buf);
        let _ = stderr_tx.send(String::from_utf8_lossy(&buf).into_owned());
    });

    let deadline = Instant::now() + Duration::from_secs_f64(timeout_s);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if Instant::now() >= deadline => {
                kill_tree(&mut child);
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                let _ = child.kill();
                return Err(Error::ExternalFailed {
                    status: format!("wait error: {e}"),
                    stderr: String::new(),
                });
            }
        }
    };
    // A surviving grandchild can hold the pipe open; don't wait on it forever.
    let stderr = stderr_rx
        .recv_timeout(Duration::from_secs(2))
        .unwrap_or_default();

    let Some(status) = status else {
        return Err(Error::ExternalTimeout { timeout_s, stderr });
    };
    if !status.success() {
        return Err(Error::ExternalFailed {
            status: status.to_string(),
            stderr,
        });
    }

    let out = read_wav(&out_path).map_err(|e| Error::ExternalOutput {
        reason: e.to_string(),
        stderr: stderr.clone(),
    })?;
    if out.sample_rate() != y.sample_rate() {
        return Err(Error::ExternalOutput {
            reason: format!(
                "sample rate {} Hz differs from input {} Hz",
                out.sample_rate(),
                y.sample_rate()
            ),
            stderr,
        });
    }
    if out.len() != y.len() {
        log::debug!(
            "external enhancer returned {} samples for {}; fitting",
            out.len(),
            y.len()
        );
    }
    out.fit_length(y.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::measure_snr;
    use crate::mixing::{add_noise_at_snr, MixSpec};
    use crate::noise::{generate, NoiseColor, NoiseSpec};

    fn sinusoid(len: usize, hz: f64) -> Waveform {
        Waveform::new(
            (0..len)
                .map(|i| 0.5 * (2.0 * std::f64::consts::PI * hz * i as f64 / 16_000.0).sin())
                .collect(),
            16_000,
        )
        .unwrap()
    }

    /// The percentile noise estimate needs noise-only frames, so the tone is
    /// gated: 250 ms on, 250 ms off.
    fn noisy_sinusoid() -> (Waveform, Waveform) {
        let tone = sinusoid(32_000, 440.0);
        let gated = tone
            .samples()
            .iter()
            .enumerate()
            .map(|(i, v)| if (i / 4_000) % 2 == 0 { *v } else { 0.0 })
            .collect();
        let clean = Waveform::new(gated, 16_000).unwrap();
        let n =
            generate(&NoiseSpec::new(NoiseColor::White, clean.len(), 16_000, 3).unwrap()).unwrap();
        let y = add_noise_at_snr(&clean, &n, MixSpec { snr_db: 0.0 }).unwrap();
        (clean, y)
    }

    #[test]
    fn identity_is_bit_exact() {
        let (_, y) = noisy_sinusoid();
        assert_eq!(enhance(&EnhancerKind::Identity, &y, None).unwrap(), y);
    }

    #[test]
    fn oracle_returns_reference() {
        let (clean, y) = noisy_sinusoid();
        assert_eq!(
            enhance(&EnhancerKind::OracleClean, &y, Some(&clean)).unwrap(),
            clean
        );
        assert!(matches!(
            enhance(&EnhancerKind::OracleClean, &y, None),
            Err(Error::MissingReference)
        ));
    }

    #[test]
    fn classical_enhancers_improve_snr() {
        let (clean, y) = noisy_sinusoid();
        for kind in [EnhancerKind::wiener(), EnhancerKind::spectral_subtraction()] {
            let out = enhance(&kind, &y, None).unwrap();
            assert_eq!(out.len(), y.len());
            let snr = measure_snr(&clean, &out).unwrap();
            // Input is mixed at 0 dB.
            assert!(snr >= 3.0, "{}: output SNR {snr}", kind.name());
        }
    }

    #[test]
    fn odd_lengths_preserved() {
        for len in [1, 7, 513, 1025] {
            let y = sinusoid(len, 300.0);
            for kind in [EnhancerKind::wiener(), EnhancerKind::spectral_subtraction()] {
                assert_eq!(enhance(&kind, &y, None).unwrap().len(), len);
            }
        }
    }

    #[test]
    fn quantile_interpolates() {
        let mut v = vec![4.0, 0.0, 2.0, 1.0, 3.0];
        assert_eq!(quantile(&mut v, 0.1), 0.4);
        assert_eq!(quantile(&mut v, 0.0), 0.0);
        assert_eq!(quantile(&mut v, 1.0), 4.0);
    }

    #[test]
    fn validation() {
        assert!(EnhancerKind::external("cp in out").validate().is_err());
        assert!(EnhancerKind::external("   ").validate().is_err());
        assert!(EnhancerKind::external("cp {in} {out}").validate().is_ok());
        assert!(EnhancerKind::Wiener { floor: 2.0 }.validate().is_err());
        assert!(EnhancerKind::from_name("external", None).is_err());
        assert!(EnhancerKind::from_name("thunder", None).is_err());
        assert_eq!(
            EnhancerKind::from_name("wiener", None).unwrap(),
            EnhancerKind::wiener()
        );
    }

    #[test]
    fn serde_tagging() {
        let k: EnhancerKind = toml::from_str("kind = \"wiener\"").unwrap();
        assert_eq!(k, EnhancerKind::wiener());
        let k: EnhancerKind =
            toml::from_str("kind = \"external\"\ncommand = \"cp {in} {out}\"\ntimeout_s = 5.0")
                .unwrap();
        assert_eq!(
            k,
            EnhancerKind::External {
                command: "cp {in} {out}".into(),
                timeout_s: 5.0
            }
        );
    }
}
