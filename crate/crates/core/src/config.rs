//! Pipeline configuration, its content hash, and per-utterance seed derivation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::amplify::ExtractionMode;
use crate::enhance::EnhancerKind;
use crate::error::{Error, Result};
use crate::noise::NoiseColor;

pub const DEFAULT_ALPHA: f64 = 1.4;
pub const DEFAULT_CROP_SECONDS: f64 = 4.0;
pub const DEFAULT_GLOBAL_SEED: u64 = 20_250_601;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_crop_seconds() -> f64 {
    DEFAULT_CROP_SECONDS
}
fn default_seed() -> u64 {
    DEFAULT_GLOBAL_SEED
}
fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub snr_db: f64,
    #[serde(default)]
    pub noise_color: NoiseColor,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_crop_seconds")]
    pub crop_seconds: f64,
    #[serde(default)]
    pub extraction_mode: ExtractionMode,
    /// Ablation: feed the raw utterance to the enhancer without added noise.
    #[serde(default)]
    pub skip_noise_addition: bool,
    #[serde(default = "default_seed")]
    pub global_seed: u64,
    /// Worker count; excluded from the config hash.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Sweep only: also train the detector on unprocessed audio.
    #[serde(default)]
    pub train_include_raw: bool,
    #[serde(default)]
    pub enhancer: EnhancerKind,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            snr_db: 0.0,
            noise_color: NoiseColor::White,
            alpha: DEFAULT_ALPHA,
            crop_seconds: DEFAULT_CROP_SECONDS,
            extraction_mode: ExtractionMode::Projection,
            skip_noise_addition: false,
            global_seed: DEFAULT_GLOBAL_SEED,
            parallelism: 1,
            train_include_raw: false,
            enhancer: EnhancerKind::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.snr_db.is_finite() {
            return Err(Error::Config(format!(
                "snr_db must be finite, got {}",
                self.snr_db
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.crop_seconds.is_finite() && self.crop_seconds > 0.0) {
            return Err(Error::Config(format!(
                "crop_seconds must be positive, got {}",
                self.crop_seconds
            )));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be >= 1".into()));
        }
        self.enhancer
            .validate()
            .map_err(|e| Error::Config(format!("enhancer: {e}")))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 over the canonical TOML form with `parallelism` normalized,
    /// so runs at different worker counts share a hash.
    pub fn hash(&self) -> String {
        let canonical = PipelineConfig {
            parallelism: 1,
            ..self.clone()
        };
        hex(&Sha256::digest(canonical.to_toml_string().as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Seed for one utterance and purpose, independent of processing order.
pub fn derive_seed(global_seed: u64, utterance_id: &str, purpose: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update((purpose.len() as u64).to_le_bytes());
    h.update(purpose.as_bytes());
    h.update(utterance_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}
