//! Residual extraction by orthogonal projection, residual amplification, and
//! the per-utterance composition of noise addition, enhancement, extraction
//! and amplification.
//!
//! The residual is taken against the *raw* utterance `x`, never the noisy
//! mixture: `â = x − w·x̂` with `w = (x·x̂)/‖x̂‖²`, which makes `â ⟂ x̂` and
//! removes any scale mismatch the enhancer introduces.

use serde::{Deserialize, Serialize};

use crate::audio::Waveform;
use crate::config::PipelineConfig;
use crate::enhance::enhance;
use crate::error::{Error, Result, Stage};
use crate::mixing::{add_noise_at_snr, MixSpec};
use crate::noise::{generate, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMode {
    #[default]
    Projection,
    /// Plain difference `x − x̂`; keeps any clean-speech component.
    Naive,
}

impl ExtractionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtractionMode::Projection => "projection",
            ExtractionMode::Naive => "naive",
        }
    }
}

impl std::fmt::Display for ExtractionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExtractionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(ExtractionMode::Projection),
            "naive" => Ok(ExtractionMode::Naive),
            other => Err(Error::InvalidParameter(format!(
                "unknown extraction mode {other:?} (expected projection or naive)"
            ))),
        }
    }
}

/// Extracted noise-plus-artifact signal and the projection weight used.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub a_hat: Waveform,
    pub projection_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifySpec {
    pub alpha: f64,
}

impl AmplifySpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and non-negative, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }
}

pub fn extract_residual(x: &Waveform, x_hat: &Waveform, mode: ExtractionMode) -> Result<Residual> {
    x.check_compatible(x_hat)?;
    let weight = match mode {
        ExtractionMode::Naive => 1.0,
        ExtractionMode::Projection => {
            let denom = x_hat.energy();
            if denom == 0.0 {
                return Err(Error::ZeroEnergy("enhanced signal"));
            }
            x.dot(x_hat)? / denom
        }
    };
    if !weight.is_finite() {
        return Err(Error::Degenerate(format!("projection weight is {weight}")));
    }
    let a_hat = x
        .samples()
        .iter()
        .zip(x_hat.samples())
        .map(|(a, b)| a - weight * b)
        .collect();
    Ok(Residual {
        a_hat: Waveform::new(a_hat, x.sample_rate())?,
        projection_weight: weight,
    })
}

/// `x̃ = x + α·â`; `α = 0` returns `x` exactly.
pub fn amplify(x: &Waveform, residual: &Residual, spec: AmplifySpec) -> Result<Waveform> {
    x.check_compatible(&residual.a_hat)?;
    if spec.alpha == 0.0 {
        return Ok(x.clone());
    }
    Waveform::new(
        x.samples()
            .iter()
            .zip(residual.a_hat.samples())
            .map(|(a, r)| a + spec.alpha * r)
            .collect(),
        x.sample_rate(),
    )
}

/// Everything produced for one utterance.
#[derive(Debug, Clone)]
pub struct Processed {
    pub output: Waveform,
    pub residual: Residual,
    /// `‖x‖²`
    pub input_energy: f64,
    /// `‖x̂‖²`
    pub enhanced_energy: f64,
}

impl Processed {
    /// `‖x‖²`, `w²‖x̂‖² + ‖â‖²` and their relative difference.
    pub fn pythagoras_gap(&self) -> f64 {
        let w = self.residual.projection_weight;
        let rhs = w * w * self.enhanced_energy + self.residual.a_hat.energy();
        (self.input_energy - rhs).abs() / self.input_energy.max(f64::MIN_POSITIVE)
    }
}

/// Noise addition, enhancement, extraction and amplification for one
/// (already cropped) utterance. `noise_seed` seeds the noise realization.
pub fn process_utterance(
    x: &Waveform,
    config: &PipelineConfig,
    noise_seed: u64,
) -> Result<Processed> {
    config.validate()?;
    let input_energy = x.energy();
    if input_energy == 0.0 {
        return Err(Error::ZeroEnergy("utterance"));
    }

    let y = if config.skip_noise_addition {
        x.clone()
    } else {
        let spec = NoiseSpec::new(config.noise_color, x.len(), x.sample_rate(), noise_seed)
            .map_err(|e| e.at(Stage::NoiseGeneration))?;
        let n = generate(&spec).map_err(|e| e.at(Stage::NoiseGeneration))?;
        let mix = MixSpec::new(config.snr_db).map_err(|e| e.at(Stage::NoiseAddition))?;
        add_noise_at_snr(x, &n, mix).map_err(|e| e.at(Stage::NoiseAddition))?
    };

    let x_hat = enhance(&config.enhancer, &y, Some(x)).map_err(|e| e.at(Stage::Enhancement))?;
    let residual =
        extract_residual(x, &x_hat, config.extraction_mode).map_err(|e| e.at(Stage::Extraction))?;
    let spec = AmplifySpec::new(config.alpha).map_err(|e| e.at(Stage::Amplification))?;
    let output = amplify(x, &residual, spec).map_err(|e| e.at(Stage::Amplification))?;

    Ok(Processed {
        output,
        residual,
        input_energy,
        enhanced_energy: x_hat.energy(),
    })
}
