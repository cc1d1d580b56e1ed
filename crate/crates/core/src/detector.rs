//! Stand-in countermeasure: spectral summary features scored by a
//! two-class diagonal-covariance Gaussian log-likelihood ratio.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::metrics::Label;
use crate::stft::{Stft, StftConfig};

pub const VARIANCE_FLOOR: f64 = 1e-6;
pub const MODEL_VERSION: u32 = 1;
const LOG_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub stft: StftConfig,
    pub n_bands: usize,
    pub f_min_hz: f64,
    /// Boundary of the high/low energy ratio.
    pub split_hz: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            n_bands: 24,
            f_min_hz: 50.0,
            split_hz: 4000.0,
        }
    }
}

impl FeatureConfig {
    /// Band log-energy means and variances, flatness, high/low ratio.
    pub fn dim(&self) -> usize {
        2 * self.n_bands + 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filters over one-sided bins; `filters[b][k]`.
fn mel_filterbank(n_bands: usize, n_bins: usize, sample_rate: u32, f_min: f64) -> Vec<Vec<f64>> {
    let nyquist = f64::from(sample_rate) / 2.0;
    let bin_hz = nyquist / (n_bins - 1) as f64;
    let (lo, hi) = (hz_to_mel(f_min), hz_to_mel(nyquist));
    let edges: Vec<f64> = (0..n_bands + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_bands + 1) as f64))
        .collect();
    (0..n_bands)
        .map(|b| {
            let (l, c, r) = (edges[b], edges[b + 1], edges[b + 2]);
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    if f <= l || f >= r {
                        0.0
                    } else if f <= c {
                        (f - l) / (c - l)
                    } else {
                        (r - f) / (r - c)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn extract_features(w: &Waveform, config: &FeatureConfig) -> Result<FeatureVector> {
    if w.len() < config.stft.window_length {
        return Err(Error::SignalTooShort(format!(
            "{} samples is shorter than one {}-sample frame",
            w.len(),
            config.stft.window_length
        )));
    }
    if config.n_bands == 0 {
        return Err(Error::InvalidParameter("n_bands must be positive".into()));
    }
    let stft = Stft::new(config.stft)?;
    let spec = stft.analyze(w.samples());
    let n_bins = config.stft.n_bins();
    let bin_hz = f64::from(w.sample_rate()) / config.stft.window_length as f64;
    let filters = mel_filterbank(config.n_bands, n_bins, w.sample_rate(), config.f_min_hz);
    let n_frames = spec.n_frames() as f64;

    let mut log_energy = vec![Vec::with_capacity(spec.n_frames()); config.n_bands];
    let mut flatness_sum = 0.0;
    let (mut high, mut low) = (0.0, 0.0);
    for frame in &spec.frames {
        let power: Vec<f64> = frame.iter().map(|c| c.norm_sqr()).collect();
        for (b, filter) in filters.iter().enumerate() {
            let e: f64 = filter.iter().zip(&power).map(|(f, p)| f * p).sum();
            log_energy[b].push((e + LOG_EPS).ln());
        }

        let ac = &power[1..];
        let log_mean = ac.iter().map(|p| (p + LOG_EPS).ln()).sum::<f64>() / ac.len() as f64;
        let mean = ac.iter().sum::<f64>() / ac.len() as f64 + LOG_EPS;
        flatness_sum += log_mean.exp() / mean;

        for (k, p) in power.iter().enumerate().skip(1) {
            if k as f64 * bin_hz >= config.split_hz {
                high += p;
            } else {
                low += p;
            }
        }
    }

    let mut values = Vec::with_capacity(config.dim());
    for band in &log_energy {
        let mean = band.iter().sum::<f64>() / n_frames;
        let var = band.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_frames;
        values.push(mean);
        values.push(var);
    }
    values.push(flatness_sum / n_frames);
    values.push(if low > 0.0 { high / low } else { 0.0 });
    Ok(FeatureVector(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl ClassStats {
    fn log_likelihood(&self, f: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.variance)
            .zip(f)
            .map(|((m, v), x)| {
                -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub version: u32,
    /// Hash of the pipeline config that produced the training audio, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub features: FeatureConfig,
    pub prior_bonafide: f64,
    pub prior_spoof: f64,
    pub bonafide: ClassStats,
    pub spoof: ClassStats,
}

fn lexicographic(a: &&FeatureVector, b: &&FeatureVector) -> Ordering {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn class_stats(mut rows: Vec<&FeatureVector>, dim: usize) -> ClassStats {
    // Canonical order makes the float sums independent of input order.
    rows.sort_by(lexicographic);
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in &rows {
        mean.iter_mut().zip(&r.0).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut variance = vec![0.0; dim];
    for r in &rows {
        variance
            .iter_mut()
            .zip(r.0.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    variance
        .iter_mut()
        .for_each(|s| *s = (*s / n).max(VARIANCE_FLOOR));
    ClassStats { mean, variance }
}

/// Per-class mean and (floored, maximum-likelihood) variance; priors from counts.
pub fn fit(examples: &[(FeatureVector, Label)], features: FeatureConfig) -> Result<GaussianModel> {
    let dim = features.dim();
    if let Some((f, _)) = examples.iter().find(|(f, _)| f.0.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: f.0.len(),
        });
    }
    let of = |label| -> Vec<&FeatureVector> {
        examples
            .iter()
            .filter(|(_, l)| *l == label)
            .map(|(f, _)| f)
            .collect()
    };
    let (bona, spoof) = (of(Label::Bonafide), of(Label::Spoof));
    if bona.is_empty() {
        return Err(Error::SingleClass("no bona fide training examples"));
    }
    if spoof.is_empty() {
        return Err(Error::SingleClass("no spoof training examples"));
    }
    if bona.len() < 2 || spoof.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 examples per class, got {} bona fide and {} spoof",
            bona.len(),
            spoof.len()
        )));
    }
    let total = (bona.len() + spoof.len()) as f64;
    Ok(GaussianModel {
        version: MODEL_VERSION,
        config_hash: None,
        features,
        prior_bonafide: bona.len() as f64 / total,
        prior_spoof: spoof.len() as f64 / total,
        bonafide: class_stats(bona, dim),
        spoof: class_stats(spoof, dim),
    })
}

/// `log p(f|bona fide) − log p(f|spoof) + log(P_bona / P_spoof)`.
pub fn score(model: &GaussianModel, f: &FeatureVector) -> Result<f64> {
    let expected = model.bonafide.mean.len();
    if f.0.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: f.0.len(),
        });
    }
    Ok(
        model.bonafide.log_likelihood(&f.0) - model.spoof.log_likelihood(&f.0)
            + (model.prior_bonafide / model.prior_spoof).ln(),
    )
}

impl GaussianModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = toml::to_string(self).map_err(|e| Error::Model(e.to_string()))?;
        std::fs::write(path, text).map_err(|source| Error::Unwritable {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: GaussianModel =
            toml::from_str(&text).map_err(|e| Error::Model(e.to_string()))?;
        if model.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        let dim = model.features.dim();
        for stats in [&model.bonafide, &model.spoof] {
            if stats.mean.len() != dim || stats.variance.len() != dim {
                return Err(Error::Model(
                    "class statistics do not match feature dimension".into(),
                ));
            }
            if stats
                .variance
                .iter()
                .any(|v| v.is_nan() || *v < VARIANCE_FLOOR)
            {
                return Err(Error::Model("variance below floor".into()));
            }
        }
        Ok(model)
    }
}
