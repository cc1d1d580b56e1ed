//! Noise addition at a target SNR and WADA blind SNR estimation.

use serde::{Deserialize, Serialize};

use crate::audio::Waveform;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    pub snr_db: f64,
}

impl MixSpec {
    pub fn new(snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "SNR must be finite, got {snr_db}"
            )));
        }
        Ok(Self { snr_db })
    }
}

/// `y = x + sqrt(‖x‖² / (‖n‖² · 10^(snr/10))) · n`.
///
/// No clipping is applied; the result may leave `[-1, 1]`.
pub fn add_noise_at_snr(x: &Waveform, n: &Waveform, spec: MixSpec) -> Result<Waveform> {
    x.check_compatible(n)?;
    let ex = x.energy();
    if ex == 0.0 {
        return Err(Error::ZeroEnergy("utterance"));
    }
    let en = n.energy();
    if en == 0.0 {
        return Err(Error::ZeroEnergy("noise"));
    }
    let gain = (ex / (en * 10f64.powf(spec.snr_db / 10.0))).sqrt();
    Waveform::new(
        x.samples()
            .iter()
            .zip(n.samples())
            .map(|(a, b)| a + gain * b)
            .collect(),
        x.sample_rate(),
    )
}

const WADA_DB_MIN: f64 = -20.0;
const WADA_DB_MAX: f64 = 100.0;

/// `log(E|z|) − E[log|z|]` for a Gamma(0.4) speech amplitude plus Gaussian
/// noise, tabulated at integer SNRs from -20 dB to +100 dB.
#[rustfmt::skip]
const WADA_G: [f64; 121] = [
    0.40974774, 0.40986926, 0.40998566, 0.40969089, 0.40986186, 0.40999006, 0.41027138, 0.41052627,
    0.41101024, 0.41143264, 0.41231718, 0.41337272, 0.41526426, 0.41781920, 0.42077252, 0.42452799,
    0.42918886, 0.43510373, 0.44234195, 0.45161485, 0.46221153, 0.47491647, 0.48883809, 0.50509236,
    0.52353709, 0.54372088, 0.56532427, 0.58847532, 0.61346212, 0.63954496, 0.66750818, 0.69583724,
    0.72454762, 0.75414799, 0.78323148, 0.81240985, 0.84219775, 0.87166406, 0.90030504, 0.92880418,
    0.95655449, 0.98353490, 1.01047155, 1.03620950, 1.06136425, 1.08579312, 1.10948190, 1.13277995,
    1.15472826, 1.17627308, 1.19703503, 1.21671694, 1.23535898, 1.25364313, 1.27103891, 1.28718029,
    1.30302865, 1.31839527, 1.33294817, 1.34700935, 1.36057270, 1.37345513, 1.38577122, 1.39733504,
    1.40856397, 1.41959619, 1.42983624, 1.43958467, 1.44902176, 1.45804831, 1.46669568, 1.47486938,
    1.48269965, 1.49034339, 1.49748214, 1.50435106, 1.51076426, 1.51698915, 1.52290970, 1.52857800,
    1.53389835, 1.53912110, 1.54390650, 1.54858517, 1.55310776, 1.55744391, 1.56164927, 1.56566348,
    1.56938671, 1.57307767, 1.57654764, 1.57980083, 1.58304129, 1.58602496, 1.58880681, 1.59162477,
    1.59419690, 1.59693155, 1.59944600, 1.60185011, 1.60408668, 1.60627134, 1.60826199, 1.61004547,
    1.61192472, 1.61369656, 1.61534074, 1.61688905, 1.61838916, 1.61985374, 1.62135878, 1.62268119,
    1.62390423, 1.62513143, 1.62632463, 1.62740270, 1.62842767, 1.62945532, 1.63033070, 1.63128026,
    1.63204102,
];

/// Blind SNR estimate in dB, clamped to `[-20, 100]`.
///
/// Requires nonzero energy and at least 0.1 s of audio.
pub fn wada_snr_estimate(x: &Waveform) -> Result<f64> {
    const EPS: f64 = 1e-10;
    if x.duration_seconds() < 0.1 {
        return Err(Error::Degenerate(format!(
            "WADA-SNR needs at least 0.1 s of audio, got {:.4} s",
            x.duration_seconds()
        )));
    }
    let peak = x.samples().iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return Err(Error::Degenerate("silent input".into()));
    }

    let n = x.len() as f64;
    let (sum_abs, sum_log) = x.samples().iter().fold((0.0, 0.0), |(sa, sl), s| {
        let a = (s.abs() / peak).max(EPS);
        (sa + a, sl + a.ln())
    });
    let mean_abs = (sum_abs / n).max(EPS);
    let g = mean_abs.ln() - sum_log / n;

    Ok(interpolate_wada(g))
}

fn interpolate_wada(g: f64) -> f64 {
    // Largest knot whose tabulated value lies below `g`; the table is not
    // strictly monotone at its low end.
    let Some(idx) = WADA_G.iter().rposition(|&t| t < g) else {
        return WADA_DB_MIN;
    };
    if idx == WADA_G.len() - 1 {
        return WADA_DB_MAX;
    }
    let (g0, g1) = (WADA_G[idx], WADA_G[idx + 1]);
    let db0 = WADA_DB_MIN + idx as f64;
    (db0 + (g - g0) / (g1 - g0)).clamp(WADA_DB_MIN, WADA_DB_MAX)
}
