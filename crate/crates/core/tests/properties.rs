use artiboost_core::amplify::{amplify, extract_residual, AmplifySpec, ExtractionMode};
use artiboost_core::audio::{
    crop_or_pad, measure_snr, read_wav, target_len, write_wav, WavEncoding, Waveform,
};
use artiboost_core::mixing::{add_noise_at_snr, MixSpec};
use proptest::prelude::*;

const SR: u32 = 16_000;

fn signal(len: std::ops::Range<usize>) -> impl Strategy<Value = Waveform> {
    prop::collection::vec(-1.0f64..1.0, len)
        .prop_filter("needs energy", |v| {
            v.iter().map(|x| x * x).sum::<f64>() > 1e-3
        })
        .prop_map(|v| Waveform::new(v, SR).unwrap())
}

fn pair(len: std::ops::Range<usize>) -> impl Strategy<Value = (Waveform, Waveform)> {
    len.prop_flat_map(|n| (signal(n..n + 1), signal(n..n + 1)))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn mixing_hits_requested_snr((x, n) in pair(8..512), snr in -20.0f64..40.0) {
        let y = add_noise_at_snr(&x, &n, MixSpec::new(snr).unwrap()).unwrap();
        prop_assert!((measure_snr(&x, &y).unwrap() - snr).abs() < 1e-6);
    }

    #[test]
    fn mixing_is_scale_covariant((x, n) in pair(8..256), snr in -10.0f64..30.0, c in 0.01f64..100.0) {
        let spec = MixSpec::new(snr).unwrap();
        let y = add_noise_at_snr(&x, &n, spec).unwrap();
        let scaled_x = add_noise_at_snr(&x.scaled(c).unwrap(), &n, spec).unwrap();
        let scaled_n = add_noise_at_snr(&x, &n.scaled(c).unwrap(), spec).unwrap();
        let peak = y.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let expect: Vec<f64> = y.samples().iter().map(|v| v * c).collect();
        prop_assert!(max_abs_diff(scaled_x.samples(), &expect) <= 1e-9 * c * peak.max(1.0));
        prop_assert!(max_abs_diff(scaled_n.samples(), y.samples()) <= 1e-9 * peak.max(1.0));
    }

    #[test]
    fn projection_residual_is_orthogonal_and_energy_splits((x, x_hat) in pair(4..512)) {
        let r = extract_residual(&x, &x_hat, ExtractionMode::Projection).unwrap();
        let dot = r.a_hat.dot(&x_hat).unwrap();
        prop_assert!(dot.abs() <= 1e-9 * x.energy().sqrt() * x_hat.energy().sqrt());
        let w = r.projection_weight;
        let rhs = w * w * x_hat.energy() + r.a_hat.energy();
        prop_assert!((x.energy() - rhs).abs() <= 1e-9 * x.energy());
    }

    #[test]
    fn projection_ignores_estimate_scale((x, x_hat) in pair(4..256), c in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0]) {
        let a = extract_residual(&x, &x_hat, ExtractionMode::Projection).unwrap();
        let b = extract_residual(&x, &x_hat.scaled(c).unwrap(), ExtractionMode::Projection).unwrap();
        prop_assert!(max_abs_diff(a.a_hat.samples(), b.a_hat.samples()) <= 1e-9);
    }

    #[test]
    fn amplification_is_linear_in_alpha((x, x_hat) in pair(4..256), alpha in 0.0f64..3.0) {
        let r = extract_residual(&x, &x_hat, ExtractionMode::Projection).unwrap();
        let out = amplify(&x, &r, AmplifySpec::new(alpha).unwrap()).unwrap();
        for ((o, xv), a) in out.samples().iter().zip(x.samples()).zip(r.a_hat.samples()) {
            prop_assert!((o - xv - alpha * a).abs() <= 1e-12);
        }
    }

    #[test]
    fn float32_wav_roundtrip_is_exact(v in prop::collection::vec(-4.0f32..4.0, 1..300)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let w = Waveform::new(v.iter().map(|&s| f64::from(s)).collect(), 22_050).unwrap();
        write_wav(&w, &p, WavEncoding::Float32).unwrap();
        prop_assert_eq!(read_wav(&p).unwrap(), w);
    }

    #[test]
    fn pcm16_roundtrip_within_one_step(v in prop::collection::vec(-0.99f64..0.99, 1..300)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let w = Waveform::new(v, SR).unwrap();
        write_wav(&w, &p, WavEncoding::Pcm16).unwrap();
        let back = read_wav(&p).unwrap();
        prop_assert!(max_abs_diff(back.samples(), w.samples()) <= 0.5 / 32768.0 + 1e-12);
    }

    #[test]
    fn crop_always_yields_target_length(len in 1usize..5000, seconds in 0.01f64..0.4, seed: u64) {
        let w = Waveform::new((0..len).map(|i| (i as f64).sin()).collect(), SR).unwrap();
        let out = crop_or_pad(&w, seconds, seed).unwrap();
        prop_assert_eq!(out.len(), target_len(seconds, SR));
        prop_assert_eq!(out, crop_or_pad(&w, seconds, seed).unwrap());
    }
}
