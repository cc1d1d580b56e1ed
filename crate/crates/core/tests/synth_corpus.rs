use artiboost_core::manifest::{load_manifest, ManifestFormat};
use artiboost_core::metrics::Label;
use artiboost_core::noise::welch_psd;
use artiboost_core::synth::{
    inject_artifact, pseudo_speech, synth_corpus, ArtifactKind, SynthSpec,
};
use artiboost_core::Error;

/// Real cepstrum of a one-sided PSD, coefficients `0..max_q`.
fn cepstrum(psd: &[f64], max_q: usize) -> Vec<f64> {
    let n = 2 * (psd.len() - 1);
    (0..max_q)
        .map(|q| {
            psd.iter()
                .enumerate()
                .map(|(k, p)| {
                    let weight = if k == 0 || k == psd.len() - 1 {
                        1.0
                    } else {
                        2.0
                    };
                    weight * p.ln() * (2.0 * std::f64::consts::PI * (k * q) as f64 / n as f64).cos()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

#[test]
fn comb_ripple_period_follows_delay() {
    let strength = 0.3;
    for delay in [40usize, 100] {
        let bona = pseudo_speech(5, 32_000, 16_000).unwrap();
        let spoof = inject_artifact(&bona, ArtifactKind::CombFilter, strength, delay).unwrap();
        let (_, pb) = welch_psd(&bona).unwrap();
        let (_, ps) = welch_psd(&spoof).unwrap();
        let ratio: Vec<f64> = ps.iter().zip(&pb).map(|(s, b)| s / b).collect();
        let c = cepstrum(&ratio, 400);
        // log|1 + g·e^{-jωD}|² has cosine terms only at multiples of D,
        // with coefficient g at D itself.
        assert!(
            (c[delay] - strength).abs() < 0.02,
            "delay {delay}: c[D] = {}",
            c[delay]
        );
        for (q, v) in c.iter().enumerate().skip(1) {
            if q % delay != 0 {
                assert!(
                    v.abs() < 0.02,
                    "delay {delay}: stray ripple at quefrency {q}: {v}"
                );
            }
        }
        let cb = cepstrum(&pb, delay + 1);
        let cs = cepstrum(&ps, delay + 1);
        assert!(cs[delay] - cb[delay] > 0.25);
    }
}

#[test]
fn corpus_is_reproducible_and_labeled() {
    let spec = SynthSpec {
        n_bonafide: 3,
        n_spoof: 2,
        duration_s: 0.25,
        seed: 42,
        ..Default::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = synth_corpus(&spec, a.path()).unwrap();
    synth_corpus(&spec, b.path()).unwrap();

    let entries = load_manifest(&ma, ManifestFormat::SimpleTsv, None).unwrap();
    assert_eq!(entries.len(), 5);
    assert_eq!(
        entries.iter().filter(|e| e.label == Label::Spoof).count(),
        2
    );
    for e in &entries {
        let name = e.path.file_name().unwrap();
        let bytes_a = std::fs::read(&e.path).unwrap();
        let bytes_b = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{}", e.utterance_id);
        let expected_attack = if e.label == Label::Spoof {
            "comb_filter"
        } else {
            "-"
        };
        assert_eq!(e.attack_id, expected_attack);
    }
    assert_eq!(
        std::fs::read(&ma).unwrap(),
        std::fs::read(b.path().join("manifest.tsv")).unwrap()
    );

    let other = tempfile::tempdir().unwrap();
    synth_corpus(&SynthSpec { seed: 43, ..spec }, other.path()).unwrap();
    assert_ne!(
        std::fs::read(a.path().join("synth_00000.wav")).unwrap(),
        std::fs::read(other.path().join("synth_00000.wav")).unwrap()
    );
}

#[test]
fn unwritable_directory_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let r = synth_corpus(&SynthSpec::default(), blocker.join("corpus"));
    assert!(matches!(r, Err(Error::Unwritable { .. })), "{r:?}");
}
