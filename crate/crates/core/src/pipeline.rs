//! Batch execution over a manifest: processing runs, score files, and sweeps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplify::{process_utterance, ExtractionMode};
use crate::audio::{crop_or_pad, read_audio, write_wav, WavEncoding, Waveform};
use crate::config::{derive_seed, PipelineConfig};
use crate::detector::{extract_features, fit, score, FeatureConfig, FeatureVector, GaussianModel};
use crate::error::{Error, Result};
use crate::manifest::ManifestEntry;
use crate::metrics::{eer, min_tdcf, report, Label, Report, ScoreRecord, TdcfParams};
use crate::noise::NoiseColor;

pub const RUN_LOG_NAME: &str = "run_log.tsv";
pub const OUTPUT_MANIFEST_NAME: &str = "manifest.tsv";

pub fn crop_seed(config: &PipelineConfig, utterance_id: &str) -> u64 {
    derive_seed(config.global_seed, utterance_id, "crop")
}

pub fn noise_seed(config: &PipelineConfig, utterance_id: &str) -> u64 {
    derive_seed(config.global_seed, utterance_id, "noise")
}

/// Runs `f` on a pool of exactly `threads` workers.
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Reads an entry's audio and crops or tiles it to the configured length.
pub fn load_cropped(entry: &ManifestEntry, config: &PipelineConfig) -> Result<Waveform> {
    let raw = read_audio(&entry.path)?;
    crop_or_pad(
        &raw,
        config.crop_seconds,
        crop_seed(config, &entry.utterance_id),
    )
}

/// Per-utterance quantities recorded in the run log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtteranceStats {
    pub projection_weight: f64,
    /// `‖x‖²`
    pub input_energy: f64,
    /// `‖x̂‖²`
    pub enhanced_energy: f64,
    /// `‖â‖²`
    pub residual_energy: f64,
}

#[derive(Debug, Clone)]
pub struct UtteranceOutcome {
    pub utterance_id: String,
    pub crop_seed: u64,
    pub noise_seed: u64,
    pub result: std::result::Result<UtteranceStats, String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub config_hash: String,
    pub outcomes: Vec<UtteranceOutcome>,
    pub log_path: PathBuf,
    pub manifest_path: PathBuf,
}

impl RunSummary {
    pub fn n_failed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }

    pub fn n_ok(&self) -> usize {
        self.outcomes.len() - self.n_failed()
    }
}

fn process_one(
    entry: &ManifestEntry,
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<(UtteranceStats, PathBuf)> {
    let x = load_cropped(entry, config)?;
    let p = process_utterance(&x, config, noise_seed(config, &entry.utterance_id))?;
    let out = out_dir.join(format!("{}.wav", entry.utterance_id));
    write_wav(&p.output, &out, WavEncoding::Float32)?;
    Ok((
        UtteranceStats {
            projection_weight: p.residual.projection_weight,
            input_energy: p.input_energy,
            enhanced_energy: p.enhanced_energy,
            residual_energy: p.residual.a_hat.energy(),
        },
        out,
    ))
}

fn one_line(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Processes every entry, writing `<utterance_id>.wav`, an output manifest of
/// the successful items, and a run log. Per-utterance failures are recorded,
/// not returned; check [`RunSummary::n_failed`].
pub fn run_pipeline(
    config: &PipelineConfig,
    entries: &[ManifestEntry],
    out_dir: impl AsRef<Path>,
) -> Result<RunSummary> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Unwritable {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let hash = config.hash();

    let results: Vec<Result<(UtteranceStats, PathBuf)>> = with_pool(config.parallelism, || {
        entries
            .par_iter()
            .map(|e| process_one(e, config, out_dir))
            .collect()
    })?;

    let mut outcomes = Vec::with_capacity(entries.len());
    let mut produced = Vec::new();
    for (entry, result) in entries.iter().zip(results) {
        let result = match result {
            Ok((stats, path)) => {
                produced.push(ManifestEntry {
                    path,
                    ..entry.clone()
                });
                Ok(stats)
            }
            Err(e) => {
                log::warn!("{}: {e}", entry.utterance_id);
                Err(one_line(&e.to_string()))
            }
        };
        outcomes.push(UtteranceOutcome {
            utterance_id: entry.utterance_id.clone(),
            crop_seed: crop_seed(config, &entry.utterance_id),
            noise_seed: noise_seed(config, &entry.utterance_id),
            result,
        });
    }

    let manifest_path = out_dir.join(OUTPUT_MANIFEST_NAME);
    write_annotated_manifest(&produced, &manifest_path, &hash)?;
    let log_path = out_dir.join(RUN_LOG_NAME);
    let summary = RunSummary {
        config_hash: hash,
        outcomes,
        log_path,
        manifest_path,
    };
    std::fs::write(&summary.log_path, render_run_log(&summary)).map_err(|source| {
        Error::Unwritable {
            path: summary.log_path.clone(),
            source,
        }
    })?;
    Ok(summary)
}

fn write_annotated_manifest(entries: &[ManifestEntry], path: &Path, hash: &str) -> Result<()> {
    crate::manifest::write_manifest(entries, path)?;
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, format!("# config_hash {hash}\n{body}")).map_err(|source| {
        Error::Unwritable {
            path: path.to_path_buf(),
            source,
        }
    })
}

/// Tab-separated; header comments carry the config hash and counts.
pub fn render_run_log(summary: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash\t{}", summary.config_hash);
    let _ = writeln!(out, "# utterances\t{}", summary.outcomes.len());
    let _ = writeln!(out, "# failed\t{}", summary.n_failed());
    out.push_str(
        "utterance_id\tstatus\tcrop_seed\tnoise_seed\tprojection_weight\tinput_energy\tenhanced_energy\tresidual_energy\tdetail\n",
    );
    for o in &summary.outcomes {
        match &o.result {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{}\tok\t{}\t{}\t{:e}\t{:e}\t{:e}\t{:e}\t-",
                    o.utterance_id,
                    o.crop_seed,
                    o.noise_seed,
                    s.projection_weight,
                    s.input_energy,
                    s.enhanced_energy,
                    s.residual_energy
                );
            }
            Err(msg) => {
                let _ = writeln!(
                    out,
                    "{}\tfailed\t{}\t{}\t-\t-\t-\t-\t{}",
                    o.utterance_id, o.crop_seed, o.noise_seed, msg
                );
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Score files

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub config_hash: Option<String>,
    pub records: Vec<ScoreRecord>,
}

/// Lines `utterance_id attack_id label score`, preceded by `# config_hash <hex>` when known.
pub fn write_scores(
    records: &[ScoreRecord],
    config_hash: Option<&str>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    if let Some(h) = config_hash {
        let _ = writeln!(out, "# config_hash {h}");
    }
    for r in records {
        let _ = writeln!(
            out,
            "{} {} {} {:e}",
            r.utterance_id, r.attack_id, r.label, r.score
        );
    }
    std::fs::write(path, out).map_err(|source| Error::Unwritable {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<ScoreFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config_hash = None;
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(h) = rest.trim().strip_prefix("config_hash") {
                config_hash = Some(h.trim().to_string());
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let malformed = |reason: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(malformed(format!(
                "expected 4 fields, found {}",
                fields.len()
            )));
        }
        let label: Label = fields[2].parse().map_err(|_| Error::UnknownKey {
            path: path.to_path_buf(),
            line,
            token: fields[2].to_string(),
        })?;
        let score: f64 = fields[3]
            .parse()
            .map_err(|_| malformed(format!("unparseable score {:?}", fields[3])))?;
        if score.is_nan() {
            return Err(malformed("score is NaN".into()));
        }
        records.push(ScoreRecord::new(fields[0], label, fields[1], score));
    }
    Ok(ScoreFile {
        config_hash,
        records,
    })
}

/// Concatenates score files; differing config hashes are refused unless `force`.
pub fn merge_scores(files: &[ScoreFile], force: bool) -> Result<Vec<ScoreRecord>> {
    if let Some(first) = files.first() {
        for f in &files[1..] {
            if f.config_hash != first.config_hash && !force {
                let show = |h: &Option<String>| h.clone().unwrap_or_else(|| "<none>".into());
                return Err(Error::HashMismatch(
                    show(&first.config_hash),
                    show(&f.config_hash),
                ));
            }
        }
    }
    Ok(files
        .iter()
        .flat_map(|f| f.records.iter().cloned())
        .collect())
}

/// Joins manifest labels to external scores. Returns the report and the
/// number of score ids not in the manifest.
pub fn score_external(
    manifest: &[ManifestEntry],
    scores: &[ScoreRecord],
    params: &TdcfParams,
    group_by_attack: bool,
) -> Result<(Report, usize)> {
    let mut by_id = std::collections::HashMap::with_capacity(scores.len());
    for s in scores {
        by_id.insert(s.utterance_id.as_str(), s.score);
    }
    let mut joined = Vec::with_capacity(manifest.len());
    for e in manifest {
        let s = by_id
            .get(e.utterance_id.as_str())
            .ok_or_else(|| Error::MissingScore(e.utterance_id.clone()))?;
        joined.push(ScoreRecord::new(&e.utterance_id, e.label, &e.attack_id, *s));
    }
    let known: std::collections::HashSet<&str> =
        manifest.iter().map(|e| e.utterance_id.as_str()).collect();
    let extras = by_id.keys().filter(|id| !known.contains(*id)).count();
    if extras > 0 {
        log::info!("ignored {extras} score ids absent from the manifest");
    }
    Ok((report(&joined, params, group_by_attack)?, extras))
}

// ---------------------------------------------------------------------------
// Detector training and evaluation

/// Cropped audio for a split, in manifest order.
pub fn load_split(
    entries: &[ManifestEntry],
    config: &PipelineConfig,
) -> Result<Vec<(ManifestEntry, Waveform)>> {
    with_pool(config.parallelism, || {
        entries
            .par_iter()
            .map(|e| Ok((e.clone(), load_cropped(e, config)?)))
            .collect()
    })?
}

/// Crops in-memory audio the same way [`load_cropped`] does.
pub fn crop_split(
    items: &[(ManifestEntry, Waveform)],
    config: &PipelineConfig,
) -> Result<Vec<(ManifestEntry, Waveform)>> {
    items
        .iter()
        .map(|(e, w)| {
            Ok((
                e.clone(),
                crop_or_pad(w, config.crop_seconds, crop_seed(config, &e.utterance_id))?,
            ))
        })
        .collect()
}

/// Pipeline outputs for already-cropped audio; the first failure is returned
/// with its utterance id.
pub fn process_split(
    items: &[(ManifestEntry, Waveform)],
    config: &PipelineConfig,
) -> Result<Vec<Waveform>> {
    config.validate()?;
    let results: Vec<Result<Waveform>> = with_pool(config.parallelism, || {
        items
            .par_iter()
            .map(|(e, x)| {
                process_utterance(x, config, noise_seed(config, &e.utterance_id))
                    .map(|p| p.output)
                    .map_err(|err| Error::Degenerate(format!("{}: {err}", e.utterance_id)))
            })
            .collect()
    })?;
    results.into_iter().collect()
}

pub fn features_split(
    audio: &[Waveform],
    features: &FeatureConfig,
    threads: usize,
) -> Result<Vec<FeatureVector>> {
    with_pool(threads, || {
        audio
            .par_iter()
            .map(|w| extract_features(w, features))
            .collect()
    })?
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub eer: f64,
    pub min_tdcf: f64,
    pub records: Vec<ScoreRecord>,
    pub model: GaussianModel,
}

/// Fits the detector on train features and scores the eval features.
pub fn train_and_score(
    train: &[(FeatureVector, Label)],
    eval_entries: &[ManifestEntry],
    eval_features: &[FeatureVector],
    features: FeatureConfig,
    params: &TdcfParams,
) -> Result<Evaluation> {
    let model = fit(train, features)?;
    let records = eval_entries
        .iter()
        .zip(eval_features)
        .map(|(e, f)| {
            Ok(ScoreRecord::new(
                &e.utterance_id,
                e.label,
                &e.attack_id,
                score(&model, f)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation {
        eer: eer(&records)?,
        min_tdcf: min_tdcf(&records, params)?,
        records,
        model,
    })
}

/// Train/eval evaluation on cropped audio. `config = None` is the raw baseline;
/// otherwise both splits go through the pipeline first.
pub fn evaluate_condition(
    train: &[(ManifestEntry, Waveform)],
    eval: &[(ManifestEntry, Waveform)],
    config: Option<&PipelineConfig>,
    threads: usize,
    features: FeatureConfig,
    params: &TdcfParams,
) -> Result<Evaluation> {
    let raw = |items: &[(ManifestEntry, Waveform)]| {
        items.iter().map(|(_, w)| w.clone()).collect::<Vec<_>>()
    };
    let (train_audio, eval_audio) = match config {
        None => (raw(train), raw(eval)),
        Some(c) => (process_split(train, c)?, process_split(eval, c)?),
    };
    let mut train_set: Vec<(FeatureVector, Label)> =
        features_split(&train_audio, &features, threads)?
            .into_iter()
            .zip(train.iter().map(|(e, _)| e.label))
            .collect();
    if config.is_some_and(|c| c.train_include_raw) {
        let extra = features_split(&raw(train), &features, threads)?;
        train_set.extend(extra.into_iter().zip(train.iter().map(|(e, _)| e.label)));
    }
    let eval_features = features_split(&eval_audio, &features, threads)?;
    let eval_entries: Vec<ManifestEntry> = eval.iter().map(|(e, _)| e.clone()).collect();
    train_and_score(&train_set, &eval_entries, &eval_features, features, params)
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    SnrDb,
    NoiseColor,
    ExtractionMode,
    SkipNoiseAddition,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NoiseColor => "noise_color",
            SweepAxis::ExtractionMode => "extraction_mode",
            SweepAxis::SkipNoiseAddition => "skip_noise_addition",
        }
    }

    /// `config` with this axis set to `value`.
    pub fn apply(self, config: &PipelineConfig, value: &str) -> Result<PipelineConfig> {
        let bad = || Error::InvalidParameter(format!("invalid {} value {value:?}", self.as_str()));
        let mut c = config.clone();
        match self {
            SweepAxis::Alpha => c.alpha = value.parse().map_err(|_| bad())?,
            SweepAxis::SnrDb => c.snr_db = value.parse().map_err(|_| bad())?,
            SweepAxis::NoiseColor => {
                c.noise_color = value.parse::<NoiseColor>().map_err(|_| bad())?
            }
            SweepAxis::ExtractionMode => {
                c.extraction_mode = value.parse::<ExtractionMode>().map_err(|_| bad())?
            }
            SweepAxis::SkipNoiseAddition => {
                c.skip_noise_addition = match value {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    _ => return Err(bad()),
                }
            }
        }
        Ok(c)
    }

    /// The grid used when no values are given.
    pub fn default_values(self) -> Vec<String> {
        let v: Vec<&str> = match self {
            SweepAxis::Alpha => vec![
                "0.2", "0.4", "0.6", "0.8", "1", "1.2", "1.4", "1.6", "1.8", "2",
            ],
            SweepAxis::SnrDb => vec!["-5", "0", "5", "10"],
            SweepAxis::NoiseColor => vec!["white", "pink", "violet"],
            SweepAxis::ExtractionMode => vec!["projection", "naive"],
            SweepAxis::SkipNoiseAddition => vec!["on", "off"],
        };
        v.into_iter().map(String::from).collect()
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepAxis::Alpha),
            "snr_db" => Ok(SweepAxis::SnrDb),
            "noise_color" => Ok(SweepAxis::NoiseColor),
            "extraction_mode" => Ok(SweepAxis::ExtractionMode),
            "skip_noise_addition" => Ok(SweepAxis::SkipNoiseAddition),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep axis {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub config_hash: Option<String>,
    pub eer: Option<f64>,
    pub min_tdcf: Option<f64>,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

pub const SWEEP_CSV_HEADER: &str = "axis,value,config_hash,eer,min_tdcf,status";

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_csv_line(&self) -> String {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.axis,
            self.value,
            self.config_hash.as_deref().unwrap_or(""),
            num(self.eer),
            num(self.min_tdcf),
            self.status.replace([',', '\n', '\r'], " ")
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// One row per value. Audio is loaded and cropped once; a cell whose pipeline
/// or detector fails is marked and the sweep moves on.
pub fn sweep(
    config: &PipelineConfig,
    train: &[ManifestEntry],
    eval: &[ManifestEntry],
    axis: SweepAxis,
    values: &[String],
    features: FeatureConfig,
    params: &TdcfParams,
) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let train_audio = load_split(train, config)?;
    let eval_audio = load_split(eval, config)?;
    sweep_loaded(
        config,
        &train_audio,
        &eval_audio,
        axis,
        values,
        features,
        params,
    )
}

/// [`sweep`] over audio that is already cropped.
pub fn sweep_loaded(
    config: &PipelineConfig,
    train: &[(ManifestEntry, Waveform)],
    eval: &[(ManifestEntry, Waveform)],
    axis: SweepAxis,
    values: &[String],
    features: FeatureConfig,
    params: &TdcfParams,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(values.len());
    for value in values {
        let cell = axis
            .apply(config, value)
            .and_then(|c| c.validate().map(|_| c))
            .and_then(|c| {
                let ev =
                    evaluate_condition(train, eval, Some(&c), c.parallelism, features, params)?;
                Ok((c.hash(), ev))
            });
        let row = match cell {
            Ok((hash, ev)) => SweepRow {
                axis: axis.as_str().into(),
                value: value.clone(),
                config_hash: Some(hash),
                eer: Some(ev.eer),
                min_tdcf: Some(ev.min_tdcf),
                status: "ok".into(),
            },
            Err(e) => {
                log::warn!("sweep cell {}={value} failed: {e}", axis.as_str());
                SweepRow {
                    axis: axis.as_str().into(),
                    value: value.clone(),
                    config_hash: None,
                    eer: None,
                    min_tdcf: None,
                    status: format!("failed: {e}"),
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_application() {
        let c = PipelineConfig::default();
        assert_eq!(SweepAxis::Alpha.apply(&c, "0.6").unwrap().alpha, 0.6);
        assert_eq!(SweepAxis::SnrDb.apply(&c, "-5").unwrap().snr_db, -5.0);
        assert_eq!(
            SweepAxis::NoiseColor
                .apply(&c, "violet")
                .unwrap()
                .noise_color,
            NoiseColor::Violet
        );
        assert!(
            SweepAxis::SkipNoiseAddition
                .apply(&c, "on")
                .unwrap()
                .skip_noise_addition
        );
        assert_eq!(
            SweepAxis::ExtractionMode
                .apply(&c, "naive")
                .unwrap()
                .extraction_mode,
            ExtractionMode::Naive
        );
        assert!(SweepAxis::Alpha.apply(&c, "lots").is_err());
        assert_eq!(SweepAxis::Alpha.default_values().len(), 10);
    }

    #[test]
    fn score_file_roundtrip_and_merge() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![
            ScoreRecord::new("a", Label::Bonafide, "-", 1.5),
            ScoreRecord::new("b", Label::Spoof, "A01", -0.1),
        ];
        let p = dir.path().join("s.txt");
        write_scores(&recs, Some("abc"), &p).unwrap();
        let f = read_scores(&p).unwrap();
        assert_eq!(f.records, recs);
        assert_eq!(f.config_hash.as_deref(), Some("abc"));

        let other = ScoreFile {
            config_hash: Some("def".into()),
            records: vec![],
        };
        assert!(matches!(
            merge_scores(&[f.clone(), other.clone()], false),
            Err(Error::HashMismatch(..))
        ));
        assert_eq!(merge_scores(&[f.clone(), other], true).unwrap().len(), 2);
        assert_eq!(merge_scores(&[f.clone(), f], false).unwrap().len(), 4);
    }

    #[test]
    fn unparseable_score_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        std::fs::write(&p, "a - bonafide 0.5\nb A01 spoof high\n").unwrap();
        assert!(matches!(
            read_scores(&p),
            Err(Error::MalformedLine { line: 2, .. })
        ));
    }

    #[test]
    fn external_scores_join() {
        let manifest = vec![
            ManifestEntry {
                utterance_id: "a".into(),
                path: "a.wav".into(),
                label: Label::Bonafide,
                attack_id: "-".into(),
            },
            ManifestEntry {
                utterance_id: "b".into(),
                path: "b.wav".into(),
                label: Label::Spoof,
                attack_id: "A01".into(),
            },
        ];
        let scores = vec![
            ScoreRecord::new("a", Label::Bonafide, "-", 2.0),
            ScoreRecord::new("b", Label::Spoof, "A01", 1.0),
            ScoreRecord::new("z", Label::Spoof, "A01", 0.0),
        ];
        let (rep, extras) =
            score_external(&manifest, &scores, &TdcfParams::default(), false).unwrap();
        assert_eq!(extras, 1);
        assert_eq!(rep.get("pooled", "eer_percent"), Some(0.0));
        match score_external(&manifest, &scores[1..], &TdcfParams::default(), false) {
            Err(Error::MissingScore(id)) => assert_eq!(id, "a"),
            other => panic!("{other:?}"),
        }
    }
}
