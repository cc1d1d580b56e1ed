use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use artiboost_core::amplify::{amplify, extract_residual, AmplifySpec, ExtractionMode};
use artiboost_core::audio::{read_audio, write_wav, WavEncoding};
use artiboost_core::config::PipelineConfig;
use artiboost_core::detector::{extract_features, fit, score, FeatureConfig, GaussianModel};
use artiboost_core::enhance::EnhancerKind;
use artiboost_core::manifest::{
    load_manifest, recorded_config_hash, ManifestEntry, ManifestFormat,
};
use artiboost_core::metrics::{report, ScoreRecord, TdcfParams};
use artiboost_core::mixing::{add_noise_at_snr, MixSpec};
use artiboost_core::noise::{generate, NoiseColor, NoiseSpec};
use artiboost_core::pipeline::{
    merge_scores, read_scores, run_pipeline, score_external, sweep, sweep_csv, with_pool,
    write_scores, SweepAxis,
};
use artiboost_core::synth::{synth_corpus, ArtifactKind, SynthSpec};
use artiboost_core::Error;

const EXIT_PARTIAL: u8 = 1;
const EXIT_INVALID_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "artiboost",
    version,
    about = "Artifact amplification and spoof-detection evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate white, pink or violet noise.
    GenNoise {
        #[arg(long, default_value = "white")]
        color: NoiseColor,
        #[arg(long)]
        seconds: f64,
        #[arg(long, default_value_t = 16_000)]
        sample_rate: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "float32")]
        encoding: WavEncoding,
    },
    /// Mix seeded noise into a file at a target SNR.
    Mix {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "white")]
        noise_color: NoiseColor,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Residual of an input with respect to its enhanced version.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        enhanced: PathBuf,
        #[arg(long, default_value = "projection")]
        mode: ExtractionMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add a scaled residual back onto its input.
    Amplify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        residual: PathBuf,
        #[arg(long, default_value_t = artiboost_core::config::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline over a manifest.
    Process {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        manifest: ManifestArgs,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Fit the Gaussian detector on a labeled manifest.
    Fit {
        #[command(flatten)]
        manifest: ManifestArgs,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
    },
    /// Score a manifest with a fitted detector.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        manifest: ManifestArgs,
        #[arg(long)]
        out_scores: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
    },
    /// Evaluate the detector across values of one config field.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        eval: PathBuf,
        #[arg(long, default_value = "simple_tsv")]
        format: ManifestFormat,
        #[arg(long)]
        audio_root: Option<PathBuf>,
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated; defaults to the axis's standard grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<String>,
        #[arg(long)]
        tdcf: Option<PathBuf>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write a synthetic bona fide / spoof corpus with a manifest.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        n_bonafide: usize,
        #[arg(long, default_value_t = 10)]
        n_spoof: usize,
        #[arg(long, default_value_t = 4.0)]
        duration: f64,
        #[arg(long, default_value_t = 16_000)]
        sample_rate: u32,
        #[arg(long, default_value = "comb_filter")]
        artifact: ArtifactKind,
        #[arg(long, default_value_t = artiboost_core::synth::DEFAULT_STRENGTH)]
        strength: f64,
        #[arg(long, default_value_t = artiboost_core::synth::DEFAULT_COMB_DELAY)]
        comb_delay: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "synth")]
        prefix: String,
    },
    /// EER and min t-DCF from one or more score files.
    Report {
        #[arg(long = "scores", required = true, num_args = 1..)]
        scores: Vec<PathBuf>,
        /// Take labels from this manifest; every manifest id must be scored.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value = "simple_tsv")]
        format: ManifestFormat,
        #[arg(long)]
        audio_root: Option<PathBuf>,
        #[arg(long)]
        tdcf: Option<PathBuf>,
        #[arg(long)]
        by_attack: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Merge score files even when their config hashes differ.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args)]
struct ManifestArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "simple_tsv")]
    format: ManifestFormat,
    #[arg(long)]
    audio_root: Option<PathBuf>,
}

impl ManifestArgs {
    fn load(&self) -> anyhow::Result<Vec<ManifestEntry>> {
        load_manifest(&self.manifest, self.format, self.audio_root.as_deref())
            .with_context(|| format!("loading manifest {}", self.manifest.display()))
    }
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// identity, oracle_clean, spectral_subtraction, wiener or external.
    #[arg(long)]
    enhancer: Option<String>,
    /// Command template with `{in}` and `{out}` for the external enhancer.
    #[arg(long)]
    enhancer_cmd: Option<String>,
}

fn load_config(path: Option<&Path>, o: &Overrides) -> anyhow::Result<PipelineConfig> {
    let mut config = match path {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("config {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(p) = o.parallelism {
        config.parallelism = p;
    }
    if let Some(s) = o.seed {
        config.global_seed = s;
    }
    if let Some(a) = o.alpha {
        config.alpha = a;
    }
    match (&o.enhancer, &o.enhancer_cmd) {
        (Some(name), cmd) => {
            config.enhancer = EnhancerKind::from_name(name, cmd.as_deref())
                .map_err(|e| Error::Config(format!("enhancer: {e}")))?
        }
        (None, Some(cmd)) => config.enhancer = EnhancerKind::external(cmd.as_str()),
        (None, None) => {}
    }
    config.validate().map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })?;
    Ok(config)
}

fn load_tdcf(path: Option<&Path>) -> anyhow::Result<TdcfParams> {
    Ok(match path {
        Some(p) => {
            TdcfParams::load(p).with_context(|| format!("t-DCF parameters {}", p.display()))?
        }
        None => TdcfParams::default(),
    })
}

fn score_manifest(
    model: &GaussianModel,
    entries: &[ManifestEntry],
    threads: usize,
) -> anyhow::Result<Vec<ScoreRecord>> {
    use rayon::prelude::*;
    let scored: Vec<artiboost_core::Result<ScoreRecord>> = with_pool(threads, || {
        entries
            .par_iter()
            .map(|e| {
                let w = read_audio(&e.path)?;
                let f = extract_features(&w, &model.features)?;
                Ok(ScoreRecord::new(
                    &e.utterance_id,
                    e.label,
                    &e.attack_id,
                    score(model, &f)?,
                ))
            })
            .collect()
    })?;
    entries
        .iter()
        .zip(scored)
        .map(|(e, r)| r.with_context(|| format!("scoring {}", e.utterance_id)))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::GenNoise {
            color,
            seconds,
            sample_rate,
            seed,
            out,
            encoding,
        } => {
            let len = artiboost_core::audio::target_len(seconds, sample_rate);
            let noise = generate(&NoiseSpec::new(color, len, sample_rate, seed)?)?;
            write_wav(&noise, &out, encoding)?;
        }
        Command::Mix {
            input,
            noise_color,
            snr_db,
            seed,
            out,
        } => {
            let x = read_audio(&input)?;
            let n = generate(&NoiseSpec::new(
                noise_color,
                x.len(),
                x.sample_rate(),
                seed,
            )?)?;
            let y = add_noise_at_snr(&x, &n, MixSpec::new(snr_db)?)?;
            write_wav(&y, &out, WavEncoding::Float32)?;
        }
        Command::Extract {
            input,
            enhanced,
            mode,
            out,
        } => {
            let x = read_audio(&input)?;
            let x_hat = read_audio(&enhanced)?;
            let r = extract_residual(&x, &x_hat, mode)?;
            write_wav(&r.a_hat, &out, WavEncoding::Float32)?;
            println!("projection_weight\t{}", r.projection_weight);
            println!("residual_energy\t{}", r.a_hat.energy());
        }
        Command::Amplify {
            input,
            residual,
            alpha,
            out,
        } => {
            let x = read_audio(&input)?;
            let a_hat = read_audio(&residual)?;
            let r = artiboost_core::amplify::Residual {
                a_hat,
                projection_weight: f64::NAN,
            };
            write_wav(
                &amplify(&x, &r, AmplifySpec::new(alpha)?)?,
                &out,
                WavEncoding::Float32,
            )?;
        }
        Command::Process {
            config,
            manifest,
            out_dir,
            overrides,
        } => {
            let config = load_config(config.as_deref(), &overrides)?;
            let entries = manifest.load()?;
            let summary = run_pipeline(&config, &entries, &out_dir)?;
            eprintln!(
                "processed {} of {} utterances ({} failed); log at {}",
                summary.n_ok(),
                summary.outcomes.len(),
                summary.n_failed(),
                summary.log_path.display()
            );
            if summary.n_failed() > 0 {
                return Ok(ExitCode::from(EXIT_PARTIAL));
            }
        }
        Command::Fit {
            manifest,
            out_model,
            parallelism,
        } => {
            use rayon::prelude::*;
            let entries = manifest.load()?;
            let features = FeatureConfig::default();
            let extracted: Vec<artiboost_core::Result<_>> = with_pool(parallelism, || {
                entries
                    .par_iter()
                    .map(|e| Ok((extract_features(&read_audio(&e.path)?, &features)?, e.label)))
                    .collect()
            })?;
            let examples = entries
                .iter()
                .zip(extracted)
                .map(|(e, r)| r.with_context(|| format!("features of {}", e.utterance_id)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut model = fit(&examples, features)?;
            model.config_hash = recorded_config_hash(&manifest.manifest)?;
            model.save(&out_model)?;
        }
        Command::Score {
            model,
            manifest,
            out_scores,
            parallelism,
        } => {
            let model = GaussianModel::load(&model)?;
            let entries = manifest.load()?;
            let manifest_hash = recorded_config_hash(&manifest.manifest)?;
            if let (Some(m), Some(d)) = (&model.config_hash, &manifest_hash) {
                if m != d {
                    log::warn!("model was fit on config {m} but the manifest comes from {d}");
                }
            }
            let records = score_manifest(&model, &entries, parallelism)?;
            write_scores(
                &records,
                manifest_hash.or(model.config_hash).as_deref(),
                &out_scores,
            )?;
        }
        Command::Sweep {
            config,
            train,
            eval,
            format,
            audio_root,
            axis,
            values,
            tdcf,
            out,
            overrides,
        } => {
            let config = load_config(config.as_deref(), &overrides)?;
            let params = load_tdcf(tdcf.as_deref())?;
            let train = load_manifest(&train, format, audio_root.as_deref())?;
            let eval = load_manifest(&eval, format, audio_root.as_deref())?;
            let values = if values.is_empty() {
                axis.default_values()
            } else {
                values
            };
            let rows = sweep(
                &config,
                &train,
                &eval,
                axis,
                &values,
                FeatureConfig::default(),
                &params,
            )?;
            let csv = sweep_csv(&rows);
            match out {
                Some(p) => {
                    std::fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?
                }
                None => print!("{csv}"),
            }
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("{failed} of {} sweep cells failed", rows.len());
                return Ok(ExitCode::from(EXIT_PARTIAL));
            }
        }
        Command::Synth {
            out_dir,
            n_bonafide,
            n_spoof,
            duration,
            sample_rate,
            artifact,
            strength,
            comb_delay,
            seed,
            prefix,
        } => {
            let spec = SynthSpec {
                n_bonafide,
                n_spoof,
                duration_s: duration,
                sample_rate,
                artifact_kind: artifact,
                artifact_strength: strength,
                seed,
                id_prefix: prefix,
                comb_delay,
            };
            let manifest = synth_corpus(&spec, &out_dir)?;
            eprintln!("wrote {}", manifest.display());
        }
        Command::Report {
            scores,
            manifest,
            format,
            audio_root,
            tdcf,
            by_attack,
            csv,
            force,
        } => {
            let params = load_tdcf(tdcf.as_deref())?;
            let files = scores
                .iter()
                .map(|p| read_scores(p).with_context(|| format!("reading scores {}", p.display())))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let records = match merge_scores(&files, force) {
                Err(Error::HashMismatch(a, b)) => {
                    bail!("score files come from different configs ({a} vs {b}); pass --force to merge anyway")
                }
                other => other?,
            };
            let rep = match manifest {
                Some(m) => {
                    let entries = load_manifest(&m, format, audio_root.as_deref())?;
                    let (rep, extras) = score_external(&entries, &records, &params, by_attack)?;
                    if extras > 0 {
                        eprintln!("ignored {extras} scored ids not in the manifest");
                    }
                    rep
                }
                None => report(&records, &params, by_attack)?,
            };
            print!("{rep}");
            if let Some(p) = csv {
                std::fs::write(&p, rep.to_csv())
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain()
        .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Config(_))))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(EXIT_INVALID_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
