use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage names used to annotate errors raised inside
/// [`crate::amplify::process_utterance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Crop,
    NoiseGeneration,
    NoiseAddition,
    Enhancement,
    Extraction,
    Amplification,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Crop => "crop",
            Stage::NoiseGeneration => "noise generation",
            Stage::NoiseAddition => "noise addition",
            Stage::Enhancement => "enhancement",
            Stage::Extraction => "residual extraction",
            Stage::Amplification => "amplification",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("malformed WAV header in {}: {reason}", path.display())]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("unsupported WAV encoding in {}: {format} with {bits} bits per sample", path.display())]
    UnsupportedEncoding {
        path: PathBuf,
        format: &'static str,
        bits: u16,
    },

    #[error("cannot write {}: {source}", path.display())]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: u32, right: u32 },

    #[error("{0} has zero energy")]
    ZeroEnergy(&'static str),

    /// The mixture equals the clean signal, so the SNR is +infinity.
    #[error("SNR out of range: mixture equals clean signal (infinite SNR)")]
    InfiniteSnr,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signal too short: {0}")]
    SignalTooShort(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("oracle_clean enhancer requires a reference clean signal")]
    MissingReference,

    #[error("external enhancer timed out after {timeout_s} s; stderr: {stderr}")]
    ExternalTimeout { timeout_s: f64, stderr: String },

    #[error("external enhancer exited with {status}; stderr: {stderr}")]
    ExternalFailed { status: String, stderr: String },

    #[error("external enhancer produced unusable output ({reason}); stderr: {stderr}")]
    ExternalOutput { reason: String, stderr: String },

    #[error("{stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("input contains only one class ({0}); both bona fide and spoof are required")]
    SingleClass(&'static str),

    #[error("degenerate t-DCF coefficients: C1 = {c1}, C2 = {c2} (both must be positive)")]
    DegenerateCoefficients { c1: f64, c2: f64 },

    #[error("feature dimension mismatch: model has {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{}:{line}: {reason}", path.display())]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{}: duplicate utterance id {id:?} on lines {first} and {second}", path.display())]
    DuplicateId {
        path: PathBuf,
        id: String,
        first: usize,
        second: usize,
    },

    #[error("{}:{line}: unknown key token {token:?}", path.display())]
    UnknownKey {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("utterance {0:?} has no score")]
    MissingScore(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("config hash mismatch: {0} vs {1} (use force to merge anyway)")]
    HashMismatch(String, String),

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
