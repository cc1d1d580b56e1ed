//! Artifact amplification for spoofed-speech detection.
//!
//! An utterance is mixed with seeded noise, passed through a speech
//! enhancer, and the component of the input orthogonal to the enhanced
//! estimate is scaled and added back. Around that sit noise generation,
//! a small Gaussian detector, EER / min t-DCF metrics, a synthetic corpus
//! generator and a batch runner.

pub mod amplify;
pub mod audio;
pub mod config;
pub mod detector;
pub mod enhance;
pub mod error;
pub mod manifest;
pub mod metrics;
pub mod mixing;
pub mod noise;
pub mod pipeline;
pub mod stft;
pub mod synth;

pub use error::{Error, Result, Stage};
