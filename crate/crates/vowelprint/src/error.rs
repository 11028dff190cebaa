use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed wav: {0}")]
    MalformedWav(String),
    #[error("unsupported wav encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("buffer shorter than one frame ({len} < {frame_length})")]
    BufferTooShort { len: usize, frame_length: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no local maximum in band [{lo}, {hi}] Hz")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("spectrum does not cover the requested band (nyquist {nyquist} Hz, needed {needed} Hz)")]
    BandNotCovered { nyquist: f64, needed: f64 },
    #[error("frame is unvoiced")]
    Unvoiced,
    #[error("harmonic {k} at {freq} Hz lies above nyquist")]
    HarmonicAboveNyquist { k: u32, freq: f64 },
    #[error("aligned inputs differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("segment has no voiced frames")]
    NoVoicedFrames,
    #[error("trend statistics unavailable (fewer than 3 voiced frames)")]
    TrendUnavailable,
    #[error("unknown english sound symbol: {0}")]
    UnknownSound(String),
    #[error("unknown vowel label: {0}")]
    UnknownVowel(String),
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("template file parse error at line {line}: {msg}")]
    TemplateParse { line: usize, msg: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
