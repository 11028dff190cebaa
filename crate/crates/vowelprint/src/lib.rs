//! Harmonic vowel analysis.
//!
//! The pipeline loads mono audio, slices it into windowed frames, estimates
//! the fundamental tone and voicing per frame, extracts the two most intense
//! harmonics in the lower (60-750 Hz) and upper (750-2500 Hz) bands, segments
//! the signal by voicing and formant dynamics, and classifies voiced segments
//! against rule templates for the six Russian stressed vowels, with an
//! English-sound correspondence table for cross-language comparison.

pub mod analysis;
pub mod classifier;
pub mod error;
pub mod harmonics;
pub mod pitch;
pub mod signal_io;
pub mod spectral;
pub mod synth;

pub use analysis::{analyze, AnalysisConfig, AnalysisReport};
pub use classifier::{
    builtin_templates, classify_frame, classify_segment, compare_analysis, correspondence,
    ClassificationResult, RussianVowel, VowelTemplate,
};
pub use error::{Error, Result};
pub use harmonics::{BandConfig, BandTrack, FrameHarmonics, Segment, Trend};
pub use pitch::{estimate_pitch, PitchConfig, PitchEstimate, PitchTrack};
pub use signal_io::{load_wav, AudioBuffer, Frame, FrameConfig, Window};
pub use spectral::{pick_peaks, spectrum, FrameSpectrum, SpectralPeak};
pub use synth::{render, render_vowel, write_wav, SynthSpec};
