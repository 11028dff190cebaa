//! WAV loading and framing of audio into windowed analysis frames.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest sample rate the analysis bands support with some nyquist margin.
pub const MIN_SAMPLE_RATE: u32 = 8000;

/// Coarsest spectral resolution the framing is allowed to produce.
pub const MAX_BIN_HZ: f64 = 50.0;

/// Mono PCM audio, samples normalized to [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate < MIN_SAMPLE_RATE {
            return Err(Error::InvalidConfig(format!(
                "sample rate {sample_rate} below minimum {MIN_SAMPLE_RATE}"
            )));
        }
        if samples.iter().any(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::InvalidConfig(
                "samples must be finite and lie in [-1, 1]".into(),
            ));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
    Hamming,
}

impl Window {
    /// Window coefficients for a frame of `n` samples (periodic form).
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        use std::f64::consts::PI;
        (0..n)
            .map(|i| {
                let phase = 2.0 * PI * i as f64 / n as f64;
                match self {
                    Window::Rectangular => 1.0,
                    Window::Hann => 0.5 - 0.5 * phase.cos(),
                    Window::Hamming => 0.54 - 0.46 * phase.cos(),
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" => Ok(Window::Rectangular),
            "hann" => Ok(Window::Hann),
            "hamming" => Ok(Window::Hamming),
            other => Err(Error::InvalidConfig(format!("unknown window: {other}"))),
        }
    }
}

/// Frame slicing parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrameConfig {
    pub frame_length: usize,
    pub hop_length: usize,
    pub window: Window,
}

impl Default for FrameConfig {
    /// 4096/1024 at 16 kHz gives 3.9 Hz bins, narrow enough for the
    /// 100 Hz-wide template ranges, and covers two 80 Hz periods.
    fn default() -> Self {
        Self {
            frame_length: 4096,
            hop_length: 1024,
            window: Window::Hann,
        }
    }
}

impl FrameConfig {
    fn validate(&self, sample_rate: u32) -> Result<()> {
        if self.hop_length == 0 || self.hop_length > self.frame_length {
            return Err(Error::InvalidConfig(format!(
                "hop length {} must satisfy 0 < hop <= frame length {}",
                self.hop_length, self.frame_length
            )));
        }
        let bin_hz = sample_rate as f64 / self.frame_length as f64;
        if bin_hz > MAX_BIN_HZ {
            return Err(Error::InvalidConfig(format!(
                "frame length {} yields {bin_hz:.1} Hz bins (max {MAX_BIN_HZ})",
                self.frame_length
            )));
        }
        Ok(())
    }
}

/// One windowed analysis frame.
#[derive(Debug, Clone)]
pub struct Frame {
    pub index: usize,
    pub start_time: f64,
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

/// Slices `buffer` into overlapping frames, each multiplied by the window.
///
/// Frame count is `floor((len - frame_length) / hop_length) + 1`.
pub fn frames(buffer: &AudioBuffer, cfg: &FrameConfig) -> Result<Vec<Frame>> {
    cfg.validate(buffer.sample_rate)?;
    if buffer.len() < cfg.frame_length {
        return Err(Error::BufferTooShort {
            len: buffer.len(),
            frame_length: cfg.frame_length,
        });
    }
    let coeffs = cfg.window.coefficients(cfg.frame_length);
    let count = (buffer.len() - cfg.frame_length) / cfg.hop_length + 1;
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let start = index * cfg.hop_length;
        let samples = buffer.samples[start..start + cfg.frame_length]
            .iter()
            .zip(&coeffs)
            .map(|(s, w)| s * w)
            .collect();
        out.push(Frame {
            index,
            start_time: start as f64 / buffer.sample_rate as f64,
            samples,
            sample_rate: buffer.sample_rate,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// WAV reading

const FMT_PCM: u16 = 1;
const FMT_IEEE_FLOAT: u16 = 3;

struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Loads a RIFF/WAVE file with 16-bit PCM or 32-bit float samples, 1 or 2
/// channels. Stereo is averaged down to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_wav(&bytes)
}

pub fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedWav("missing RIFF/WAVE header".into()));
    }
    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        if body_start + size > bytes.len() {
            return Err(Error::MalformedWav(format!(
                "chunk {:?} overruns file",
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[body_start..body_start + size];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::MalformedWav("fmt chunk too small".into()));
                }
                fmt = Some(FmtChunk {
                    format: u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    channels: u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    sample_rate: u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    bits_per_sample: u16::from_le_bytes(body[14..16].try_into().unwrap()),
                });
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word-aligned
        pos = body_start + size + (size & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::MalformedWav("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::MalformedWav("missing data chunk".into()))?;
    if fmt.channels == 0 || fmt.channels > 2 {
        return Err(Error::UnsupportedEncoding(format!(
            "{} channels",
            fmt.channels
        )));
    }
    let samples = match (fmt.format, fmt.bits_per_sample) {
        (FMT_PCM, 16) => decode_i16(data),
        (FMT_IEEE_FLOAT, 32) => decode_f32(data),
        (f, b) => {
            return Err(Error::UnsupportedEncoding(format!(
                "format tag {f}, {b} bits per sample"
            )))
        }
    }?;
    let mono = if fmt.channels == 2 {
        samples
            .chunks_exact(2)
            .map(|p| 0.5 * (p[0] + p[1]))
            .collect()
    } else {
        samples
    };
    if mono.is_empty() {
        return Err(Error::EmptyAudio);
    }
    AudioBuffer::new(mono, fmt.sample_rate)
}

fn decode_i16(data: &[u8]) -> Result<Vec<f64>> {
    if data.len() % 2 != 0 {
        return Err(Error::MalformedWav("odd data chunk size for 16-bit".into()));
    }
    Ok(data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect())
}

fn decode_f32(data: &[u8]) -> Result<Vec<f64>> {
    if data.len() % 4 != 0 {
        return Err(Error::MalformedWav("data chunk size for 32-bit".into()));
    }
    Ok(data
        .chunks_exact(4)
        .map(|b| (f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64).clamp(-1.0, 1.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wav_bytes_i16(samples: &[i16], sample_rate: u32, channels: u16) -> Vec<u8> {
        let data_len = samples.len() * 2;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&sample_rate.to_le_bytes());
        out.extend_from_slice(&(sample_rate * channels as u32 * 2).to_le_bytes());
        out.extend_from_slice(&(channels * 2).to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data_len as u32).to_le_bytes());
        for s in samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    #[test]
    fn silence_decodes_to_zeros() {
        let buf = parse_wav(&wav_bytes_i16(&[0; 100], 16000, 1)).unwrap();
        assert_eq!(buf.len(), 100);
        assert!(buf.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn i16_normalization_divisor_is_32768() {
        let buf = parse_wav(&wav_bytes_i16(&[32767, -32768], 16000, 1)).unwrap();
        assert_eq!(buf.samples[0], 32767.0 / 32768.0);
        assert_eq!(buf.samples[1], -1.0);
    }

    #[test]
    fn stereo_is_averaged() {
        let buf = parse_wav(&wav_bytes_i16(&[16384, -16384, 8192, 8192], 16000, 2)).unwrap();
        assert_eq!(buf.len(), 2);
        assert!(buf.samples[0].abs() < 1e-12);
        assert!((buf.samples[1] - 8192.0 / 32768.0).abs() < 1e-12);
    }

    #[test]
    fn bad_magic_is_malformed() {
        let err = parse_wav(b"RIFXxxxxWAVE").unwrap_err();
        assert!(matches!(err, Error::MalformedWav(_)));
    }

    #[test]
    fn compressed_format_is_unsupported() {
        let mut bytes = wav_bytes_i16(&[0; 10], 16000, 1);
        bytes[20] = 85; // format tag -> mp3
        assert!(matches!(
            parse_wav(&bytes),
            Err(Error::UnsupportedEncoding(_))
        ));
    }

    #[test]
    fn zero_samples_is_empty_audio() {
        let bytes = wav_bytes_i16(&[], 16000, 1);
        assert!(matches!(parse_wav(&bytes), Err(Error::EmptyAudio)));
    }

    #[test]
    fn frame_count_formula() {
        let buf = AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        let cfg = FrameConfig {
            frame_length: 1024,
            hop_length: 512,
            window: Window::Rectangular,
        };
        let fs = frames(&buf, &cfg).unwrap();
        assert_eq!(fs.len(), 30);
        assert_eq!(fs[3].start_time, 3.0 * 512.0 / 16000.0);
    }

    #[test]
    fn rectangular_window_is_identity() {
        let samples: Vec<f64> = (0..2048).map(|i| ((i * 7919) % 100) as f64 / 100.0).collect();
        let buf = AudioBuffer::new(samples.clone(), 16000).unwrap();
        let cfg = FrameConfig {
            frame_length: 1024,
            hop_length: 1024,
            window: Window::Rectangular,
        };
        let fs = frames(&buf, &cfg).unwrap();
        assert_eq!(fs[0].samples, samples[..1024]);
        assert_eq!(fs[1].samples, samples[1024..]);
    }

    #[test]
    fn hann_window_on_constant_signal() {
        let buf = AudioBuffer::new(vec![1.0; 1024], 16000).unwrap();
        let cfg = FrameConfig {
            frame_length: 1024,
            hop_length: 1024,
            window: Window::Hann,
        };
        let fs = frames(&buf, &cfg).unwrap();
        let coeffs = Window::Hann.coefficients(1024);
        assert_eq!(fs[0].samples, coeffs);
        let sum: f64 = fs[0].samples.iter().sum();
        let wsum: f64 = coeffs.iter().sum();
        assert!((sum - wsum).abs() < 1e-9);
    }

    #[test]
    fn too_short_buffer_rejected() {
        let buf = AudioBuffer::new(vec![0.0; 100], 16000).unwrap();
        let cfg = FrameConfig::default();
        assert!(matches!(
            frames(&buf, &cfg),
            Err(Error::BufferTooShort { .. })
        ));
    }

    #[test]
    fn coarse_resolution_rejected() {
        let buf = AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        let cfg = FrameConfig {
            frame_length: 256, // 62.5 Hz bins at 16 kHz
            hop_length: 128,
            window: Window::Hann,
        };
        assert!(matches!(frames(&buf, &cfg), Err(Error::InvalidConfig(_))));
    }
}
