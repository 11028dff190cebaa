//! Additive synthesis of test signals with known harmonic structure, plus
//! WAV output. These signals are the ground truth the analysis side is
//! validated against: every harmonic amplitude is analytically known.

use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{builtin_templates, Dominance, RussianVowel, UpShape, VowelTemplate};
use crate::error::{Error, Result};
use crate::harmonics::BandConfig;
use crate::signal_io::{AudioBuffer, MIN_SAMPLE_RATE};

/// How a formant bump's center moves over the signal duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    None,
    /// Linear glide to the target center.
    LinearTo(f64),
    /// Half-sine arc: reaches the target mid-signal and returns.
    SinusoidalTo(f64),
}

/// A Gaussian amplification bump over harmonic frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormantPeak {
    pub center: f64,
    pub bandwidth: f64,
    pub gain: f64,
    pub sweep: Sweep,
}

impl FormantPeak {
    pub fn fixed(center: f64, bandwidth: f64, gain: f64) -> Self {
        Self {
            center,
            bandwidth,
            gain,
            sweep: Sweep::None,
        }
    }

    fn center_at(&self, progress: f64) -> f64 {
        match self.sweep {
            Sweep::None => self.center,
            Sweep::LinearTo(c1) => self.center + (c1 - self.center) * progress,
            Sweep::SinusoidalTo(c1) => {
                self.center + (c1 - self.center) * (std::f64::consts::PI * progress).sin()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub f0_start: f64,
    pub f0_end: f64,
    pub duration: f64,
    pub sample_rate: u32,
    pub formants: Vec<FormantPeak>,
    pub noise_level: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.sample_rate < MIN_SAMPLE_RATE {
            return bad(format!("sample rate {} too low", self.sample_rate));
        }
        if !(self.duration > 0.0) {
            return bad(format!("duration {} must be positive", self.duration));
        }
        for f0 in [self.f0_start, self.f0_end] {
            if !(f0 > 0.0 && f0 <= nyquist / 4.0) {
                return bad(format!("f0 {f0} outside (0, nyquist/4]"));
            }
        }
        for f in &self.formants {
            if f.center >= nyquist || f.bandwidth <= 0.0 || f.gain < 0.0 {
                return bad(format!("bad formant peak {f:?}"));
            }
            if let Sweep::LinearTo(c) | Sweep::SinusoidalTo(c) = f.sweep {
                if c >= nyquist {
                    return bad(format!("sweep target {c} above nyquist"));
                }
            }
        }
        if self.noise_level < 0.0 {
            return bad("negative noise level".into());
        }
        Ok(())
    }
}

/// Renders the spec: a sum over harmonics k of `a_k(t) sin(2 pi k phi(t))`
/// where `phi` integrates the linearly interpolated instantaneous f0 and
/// `a_k(t)` stacks the Gaussian formant bumps evaluated at `k f0(t)`. Seeded
/// uniform noise is added on top and the result is peak-normalized to 0.9.
pub fn render(spec: &SynthSpec) -> Result<AudioBuffer> {
    spec.validate()?;
    let sr = spec.sample_rate as f64;
    let n = (spec.duration * sr).round() as usize;
    if n == 0 {
        return Err(Error::InvalidSpec("duration rounds to zero samples".into()));
    }
    let f0_hi = spec.f0_start.max(spec.f0_end);
    let k_max = ((0.48 * sr) / f0_hi).floor() as usize;

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / sr;
        let progress = t / spec.duration;
        let f0 = spec.f0_start + (spec.f0_end - spec.f0_start) * progress;
        // phase integral of the linear f0 ramp
        let phi = spec.f0_start * t + (spec.f0_end - spec.f0_start) * t * t / (2.0 * spec.duration);
        let mut s = 0.0;
        for k in 1..=k_max {
            let hf = k as f64 * f0;
            let mut a = 0.0;
            for fp in &spec.formants {
                let d = hf - fp.center_at(progress);
                a += fp.gain * (-d * d / (2.0 * fp.bandwidth * fp.bandwidth)).exp();
            }
            if a > 1e-12 {
                s += a * (2.0 * std::f64::consts::PI * k as f64 * phi).sin();
            }
        }
        samples.push(s);
    }
    if spec.noise_level > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for s in &mut samples {
            *s += rng.gen_range(-spec.noise_level..=spec.noise_level);
        }
    }
    let peak = samples.iter().map(|s| s.abs()).fold(0.0, f64::max);
    if peak > 0.0 {
        let scale = 0.9 / peak;
        for s in &mut samples {
            *s *= scale;
        }
    }
    AudioBuffer::new(samples, spec.sample_rate)
}

/// Multiple of `f0` closest to the template range, preferring multiples that
/// land inside it, then the one nearest the range midpoint.
fn pick_harmonic(f0: f64, range: (f64, f64)) -> u32 {
    let mid = (range.0 + range.1) / 2.0;
    let k0 = (mid / f0).round().max(1.0) as i64;
    let mut best: Option<(bool, f64, i64)> = None;
    for k in [k0 - 1, k0, k0 + 1] {
        if k < 1 {
            continue;
        }
        let freq = k as f64 * f0;
        let inside = freq >= range.0 && freq <= range.1;
        let dist = (freq - mid).abs();
        let cand = (inside, dist, k);
        let better = match best {
            None => true,
            Some((bin, bdist, _)) => (inside && !bin) || (inside == bin && dist < bdist),
        };
        if better {
            best = Some(cand);
        }
    }
    best.unwrap().2 as u32
}

/// Builds the synthesis spec used by [`render_vowel`]; exposed so tests can
/// inspect the chosen harmonic layout.
pub fn vowel_spec(
    label: RussianVowel,
    f0: f64,
    duration: f64,
    sample_rate: u32,
) -> Result<SynthSpec> {
    let tpl: VowelTemplate = builtin_templates()
        .into_iter()
        .find(|t| t.label == label)
        .expect("builtin template exists for every label");
    let bands = BandConfig::default();
    let bw = (0.25 * f0).min(50.0);
    let mut formants = Vec::new();

    // lower band: dominant harmonic near the template midpoint, with a
    // half-gain partner on the side that realizes the dominance relation
    let k_low = pick_harmonic(f0, tpl.low_range);
    formants.push(FormantPeak::fixed(k_low as f64 * f0, bw, 1.0));
    match tpl.low_dominance {
        Dominance::FirstOverSecond => {
            let partner = (k_low + 1) as f64 * f0;
            if partner <= bands.lower.1 - 10.0 {
                formants.push(FormantPeak::fixed(partner, bw, 0.5));
            }
        }
        Dominance::SecondOverFirst => {
            if k_low >= 2 {
                let partner = (k_low - 1) as f64 * f0;
                if partner >= bands.lower.0 {
                    formants.push(FormantPeak::fixed(partner, bw, 0.5));
                }
            }
        }
    }

    // upper band per template shape
    match tpl.up_shape {
        UpShape::TwoBands => {
            let r1 = tpl.up1_range.expect("two-band template has up1 range");
            let r2 = tpl.up2_range.expect("two-band template has up2 range");
            let k1 = pick_harmonic(f0, r1);
            let k2 = pick_harmonic(f0, r2);
            formants.push(FormantPeak::fixed(k1 as f64 * f0, bw, 1.0));
            if k2 != k1 {
                formants.push(FormantPeak::fixed(k2 as f64 * f0, bw, 0.5));
            }
        }
        UpShape::SingleBand => {
            let r1 = tpl.up1_range.expect("single-band template has up1 range");
            let k1 = pick_harmonic(f0, r1);
            formants.push(FormantPeak::fixed(k1 as f64 * f0, bw, 1.0));
        }
        UpShape::ConvexUp => {
            let (lo, hi) = tpl.up1_range.expect("convex template has up1 range");
            formants.push(FormantPeak {
                center: lo,
                bandwidth: 0.6 * f0,
                gain: 1.0,
                sweep: Sweep::SinusoidalTo(hi),
            });
        }
        UpShape::SecondOverFirst => {
            let r1 = tpl.up1_range.expect("template has up1 range");
            let k1 = pick_harmonic(f0, r1);
            formants.push(FormantPeak::fixed(k1 as f64 * f0, bw, 1.0));
            // weaker partner one harmonic down keeps the higher-frequency
            // peak dominant
            if k1 >= 2 && (k1 - 1) as f64 * f0 >= bands.upper.0 {
                formants.push(FormantPeak::fixed((k1 - 1) as f64 * f0, bw, 0.5));
            }
        }
    }

    Ok(SynthSpec {
        f0_start: f0,
        f0_end: f0,
        duration,
        sample_rate,
        formants,
        noise_level: 0.0,
        seed: 0,
    })
}

/// Renders a steady synthetic token of one Russian vowel, built from the
/// midpoints of its template ranges (a sweeping arc for the convex vowel).
pub fn render_vowel(
    label: RussianVowel,
    f0: f64,
    duration: f64,
    sample_rate: u32,
) -> Result<AudioBuffer> {
    render(&vowel_spec(label, f0, duration, sample_rate)?)
}

/// Writes 16-bit PCM mono RIFF/WAVE.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = wav_bytes(buffer)?;
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn wav_bytes(buffer: &AudioBuffer) -> Result<Vec<u8>> {
    if buffer.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let data_len = buffer.len() as u32 * 2;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&buffer.sample_rate.to_le_bytes());
    out.extend_from_slice(&(buffer.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &buffer.samples {
        // scale by 32768 (the same factor the reader divides by) so a
        // write/load round trip stays within half an LSB away from full scale
        let q = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    Ok(out)
}
