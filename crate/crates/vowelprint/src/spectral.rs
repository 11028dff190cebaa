//! Magnitude spectra and dominant-peak picking.
//!
//! Peak picking keeps only components that dominate their immediate
//! neighborhood, which is the masking behaviour the rest of the pipeline
//! builds on. Intensities are linear magnitudes throughout; dB shows up
//! only in reports.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::Frame;

/// One-sided magnitude spectrum of a single frame.
#[derive(Debug, Clone)]
pub struct FrameSpectrum {
    /// `frame_length / 2 + 1` non-negative magnitudes.
    pub magnitudes: Vec<f64>,
    /// Hz per bin (`sample_rate / frame_length`).
    pub bin_hz: f64,
    pub frame_index: usize,
}

impl FrameSpectrum {
    pub fn nyquist(&self) -> f64 {
        (self.magnitudes.len() - 1) as f64 * self.bin_hz
    }

    pub fn magnitude_at(&self, bin: usize) -> f64 {
        self.magnitudes.get(bin).copied().unwrap_or(0.0)
    }
}

/// A locally dominant spectral component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    /// Interpolated frequency in Hz.
    pub frequency: f64,
    /// Linear magnitude at the interpolated maximum.
    pub intensity: f64,
    /// Bin index of the raw maximum.
    pub bin: usize,
}

/// Magnitude DFT of a windowed frame.
pub fn spectrum(frame: &Frame) -> FrameSpectrum {
    let n = frame.samples.len();
    let mut buf: Vec<Complex<f64>> = frame
        .samples
        .iter()
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let magnitudes = buf[..n / 2 + 1].iter().map(|c| c.norm()).collect();
    FrameSpectrum {
        magnitudes,
        bin_hz: frame.sample_rate as f64 / n as f64,
        frame_index: frame.index,
    }
}

/// Quadratic interpolation of a peak through log-magnitudes at three bins.
///
/// Returns the sub-bin offset in [-0.5, 0.5] and the interpolated magnitude.
fn parabolic_refine(left: f64, center: f64, right: f64) -> (f64, f64) {
    if left <= 0.0 || center <= 0.0 || right <= 0.0 {
        return (0.0, center);
    }
    let (l, c, r) = (left.ln(), center.ln(), right.ln());
    let denom = l - 2.0 * c + r;
    if denom >= 0.0 {
        // not a curved maximum in log domain
        return (0.0, center);
    }
    let delta = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
    let value = c - 0.25 * (l - r) * delta;
    (delta, value.exp())
}

/// Picks local maxima inside `[band_lo, band_hi]`, strongest first, at most
/// `max_peaks` of them. Ties are broken toward the lower frequency.
pub fn pick_peaks(
    spec: &FrameSpectrum,
    band_lo: f64,
    band_hi: f64,
    max_peaks: usize,
) -> Result<Vec<SpectralPeak>> {
    assert!(
        band_lo >= 0.0 && band_lo < band_hi && band_hi <= spec.nyquist() + 1e-9,
        "band [{band_lo}, {band_hi}] outside spectrum"
    );
    let mut peaks = Vec::new();
    for bin in 1..spec.magnitudes.len().saturating_sub(1) {
        let freq = bin as f64 * spec.bin_hz;
        if freq < band_lo || freq > band_hi {
            continue;
        }
        let m = spec.magnitudes[bin];
        if m > spec.magnitudes[bin - 1] && m > spec.magnitudes[bin + 1] {
            let (delta, intensity) =
                parabolic_refine(spec.magnitudes[bin - 1], m, spec.magnitudes[bin + 1]);
            let frequency = ((bin as f64 + delta) * spec.bin_hz).clamp(band_lo, band_hi);
            if intensity > 0.0 {
                peaks.push(SpectralPeak {
                    frequency,
                    intensity,
                    bin,
                });
            }
        }
    }
    if peaks.is_empty() {
        return Err(Error::EmptyBand {
            lo: band_lo,
            hi: band_hi,
        });
    }
    peaks.sort_by(|a, b| {
        b.intensity
            .partial_cmp(&a.intensity)
            .unwrap()
            .then(a.frequency.partial_cmp(&b.frequency).unwrap())
    });
    peaks.truncate(max_peaks);
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_io::{frames, AudioBuffer, FrameConfig, Window};

    fn sine_frame(freq: f64, sample_rate: u32, len: usize, window: Window) -> Frame {
        let samples: Vec<f64> = (0..len)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / sample_rate as f64).sin())
            .collect();
        let buf = AudioBuffer::new(samples.iter().map(|s| s * 0.9).collect(), sample_rate).unwrap();
        let cfg = FrameConfig {
            frame_length: len,
            hop_length: len,
            window,
        };
        frames(&buf, &cfg).unwrap().remove(0)
    }

    /// Brute-force O(n^2) DFT magnitude, the independent oracle.
    pub(crate) fn naive_dft_magnitudes(samples: &[f64]) -> Vec<f64> {
        let n = samples.len();
        (0..n / 2 + 1)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, &s) in samples.iter().enumerate() {
                    let phase = -2.0 * std::f64::consts::PI * k as f64 * i as f64 / n as f64;
                    re += s * phase.cos();
                    im += s * phase.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn zero_frame_zero_spectrum() {
        let frame = Frame {
            index: 0,
            start_time: 0.0,
            samples: vec![0.0; 512],
            sample_rate: 16000,
        };
        let spec = spectrum(&frame);
        assert_eq!(spec.magnitudes.len(), 257);
        assert!(spec.magnitudes.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn dc_frame_concentrates_in_bin_zero() {
        let frame = Frame {
            index: 0,
            start_time: 0.0,
            samples: vec![0.25; 512],
            sample_rate: 16000,
        };
        let spec = spectrum(&frame);
        assert!((spec.magnitudes[0] - 0.25 * 512.0).abs() < 1e-9);
        assert!(spec.magnitudes[1..].iter().all(|&m| m < 1e-9));
    }

    #[test]
    fn sine_1000hz_matches_naive_dft() {
        let frame = sine_frame(1000.0, 16000, 512, Window::Rectangular);
        let spec = spectrum(&frame);
        let oracle = naive_dft_magnitudes(&frame.samples);
        let scale: f64 = oracle.iter().cloned().fold(0.0, f64::max);
        for (got, want) in spec.magnitudes.iter().zip(&oracle) {
            assert!((got - want).abs() <= 1e-6 * scale, "{got} vs {want}");
        }
        let argmax = spec
            .magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 32); // 1000 Hz at 31.25 Hz/bin
    }

    #[test]
    fn parseval_holds() {
        let frame = sine_frame(777.0, 16000, 1024, Window::Hann);
        let spec = spectrum(&frame);
        let time_energy: f64 = frame.samples.iter().map(|s| s * s).sum();
        let n = frame.samples.len();
        // reconstruct the two-sided energy from the one-sided magnitudes
        let mut spec_energy = spec.magnitudes[0].powi(2) + spec.magnitudes[n / 2].powi(2);
        for m in &spec.magnitudes[1..n / 2] {
            spec_energy += 2.0 * m * m;
        }
        spec_energy /= n as f64;
        assert!((time_energy - spec_energy).abs() <= 1e-6 * time_energy);
    }

    #[test]
    fn single_sine_yields_single_peak_in_band() {
        let frame = sine_frame(440.0, 16000, 4096, Window::Hann);
        let spec = spectrum(&frame);
        let peaks = pick_peaks(&spec, 60.0, 750.0, 8).unwrap();
        assert!((peaks[0].frequency - 440.0).abs() <= spec.bin_hz);
        // anything else in the band is leakage, far below the main peak
        for p in &peaks[1..] {
            assert!(p.intensity < 0.01 * peaks[0].intensity);
        }
    }

    #[test]
    fn all_zero_spectrum_is_empty_band() {
        let spec = FrameSpectrum {
            magnitudes: vec![0.0; 257],
            bin_hz: 16000.0 / 512.0,
            frame_index: 0,
        };
        assert!(matches!(
            pick_peaks(&spec, 60.0, 750.0, 4),
            Err(Error::EmptyBand { .. })
        ));
    }

    #[test]
    fn two_sines_ordered_by_intensity() {
        let sr = 16000u32;
        let samples: Vec<f64> = (0..4096)
            .map(|i| {
                let t = i as f64 / sr as f64;
                0.6 * (2.0 * std::f64::consts::PI * 300.0 * t).sin()
                    + 0.3 * (2.0 * std::f64::consts::PI * 500.0 * t).sin()
            })
            .collect();
        let buf = AudioBuffer::new(samples, sr).unwrap();
        let cfg = FrameConfig {
            frame_length: 4096,
            hop_length: 4096,
            window: Window::Hann,
        };
        let frame = frames(&buf, &cfg).unwrap().remove(0);
        let peaks = pick_peaks(&spectrum(&frame), 60.0, 750.0, 2).unwrap();
        assert!((peaks[0].frequency - 300.0).abs() < 4.0);
        assert!((peaks[1].frequency - 500.0).abs() < 4.0);
        assert!(peaks[0].intensity >= peaks[1].intensity);
    }

    #[test]
    fn interpolation_beats_raw_bin_on_off_center_sines() {
        let sr = 16000u32;
        let bin_hz = sr as f64 / 4096.0;
        for i in 0..20 {
            // frequencies deliberately between bin centers
            let freq = 200.0 + i as f64 * 27.3 + 0.37 * bin_hz;
            let frame = sine_frame(freq, sr, 4096, Window::Hann);
            let spec = spectrum(&frame);
            let peak = pick_peaks(&spec, 60.0, 2500.0, 1).unwrap()[0];
            let raw_err = (peak.bin as f64 * bin_hz - freq).abs();
            let interp_err = (peak.frequency - freq).abs();
            assert!(interp_err <= raw_err, "freq {freq}: {interp_err} > {raw_err}");
            assert!(interp_err < 0.2 * bin_hz);
        }
    }
}
