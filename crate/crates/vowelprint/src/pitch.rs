//! Fundamental-tone estimation, voicing decisions and track statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::FrameSpectrum;

/// Band over which voicing energy ratios are measured.
const VOICING_BAND: (f64, f64) = (60.0, 2500.0);

/// Number of harmonic product spectrum terms.
const HPS_TERMS: usize = 4;

/// Bins around a harmonic peak counted as that harmonic's energy.
const PEAK_NEIGHBORHOOD: usize = 2;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PitchConfig {
    pub f0_min: f64,
    pub f0_max: f64,
    /// Minimum harmonic-to-total energy ratio for a frame to count as voiced.
    pub voicing_threshold: f64,
}

impl Default for PitchConfig {
    /// [70, 350] is a superset of typical male (80-210) and female
    /// (150-320) speaking ranges.
    fn default() -> Self {
        Self {
            f0_min: 70.0,
            f0_max: 350.0,
            voicing_threshold: 0.5,
        }
    }
}

/// Per-frame fundamental estimate. `f0` is present exactly when `voiced`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchEstimate {
    pub f0: Option<f64>,
    /// Linear magnitude of the fundamental peak; 0 when unvoiced.
    pub intensity: f64,
    pub voiced: bool,
}

impl PitchEstimate {
    pub fn unvoiced() -> Self {
        Self {
            f0: None,
            intensity: 0.0,
            voiced: false,
        }
    }
}

/// Sequence of estimates plus dynamics statistics over the voiced frames.
/// Statistics are absent when fewer than 2 frames are voiced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PitchTrack {
    pub estimates: Vec<PitchEstimate>,
    pub f0_mean: Option<f64>,
    /// Population standard deviation over voiced frames, Hz.
    pub f0_deviation: Option<f64>,
    /// Least-squares slope of f0 over time, Hz/s.
    pub f0_slope: Option<f64>,
    /// Least-squares slope of fundamental intensity over time, 1/s.
    pub intensity_slope: Option<f64>,
}

/// Estimates the fundamental with a harmonic product spectrum over bin-center
/// candidates, refines the winner against the actual spectral peak, then
/// decides voicing from the share of band energy concentrated at harmonics.
pub fn estimate_pitch(spec: &FrameSpectrum, cfg: &PitchConfig) -> Result<PitchEstimate> {
    if spec.nyquist() < 2.0 * cfg.f0_max {
        return Err(Error::BandNotCovered {
            nyquist: spec.nyquist(),
            needed: 2.0 * cfg.f0_max,
        });
    }
    let max_mag = spec.magnitudes.iter().cloned().fold(0.0, f64::max);
    if max_mag <= 0.0 {
        return Ok(PitchEstimate::unvoiced());
    }

    let lo_bin = (cfg.f0_min / spec.bin_hz).ceil() as usize;
    let hi_bin = (cfg.f0_max / spec.bin_hz).floor() as usize;
    let floor = 1e-9 * max_mag;
    let mut best = (lo_bin, f64::NEG_INFINITY);
    for c in lo_bin..=hi_bin {
        let mut score = 0.0;
        for k in 1..=HPS_TERMS {
            // higher multiples of a bin-center candidate drift further from
            // the true harmonic, so widen the sampled window with k
            let r = (k + 1) / 2;
            let m = (k * c - r..=k * c + r)
                .map(|b| spec.magnitude_at(b))
                .fold(0.0, f64::max);
            score += (m + floor).ln();
        }
        if score > best.1 {
            best = (c, score);
        }
    }
    let candidate_hz = best.0 as f64 * spec.bin_hz;

    // candidate fundamentals: the product-spectrum winner snapped to the
    // strongest nearby bin, plus integer divisions of every strong spectral
    // peak (a vowel may carry no energy at the fundamental itself, leaving
    // it reachable only as harmonic / k)
    let win_lo = ((candidate_hz * 0.75) / spec.bin_hz).floor().max(1.0) as usize;
    let win_hi = (((candidate_hz * 1.25) / spec.bin_hz).ceil() as usize)
        .min(spec.magnitudes.len() - 2);
    let peak_bin = (win_lo..=win_hi)
        .max_by(|&a, &b| spec.magnitudes[a].partial_cmp(&spec.magnitudes[b]).unwrap())
        .unwrap_or(best.0);
    let mut candidates: Vec<(f64, f64)> = Vec::new(); // (f0, fundamental magnitude)
    let (hps_f0, hps_mag) = refine_bin(spec, peak_bin);
    candidates.push((hps_f0.clamp(cfg.f0_min, cfg.f0_max), hps_mag));
    if let Ok(peaks) =
        crate::spectral::pick_peaks(spec, cfg.f0_min, VOICING_BAND.1.min(spec.nyquist()), 6)
    {
        for p in peaks {
            let mut m = 1;
            while p.frequency / m as f64 >= cfg.f0_min {
                let f0 = p.frequency / m as f64;
                if f0 <= cfg.f0_max && !candidates.iter().any(|c| (c.0 - f0).abs() < 0.5) {
                    candidates.push((f0, fundamental_magnitude(spec, f0)));
                }
                m += 1;
            }
        }
    }

    // keep the candidate concentrating the most band energy at its
    // harmonics; near ties go to the highest f0, so a subharmonic (whose
    // multiples cover the true ones and then some) never wins
    let scored: Vec<(f64, f64, f64)> = candidates
        .iter()
        .map(|&(f0, mag)| (f0, mag, harmonic_energy_ratio(spec, f0)))
        .collect();
    let best_ratio = scored.iter().map(|s| s.2).fold(0.0, f64::max);
    if best_ratio <= cfg.voicing_threshold {
        return Ok(PitchEstimate::unvoiced());
    }
    let (f0, intensity, _) = scored
        .into_iter()
        .filter(|s| s.2 >= best_ratio - RATIO_TIE_TOLERANCE)
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .expect("at least one candidate reaches best_ratio");
    if intensity > 0.0 {
        Ok(PitchEstimate {
            f0: Some(f0),
            intensity,
            voiced: true,
        })
    } else {
        Ok(PitchEstimate::unvoiced())
    }
}

/// Ratio slack within which two fundamental candidates count as equally good.
const RATIO_TIE_TOLERANCE: f64 = 0.02;

/// Interpolated magnitude of the strongest bin within two bins of `f0`.
fn fundamental_magnitude(spec: &FrameSpectrum, f0: f64) -> f64 {
    let center = (f0 / spec.bin_hz).round() as usize;
    let lo = center.saturating_sub(2).max(1);
    let hi = (center + 2).min(spec.magnitudes.len().saturating_sub(2));
    if lo > hi {
        return 0.0;
    }
    let bin = (lo..=hi)
        .max_by(|&a, &b| spec.magnitudes[a].partial_cmp(&spec.magnitudes[b]).unwrap())
        .unwrap();
    refine_bin(spec, bin).1
}

fn refine_bin(spec: &FrameSpectrum, bin: usize) -> (f64, f64) {
    let m = spec.magnitudes[bin];
    let (l, r) = (spec.magnitude_at(bin.wrapping_sub(1)), spec.magnitude_at(bin + 1));
    if l <= 0.0 || m <= 0.0 || r <= 0.0 {
        return (bin as f64 * spec.bin_hz, m);
    }
    let (ll, cc, rr) = (l.ln(), m.ln(), r.ln());
    let denom = ll - 2.0 * cc + rr;
    if denom >= 0.0 {
        return (bin as f64 * spec.bin_hz, m);
    }
    let delta = (0.5 * (ll - rr) / denom).clamp(-0.5, 0.5);
    (
        (bin as f64 + delta) * spec.bin_hz,
        (cc - 0.25 * (ll - rr) * delta).exp(),
    )
}

/// Share of [60, 2500] Hz energy concentrated in small neighborhoods of the
/// strongest bin near each multiple of `f0`. Neighborhoods rather than raw
/// search windows keep broadband noise from passing as voiced.
fn harmonic_energy_ratio(spec: &FrameSpectrum, f0: f64) -> f64 {
    let band_lo = (VOICING_BAND.0 / spec.bin_hz).ceil() as usize;
    let band_hi = ((VOICING_BAND.1 / spec.bin_hz).floor() as usize).min(spec.magnitudes.len() - 1);
    if band_hi <= band_lo {
        return 0.0;
    }
    let total: f64 = spec.magnitudes[band_lo..=band_hi]
        .iter()
        .map(|m| m * m)
        .sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut counted = vec![false; band_hi + 1];
    let mut harmonic = 0.0;
    let mut k = 1;
    loop {
        let center = k as f64 * f0;
        if center > VOICING_BAND.1 {
            break;
        }
        // a fifth of a period: wide enough for interpolation error, narrow
        // enough that rational near-multiples of the true fundamental do not
        // catch real harmonics at their window edges
        let lo = (((center - f0 / 5.0) / spec.bin_hz).ceil() as usize).max(band_lo);
        let hi = (((center + f0 / 5.0) / spec.bin_hz).floor() as usize).min(band_hi);
        if lo <= hi {
            let peak = (lo..=hi)
                .max_by(|&a, &b| spec.magnitudes[a].partial_cmp(&spec.magnitudes[b]).unwrap())
                .unwrap();
            for bin in peak.saturating_sub(PEAK_NEIGHBORHOOD)..=(peak + PEAK_NEIGHBORHOOD).min(band_hi)
            {
                if bin >= band_lo && !counted[bin] {
                    counted[bin] = true;
                    harmonic += spec.magnitudes[bin] * spec.magnitudes[bin];
                }
            }
        }
        k += 1;
    }
    harmonic / total
}

/// Ordinary least-squares slope of `y` over `t`. `None` for fewer than 2 points.
pub(crate) fn ols_slope(t: &[f64], y: &[f64]) -> Option<f64> {
    if t.len() < 2 {
        return None;
    }
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (ti, yi) in t.iter().zip(y) {
        num += (ti - tm) * (yi - ym);
        den += (ti - tm) * (ti - tm);
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Builds dynamics statistics over voiced frames. Unvoiced gaps are skipped,
/// not interpolated.
pub fn track(estimates: Vec<PitchEstimate>, hop_seconds: f64) -> PitchTrack {
    let voiced: Vec<(f64, f64, f64)> = estimates
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.f0.map(|f0| (i as f64 * hop_seconds, f0, e.intensity)))
        .collect();
    if voiced.len() < 2 {
        return PitchTrack {
            estimates,
            f0_mean: None,
            f0_deviation: None,
            f0_slope: None,
            intensity_slope: None,
        };
    }
    let n = voiced.len() as f64;
    let mean = voiced.iter().map(|v| v.1).sum::<f64>() / n;
    let var = voiced.iter().map(|v| (v.1 - mean).powi(2)).sum::<f64>() / n;
    let times: Vec<f64> = voiced.iter().map(|v| v.0).collect();
    let f0s: Vec<f64> = voiced.iter().map(|v| v.1).collect();
    let ints: Vec<f64> = voiced.iter().map(|v| v.2).collect();
    PitchTrack {
        estimates,
        f0_mean: Some(mean),
        f0_deviation: Some(var.sqrt()),
        f0_slope: ols_slope(&times, &f0s),
        intensity_slope: ols_slope(&times, &ints),
    }
}

/// Intensity of the harmonic nearest `k * f0` relative to the fundamental.
///
/// Peaks weaker than 5% of the fundamental are treated as absent (ratio 0),
/// so windowing sidelobes do not masquerade as harmonics.
pub fn harmonic_ratio(spec: &FrameSpectrum, est: &PitchEstimate, k: u32) -> Result<f64> {
    assert!(k >= 2, "harmonic index must be >= 2");
    let f0 = est.f0.ok_or(Error::Unvoiced)?;
    let target = k as f64 * f0;
    if target > spec.nyquist() {
        return Err(Error::HarmonicAboveNyquist { k, freq: target });
    }
    let lo = (target - f0 / 2.0).max(0.0);
    let hi = (target + f0 / 2.0).min(spec.nyquist());
    let peaks = match crate::spectral::pick_peaks(spec, lo, hi, 16) {
        Ok(p) => p,
        Err(Error::EmptyBand { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let nearest = peaks
        .iter()
        .filter(|p| p.intensity >= 0.05 * est.intensity)
        .min_by(|a, b| {
            (a.frequency - target)
                .abs()
                .partial_cmp(&(b.frequency - target).abs())
                .unwrap()
        });
    Ok(nearest.map_or(0.0, |p| p.intensity / est.intensity))
}
