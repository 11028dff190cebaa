//! The five-parameter stressed-vowel descriptor: voicing plus the two most
//! intense harmonics in each of the lower and upper bands, band tracks with
//! trend classification, and segmentation by voicing and formant dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::{ols_slope, PitchEstimate, PitchTrack};
use crate::spectral::{pick_peaks, FrameSpectrum, SpectralPeak};

/// Peaks weaker than this fraction of their band's strongest peak are
/// treated as absent. Filters window-leakage sidelobes, which sit around
/// -31 dB for hann.
const RELATIVE_PEAK_FLOOR: f64 = 0.05;

const MAX_BAND_PEAKS: usize = 16;

/// Lower/upper analysis bands in Hz.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BandConfig {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            lower: (60.0, 750.0),
            upper: (750.0, 2500.0),
        }
    }
}

impl BandConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lower.0 >= self.lower.1 || self.upper.0 >= self.upper.1 {
            return Err(Error::InvalidConfig("band edges must be increasing".into()));
        }
        if self.lower.1 > self.upper.0 {
            return Err(Error::InvalidConfig(
                "lower band must not overlap upper band".into(),
            ));
        }
        Ok(())
    }
}

/// Per-frame descriptor: voicing flag and dominant harmonics per band,
/// intensity-ordered. Absent peaks are genuinely absent, never sentinels.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrameHarmonics {
    pub voiced: bool,
    pub low1: Option<SpectralPeak>,
    pub low2: Option<SpectralPeak>,
    pub up1: Option<SpectralPeak>,
    pub up2: Option<SpectralPeak>,
}

impl FrameHarmonics {
    pub fn unvoiced() -> Self {
        Self {
            voiced: false,
            low1: None,
            low2: None,
            up1: None,
            up2: None,
        }
    }
}

/// Shape of the dominant upper-band harmonic over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Rising,
    Falling,
    Flat,
    ConvexUp,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrendConfig {
    /// Hz/s below which a linear trend counts as flat.
    pub slope_threshold: f64,
    /// Hz/s^2 of downward curvature required for a convex-up call.
    pub curvature_threshold: f64,
    /// Fractional residual improvement the quadratic fit must deliver
    /// over the linear fit before curvature is trusted.
    pub residual_improvement: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            slope_threshold: 100.0,
            curvature_threshold: 100.0,
            residual_improvement: 0.2,
        }
    }
}

/// Frame harmonics over time plus the trend of the dominant upper harmonic.
/// Trend is absent with fewer than 3 usable voiced frames.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandTrack {
    pub frames: Vec<FrameHarmonics>,
    pub hop_seconds: f64,
    pub trend_up1: Option<Trend>,
    /// Slope in Hz/s for rising/falling/flat, curvature in Hz/s^2 for convex.
    pub trend_strength: Option<f64>,
}

impl BandTrack {
    pub fn voiced_up1_mean(&self) -> Option<f64> {
        let vals: Vec<f64> = self
            .frames
            .iter()
            .filter(|f| f.voiced)
            .filter_map(|f| f.up1.map(|p| p.frequency))
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

/// Half-open frame range with a voicing flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start_frame: usize,
    pub end_frame: usize,
    pub voiced: bool,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Hz of frame-to-frame formant movement that opens a new segment.
    pub jump_threshold: f64,
    /// Segments shorter than this are merged into their neighbor.
    pub min_segment_frames: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            jump_threshold: 200.0,
            min_segment_frames: 3,
        }
    }
}

/// Extracts the dual-band descriptor for one frame.
///
/// Peaks must be harmonically plausible: within f0/2 of an integer multiple
/// of the estimated fundamental, and above the relative intensity floor.
pub fn extract_frame_harmonics(
    spec: &FrameSpectrum,
    pitch: &PitchEstimate,
    bands: &BandConfig,
) -> Result<FrameHarmonics> {
    bands.validate()?;
    if spec.nyquist() < bands.upper.1 {
        return Err(Error::BandNotCovered {
            nyquist: spec.nyquist(),
            needed: bands.upper.1,
        });
    }
    let f0 = match pitch.f0 {
        Some(f0) if pitch.voiced => f0,
        _ => return Ok(FrameHarmonics::unvoiced()),
    };
    let (low1, low2) = band_pair(spec, bands.lower, f0)?;
    let (up1, up2) = band_pair(spec, bands.upper, f0)?;
    Ok(FrameHarmonics {
        voiced: true,
        low1,
        low2,
        up1,
        up2,
    })
}

fn band_pair(
    spec: &FrameSpectrum,
    band: (f64, f64),
    f0: f64,
) -> Result<(Option<SpectralPeak>, Option<SpectralPeak>)> {
    let peaks = match pick_peaks(spec, band.0, band.1, MAX_BAND_PEAKS) {
        Ok(p) => p,
        Err(Error::EmptyBand { .. }) => return Ok((None, None)),
        Err(e) => return Err(e),
    };
    let strongest = peaks[0].intensity;
    let mut gated = peaks.into_iter().filter(|p| {
        let k = (p.frequency / f0).round();
        k >= 1.0
            && (p.frequency - k * f0).abs() <= f0 / 2.0
            && p.intensity >= RELATIVE_PEAK_FLOOR * strongest
    });
    Ok((gated.next(), gated.next()))
}

/// Classifies the up1 frequency trajectory over voiced frames.
pub fn band_track(frames: Vec<FrameHarmonics>, hop_seconds: f64, cfg: &TrendConfig) -> BandTrack {
    let pts: Vec<(f64, f64)> = frames
        .iter()
        .enumerate()
        .filter(|(_, f)| f.voiced)
        .filter_map(|(i, f)| f.up1.map(|p| (i as f64 * hop_seconds, p.frequency)))
        .collect();
    let (trend_up1, trend_strength) = classify_trend(&pts, cfg)
        .map_or((None, None), |(t, s)| (Some(t), Some(s)));
    BandTrack {
        frames,
        hop_seconds,
        trend_up1,
        trend_strength,
    }
}

pub(crate) fn classify_trend(pts: &[(f64, f64)], cfg: &TrendConfig) -> Option<(Trend, f64)> {
    if pts.len() < 3 {
        return None;
    }
    // center time so the quadratic coefficient reads as pure curvature
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let t: Vec<f64> = pts.iter().map(|p| p.0 - tm).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();

    let slope = ols_slope(&t, &y)?;
    let ym = y.iter().sum::<f64>() / y.len() as f64;
    let ss_lin: f64 = t
        .iter()
        .zip(&y)
        .map(|(ti, yi)| (yi - (ym + slope * ti)).powi(2))
        .sum();

    if let Some((c0, c1, c2)) = quadratic_fit(&t, &y) {
        let ss_quad: f64 = t
            .iter()
            .zip(&y)
            .map(|(ti, yi)| (yi - (c0 + c1 * ti + c2 * ti * ti)).powi(2))
            .sum();
        if c2 < -cfg.curvature_threshold
            && ss_lin > 0.0
            && ss_quad <= (1.0 - cfg.residual_improvement) * ss_lin
        {
            return Some((Trend::ConvexUp, c2));
        }
    }
    if slope > cfg.slope_threshold {
        Some((Trend::Rising, slope))
    } else if slope < -cfg.slope_threshold {
        Some((Trend::Falling, slope))
    } else {
        Some((Trend::Flat, slope))
    }
}

/// Least-squares fit of `y = c0 + c1 t + c2 t^2` via the 3x3 normal equations.
fn quadratic_fit(t: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = t.len() as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut sy, mut sty, mut st2y) = (0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let t2 = ti * ti;
        s1 += ti;
        s2 += t2;
        s3 += t2 * ti;
        s4 += t2 * t2;
        sy += yi;
        sty += ti * yi;
        st2y += t2 * yi;
    }
    let m = [[n, s1, s2], [s1, s2, s3], [s2, s3, s4]];
    let b = [sy, sty, st2y];
    solve3(m, b)
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<(f64, f64, f64)> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut cols = [0.0; 3];
    for (i, c) in cols.iter_mut().enumerate() {
        let mut mi = m;
        for row in 0..3 {
            mi[row][i] = b[row];
        }
        *c = det(&mi) / d;
    }
    Some((cols[0], cols[1], cols[2]))
}

/// Splits the frame range at voicing transitions, then at sustained formant
/// jumps inside voiced runs. Segments shorter than the minimum are merged
/// into the preceding segment.
pub fn segment(
    pitch_track: &PitchTrack,
    harmonics: &[FrameHarmonics],
    cfg: &SegmentationConfig,
) -> Result<Vec<Segment>> {
    if pitch_track.estimates.len() != harmonics.len() {
        return Err(Error::LengthMismatch {
            left: pitch_track.estimates.len(),
            right: harmonics.len(),
        });
    }
    if harmonics.is_empty() {
        return Ok(Vec::new());
    }
    let voiced: Vec<bool> = pitch_track.estimates.iter().map(|e| e.voiced).collect();

    // voicing transitions first
    let mut boundaries = vec![0];
    for i in 1..voiced.len() {
        if voiced[i] != voiced[i - 1] {
            boundaries.push(i);
        }
    }
    boundaries.push(voiced.len());

    // dynamics splits inside voiced runs
    let mut refined = vec![0];
    for w in boundaries.windows(2) {
        let (start, end) = (w[0], w[1]);
        if voiced[start] {
            let mut i = start + 1;
            while i < end {
                if sustained_jump(harmonics, i, end, cfg.jump_threshold) {
                    refined.push(i);
                    i += 2; // a single jump event opens at most one boundary
                } else {
                    i += 1;
                }
            }
        }
        refined.push(end);
    }
    refined.dedup();

    let mut segments: Vec<Segment> = Vec::new();
    for w in refined.windows(2) {
        let seg = Segment {
            start_frame: w[0],
            end_frame: w[1],
            voiced: voiced[w[0]],
        };
        if seg.len() < cfg.min_segment_frames {
            if let Some(prev) = segments.last_mut() {
                prev.end_frame = seg.end_frame;
                continue;
            }
        }
        segments.push(seg);
    }
    // a short leading segment has no predecessor; absorb it forward
    if segments.len() >= 2 && segments[0].len() < cfg.min_segment_frames {
        let head = segments.remove(0);
        segments[0].start_frame = head.start_frame;
    }
    Ok(segments)
}

/// True when either tracked formant moves more than `threshold` between
/// frames `i-1` and `i` and the displacement persists at `i+1`.
fn sustained_jump(harmonics: &[FrameHarmonics], i: usize, end: usize, threshold: f64) -> bool {
    let channel = |f: &FrameHarmonics, upper: bool| {
        if upper {
            f.up1.map(|p| p.frequency)
        } else {
            f.low1.map(|p| p.frequency)
        }
    };
    for upper in [false, true] {
        let (prev, cur) = (
            channel(&harmonics[i - 1], upper),
            channel(&harmonics[i], upper),
        );
        if let (Some(prev), Some(cur)) = (prev, cur) {
            if (cur - prev).abs() > threshold {
                // persists: either the run ends right after, or the next
                // frame stays displaced from the pre-jump value
                let persists = if i + 1 < end {
                    channel(&harmonics[i + 1], upper)
                        .map(|next| (next - prev).abs() > threshold)
                        .unwrap_or(false)
                } else {
                    true
                };
                if persists {
                    return true;
                }
            }
        }
    }
    false
}
