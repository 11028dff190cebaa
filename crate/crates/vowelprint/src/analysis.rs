//! End-to-end pipeline: frames to spectra to pitch to dual-band harmonics to
//! segments, aggregated into a serializable report.

use serde::{Deserialize, Serialize};

use crate::classifier::{
    classify_segment, ClassificationResult, VowelTemplate, DEFAULT_ACCEPT_THRESHOLD,
};
use crate::error::Result;
use crate::harmonics::{
    band_track, extract_frame_harmonics, segment, BandConfig, FrameHarmonics, Segment,
    SegmentationConfig, Trend, TrendConfig,
};
use crate::pitch::{estimate_pitch, track, PitchConfig, PitchEstimate};
use crate::signal_io::{frames, AudioBuffer, FrameConfig};
use crate::spectral::spectrum;

/// Schema version embedded in every serialized report.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// All knobs of the pipeline, echoed into reports for reproducibility.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub frame: FrameConfig,
    pub bands: BandConfig,
    pub pitch: PitchConfig,
    pub trend: TrendConfig,
    pub segmentation: SegmentationConfig,
    pub accept_threshold: Option<f64>,
}

impl AnalysisConfig {
    pub fn accept_threshold(&self) -> f64 {
        self.accept_threshold.unwrap_or(DEFAULT_ACCEPT_THRESHOLD)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub time: f64,
    pub pitch: PitchEstimate,
    pub harmonics: FrameHarmonics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PitchStats {
    pub f0_mean: Option<f64>,
    pub f0_deviation: Option<f64>,
    pub f0_slope: Option<f64>,
    pub intensity_slope: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentReport {
    pub start_frame: usize,
    pub end_frame: usize,
    pub start_time: f64,
    pub end_time: f64,
    pub voiced: bool,
    pub pitch: PitchStats,
    pub trend: Option<Trend>,
    pub trend_strength: Option<f64>,
    pub classification: Option<ClassificationResult>,
    pub frames: Vec<FrameRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub sample_rate: u32,
    pub hop_seconds: f64,
    pub config: AnalysisConfig,
    pub segments: Vec<SegmentReport>,
}

impl AnalysisReport {
    pub fn frame_records(&self) -> impl Iterator<Item = &FrameRecord> {
        self.segments.iter().flat_map(|s| s.frames.iter())
    }
}

/// Intermediate per-frame products, before segmentation.
pub struct PipelineFrames {
    pub estimates: Vec<PitchEstimate>,
    pub harmonics: Vec<FrameHarmonics>,
    pub hop_seconds: f64,
}

/// Runs the per-frame half of the pipeline.
pub fn analyze_frames(
    buffer: &AudioBuffer,
    cfg: &AnalysisConfig,
) -> Result<PipelineFrames> {
    let framed = frames(buffer, &cfg.frame)?;
    let hop_seconds = cfg.frame.hop_length as f64 / buffer.sample_rate as f64;
    let mut estimates = Vec::with_capacity(framed.len());
    let mut harmonics = Vec::with_capacity(framed.len());
    for frame in &framed {
        let spec = spectrum(frame);
        let est = estimate_pitch(&spec, &cfg.pitch)?;
        harmonics.push(extract_frame_harmonics(&spec, &est, &cfg.bands)?);
        estimates.push(est);
    }
    Ok(PipelineFrames {
        estimates,
        harmonics,
        hop_seconds,
    })
}

/// Full pipeline producing the per-segment report.
pub fn analyze(
    buffer: &AudioBuffer,
    cfg: &AnalysisConfig,
    templates: &[VowelTemplate],
) -> Result<AnalysisReport> {
    let per_frame = analyze_frames(buffer, cfg)?;
    let hop = per_frame.hop_seconds;
    let pitch_track = track(per_frame.estimates.clone(), hop);
    let segments = segment(&pitch_track, &per_frame.harmonics, &cfg.segmentation)?;

    let mut reports = Vec::with_capacity(segments.len());
    for seg in &segments {
        reports.push(segment_report(seg, &per_frame, cfg, templates)?);
    }
    Ok(AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        sample_rate: buffer.sample_rate,
        hop_seconds: hop,
        config: cfg.clone(),
        segments: reports,
    })
}

fn segment_report(
    seg: &Segment,
    per_frame: &PipelineFrames,
    cfg: &AnalysisConfig,
    templates: &[VowelTemplate],
) -> Result<SegmentReport> {
    let hop = per_frame.hop_seconds;
    let range = seg.start_frame..seg.end_frame;
    let ests = per_frame.estimates[range.clone()].to_vec();
    let fhs = per_frame.harmonics[range.clone()].to_vec();
    let sub_track = track(ests, hop);
    let band = band_track(fhs, hop, &cfg.trend);
    let classification = if seg.voiced {
        match classify_segment(&band, templates, cfg.accept_threshold()) {
            Ok(res) => Some(res),
            Err(crate::error::Error::NoVoicedFrames) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let frames = range
        .clone()
        .map(|i| FrameRecord {
            index: i,
            time: i as f64 * hop,
            pitch: per_frame.estimates[i],
            harmonics: per_frame.harmonics[i],
        })
        .collect();
    Ok(SegmentReport {
        start_frame: seg.start_frame,
        end_frame: seg.end_frame,
        start_time: seg.start_frame as f64 * hop,
        end_time: seg.end_frame as f64 * hop,
        voiced: seg.voiced,
        pitch: PitchStats {
            f0_mean: sub_track.f0_mean,
            f0_deviation: sub_track.f0_deviation,
            f0_slope: sub_track.f0_slope,
            intensity_slope: sub_track.intensity_slope,
        },
        trend: band.trend_up1,
        trend_strength: band.trend_strength,
        classification,
        frames,
    })
}

/// One row of the plot-ready track table (`tracks` command and CSV report).
pub const TRACK_CSV_HEADER: &str =
    "time,f0,f0_intensity,low1_hz,low1_int,low2_hz,low2_int,up1_hz,up1_int,up2_hz,up2_int";

pub fn track_csv_row(rec: &FrameRecord) -> String {
    let num = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
    let peak = |p: Option<crate::spectral::SpectralPeak>| {
        (
            num(p.map(|p| p.frequency)),
            num(p.map(|p| p.intensity)),
        )
    };
    let (l1f, l1i) = peak(rec.harmonics.low1);
    let (l2f, l2i) = peak(rec.harmonics.low2);
    let (u1f, u1i) = peak(rec.harmonics.up1);
    let (u2f, u2i) = peak(rec.harmonics.up2);
    format!(
        "{:.6},{},{},{l1f},{l1i},{l2f},{l2i},{u1f},{u1i},{u2f},{u2i}",
        rec.time,
        num(rec.pitch.f0),
        num(rec.pitch.voiced.then_some(rec.pitch.intensity)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{builtin_templates, RussianVowel};
    use crate::synth::render_vowel;

    #[test]
    fn steady_vowel_gives_one_voiced_segment_with_label() {
        let buf = render_vowel(RussianVowel::A, 150.0, 1.0, 16000).unwrap();
        let report = analyze(&buf, &AnalysisConfig::default(), &builtin_templates()).unwrap();
        let voiced: Vec<&SegmentReport> =
            report.segments.iter().filter(|s| s.voiced).collect();
        assert_eq!(voiced.len(), 1);
        let cls = voiced[0].classification.as_ref().unwrap();
        assert_eq!(cls.label, Some(RussianVowel::A));
        assert!((voiced[0].pitch.f0_mean.unwrap() - 150.0).abs() < 4.0);
    }

    #[test]
    fn silence_report_has_single_unvoiced_segment() {
        let buf = crate::signal_io::AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        let report = analyze(&buf, &AnalysisConfig::default(), &builtin_templates()).unwrap();
        assert_eq!(report.segments.len(), 1);
        assert!(!report.segments[0].voiced);
        assert!(report.segments[0].classification.is_none());
    }

    #[test]
    fn report_round_trips_through_json() {
        let buf = render_vowel(RussianVowel::O, 150.0, 0.6, 16000).unwrap();
        let report = analyze(&buf, &AnalysisConfig::default(), &builtin_templates()).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        assert_eq!(back.schema_version, REPORT_SCHEMA_VERSION);
        // absent peaks stay absent
        for (a, b) in report.frame_records().zip(back.frame_records()) {
            assert_eq!(a.harmonics.low2.is_none(), b.harmonics.low2.is_none());
            assert_eq!(a.harmonics.up2.is_none(), b.harmonics.up2.is_none());
        }
    }
}
