//! Rule-template vowel classification: the six Russian stressed-vowel
//! templates, the positional trend patterns, and the English-to-Russian
//! correspondence table with similarity verdicts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{BandTrack, FrameHarmonics, Trend};

/// Default score a winning template must reach to be reported as a label.
pub const DEFAULT_ACCEPT_THRESHOLD: f64 = 0.75;

/// The six Russian stressed vowels, in template order. Tie-breaks follow
/// this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RussianVowel {
    A,
    O,
    I,
    Yeru,
    U,
    E,
}

pub const VOWEL_ORDER: [RussianVowel; 6] = [
    RussianVowel::A,
    RussianVowel::O,
    RussianVowel::I,
    RussianVowel::Yeru,
    RussianVowel::U,
    RussianVowel::E,
];

impl RussianVowel {
    pub fn symbol(self) -> &'static str {
        match self {
            RussianVowel::A => "a",
            RussianVowel::O => "o",
            RussianVowel::I => "и",
            RussianVowel::Yeru => "ы",
            RussianVowel::U => "y",
            RussianVowel::E => "э",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        match trimmed {
            "a" | "а" => Ok(RussianVowel::A),
            "o" | "о" => Ok(RussianVowel::O),
            "и" | "i" => Ok(RussianVowel::I),
            "ы" => Ok(RussianVowel::Yeru),
            "y" | "у" | "u" => Ok(RussianVowel::U),
            "э" | "e" => Ok(RussianVowel::E),
            _ => Err(Error::UnknownVowel(s.to_string())),
        }
    }
}

impl std::fmt::Display for RussianVowel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}]", self.symbol())
    }
}

/// Which of the two band peaks dominates, once they are ordered by frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    FirstOverSecond,
    SecondOverFirst,
}

/// Structure of a template's upper-band rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpShape {
    /// Separate ranges for the first and second upper harmonics.
    TwoBands,
    /// A single range for the dominant upper harmonic.
    SingleBand,
    /// Single range whose trajectory must arch upward and back.
    ConvexUp,
    /// Single range with the higher-frequency upper peak dominating.
    SecondOverFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VowelTemplate {
    pub label: RussianVowel,
    pub low_range: (f64, f64),
    pub low_dominance: Dominance,
    pub up1_range: Option<(f64, f64)>,
    pub up2_range: Option<(f64, f64)>,
    pub up_shape: UpShape,
}

/// The six stressed-vowel rule templates.
pub fn builtin_templates() -> Vec<VowelTemplate> {
    use Dominance::*;
    use RussianVowel::*;
    vec![
        VowelTemplate {
            label: A,
            low_range: (200.0, 750.0),
            low_dominance: FirstOverSecond,
            up1_range: Some((800.0, 900.0)),
            up2_range: Some((1000.0, 1200.0)),
            up_shape: UpShape::TwoBands,
        },
        VowelTemplate {
            label: O,
            low_range: (400.0, 600.0),
            low_dominance: FirstOverSecond,
            up1_range: Some((800.0, 950.0)),
            up2_range: Some((1900.0, 2200.0)),
            up_shape: UpShape::TwoBands,
        },
        VowelTemplate {
            label: I,
            low_range: (200.0, 400.0),
            low_dominance: SecondOverFirst,
            up1_range: Some((1750.0, 1850.0)),
            up2_range: Some((2200.0, 2400.0)),
            up_shape: UpShape::TwoBands,
        },
        VowelTemplate {
            label: Yeru,
            low_range: (200.0, 400.0),
            low_dominance: SecondOverFirst,
            up1_range: Some((800.0, 1300.0)),
            up2_range: None,
            up_shape: UpShape::ConvexUp,
        },
        VowelTemplate {
            label: U,
            low_range: (300.0, 600.0),
            low_dominance: SecondOverFirst,
            up1_range: Some((800.0, 1100.0)),
            up2_range: None,
            up_shape: UpShape::SecondOverFirst,
        },
        VowelTemplate {
            label: E,
            low_range: (450.0, 650.0),
            low_dominance: FirstOverSecond,
            up1_range: Some((1550.0, 1700.0)),
            up2_range: Some((2100.0, 2400.0)),
            up_shape: UpShape::TwoBands,
        },
    ]
}

/// Loads templates from a plain-text table, one template per line:
///
/// ```text
/// # label  low_lo low_hi  up1_lo up1_hi  up2_lo up2_hi  dominance      shape
/// a        200    750     800    900     1000   1200    first_over_second  two_bands
/// ы        200    400     800    1300    -      -       second_over_first  convex_up
/// ```
///
/// `-` marks an absent range. Blank lines and `#` comments are skipped.
pub fn parse_templates(text: &str) -> Result<Vec<VowelTemplate>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::TemplateParse {
            line: lineno + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(err(&format!("expected 9 fields, got {}", fields.len())));
        }
        let label = RussianVowel::parse(fields[0])?;
        let num = |s: &str| -> Result<Option<f64>> {
            if s == "-" {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|_| err(&format!("bad number: {s}")))
            }
        };
        let range = |lo: Option<f64>, hi: Option<f64>| -> Result<Option<(f64, f64)>> {
            match (lo, hi) {
                (Some(lo), Some(hi)) if lo < hi => Ok(Some((lo, hi))),
                (None, None) => Ok(None),
                _ => Err(err("range bounds must both be numbers with lo < hi")),
            }
        };
        let low = range(num(fields[1])?, num(fields[2])?)?
            .ok_or_else(|| err("low range is required"))?;
        let up1 = range(num(fields[3])?, num(fields[4])?)?;
        let up2 = range(num(fields[5])?, num(fields[6])?)?;
        let low_dominance = match fields[7] {
            "first_over_second" => Dominance::FirstOverSecond,
            "second_over_first" => Dominance::SecondOverFirst,
            other => return Err(err(&format!("unknown dominance: {other}"))),
        };
        let up_shape = match fields[8] {
            "two_bands" => UpShape::TwoBands,
            "single_band" => UpShape::SingleBand,
            "convex_up" => UpShape::ConvexUp,
            "second_over_first" => UpShape::SecondOverFirst,
            other => return Err(err(&format!("unknown shape: {other}"))),
        };
        out.push(VowelTemplate {
            label,
            low_range: low,
            low_dominance,
            up1_range: up1,
            up2_range: up2,
            up_shape,
        });
    }
    Ok(out)
}

/// One evaluated template criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    /// `None` reads as "unknown": the best score fell below the threshold.
    pub label: Option<RussianVowel>,
    pub score: f64,
    /// Breakdown for the winning template.
    pub per_criterion: Vec<CriterionOutcome>,
}

/// Slack on template range checks, Hz: interpolated peak frequencies carry
/// sub-bin measurement error, and synthesized harmonics can sit exactly on a
/// range boundary.
const RANGE_TOLERANCE_HZ: f64 = 2.0;

fn in_range(freq: f64, range: (f64, f64)) -> bool {
    freq >= range.0 - RANGE_TOLERANCE_HZ && freq <= range.1 + RANGE_TOLERANCE_HZ
}

/// Dominance observed between two intensity-ordered peaks, reordered by
/// frequency: `FirstOverSecond` when the lower-frequency peak is the
/// stronger one. With only one peak there is no counter-evidence, so either
/// relation passes.
fn dominance_matches(
    p1: Option<crate::spectral::SpectralPeak>,
    p2: Option<crate::spectral::SpectralPeak>,
    wanted: Dominance,
) -> bool {
    match (p1, p2) {
        (Some(a), Some(b)) => {
            let observed = if a.frequency <= b.frequency {
                Dominance::FirstOverSecond
            } else {
                Dominance::SecondOverFirst
            };
            observed == wanted
        }
        _ => true,
    }
}

fn evaluate(
    fh: &FrameHarmonics,
    tpl: &VowelTemplate,
    trend: Option<Trend>,
) -> Vec<CriterionOutcome> {
    let mut out = Vec::with_capacity(4);
    let mut push = |name: &str, passed: bool| {
        out.push(CriterionOutcome {
            name: name.to_string(),
            passed,
        })
    };
    push(
        "low1_in_range",
        fh.low1.is_some_and(|p| in_range(p.frequency, tpl.low_range)),
    );
    push(
        "low_dominance",
        dominance_matches(fh.low1, fh.low2, tpl.low_dominance),
    );
    if let Some(r1) = tpl.up1_range {
        push(
            "up1_in_range",
            fh.up1.is_some_and(|p| in_range(p.frequency, r1)),
        );
    }
    match tpl.up_shape {
        UpShape::TwoBands => {
            if let Some(r2) = tpl.up2_range {
                push(
                    "up2_in_range",
                    fh.up2.is_some_and(|p| in_range(p.frequency, r2)),
                );
            }
        }
        UpShape::SecondOverFirst => {
            // frequency-reordered intensity relation in the upper band; an
            // empty band is counter-evidence, a lone peak is not
            push(
                "up_second_over_first",
                fh.up1.is_some() && dominance_matches(fh.up1, fh.up2, Dominance::SecondOverFirst),
            );
        }
        UpShape::ConvexUp => {
            // only scorable with track context; frame-only calls skip it
            if let Some(t) = trend {
                push("up_shape_convex", t == Trend::ConvexUp);
            }
        }
        UpShape::SingleBand => {}
    }
    out
}

fn best_template(
    fh: &FrameHarmonics,
    templates: &[VowelTemplate],
    trend: Option<Trend>,
    accept_threshold: f64,
) -> ClassificationResult {
    let mut best: Option<(usize, f64, usize, Vec<CriterionOutcome>)> = None;
    for (idx, tpl) in templates.iter().enumerate() {
        let outcomes = evaluate(fh, tpl, trend);
        let passed = outcomes.iter().filter(|c| c.passed).count();
        let score = passed as f64 / outcomes.len().max(1) as f64;
        let better = match &best {
            None => true,
            Some((_, bscore, bpassed, _)) => {
                score > *bscore || (score == *bscore && passed > *bpassed)
            }
        };
        if better {
            best = Some((idx, score, passed, outcomes));
        }
    }
    let (idx, score, _, per_criterion) = best.expect("templates must be non-empty");
    ClassificationResult {
        label: (score >= accept_threshold).then(|| templates[idx].label),
        score,
        per_criterion,
    }
}

/// Scores one voiced frame against the templates. Score is the fraction of
/// satisfied criteria for the best template; ties go to the template listed
/// first.
pub fn classify_frame(
    fh: &FrameHarmonics,
    templates: &[VowelTemplate],
    accept_threshold: f64,
) -> Result<ClassificationResult> {
    if !fh.voiced {
        return Err(Error::Unvoiced);
    }
    Ok(best_template(fh, templates, None, accept_threshold))
}

/// Classifies a whole track: per-frame votes over voiced frames, with the
/// track trend supplying the convex-shape criterion. Reported score is the
/// mean score of the frames that voted for the winner.
pub fn classify_segment(
    track: &BandTrack,
    templates: &[VowelTemplate],
    accept_threshold: f64,
) -> Result<ClassificationResult> {
    let mut votes: Vec<ClassificationResult> = Vec::new();
    for fh in track.frames.iter().filter(|f| f.voiced) {
        votes.push(best_template(fh, templates, track.trend_up1, accept_threshold));
    }
    if votes.is_empty() {
        return Err(Error::NoVoicedFrames);
    }
    // majority vote; ties resolved by template order, with unknown last
    let order_index = |label: Option<RussianVowel>| {
        label.map_or(VOWEL_ORDER.len(), |v| {
            VOWEL_ORDER.iter().position(|&o| o == v).unwrap()
        })
    };
    let mut counts: Vec<(Option<RussianVowel>, usize)> = Vec::new();
    for v in &votes {
        match counts.iter_mut().find(|(l, _)| *l == v.label) {
            Some((_, n)) => *n += 1,
            None => counts.push((v.label, 1)),
        }
    }
    counts.sort_by_key(|&(label, n)| (std::cmp::Reverse(n), order_index(label)));
    let winner = counts[0].0;
    let winning: Vec<&ClassificationResult> =
        votes.iter().filter(|v| v.label == winner).collect();
    let score = winning.iter().map(|v| v.score).sum::<f64>() / winning.len() as f64;
    let per_criterion = winning[0].per_criterion.clone();
    Ok(ClassificationResult {
        label: winner,
        score,
        per_criterion,
    })
}

/// Palatalization context of the flanking consonants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Context {
    HardHard,
    HardSoft,
    SoftHard,
    SoftSoft,
}

/// Expected upper-range behaviour for one context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedTrend {
    Reduced,
    Rising,
    Falling,
    Elevated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionPattern {
    pub context: Context,
    pub expected_trend: ExpectedTrend,
}

/// The four context/trend regularities, one per flanking-consonant context.
pub fn position_patterns() -> [PositionPattern; 4] {
    [
        PositionPattern {
            context: Context::HardHard,
            expected_trend: ExpectedTrend::Reduced,
        },
        PositionPattern {
            context: Context::HardSoft,
            expected_trend: ExpectedTrend::Rising,
        },
        PositionPattern {
            context: Context::SoftHard,
            expected_trend: ExpectedTrend::Falling,
        },
        PositionPattern {
            context: Context::SoftSoft,
            expected_trend: ExpectedTrend::Elevated,
        },
    ]
}

/// Guesses the flanking-consonant context from the upper-band trend.
///
/// Rising maps to hard-soft and falling to soft-hard. A level track is
/// "reduced" (hard-hard) below the winning template's upper-range midpoint
/// and "elevated" (soft-soft) above it; convex tracks fall back to the same
/// mean comparison.
pub fn position_pattern(track: &BandTrack, winner: &VowelTemplate) -> Result<PositionPattern> {
    let trend = track.trend_up1.ok_or(Error::TrendUnavailable)?;
    let context = match trend {
        Trend::Rising => Context::HardSoft,
        Trend::Falling => Context::SoftHard,
        Trend::Flat | Trend::ConvexUp => {
            let mean = track.voiced_up1_mean().ok_or(Error::TrendUnavailable)?;
            let (lo, hi) = winner.up1_range.ok_or(Error::TrendUnavailable)?;
            if mean >= (lo + hi) / 2.0 {
                Context::SoftSoft
            } else {
                Context::HardHard
            }
        }
    };
    Ok(*position_patterns()
        .iter()
        .find(|p| p.context == context)
        .unwrap())
}

/// Similarity verdict for an English sound against its Russian correspondent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Clear,
    Unclear,
    None,
}

/// One row of the English-to-Russian correspondence table. `expected` is a
/// sequence of positions (two for diphthongs), each holding the acceptable
/// Russian vowels for that position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceRow {
    pub english: &'static str,
    pub expected: Vec<Vec<RussianVowel>>,
    pub verdict: Verdict,
    pub note: &'static str,
}

/// The 17-row correspondence table.
pub fn correspondence_table() -> Vec<CorrespondenceRow> {
    use RussianVowel::*;
    use Verdict::*;
    let row = |english, expected, verdict, note| CorrespondenceRow {
        english,
        expected,
        verdict,
        note,
    };
    vec![
        row("a:", vec![vec![A]], Clear, "Clear resemblance."),
        row("ɔ:", vec![vec![O]], Clear, "Clear resemblance."),
        row("i:", vec![vec![I]], Clear, "Clear resemblance."),
        row(
            "u:",
            vec![vec![U]],
            Unclear,
            "Resemblance unclear. The values in the upper range are overestimated.",
        ),
        row(
            "ə:",
            vec![vec![O, E]],
            Unclear,
            "Resemblance to the values obtained, but divergence from the \"book model\".",
        ),
        row("i", vec![vec![I]], Clear, "Clear resemblance."),
        row(
            "u",
            vec![vec![U]],
            Unclear,
            "Resemblance unclear. The values in the lower range are overestimated.",
        ),
        row(
            "ʌ",
            vec![vec![A]],
            Unclear,
            "Resemblance unclear. The harmonics in the lower range are ambiguous.",
        ),
        row("ɒ", vec![vec![O]], Clear, "Clear resemblance."),
        row("ə", vec![vec![E, O, A]], None, "No resemblance."),
        row(
            "e",
            vec![vec![E]],
            Unclear,
            "Resemblance unclear. The harmonics in the lower range are ambiguous and the values are underestimated.",
        ),
        row("æ", vec![vec![E]], Clear, "Clear resemblance."),
        row(
            "iə",
            vec![vec![I], vec![E, A]],
            Unclear,
            "Resemblance unclear. The sound looks like a merge of [и] and [э], not a transition from one sound to the other.",
        ),
        row(
            "uə",
            vec![vec![U], vec![E]],
            Unclear,
            "Resemblance unclear. The harmonics in the lower range are ambiguous.",
        ),
        row("ai", vec![vec![A], vec![I]], Clear, "Clear resemblance."),
        row("ɔi", vec![vec![O], vec![I]], Clear, "Clear resemblance."),
        row(
            "əu",
            vec![vec![E, O], vec![U]],
            Unclear,
            "Resemblance unclear. Sound looks more like [o], than [y].",
        ),
    ]
}

/// Looks up the correspondence row for one English sound symbol.
pub fn correspondence(english_label: &str) -> Result<CorrespondenceRow> {
    let label = english_label.trim().trim_start_matches('[').trim_end_matches(']');
    correspondence_table()
        .into_iter()
        .find(|r| r.english == label)
        .ok_or_else(|| Error::UnknownSound(english_label.to_string()))
}

/// Comparison of an analyzed track against the expectation for an English
/// sound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub english: String,
    pub expected: Vec<Vec<RussianVowel>>,
    pub verdict: Verdict,
    pub note: String,
    /// Label achieved for each expected position.
    pub achieved: Vec<Option<RussianVowel>>,
    pub matched: bool,
}

/// Classifies `track` and reports whether the achieved label(s) match the
/// Russian correspondent(s) for `english_label`. Diphthongs are split at the
/// strongest formant jump within the voiced region, or at its midpoint when
/// the track carries no jump.
pub fn compare_analysis(
    track: &BandTrack,
    english_label: &str,
    templates: &[VowelTemplate],
    trend_cfg: &crate::harmonics::TrendConfig,
    accept_threshold: f64,
) -> Result<ComparisonReport> {
    let row = correspondence(english_label)?;
    let voiced_idx: Vec<usize> = track
        .frames
        .iter()
        .enumerate()
        .filter(|(_, f)| f.voiced)
        .map(|(i, _)| i)
        .collect();
    if voiced_idx.is_empty() {
        return Err(Error::NoVoicedFrames);
    }
    let parts: Vec<Vec<FrameHarmonics>> = if row.expected.len() == 1 {
        vec![voiced_idx.iter().map(|&i| track.frames[i]).collect()]
    } else {
        let split = diphthong_split(track, &voiced_idx);
        vec![
            voiced_idx[..split].iter().map(|&i| track.frames[i]).collect(),
            voiced_idx[split..].iter().map(|&i| track.frames[i]).collect(),
        ]
    };
    let mut achieved = Vec::new();
    for part in parts {
        let sub = crate::harmonics::band_track(part, track.hop_seconds, trend_cfg);
        achieved.push(classify_segment(&sub, templates, accept_threshold)?.label);
    }
    let matched = row.expected.len() == achieved.len()
        && row
            .expected
            .iter()
            .zip(&achieved)
            .all(|(alts, got)| got.is_some_and(|g| alts.contains(&g)));
    Ok(ComparisonReport {
        english: row.english.to_string(),
        expected: row.expected,
        verdict: row.verdict,
        note: row.note.to_string(),
        achieved,
        matched,
    })
}

/// Index (into the voiced-frame list) of the largest up1 jump, or the
/// midpoint when no adjacent pair moves more than 200 Hz.
fn diphthong_split(track: &BandTrack, voiced_idx: &[usize]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for w in 1..voiced_idx.len() {
        let a = track.frames[voiced_idx[w - 1]].up1;
        let b = track.frames[voiced_idx[w]].up1;
        if let (Some(a), Some(b)) = (a, b) {
            let jump = (b.frequency - a.frequency).abs();
            if jump > 200.0 && best.map_or(true, |(_, j)| jump > j) {
                best = Some((w, jump));
            }
        }
    }
    best.map_or(voiced_idx.len() / 2, |(w, _)| w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::TrendConfig;
    use crate::spectral::SpectralPeak;

    fn peak(frequency: f64, intensity: f64) -> Option<SpectralPeak> {
        Some(SpectralPeak {
            frequency,
            intensity,
            bin: 0,
        })
    }

    /// A descriptor built from the midpoints of a template's ranges, with
    /// the template's dominance relations realized by intensity ordering.
    fn midpoint_descriptor(tpl: &VowelTemplate) -> FrameHarmonics {
        let mid = |r: (f64, f64)| (r.0 + r.1) / 2.0;
        let low_mid = mid(tpl.low_range);
        let (low1, low2) = match tpl.low_dominance {
            Dominance::FirstOverSecond => (peak(low_mid, 1.0), peak(low_mid + 100.0, 0.5)),
            Dominance::SecondOverFirst => (peak(low_mid, 1.0), peak(low_mid - 100.0, 0.5)),
        };
        let (up1, up2) = match tpl.up_shape {
            UpShape::TwoBands => (
                peak(mid(tpl.up1_range.unwrap()), 0.9),
                peak(mid(tpl.up2_range.unwrap()), 0.45),
            ),
            UpShape::SecondOverFirst => {
                let m = mid(tpl.up1_range.unwrap());
                (peak(m, 0.9), peak(m - 150.0, 0.45))
            }
            UpShape::ConvexUp | UpShape::SingleBand => {
                (peak(mid(tpl.up1_range.unwrap()), 0.9), None)
            }
        };
        FrameHarmonics {
            voiced: true,
            low1,
            low2,
            up1,
            up2,
        }
    }

    #[test]
    fn template_table_is_exact() {
        let t = builtin_templates();
        assert_eq!(t.len(), 6);
        let by_label = |v: RussianVowel| *t.iter().find(|x| x.label == v).unwrap();
        assert_eq!(by_label(RussianVowel::O).up2_range, Some((1900.0, 2200.0)));
        assert_eq!(by_label(RussianVowel::E).low_range, (450.0, 650.0));
        assert_eq!(by_label(RussianVowel::I).up1_range, Some((1750.0, 1850.0)));
        let mut labels: Vec<RussianVowel> = t.iter().map(|x| x.label).collect();
        labels.dedup();
        assert_eq!(labels.len(), 6);
    }

    #[test]
    fn frame_matching_a_template() {
        let fh = FrameHarmonics {
            voiced: true,
            low1: peak(500.0, 1.0),
            low2: peak(620.0, 0.4),
            up1: peak(850.0, 0.8),
            up2: peak(1100.0, 0.4),
        };
        let res = classify_frame(&fh, &builtin_templates(), DEFAULT_ACCEPT_THRESHOLD).unwrap();
        assert_eq!(res.label, Some(RussianVowel::A));
        assert_eq!(res.score, 1.0);
    }

    #[test]
    fn frame_matching_i_template() {
        let fh = FrameHarmonics {
            voiced: true,
            low1: peak(300.0, 1.0),
            low2: peak(220.0, 0.6), // higher-frequency peak dominates
            up1: peak(1800.0, 0.8),
            up2: peak(2300.0, 0.4),
        };
        let res = classify_frame(&fh, &builtin_templates(), DEFAULT_ACCEPT_THRESHOLD).unwrap();
        assert_eq!(res.label, Some(RussianVowel::I));
    }

    #[test]
    fn sparse_frame_is_unknown() {
        let fh = FrameHarmonics {
            voiced: true,
            low1: peak(500.0, 1.0),
            low2: None,
            up1: None,
            up2: None,
        };
        let res = classify_frame(&fh, &builtin_templates(), DEFAULT_ACCEPT_THRESHOLD).unwrap();
        assert_eq!(res.label, None);
        assert!(res.score < DEFAULT_ACCEPT_THRESHOLD);
    }

    #[test]
    fn unvoiced_frame_is_error() {
        assert!(matches!(
            classify_frame(
                &FrameHarmonics::unvoiced(),
                &builtin_templates(),
                DEFAULT_ACCEPT_THRESHOLD
            ),
            Err(Error::Unvoiced)
        ));
    }

    #[test]
    fn midpoint_descriptors_score_one_for_every_template() {
        let templates = builtin_templates();
        for tpl in &templates {
            let fh = midpoint_descriptor(tpl);
            let trend = (tpl.up_shape == UpShape::ConvexUp).then_some(Trend::ConvexUp);
            let res = super::best_template(&fh, &templates, trend, DEFAULT_ACCEPT_THRESHOLD);
            assert_eq!(res.label, Some(tpl.label), "template {}", tpl.label);
            assert_eq!(res.score, 1.0, "template {}", tpl.label);
        }
    }

    #[test]
    fn out_of_every_range_is_unknown() {
        let fh = FrameHarmonics {
            voiced: true,
            low1: peak(60.0, 1.0),
            low2: peak(120.0, 0.5),
            up1: peak(2480.0, 0.9),
            up2: peak(2490.0, 0.4),
        };
        let res = classify_frame(&fh, &builtin_templates(), DEFAULT_ACCEPT_THRESHOLD).unwrap();
        assert_eq!(res.label, None);
    }

    #[test]
    fn intensity_scaling_does_not_change_labels() {
        let templates = builtin_templates();
        for tpl in &templates {
            let fh = midpoint_descriptor(tpl);
            let scaled = FrameHarmonics {
                voiced: true,
                low1: fh.low1.map(|p| SpectralPeak {
                    intensity: p.intensity * 12.5,
                    ..p
                }),
                low2: fh.low2.map(|p| SpectralPeak {
                    intensity: p.intensity * 12.5,
                    ..p
                }),
                up1: fh.up1.map(|p| SpectralPeak {
                    intensity: p.intensity * 12.5,
                    ..p
                }),
                up2: fh.up2.map(|p| SpectralPeak {
                    intensity: p.intensity * 12.5,
                    ..p
                }),
            };
            let a = classify_frame(&fh, &templates, DEFAULT_ACCEPT_THRESHOLD).unwrap();
            let b = classify_frame(&scaled, &templates, DEFAULT_ACCEPT_THRESHOLD).unwrap();
            assert_eq!(a.label, b.label);
            assert_eq!(a.score, b.score);
        }
    }

    #[test]
    fn segment_majority_and_tiebreak() {
        let templates = builtin_templates();
        let a = midpoint_descriptor(&templates[0]);
        let o = midpoint_descriptor(&templates[1]);
        // 5 frames each: tie, [a] precedes [o]
        let frames: Vec<FrameHarmonics> = std::iter::repeat(o)
            .take(5)
            .chain(std::iter::repeat(a).take(5))
            .collect();
        let track = crate::harmonics::band_track(frames, 0.064, &TrendConfig::default());
        let res = classify_segment(&track, &templates, DEFAULT_ACCEPT_THRESHOLD).unwrap();
        assert_eq!(res.label, Some(RussianVowel::A));
    }

    #[test]
    fn segment_with_no_voiced_frames_is_error() {
        let track = crate::harmonics::band_track(
            vec![FrameHarmonics::unvoiced(); 4],
            0.064,
            &TrendConfig::default(),
        );
        assert!(matches!(
            classify_segment(&track, &builtin_templates(), DEFAULT_ACCEPT_THRESHOLD),
            Err(Error::NoVoicedFrames)
        ));
    }

    #[test]
    fn position_pattern_maps_trends() {
        let templates = builtin_templates();
        let tpl = templates[0]; // up1 800-900, midpoint 850
        let mk_track = |up1: Vec<f64>| {
            let frames: Vec<FrameHarmonics> = up1
                .iter()
                .map(|&f| FrameHarmonics {
                    voiced: true,
                    low1: peak(475.0, 1.0),
                    low2: None,
                    up1: peak(f, 0.8),
                    up2: None,
                })
                .collect();
            crate::harmonics::band_track(frames, 0.064, &TrendConfig::default())
        };
        let rising = mk_track((0..10).map(|i| 800.0 + 60.0 * i as f64).collect());
        assert_eq!(
            position_pattern(&rising, &tpl).unwrap().context,
            Context::HardSoft
        );
        let falling = mk_track((0..10).map(|i| 1400.0 - 60.0 * i as f64).collect());
        assert_eq!(
            position_pattern(&falling, &tpl).unwrap().context,
            Context::SoftHard
        );
        let low_flat = mk_track(vec![810.0; 10]);
        assert_eq!(
            position_pattern(&low_flat, &tpl).unwrap().context,
            Context::HardHard
        );
        let high_flat = mk_track(vec![890.0; 10]);
        assert_eq!(
            position_pattern(&high_flat, &tpl).unwrap().context,
            Context::SoftSoft
        );
    }

    #[test]
    fn correspondence_rows() {
        let row = correspondence("a:").unwrap();
        assert_eq!(row.expected, vec![vec![RussianVowel::A]]);
        assert_eq!(row.verdict, Verdict::Clear);

        let schwa = correspondence("ə").unwrap();
        assert_eq!(
            schwa.expected,
            vec![vec![RussianVowel::E, RussianVowel::O, RussianVowel::A]]
        );
        assert_eq!(schwa.verdict, Verdict::None);

        let ai = correspondence("ai").unwrap();
        assert_eq!(
            ai.expected,
            vec![vec![RussianVowel::A], vec![RussianVowel::I]]
        );
        assert_eq!(ai.verdict, Verdict::Clear);
    }

    #[test]
    fn unknown_sounds_rejected() {
        for label in ["eə", "au", "ei", "zz"] {
            assert!(matches!(
                correspondence(label),
                Err(Error::UnknownSound(_))
            ));
        }
    }

    #[test]
    fn table_has_17_unique_rows() {
        let table = correspondence_table();
        assert_eq!(table.len(), 17);
        let mut names: Vec<&str> = table.iter().map(|r| r.english).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 17);
    }

    #[test]
    fn parse_templates_round_trip() {
        let text = "\
# label low_lo low_hi up1_lo up1_hi up2_lo up2_hi dominance shape
a   200 750  800 900   1000 1200 first_over_second two_bands
ы   200 400  800 1300  -    -    second_over_first convex_up
";
        let parsed = parse_templates(text).unwrap();
        let builtin = builtin_templates();
        assert_eq!(parsed[0], builtin[0]);
        assert_eq!(parsed[1], builtin[3]);
        assert!(parse_templates("a 200 750 800\n").is_err());
        assert!(parse_templates("a 200 100 - - - - first_over_second two_bands\n").is_err());
    }
}
