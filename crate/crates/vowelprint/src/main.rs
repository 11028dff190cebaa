//! Command-line front end: analyze audio into reports, classify vowels,
//! synthesize test signals, dump plot-ready harmonic tracks and print the
//! built-in tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use vowelprint::analysis::{analyze, AnalysisConfig, AnalysisReport, TRACK_CSV_HEADER};
use vowelprint::classifier::{
    builtin_templates, compare_analysis, correspondence_table, parse_templates, position_pattern,
    RussianVowel, Verdict, VowelTemplate,
};
use vowelprint::harmonics::band_track;
use vowelprint::signal_io::load_wav;
use vowelprint::synth::{
    render, render_vowel, write_wav, FormantPeak, Sweep, SynthSpec,
};

/// Environment variable naming a TOML config file mirroring the flags.
const CONFIG_ENV: &str = "VOWELPRINT_CONFIG";

#[derive(Parser)]
#[command(name = "vowelprint", version, about = "Harmonic vowel analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and emit a JSON or CSV report
    Analyze {
        input: PathBuf,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
        #[command(flatten)]
        shared: SharedFlags,
    },
    /// Classify the dominant vowel, optionally against an expectation
    Classify {
        input: PathBuf,
        /// Expected Russian vowel; mismatch exits with status 1
        #[arg(long)]
        expect: Option<String>,
        /// English sound to compare against via the correspondence table
        #[arg(long)]
        english: Option<String>,
        #[command(flatten)]
        shared: SharedFlags,
    },
    /// Render a synthetic signal to a WAV file
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Russian vowel shortcut; builds the formant layout from its template
        #[arg(long)]
        vowel: Option<String>,
        #[arg(long, default_value_t = 150.0)]
        f0: f64,
        /// End fundamental for a linear glide (defaults to --f0)
        #[arg(long)]
        f0_end: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        dur: f64,
        #[arg(long, default_value_t = 16000)]
        sr: u32,
        /// Formant bump as "center,bandwidth,gain" with an optional
        /// ",linear,target" or ",sin,target" sweep suffix; repeatable
        #[arg(long)]
        formant: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit the per-frame harmonic track table as CSV
    Tracks {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        shared: SharedFlags,
    },
    /// Print the built-in vowel templates and the correspondence table
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SharedFlags {
    /// Band edges as "low_lo,low_hi,up_lo,up_hi" in Hz
    #[arg(long)]
    bands: Option<String>,
    /// Frame length in samples
    #[arg(long)]
    frame: Option<usize>,
    /// Hop length in samples
    #[arg(long)]
    hop: Option<usize>,
    /// Analysis window: rectangular, hann or hamming
    #[arg(long)]
    window: Option<String>,
    /// Fundamental search range as "lo,hi" in Hz
    #[arg(long)]
    f0_range: Option<String>,
    #[arg(long)]
    voicing_threshold: Option<f64>,
    /// Trend slope threshold in Hz/s
    #[arg(long)]
    slope_threshold: Option<f64>,
    /// Segmentation formant-jump threshold in Hz
    #[arg(long)]
    jump_threshold: Option<f64>,
    /// Minimum template score accepted as a label
    #[arg(long)]
    accept_threshold: Option<f64>,
    /// Template table file overriding the built-in templates
    #[arg(long)]
    templates: Option<PathBuf>,
}

/// Optional config file mirroring the flags; flags win over file values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    bands: Option<[f64; 4]>,
    frame: Option<usize>,
    hop: Option<usize>,
    window: Option<String>,
    f0_range: Option<[f64; 2]>,
    voicing_threshold: Option<f64>,
    slope_threshold: Option<f64>,
    jump_threshold: Option<f64>,
    accept_threshold: Option<f64>,
    templates: Option<PathBuf>,
    format: Option<String>,
}

struct Settings {
    analysis: AnalysisConfig,
    templates: Vec<VowelTemplate>,
    format: OutFormat,
}

fn fail(msg: impl std::fmt::Display) -> CliError {
    CliError(msg.to_string())
}

struct CliError(String);

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn load_file_config() -> Result<FileConfig, CliError> {
    match std::env::var_os(CONFIG_ENV) {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| fail(format!("{}: {e}", Path::new(&path).display())))?;
            toml::from_str(&text).map_err(|e| fail(format!("bad config file: {e}")))
        }
    }
}

fn parse_pair(s: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(fail(format!("--{flag} expects \"lo,hi\"")));
    }
    let lo = parts[0].trim().parse().map_err(|_| fail(format!("bad number in --{flag}")))?;
    let hi = parts[1].trim().parse().map_err(|_| fail(format!("bad number in --{flag}")))?;
    Ok((lo, hi))
}

fn settings(shared: &SharedFlags, format: Option<OutFormat>) -> Result<Settings, CliError> {
    let file = load_file_config()?;
    let mut cfg = AnalysisConfig::default();

    if let Some([a, b, c, d]) = file.bands {
        cfg.bands.lower = (a, b);
        cfg.bands.upper = (c, d);
    }
    if let Some(s) = &shared.bands {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(fail("--bands expects \"low_lo,low_hi,up_lo,up_hi\""));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse().map_err(|_| fail("bad number in --bands")))
            .collect::<Result<_, _>>()?;
        cfg.bands.lower = (nums[0], nums[1]);
        cfg.bands.upper = (nums[2], nums[3]);
    }
    if let Some(n) = shared.frame.or(file.frame) {
        cfg.frame.frame_length = n;
    }
    if let Some(n) = shared.hop.or(file.hop) {
        cfg.frame.hop_length = n;
    }
    if let Some(w) = shared.window.as_ref().or(file.window.as_ref()) {
        cfg.frame.window = w.parse()?;
    }
    if let Some([lo, hi]) = file.f0_range {
        (cfg.pitch.f0_min, cfg.pitch.f0_max) = (lo, hi);
    }
    if let Some(s) = &shared.f0_range {
        (cfg.pitch.f0_min, cfg.pitch.f0_max) = parse_pair(s, "f0-range")?;
    }
    if let Some(v) = shared.voicing_threshold.or(file.voicing_threshold) {
        cfg.pitch.voicing_threshold = v;
    }
    if let Some(v) = shared.slope_threshold.or(file.slope_threshold) {
        cfg.trend.slope_threshold = v;
    }
    if let Some(v) = shared.jump_threshold.or(file.jump_threshold) {
        cfg.segmentation.jump_threshold = v;
    }
    cfg.accept_threshold = shared.accept_threshold.or(file.accept_threshold);

    let templates = match shared.templates.as_ref().or(file.templates.as_ref()) {
        None => builtin_templates(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| fail(format!("{}: {e}", path.display())))?;
            parse_templates(&text)?
        }
    };
    let format = format.unwrap_or(match file.format.as_deref() {
        Some("csv") => OutFormat::Csv,
        Some("json") | None => OutFormat::Json,
        Some(other) => return Err(fail(format!("bad config format: {other}"))),
    });
    Ok(Settings {
        analysis: cfg,
        templates,
        format,
    })
}

fn run_analysis(input: &Path, st: &Settings) -> Result<AnalysisReport, CliError> {
    let buffer = load_wav(input)?;
    Ok(analyze(&buffer, &st.analysis, &st.templates)?)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| fail(format!("{}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn tracks_csv(report: &AnalysisReport) -> String {
    let mut text = String::from(TRACK_CSV_HEADER);
    text.push('\n');
    for rec in report.frame_records() {
        text.push_str(&vowelprint::analysis::track_csv_row(rec));
        text.push('\n');
    }
    text
}

fn cmd_analyze(
    input: &Path,
    out: Option<&PathBuf>,
    format: Option<OutFormat>,
    shared: &SharedFlags,
) -> Result<u8, CliError> {
    let st = settings(shared, format)?;
    let report = run_analysis(input, &st)?;
    let text = match st.format {
        OutFormat::Json => {
            let mut json = serde_json::to_string_pretty(&report).map_err(fail)?;
            json.push('\n');
            json
        }
        OutFormat::Csv => tracks_csv(&report),
    };
    emit(&text, out)?;
    Ok(0)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Clear => "clear",
        Verdict::Unclear => "unclear",
        Verdict::None => "none",
    }
}

fn label_name(label: Option<RussianVowel>) -> String {
    label.map_or_else(|| "unknown".to_string(), |v| v.to_string())
}

fn alternatives(alts: &[RussianVowel]) -> String {
    alts.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

fn cmd_classify(
    input: &Path,
    expect: Option<&str>,
    english: Option<&str>,
    shared: &SharedFlags,
) -> Result<u8, CliError> {
    let st = settings(shared, None)?;
    let expect = expect.map(RussianVowel::parse).transpose()?;
    let report = run_analysis(input, &st)?;

    // dominant voiced segment = the longest one
    let seg = report
        .segments
        .iter()
        .filter(|s| s.voiced && s.classification.is_some())
        .max_by_key(|s| s.end_frame - s.start_frame)
        .ok_or_else(|| fail("no voiced segment found"))?;
    let cls = seg.classification.as_ref().unwrap();
    println!("label={} score={:.3}", label_name(cls.label), cls.score);

    let mut status = 0;
    if let Some(wanted) = expect {
        if cls.label == Some(wanted) {
            println!("expected {wanted}; match");
        } else {
            println!("expected {wanted}; mismatch");
            status = 1;
        }
    }
    if let Some(sound) = english {
        // compare over the whole voiced region so diphthongs keep both halves
        let frames: Vec<_> = report
            .segments
            .iter()
            .filter(|s| s.voiced)
            .flat_map(|s| s.frames.iter().map(|f| f.harmonics))
            .collect();
        let bt = band_track(frames, report.hop_seconds, &st.analysis.trend);
        let cmp = compare_analysis(
            &bt,
            sound,
            &st.templates,
            &st.analysis.trend,
            st.analysis.accept_threshold(),
        )?;
        let expected = cmp
            .expected
            .iter()
            .map(|alts| alternatives(alts))
            .collect::<Vec<_>>()
            .join(" then ");
        let achieved = cmp
            .achieved
            .iter()
            .map(|l| label_name(*l))
            .collect::<Vec<_>>()
            .join(" then ");
        println!(
            "expected {expected}; achieved {achieved}; verdict {}; {}",
            verdict_name(cmp.verdict),
            if cmp.matched { "match" } else { "mismatch" }
        );
        if !cmp.matched {
            status = 1;
        }
        if let Some(label) = cls.label {
            let tpl = st.templates.iter().find(|t| t.label == label);
            if let Some(tpl) = tpl {
                if let Ok(pat) = position_pattern(&bt, tpl) {
                    println!(
                        "position context {:?}: upper range {:?}",
                        pat.context, pat.expected_trend
                    );
                }
            }
        }
    }
    Ok(status)
}

fn parse_formant(s: &str) -> Result<FormantPeak, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || fail(format!("bad --formant \"{s}\": expected center,bandwidth,gain[,linear|sin,target]"));
    if parts.len() != 3 && parts.len() != 5 {
        return Err(bad());
    }
    let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
    let mut peak = FormantPeak::fixed(num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if parts.len() == 5 {
        let target = num(parts[4])?;
        peak.sweep = match parts[3] {
            "linear" => Sweep::LinearTo(target),
            "sin" => Sweep::SinusoidalTo(target),
            _ => return Err(bad()),
        };
    }
    Ok(peak)
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    out: &Path,
    vowel: Option<&str>,
    f0: f64,
    f0_end: Option<f64>,
    dur: f64,
    sr: u32,
    formants: &[String],
    noise: f64,
    seed: u64,
) -> Result<u8, CliError> {
    let buffer = match vowel {
        Some(label) => {
            if !formants.is_empty() || f0_end.is_some() {
                return Err(fail("--vowel cannot be combined with --formant or --f0-end"));
            }
            render_vowel(RussianVowel::parse(label)?, f0, dur, sr)?
        }
        None => {
            let spec = SynthSpec {
                f0_start: f0,
                f0_end: f0_end.unwrap_or(f0),
                duration: dur,
                sample_rate: sr,
                formants: formants
                    .iter()
                    .map(|s| parse_formant(s))
                    .collect::<Result<_, _>>()?,
                noise_level: noise,
                seed,
            };
            render(&spec)?
        }
    };
    write_wav(&buffer, out)?;
    Ok(0)
}

fn cmd_tracks(input: &Path, out: Option<&PathBuf>, shared: &SharedFlags) -> Result<u8, CliError> {
    let st = settings(shared, None)?;
    let report = run_analysis(input, &st)?;
    emit(&tracks_csv(&report), out)?;
    Ok(0)
}

fn cmd_table() -> Result<u8, CliError> {
    let fmt_range = |r: Option<(f64, f64)>| {
        r.map_or_else(|| "-".to_string(), |(lo, hi)| format!("{lo:.0}-{hi:.0}"))
    };
    println!("templates:");
    println!("label  low_range  dominance          up1_range  up2_range  shape");
    for t in builtin_templates() {
        println!(
            "{:<6} {:<10} {:<18} {:<10} {:<10} {:?}",
            t.label.to_string(),
            fmt_range(Some(t.low_range)),
            format!("{:?}", t.low_dominance),
            fmt_range(t.up1_range),
            fmt_range(t.up2_range),
            t.up_shape,
        );
    }
    println!();
    println!("correspondence:");
    for row in correspondence_table() {
        let expected = row
            .expected
            .iter()
            .map(|alts| alternatives(alts))
            .collect::<Vec<_>>()
            .join(" then ");
        println!(
            "[{}] -> {}; {}; {}",
            row.english,
            expected,
            verdict_name(row.verdict),
            row.note
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze {
            input,
            out,
            format,
            shared,
        } => cmd_analyze(input, out.as_ref(), *format, shared),
        Command::Classify {
            input,
            expect,
            english,
            shared,
        } => cmd_classify(input, expect.as_deref(), english.as_deref(), shared),
        Command::Synth {
            out,
            vowel,
            f0,
            f0_end,
            dur,
            sr,
            formant,
            noise,
            seed,
        } => cmd_synth(
            out,
            vowel.as_deref(),
            *f0,
            *f0_end,
            *dur,
            *sr,
            formant,
            *noise,
            *seed,
        ),
        Command::Tracks { input, out, shared } => cmd_tracks(input, out.as_ref(), shared),
        Command::Table => cmd_table(),
    };
    match result {
        Ok(status) => ExitCode::from(status),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
