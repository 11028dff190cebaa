//! Randomized invariants over the library's contracts.

use proptest::prelude::*;

use vowelprint::classifier::{builtin_templates, classify_frame, DEFAULT_ACCEPT_THRESHOLD};
use vowelprint::harmonics::FrameHarmonics;
use vowelprint::signal_io::{frames, parse_wav, AudioBuffer, FrameConfig, Window};
use vowelprint::spectral::SpectralPeak;
use vowelprint::synth::wav_bytes;

proptest! {
    // frame count is exactly floor((len - frame) / hop) + 1
    #[test]
    fn frame_count_formula(
        extra in 0usize..20000,
        frame_length in 320usize..4097,
        hop in prop::sample::select(vec![64usize, 256, 1000, 1024, 4096]),
    ) {
        let hop = hop.min(frame_length);
        let len = frame_length + extra;
        let buf = AudioBuffer::new(vec![0.0; len], 16000).unwrap();
        let cfg = FrameConfig {
            frame_length,
            hop_length: hop,
            window: Window::Rectangular,
        };
        let got = frames(&buf, &cfg).unwrap().len();
        prop_assert_eq!(got, (len - frame_length) / hop + 1);
    }

    // classification depends only on frequencies and intensity order, so a
    // uniform intensity scale never changes the outcome
    #[test]
    fn classify_frame_is_scale_invariant(
        low1 in 100.0f64..800.0,
        low2_rel in prop::option::of(0.1f64..2.0),
        up1 in 760.0f64..2400.0,
        up2_rel in prop::option::of(0.1f64..2.0),
        scale in 0.001f64..1000.0,
    ) {
        let peak = |f: f64, i: f64| Some(SpectralPeak {
            frequency: f,
            intensity: i,
            bin: (f / 3.90625) as usize,
        });
        let build = |s: f64| FrameHarmonics {
            voiced: true,
            low1: peak(low1, s),
            low2: low2_rel.and_then(|r| peak(low1 * 1.4, s * r)),
            up1: peak(up1, s * 0.8),
            up2: up2_rel.and_then(|r| peak(up1 * 1.3, s * 0.8 * r)),
        };
        let templates = builtin_templates();
        let a = classify_frame(&build(1.0), &templates, DEFAULT_ACCEPT_THRESHOLD).unwrap();
        let b = classify_frame(&build(scale), &templates, DEFAULT_ACCEPT_THRESHOLD).unwrap();
        prop_assert_eq!(a.label, b.label);
        prop_assert!((a.score - b.score).abs() < 1e-12);
    }

    // WAV write/read round trip stays within one quantization step
    #[test]
    fn wav_round_trip_within_quantization(samples in prop::collection::vec(-1.0f64..=1.0, 1..400)) {
        let buf = AudioBuffer::new(samples, 16000).unwrap();
        let back = parse_wav(&wav_bytes(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.len(), buf.len());
        for (a, b) in buf.samples.iter().zip(&back.samples) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0, "{} vs {}", a, b);
        }
    }
}
