//! Deterministic dual-microphone test scenarios.
//!
//! A scenario is the (clean, reference, primary) signal triple of the
//! two-microphone canceller setup with full ground truth: the primary mic
//! hears speech plus noise that reached it through a short acoustic path
//! `h`, the reference mic hears the raw noise. Everything is a pure function
//! of the [`ScenarioSpec`], so identical specs produce bit-identical
//! scenarios.
//!
//! The clean-speech surrogate is a sum of 3-5 speech-band sinusoids under a
//! slow amplitude-modulation envelope: reproducible, nonstationary, and
//! band-limited like voiced speech. Real recordings can be substituted via
//! [`CleanKind::WavFile`].

use crate::audio::{decode_wav, AudioClip};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, standard_normal};
use rand::Rng;
use std::path::PathBuf;

/// Source of the clean (speech) signal.
#[derive(Debug, Clone, PartialEq)]
pub enum CleanKind {
    /// Multitone surrogate with an amplitude-modulation envelope.
    MultitoneAm,
    /// First channel of a WAV file at the scenario sample rate.
    WavFile(PathBuf),
}

/// Spectral shape of the reference-microphone noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    White,
    /// White noise smoothed by a short triangular FIR.
    FilteredWhite,
}

/// Everything needed to synthesize a scenario deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub duration_s: f64,
    pub sample_rate: u32,
    pub clean: CleanKind,
    pub noise: NoiseKind,
    /// Length of the acoustic path from the noise source to the primary mic.
    pub channel_taps: usize,
    /// Pre-filter SNR at the primary mic; `None` means noise-free.
    pub target_snr_in_db: Option<f64>,
    /// Clean-signal bleed into the reference mic (0 = ideal reference).
    pub leakage: f64,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            duration_s: 10.0,
            sample_rate: 48_000,
            clean: CleanKind::MultitoneAm,
            noise: NoiseKind::White,
            channel_taps: 64,
            target_snr_in_db: Some(5.0),
            leakage: 0.0,
            seed: 42,
        }
    }
}

impl ScenarioSpec {
    /// Read a spec from the shared `key = value` config format.
    ///
    /// Recognized keys (all optional, defaults in parentheses):
    /// `scenario.duration` (10.0), `scenario.sample_rate` (48000),
    /// `scenario.clean` (`multitone` or `wav:<path>`), `scenario.noise`
    /// (`white` | `filtered-white`), `scenario.channel_taps` (64),
    /// `scenario.snr_in_db` (5.0, or `inf` for noise-free),
    /// `scenario.leakage` (0.0), `scenario.seed` (42).
    pub fn from_config(cfg: &Config) -> Result<ScenarioSpec> {
        let mut spec = ScenarioSpec {
            duration_s: cfg.f64_or("scenario.duration", 10.0)?,
            sample_rate: cfg.u32_or("scenario.sample_rate", 48_000)?,
            ..ScenarioSpec::default()
        };
        spec.channel_taps = cfg.usize_or("scenario.channel_taps", 64)?;
        spec.leakage = cfg.f64_or("scenario.leakage", 0.0)?;
        spec.seed = cfg.u64_or("scenario.seed", 42)?;

        match cfg.get("scenario.clean") {
            None | Some("multitone") => {}
            Some(s) if s.starts_with("wav:") => {
                spec.clean = CleanKind::WavFile(PathBuf::from(&s[4..]));
            }
            Some(other) => {
                return Err(cfg.invalid(
                    "scenario.clean",
                    format!("expected 'multitone' or 'wav:<path>', got '{other}'"),
                ))
            }
        }
        match cfg.get("scenario.noise") {
            None | Some("white") => {}
            Some("filtered-white") => spec.noise = NoiseKind::FilteredWhite,
            Some(other) => {
                return Err(cfg.invalid(
                    "scenario.noise",
                    format!("expected 'white' or 'filtered-white', got '{other}'"),
                ))
            }
        }
        match cfg.get("scenario.snr_in_db") {
            None => {}
            Some("inf") => spec.target_snr_in_db = None,
            Some(_) => {
                spec.target_snr_in_db = cfg.get_f64("scenario.snr_in_db")?;
            }
        }

        if spec.duration_s <= 0.0 {
            return Err(cfg.invalid("scenario.duration", "must be > 0"));
        }
        if spec.sample_rate == 0 {
            return Err(cfg.invalid("scenario.sample_rate", "must be > 0"));
        }
        if spec.channel_taps == 0 {
            return Err(cfg.invalid("scenario.channel_taps", "must be >= 1"));
        }
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !self.duration_s.is_finite() || self.duration_s <= 0.0 {
            return Err(Error::Argument("scenario duration must be > 0".into()));
        }
        if self.sample_rate == 0 {
            return Err(Error::Argument("scenario sample rate must be > 0".into()));
        }
        if self.channel_taps == 0 {
            return Err(Error::Argument("channel must have at least 1 tap".into()));
        }
        if !self.leakage.is_finite() {
            return Err(Error::Argument("leakage must be finite".into()));
        }
        Ok(())
    }
}

/// A synthesized scenario with ground truth.
///
/// For synthesized scenarios `primary - clean` equals `channel` convolved
/// with `reference` (up to float rounding). Scenarios reconstructed from
/// exported WAV files carry an empty `channel`, since the acoustic path is
/// not stored in the files.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub clean: AudioClip,
    pub reference: AudioClip,
    pub primary: AudioClip,
    pub channel: Vec<f64>,
    pub snr_in_db: f64,
}

impl Scenario {
    pub fn len(&self) -> usize {
        self.clean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clean.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.clean.sample_rate()
    }

    /// Rebuild a scenario from its three exported mono clips.
    ///
    /// `snr_in_db` is measured from the clips; the acoustic path is unknown
    /// and left empty.
    pub fn from_clips(clean: AudioClip, reference: AudioClip, primary: AudioClip) -> Result<Self> {
        if clean.len() != reference.len() || clean.len() != primary.len() {
            return Err(Error::Data(
                "clean/reference/primary clips must have equal length".into(),
            ));
        }
        if clean.sample_rate() != reference.sample_rate()
            || clean.sample_rate() != primary.sample_rate()
        {
            return Err(Error::Data(
                "clean/reference/primary clips must share a sample rate".into(),
            ));
        }
        let snr_in_db = measured_snr_db(clean.samples(), primary.samples());
        Ok(Scenario {
            clean,
            reference,
            primary,
            channel: Vec::new(),
            snr_in_db,
        })
    }
}

/// FIR filtering with zero pre-history: `out[n] = sum_k coeffs[k] * input[n-k]`.
///
/// Output length equals input length.
pub fn fir_channel(input: &[f64], coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.is_empty() {
        return Err(Error::Argument("FIR coefficients must be non-empty".into()));
    }
    let mut out = vec![0.0; input.len()];
    for (n, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &c) in coeffs.iter().enumerate().take(n + 1) {
            acc += c * input[n - k];
        }
        *o = acc;
    }
    Ok(out)
}

fn power(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

fn measured_snr_db(clean: &[f64], primary: &[f64]) -> f64 {
    let noise: Vec<f64> = primary.iter().zip(clean).map(|(p, c)| p - c).collect();
    let pn = power(&noise);
    if pn == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (power(clean) / pn).log10()
    }
}

/// Synthesize the scenario described by `spec`.
///
/// The noise reaching the primary mic is scaled so the measured pre-filter
/// SNR matches `target_snr_in_db` exactly (the spec tolerance is 0.1 dB;
/// the construction is analytic, so the match is tight). All three signals
/// share one headroom rescale when the mix would clip, which leaves both the
/// SNR and the reference-to-primary path relation intact.
pub fn synth_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let n = (spec.duration_s * spec.sample_rate as f64).round() as usize;
    if n == 0 {
        return Err(Error::Argument(
            "scenario duration rounds to zero samples".into(),
        ));
    }

    let mut rng = rng_from_seed(spec.seed);

    // Draw order is fixed: clean parameters, channel signs, then the noise
    // stream. Changing it would silently re-map every seed.
    let clean = match &spec.clean {
        CleanKind::MultitoneAm => multitone_am(&mut rng, n, spec.sample_rate),
        CleanKind::WavFile(path) => {
            let bytes = std::fs::read(path)?;
            let clip = decode_wav(&bytes)?;
            if clip.sample_rate() != spec.sample_rate {
                return Err(Error::Argument(format!(
                    "clean WAV rate {} does not match scenario rate {}",
                    clip.sample_rate(),
                    spec.sample_rate
                )));
            }
            if clip.len() < n {
                return Err(Error::Argument(format!(
                    "clean WAV has {} samples, scenario needs {n}",
                    clip.len()
                )));
            }
            clip.channel(0)[..n].to_vec()
        }
    };

    // Acoustic path: random-sign taps under an exponential-decay envelope
    // (|h_k| proportional to 0.7^k), normalized to unit energy.
    let mut channel: Vec<f64> = (0..spec.channel_taps)
        .map(|k| {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            sign * 0.7f64.powi(k as i32)
        })
        .collect();
    let energy: f64 = channel.iter().map(|c| c * c).sum();
    let norm = energy.sqrt();
    for c in &mut channel {
        *c /= norm;
    }

    let mut noise: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    if spec.noise == NoiseKind::FilteredWhite {
        // Short triangular smoother, unit energy so the noise level survives.
        let tri = [1.0, 2.0, 3.0, 2.0, 1.0];
        let e: f64 = tri.iter().map(|c| c * c).sum::<f64>();
        let lp: Vec<f64> = tri.iter().map(|c| c / e.sqrt()).collect();
        noise = fir_channel(&noise, &lp)?;
    }

    let noise_at_primary = fir_channel(&noise, &channel)?;

    let gain = match spec.target_snr_in_db {
        None => 0.0,
        Some(target) => {
            if !target.is_finite() {
                return Err(Error::Argument(
                    "target SNR must be finite (use None for noise-free)".into(),
                ));
            }
            let pc = power(&clean);
            let pn = power(&noise_at_primary);
            if pc == 0.0 {
                return Err(Error::Argument(
                    "clean signal has zero power; SNR target is undefined".into(),
                ));
            }
            (pc / (pn * 10f64.powf(target / 10.0))).sqrt()
        }
    };

    let mut reference: Vec<f64> = noise
        .iter()
        .zip(&clean)
        .map(|(x, s)| gain * x + spec.leakage * s)
        .collect();
    let mut primary: Vec<f64> = clean
        .iter()
        .zip(&noise_at_primary)
        .map(|(s, v)| s + gain * v)
        .collect();
    let mut clean = clean;

    // One common rescale keeps every sample in [-1, 1] without touching the
    // SNR or the linear relation between the mics.
    let peak = clean
        .iter()
        .chain(&reference)
        .chain(&primary)
        .fold(0.0f64, |m, &s| m.max(s.abs()));
    if peak > 0.99 {
        let g = 0.99 / peak;
        for s in clean.iter_mut().chain(&mut reference).chain(&mut primary) {
            *s *= g;
        }
    }

    let snr_in_db = measured_snr_db(&clean, &primary);
    Ok(Scenario {
        clean: AudioClip::mono(clean, spec.sample_rate),
        reference: AudioClip::mono(reference, spec.sample_rate),
        primary: AudioClip::mono(primary, spec.sample_rate),
        channel,
        snr_in_db,
    })
}

/// Speech-band multitone with a 2-8 Hz amplitude-modulation envelope,
/// peak-normalized to 0.5 to leave headroom for the noise mix.
fn multitone_am<R: Rng>(rng: &mut R, n: usize, sample_rate: u32) -> Vec<f64> {
    let tones = rng.gen_range(3..=5);
    let params: Vec<(f64, f64, f64)> = (0..tones)
        .map(|_| {
            (
                rng.gen_range(200.0..3400.0),
                rng.gen_range(0.5..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let env_rate = rng.gen_range(2.0..8.0);
    let env_phase = rng.gen_range(0.0..std::f64::consts::TAU);

    let fs = sample_rate as f64;
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let tone: f64 = params
                .iter()
                .map(|(f, a, p)| a * (std::f64::consts::TAU * f * t + p).sin())
                .sum();
            let env = 0.55 + 0.45 * (std::f64::consts::TAU * env_rate * t + env_phase).sin();
            tone * env
        })
        .collect();
    let peak = out.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    if peak > 0.0 {
        for s in &mut out {
            *s *= 0.5 / peak;
        }
    }
    out
}
