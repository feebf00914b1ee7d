//! Delay-and-sum beamforming over a uniform linear microphone array.
//!
//! Signals arriving from the steered direction are aligned by geometric
//! delays and averaged, so the coherent source adds in amplitude while
//! uncorrelated noise adds in power: an M-microphone array buys about
//! `10*log10(M)` dB of SNR. Spacing wider than half the shortest wavelength
//! of interest aliases spatially ([`max_spacing`]); note that useful arrays
//! also need an aperture that is a sizable fraction of the wavelength, so
//! compact hardware trades the two off.
//!
//! [`filter_and_sum_adaptive`] adds a sidelobe-cancelling stage: adjacent
//! differences of the aligned channels block the steered signal and feed an
//! NLMS canceller that scrubs whatever correlates with them out of the
//! delay-and-sum output. This is a simplified filter-and-sum stage, not a
//! constrained (LCMV-style) optimizer.

use crate::error::{Error, Result};
use crate::filters::{filter_init, FilterConfig, FilterKind};

/// Uniform linear array description.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub mic_count: usize,
    pub spacing_m: f64,
    pub speed_of_sound: f64,
    pub sample_rate: u32,
}

impl ArrayGeometry {
    /// Geometry with the standard speed of sound (343 m/s).
    pub fn new(mic_count: usize, spacing_m: f64, sample_rate: u32) -> Result<Self> {
        if mic_count < 2 {
            return Err(Error::Argument("array needs at least 2 microphones".into()));
        }
        if !spacing_m.is_finite() || spacing_m <= 0.0 {
            return Err(Error::Argument("spacing must be > 0".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Argument("sample rate must be > 0".into()));
        }
        Ok(ArrayGeometry {
            mic_count,
            spacing_m,
            speed_of_sound: 343.0,
            sample_rate,
        })
    }
}

/// Per-microphone fractional sample delays; the minimum is always 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringDelays {
    delays: Vec<f64>,
}

impl SteeringDelays {
    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }
}

/// Delays (in samples) that align a plane wave from `angle` radians off
/// broadside: microphone m is delayed by `m * spacing * sin(angle) / c`
/// seconds, shifted so the earliest microphone has delay 0.
///
/// Positive angles put the source on the high-index side of the array, so
/// high-index microphones hear it first and low-index ones are delayed the
/// least. `angle` must lie in [-pi/2, pi/2].
pub fn steering_delays(geom: &ArrayGeometry, angle: f64) -> SteeringDelays {
    assert!(
        angle.abs() <= std::f64::consts::FRAC_PI_2 + 1e-12,
        "steering angle {angle} outside [-pi/2, pi/2]"
    );
    let per_mic = geom.spacing_m * angle.sin() / geom.speed_of_sound * geom.sample_rate as f64;
    let mut delays: Vec<f64> = (0..geom.mic_count).map(|m| m as f64 * per_mic).collect();
    let min = delays.iter().cloned().fold(f64::INFINITY, f64::min);
    for d in &mut delays {
        *d -= min;
    }
    SteeringDelays { delays }
}

/// Largest alias-free spacing for content up to `f_max`: half a wavelength,
/// `c / (2 * f_max)`.
pub fn max_spacing(f_max: f64, speed_of_sound: f64) -> f64 {
    assert!(f_max > 0.0, "f_max must be positive");
    speed_of_sound / (2.0 * f_max)
}

/// Delay a signal by a non-negative fractional number of samples using
/// linear interpolation (zero outside the recording).
fn delay_fractional(x: &[f64], delay: f64) -> Vec<f64> {
    debug_assert!(delay >= 0.0);
    let n = x.len();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let t = i as f64 - delay;
        if t < 0.0 {
            continue;
        }
        let lo = t.floor() as usize;
        let frac = t - lo as f64;
        let a = x[lo];
        let b = if lo + 1 < n { x[lo + 1] } else { 0.0 };
        *o = (1.0 - frac) * a + frac * b;
    }
    out
}

/// Align each channel by its steering delay and average (sum / M).
///
/// Averaging keeps the output in the same normalized range as the inputs;
/// the coherent-gain arithmetic is unchanged because signal and noise scale
/// together.
pub fn delay_and_sum(channels: &[Vec<f64>], delays: &SteeringDelays) -> Result<Vec<f64>> {
    if channels.len() != delays.len() {
        return Err(Error::Argument(format!(
            "{} channels but {} delays",
            channels.len(),
            delays.len()
        )));
    }
    if channels.is_empty() {
        return Err(Error::Argument("no channels".into()));
    }
    let n = channels[0].len();
    if channels.iter().any(|c| c.len() != n) {
        return Err(Error::Argument("channel lengths differ".into()));
    }
    let m = channels.len() as f64;
    let mut out = vec![0.0; n];
    for (ch, &delay) in channels.iter().zip(delays.delays()) {
        let aligned = delay_fractional(ch, delay);
        for (o, v) in out.iter_mut().zip(&aligned) {
            *o += v / m;
        }
    }
    Ok(out)
}

/// Delay-and-sum plus an adaptive sidelobe canceller.
///
/// The fixed branch is the plain delay-and-sum output. Differences of
/// adjacent aligned channels cancel the steered coherent signal and act as
/// noise references; an NLMS canceller per reference subtracts whatever in
/// the fixed branch correlates with them. With a noise-free coherent input
/// the references are ~0 and the output collapses to delay-and-sum.
pub fn filter_and_sum_adaptive(
    channels: &[Vec<f64>],
    geom: &ArrayGeometry,
    angle: f64,
    filter_cfg: &FilterConfig,
) -> Result<Vec<f64>> {
    if channels.len() < 2 {
        return Err(Error::Argument(
            "adaptive beamforming needs at least 2 channels".into(),
        ));
    }
    if channels.len() != geom.mic_count {
        return Err(Error::Argument(format!(
            "{} channels but geometry expects {}",
            channels.len(),
            geom.mic_count
        )));
    }
    let delays = steering_delays(geom, angle);
    let n = channels[0].len();
    if channels.iter().any(|c| c.len() != n) {
        return Err(Error::Argument("channel lengths differ".into()));
    }

    let aligned: Vec<Vec<f64>> = channels
        .iter()
        .zip(delays.delays())
        .map(|(ch, &d)| delay_fractional(ch, d))
        .collect();

    let m = aligned.len() as f64;
    let mut out = vec![0.0; n];
    for ch in &aligned {
        for (o, v) in out.iter_mut().zip(ch) {
            *o += v / m;
        }
    }

    // Cascade one canceller per blocking reference; each stage's error
    // output is the next stage's desired signal.
    let block = filter_cfg.block_size;
    for pair in aligned.windows(2) {
        let reference: Vec<f64> = pair[1].iter().zip(&pair[0]).map(|(b, a)| b - a).collect();
        let mut state = filter_init(FilterKind::Nlms, filter_cfg.clone())?;
        let mut cleaned = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let end = (i + block).min(n);
            let mut xb = reference[i..end].to_vec();
            let mut db = out[i..end].to_vec();
            let valid = end - i;
            xb.resize(block, 0.0);
            db.resize(block, 0.0);
            let r = state.process_block(&xb, &db)?;
            cleaned.extend_from_slice(&r.e[..valid]);
            i = end;
        }
        out = cleaned;
    }
    Ok(out)
}
