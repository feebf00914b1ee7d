//! Audio sample containers, PCM frame packing, and bit-depth quantization.

mod frame;
mod wav;

pub use frame::{frame_pack, frame_unpack, PcmFrame32};
pub use wav::{decode_wav, encode_wav, BitDepth};

use crate::error::{Error, Result};

/// A decoded or synthesized audio signal.
///
/// Samples are normalized, dimensionless reals; decoding scales integer PCM
/// by `2^(bits-1)`, so -1.0 is exactly representable and +1.0 is a
/// saturation bound. All channels have equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl AudioClip {
    /// Multichannel clip. All channels must be non-empty-consistent and of
    /// equal length; the rate must be positive.
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Argument("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::Argument("clip needs at least one channel".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Argument(
                "all channels must have equal length".into(),
            ));
        }
        Ok(AudioClip {
            channels,
            sample_rate,
        })
    }

    /// Single-channel clip.
    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Self {
        AudioClip {
            channels: vec![samples],
            sample_rate,
        }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Frames per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    /// First channel; the common case throughout the crate is mono.
    pub fn samples(&self) -> &[f64] {
        &self.channels[0]
    }

    /// Largest sample magnitude across all channels (0.0 for empty clips).
    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, &s| m.max(s.abs()))
    }
}

/// Target resolution for [`quantize`]. Valid range is 2..=24 bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationSpec {
    bits: u32,
}

impl QuantizationSpec {
    pub fn new(bits: u32) -> Result<Self> {
        if !(2..=24).contains(&bits) {
            return Err(Error::Range(format!(
                "quantization bits must be in [2, 24], got {bits}"
            )));
        }
        Ok(QuantizationSpec { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }
}

/// Requantize a clip to `2^bits` uniform levels spanning [-1, 1).
///
/// Rounding is half-away-from-zero with saturation at the grid edges, so the
/// result is symmetric around zero and idempotent. Output samples remain
/// normalized reals on the coarser grid.
pub fn quantize(clip: &AudioClip, spec: QuantizationSpec) -> AudioClip {
    let scale = f64::from(1u32 << (spec.bits - 1));
    let hi = scale - 1.0;
    let lo = -scale;
    let channels = clip
        .channels
        .iter()
        .map(|ch| {
            ch.iter()
                .map(|&s| (s * scale).round().clamp(lo, hi) / scale)
                .collect()
        })
        .collect();
    AudioClip {
        channels,
        sample_rate: clip.sample_rate,
    }
}
