//! 24-bit PCM samples in 32-bit transport frames.
//!
//! Serial audio buses carry a 24-bit sample left-aligned in a 32-bit slot:
//! the sample occupies bits 31..8 and the low byte is padding. Packing here
//! is MSB-first (left-aligned), the one self-consistent convention; the
//! half-word accessor exposes how such a frame splits into two 16-bit
//! transfers, where the high half-word alone amounts to a 16-bit-resolution
//! rendition of the sample.

use crate::error::{Error, Result};

const SAMPLE_MIN: i32 = -(1 << 23);
const SAMPLE_MAX: i32 = (1 << 23) - 1;

/// One 32-bit transport frame holding a left-aligned 24-bit signed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcmFrame32 {
    raw: u32,
}

impl PcmFrame32 {
    /// Wrap a raw bus word. The low byte is padding and ignored on unpack.
    pub fn from_raw(raw: u32) -> Self {
        PcmFrame32 { raw }
    }

    pub fn raw(self) -> u32 {
        self.raw
    }

    /// The two 16-bit transfers of this frame: (bits 31..16, bits 15..0).
    pub fn half_words(self) -> (u16, u16) {
        ((self.raw >> 16) as u16, self.raw as u16)
    }
}

/// Pack a 24-bit signed sample into a 32-bit frame (shift left by 8).
///
/// The low byte of the result is always zero.
pub fn frame_pack(sample: i32) -> Result<PcmFrame32> {
    if !(SAMPLE_MIN..=SAMPLE_MAX).contains(&sample) {
        return Err(Error::Range(format!(
            "sample {sample} outside 24-bit range [{SAMPLE_MIN}, {SAMPLE_MAX}]"
        )));
    }
    Ok(PcmFrame32 {
        raw: (sample << 8) as u32,
    })
}

/// Recover the signed 24-bit sample from a frame (sign-extending bits 31..8).
pub fn frame_unpack(frame: PcmFrame32) -> i32 {
    (frame.raw as i32) >> 8
}
