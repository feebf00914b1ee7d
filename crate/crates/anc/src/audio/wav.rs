//! Minimal RIFF/WAVE reader and writer.
//!
//! Supports uncompressed PCM (format tag 1), 16- or 24-bit little-endian
//! samples, one or two channels. That subset covers everything this project
//! reads or writes; multichannel beamforming inputs arrive as one mono file
//! per microphone.

use super::AudioClip;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;

/// Sample resolution for [`encode_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    B16,
    B24,
}

impl BitDepth {
    pub fn bits(self) -> u16 {
        match self {
            BitDepth::B16 => 16,
            BitDepth::B24 => 24,
        }
    }

    fn bytes(self) -> usize {
        self.bits() as usize / 8
    }
}

/// Decode a RIFF/WAVE byte stream into normalized samples.
///
/// Integer PCM is scaled by `2^(bits-1)`, putting every decoded sample in
/// [-1.0, +1.0].
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.len() < 12 {
        return Err(Error::Format("file too small for a RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::Format("missing RIFF marker".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("missing WAVE marker".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (tag, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or_else(|| Error::Format("chunk size overflows".into()))?;
        if body_end > bytes.len() {
            return Err(Error::Format(format!(
                "chunk '{}' extends past end of file",
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::Format("fmt chunk truncated".into()));
                }
                let tag = u16::from_le_bytes([body[0], body[1]]);
                let channels = u16::from_le_bytes([body[2], body[3]]);
                let rate = u32::from_le_bytes([body[4], body[5], body[6], body[7]]);
                let bits = u16::from_le_bytes([body[14], body[15]]);
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {} // skip ancillary chunks (LIST, fact, ...)
        }
        // RIFF chunks are word-aligned; odd sizes carry one pad byte.
        pos = body_end + (size & 1);
    }

    let (tag, channels, rate, bits) = fmt.ok_or_else(|| Error::Format("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::Format("no data chunk".into()))?;

    if tag != FORMAT_PCM {
        return Err(Error::Unsupported(format!(
            "only PCM (format tag 1) is supported, got tag {tag}"
        )));
    }
    if !(bits == 16 || bits == 24) {
        return Err(Error::Unsupported(format!(
            "only 16- or 24-bit samples are supported, got {bits}"
        )));
    }
    if !(1..=2).contains(&channels) {
        return Err(Error::Unsupported(format!(
            "only 1 or 2 channels are supported, got {channels}"
        )));
    }
    if rate == 0 {
        return Err(Error::Format("sample rate is zero".into()));
    }

    let bytes_per_sample = bits as usize / 8;
    let frame_bytes = bytes_per_sample * channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(Error::Format(
            "data chunk is not a whole number of frames".into(),
        ));
    }
    let frames = data.len() / frame_bytes;
    let scale = f64::from(1u32 << (bits - 1));

    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(frames); channels as usize];
    let mut cursor = 0usize;
    for _ in 0..frames {
        for ch in out.iter_mut() {
            let v = match bits {
                16 => i32::from(i16::from_le_bytes([data[cursor], data[cursor + 1]])),
                24 => {
                    let raw = u32::from(data[cursor])
                        | u32::from(data[cursor + 1]) << 8
                        | u32::from(data[cursor + 2]) << 16;
                    // sign-extend 24 -> 32
                    ((raw << 8) as i32) >> 8
                }
                _ => unreachable!(),
            };
            ch.push(f64::from(v) / scale);
            cursor += bytes_per_sample;
        }
    }

    AudioClip::new(out, rate)
}

/// Encode a clip as PCM WAV at the given depth.
///
/// Samples are rounded half-away-from-zero onto the integer grid and
/// saturated to full scale, so values outside [-1, 1] clamp rather than
/// wrap. Round-tripping a clip already on the target grid is bit-exact.
pub fn encode_wav(clip: &AudioClip, depth: BitDepth) -> Result<Vec<u8>> {
    if clip.is_empty() {
        return Err(Error::EmptyInput("cannot encode an empty clip".into()));
    }
    let channels = clip.channel_count();
    if channels > 2 {
        return Err(Error::Unsupported(format!(
            "WAV output supports 1 or 2 channels, clip has {channels}"
        )));
    }

    let bits = depth.bits();
    let scale = f64::from(1u32 << (bits - 1));
    let hi = scale - 1.0;
    let lo = -scale;

    let frames = clip.len();
    let frame_bytes = depth.bytes() * channels;
    let data_len = frames * frame_bytes;

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&clip.sample_rate().to_le_bytes());
    let byte_rate = clip.sample_rate() * frame_bytes as u32;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&(frame_bytes as u16).to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());

    for i in 0..frames {
        for ch in clip.channels() {
            let v = (ch[i] * scale).round().clamp(lo, hi) as i32;
            match depth {
                BitDepth::B16 => out.extend_from_slice(&(v as i16).to_le_bytes()),
                BitDepth::B24 => {
                    let b = v.to_le_bytes();
                    out.extend_from_slice(&b[0..3]);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Hand-assembled 16-bit mono WAV around the given PCM words.
    fn wav16(words: &[i16], rate: u32) -> Vec<u8> {
        let clip = AudioClip::mono(
            words.iter().map(|&w| f64::from(w) / 32768.0).collect(),
            rate,
        );
        encode_wav(&clip, BitDepth::B16).unwrap()
    }

    #[test]
    fn decode_single_positive_sample() {
        let bytes = wav16(&[0x4000], 48_000);
        let clip = decode_wav(&bytes).unwrap();
        assert_eq!(clip.samples(), &[0.5]);
        assert_eq!(clip.sample_rate(), 48_000);
        assert_eq!(clip.channel_count(), 1);
    }

    #[test]
    fn decode_silence() {
        let bytes = wav16(&[0; 64], 8_000);
        let clip = decode_wav(&bytes).unwrap();
        assert!(clip.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn encode_half_scale_hits_exact_word() {
        let bytes = encode_wav(&AudioClip::mono(vec![0.5], 48_000), BitDepth::B16).unwrap();
        let word = i16::from_le_bytes([bytes[44], bytes[45]]);
        assert_eq!(word, 0x4000);
    }

    #[test]
    fn encode_saturates_out_of_range() {
        let bytes = encode_wav(&AudioClip::mono(vec![1.5, -2.0], 48_000), BitDepth::B16).unwrap();
        let w0 = i16::from_le_bytes([bytes[44], bytes[45]]);
        let w1 = i16::from_le_bytes([bytes[46], bytes[47]]);
        assert_eq!(w0, 0x7FFF);
        assert_eq!(w1, -0x8000);
    }

    #[test]
    fn sixteen_bit_round_trip_is_bit_exact_on_grid() {
        let mut rng = crate::rng::rng_from_seed(11);
        let samples: Vec<f64> = (0..1000)
            .map(|_| f64::from(rng.gen_range(-32768i32..=32767)) / 32768.0)
            .collect();
        let clip = AudioClip::mono(samples.clone(), 44_100);
        let decoded = decode_wav(&encode_wav(&clip, BitDepth::B16).unwrap()).unwrap();
        assert_eq!(decoded.samples(), samples.as_slice());
    }

    #[test]
    fn twenty_four_bit_sine_round_trip() {
        let rate = 48_000u32;
        let samples: Vec<f64> = (0..rate as usize / 10)
            .map(|i| 0.9 * (std::f64::consts::TAU * 1000.0 * i as f64 / rate as f64).sin())
            .collect();
        let clip = AudioClip::mono(samples.clone(), rate);
        let decoded = decode_wav(&encode_wav(&clip, BitDepth::B24).unwrap()).unwrap();
        let tol = 2f64.powi(-23);
        for (i, (a, b)) in samples.iter().zip(decoded.samples()).enumerate() {
            assert!(
                (a - b).abs() <= tol,
                "sample {i}: {a} vs {b} differs by more than 2^-23"
            );
        }
    }

    #[test]
    fn stereo_survives_round_trip() {
        let left = vec![0.25, -0.25, 0.5];
        let right = vec![-0.5, 0.125, 0.0];
        let clip = AudioClip::new(vec![left.clone(), right.clone()], 16_000).unwrap();
        let decoded = decode_wav(&encode_wav(&clip, BitDepth::B16).unwrap()).unwrap();
        assert_eq!(decoded.channel_count(), 2);
        assert_eq!(decoded.channel(0), left.as_slice());
        assert_eq!(decoded.channel(1), right.as_slice());
    }

    #[test]
    fn malformed_headers_are_format_errors() {
        assert!(matches!(decode_wav(b"RIF"), Err(Error::Format(_))));
        assert!(matches!(
            decode_wav(b"RIFFxxxxWAVX"),
            Err(Error::Format(_))
        ));
        let mut bytes = wav16(&[0], 48_000);
        bytes[40] = 200; // data chunk claims more bytes than exist
        assert!(matches!(decode_wav(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn unsupported_formats_are_rejected() {
        let mut float_tag = wav16(&[0], 48_000);
        float_tag[20] = 3; // IEEE float
        assert!(matches!(
            decode_wav(&float_tag),
            Err(Error::Unsupported(_))
        ));

        let mut eight_bit = wav16(&[0], 48_000);
        eight_bit[34] = 8;
        assert!(matches!(
            decode_wav(&eight_bit),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn empty_clip_is_an_error() {
        let clip = AudioClip::mono(vec![], 48_000);
        assert!(matches!(
            encode_wav(&clip, BitDepth::B16),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn skips_ancillary_chunks() {
        // Insert a LIST chunk between fmt and data.
        let base = wav16(&[0x4000], 48_000);
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&base[..36]);
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(b"INFO");
        bytes.extend_from_slice(&base[36..]);
        let riff_len = (bytes.len() - 8) as u32;
        bytes[4..8].copy_from_slice(&riff_len.to_le_bytes());
        let clip = decode_wav(&bytes).unwrap();
        assert_eq!(clip.samples(), &[0.5]);
    }
}
