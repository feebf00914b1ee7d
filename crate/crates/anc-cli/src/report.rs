//! File-writing helpers shared by the commands.

use anc::audio::{encode_wav, AudioClip, BitDepth};
use anc::Result;
use std::path::Path;

/// Write a mono clip as 24-bit WAV.
pub fn write_wav(path: &Path, clip: &AudioClip) -> Result<()> {
    std::fs::write(path, encode_wav(clip, BitDepth::B24)?)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// CSV cell for a float: plain shortest representation, `inf` allowed,
/// empty for None.
pub fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}
