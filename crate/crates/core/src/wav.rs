//! Minimal RIFF/WAVE reader: integer PCM (8/16/24-bit) and 32-bit IEEE
//! float, first channel only, decoded to unit-scale `f64` samples.

use std::path::Path;

use crate::error::{Error, Result};

/// Decoded audio: unit-scale samples of the first channel plus the recorded
/// (not resampled) rate.
#[derive(Debug, Clone)]
pub struct WavData {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub channels: u16,
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

fn take<'a>(bytes: &'a [u8], offset: usize, len: usize, what: &str) -> Result<&'a [u8]> {
    bytes
        .get(offset..offset + len)
        .ok_or_else(|| format_err(offset, format!("truncated file while reading {what}")))
}

fn u16_at(bytes: &[u8], offset: usize, what: &str) -> Result<u16> {
    let b = take(bytes, offset, 2, what)?;
    Ok(u16::from_le_bytes([b[0], b[1]]))
}

fn u32_at(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    let b = take(bytes, offset, 4, what)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

/// Decodes a WAV file from memory.
pub fn read_wav_bytes(bytes: &[u8]) -> Result<WavData> {
    if take(bytes, 0, 4, "RIFF tag")? != b"RIFF" {
        return Err(format_err(0, "missing RIFF tag"));
    }
    if take(bytes, 8, 4, "WAVE tag")? != b"WAVE" {
        return Err(format_err(8, "missing WAVE tag"));
    }

    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16, u16)> = None; // format, channels, rate, block, bits
    let mut data: Option<(usize, usize)> = None; // offset, len

    while pos + 8 <= bytes.len() {
        let id = take(bytes, pos, 4, "chunk id")?;
        let size = u32_at(bytes, pos + 4, "chunk size")? as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(format_err(pos, "fmt chunk too short"));
                }
                let audio_format = u16_at(bytes, body, "audio format")?;
                let channels = u16_at(bytes, body + 2, "channel count")?;
                let sample_rate = u32_at(bytes, body + 4, "sample rate")?;
                let block_align = u16_at(bytes, body + 12, "block align")?;
                let bits = u16_at(bytes, body + 14, "bits per sample")?;
                fmt = Some((audio_format, channels, sample_rate, block_align, bits));
            }
            b"data" => {
                if body + size > bytes.len() {
                    return Err(format_err(body, "truncated data chunk"));
                }
                data = Some((body, size));
            }
            _ => {}
        }
        // Chunks are padded to even sizes.
        pos = body + size + (size & 1);
    }

    let (audio_format, channels, sample_rate, block_align, bits) =
        fmt.ok_or_else(|| format_err(bytes.len(), "missing fmt chunk"))?;
    let (data_off, data_len) =
        data.ok_or_else(|| format_err(bytes.len(), "missing data chunk"))?;

    if channels == 0 {
        return Err(format_err(data_off, "zero channels"));
    }
    let bytes_per_sample = match (audio_format, bits) {
        (1, 8) => 1,
        (1, 16) => 2,
        (1, 24) => 3,
        (3, 32) => 4,
        _ => {
            return Err(format_err(
                data_off,
                format!("unsupported codec: format {audio_format}, {bits} bits"),
            ))
        }
    };
    let frame = if block_align as usize >= bytes_per_sample * channels as usize {
        block_align as usize
    } else {
        bytes_per_sample * channels as usize
    };
    let frames = data_len / frame;
    let mut samples = Vec::with_capacity(frames);
    for k in 0..frames {
        let off = data_off + k * frame;
        let s = &bytes[off..off + bytes_per_sample];
        let v = match (audio_format, bits) {
            (1, 8) => (s[0] as f64 - 128.0) / 128.0,
            (1, 16) => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
            (1, 24) => {
                let raw = (s[0] as i32) | ((s[1] as i32) << 8) | ((s[2] as i8 as i32) << 16);
                raw as f64 / 8_388_608.0
            }
            (3, 32) => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
            _ => unreachable!(),
        };
        samples.push(v);
    }
    Ok(WavData {
        samples,
        sample_rate,
        channels,
    })
}

/// Reads and decodes a WAV file.
pub fn read_wav(path: impl AsRef<Path>) -> Result<WavData> {
    let bytes = std::fs::read(path)?;
    read_wav_bytes(&bytes)
}
