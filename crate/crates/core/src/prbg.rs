//! Threshold bit extraction and byte packing.

use crate::error::{Error, Result};
use crate::map::{orbit, MapKey};

/// States at or above this value become a one bit.
pub const THRESHOLD: f64 = 0.5;

/// An ordered sequence of bits, one `u8` (0 or 1) per bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<u8>,
    key_fingerprint: Option<String>,
}

impl BitStream {
    /// Wraps caller-supplied bits. Any non-zero byte counts as a one.
    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        Self {
            bits: bits.into_iter().map(|b| u8::from(b != 0)).collect(),
            key_fingerprint: None,
        }
    }

    /// Parses a string of `'0'`/`'1'` characters; whitespace is skipped.
    pub fn from_ascii(text: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                _ => return None,
            }
        }
        Some(Self {
            bits,
            key_fingerprint: None,
        })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn key_fingerprint(&self) -> Option<&str> {
        self.key_fingerprint.as_deref()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// The same bits in reverse order.
    pub fn reversed(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        Self {
            bits,
            key_fingerprint: self.key_fingerprint.clone(),
        }
    }

    /// Splits into consecutive disjoint streams of `len` bits; a short tail
    /// is dropped.
    pub fn segments(&self, len: usize) -> Vec<BitStream> {
        if len == 0 {
            return Vec::new();
        }
        self.bits
            .chunks_exact(len)
            .map(|chunk| BitStream {
                bits: chunk.to_vec(),
                key_fingerprint: self.key_fingerprint.clone(),
            })
            .collect()
    }

    /// `'0'`/`'1'` characters without separators.
    pub fn to_ascii(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Thresholds `n` robust-map states (after `burn_in`) into bits.
pub fn generate_bits(key: &MapKey, n: usize, burn_in: usize) -> Result<BitStream> {
    if n == 0 {
        return Err(Error::CountTooSmall {
            what: "bit count",
            min: 1,
            got: 0,
        });
    }
    Ok(threshold(&orbit(key, n, burn_in), Some(key.fingerprint())))
}

/// Converts states to bits with the `x >= 0.5` rule.
pub fn threshold(values: &[f64], key_fingerprint: Option<String>) -> BitStream {
    BitStream {
        bits: values.iter().map(|&x| u8::from(x >= THRESHOLD)).collect(),
        key_fingerprint,
    }
}

/// Bytes produced by [`pack_bytes`] plus the number of zero bits appended to
/// fill the final byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedBytes {
    pub bytes: Vec<u8>,
    pub pad_bits: u8,
}

/// Packs bits MSB-first: bit 0 of the stream is the top bit of byte 0.
pub fn pack_bytes(bits: &BitStream) -> PackedBytes {
    let chunks = bits.bits.chunks(8);
    let mut bytes = Vec::with_capacity(chunks.len());
    let mut pad_bits = 0;
    for chunk in chunks {
        let mut byte = 0u8;
        for &b in chunk {
            byte = (byte << 1) | b;
        }
        if chunk.len() < 8 {
            pad_bits = (8 - chunk.len()) as u8;
            byte <<= pad_bits;
        }
        bytes.push(byte);
    }
    PackedBytes { bytes, pad_bits }
}

/// Inverse of [`pack_bytes`]: expands MSB-first bytes and keeps the first
/// `bit_len` bits.
pub fn unpack_bytes(bytes: &[u8], bit_len: usize) -> BitStream {
    let bits = bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1))
        .take(bit_len)
        .collect();
    BitStream {
        bits,
        key_fingerprint: None,
    }
}

/// `floor(x * 256)` for a single state, with 1.0 clamped to 255.
#[inline]
pub fn quantize(x: f64) -> u8 {
    (x * 256.0).floor().clamp(0.0, 255.0) as u8
}

/// 8-bit quantization of every state.
pub fn quantize_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().map(|&x| quantize(x)).collect()
}
