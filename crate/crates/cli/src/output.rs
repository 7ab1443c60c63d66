use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rctm::{pack_bytes, BitStream, MapKey};
use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

/// Writes `bytes` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|()| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// Pretty JSON with struct field order preserved and a trailing newline.
pub fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_vec_pretty(value).expect("report types serialize");
    text.push(b'\n');
    text
}

/// Comma-separated rows under a header, LF line endings.
pub fn csv<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text.into_bytes()
}

/// A bitstream in one of the stream formats.
pub fn bits(stream: &BitStream, format: Format) -> Vec<u8> {
    match format {
        Format::Raw => pack_bytes(stream).bytes,
        Format::AsciiBits => {
            let mut text = stream.to_ascii();
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => csv(
            &["index", "bit"],
            stream
                .bits()
                .iter()
                .enumerate()
                .map(|(i, b)| [i.to_string(), b.to_string()]),
        ),
        Format::Json => json(&BitsDocument {
            bits: stream.len(),
            ones: stream.ones(),
            data: stream.to_ascii(),
        }),
    }
}

#[derive(Serialize)]
struct BitsDocument {
    bits: usize,
    ones: usize,
    data: String,
}

/// A parsed binary64 parameter with its bit pattern and 17 significant
/// digits, so decimal-to-binary rounding is visible.
#[derive(Debug, Clone, Serialize)]
pub struct Parsed {
    pub value: f64,
    pub repr: String,
    pub bits: String,
}

impl Parsed {
    pub fn new(value: f64) -> Self {
        let mut repr = String::new();
        let _ = write!(repr, "{value:.16e}");
        Self {
            value,
            repr,
            bits: format!("{:#018x}", value.to_bits()),
        }
    }
}

/// The key as echoed in metadata.
#[derive(Debug, Clone, Serialize)]
pub struct KeyEcho {
    pub mu: Parsed,
    pub x0: Parsed,
    pub n1: f64,
    pub n2: f64,
    pub fingerprint: String,
}

impl KeyEcho {
    pub fn new(key: &MapKey) -> Self {
        Self {
            mu: Parsed::new(key.mu()),
            x0: Parsed::new(key.x0()),
            n1: key.n1(),
            n2: key.n2(),
            fingerprint: key.fingerprint(),
        }
    }
}

/// A report wrapped with the command name and its parsed parameters.
#[derive(Serialize)]
pub struct Envelope<'a, P: Serialize, R: Serialize> {
    pub command: &'a str,
    pub parameters: P,
    pub result: R,
}
