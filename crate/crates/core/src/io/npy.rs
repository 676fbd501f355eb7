//! Minimal NPY codec for little-endian `f32` arrays in C order.
//!
//! Writes format version 1.0 with a header padded so the payload starts on a
//! 64-byte boundary, the same layout numpy produces. Reads versions 1.0 and
//! 2.0 and requires the payload length to match the declared shape exactly.

use std::io::{Read, Write};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl NpyArray {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self, String> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            ));
        }
        Ok(Self { shape, data })
    }
}

fn shape_literal(shape: &[usize]) -> String {
    match shape {
        [single] => format!("({single},)"),
        dims => format!(
            "({})",
            dims.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

pub fn encode(array: &NpyArray) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<f4', 'fortran_order': False, 'shape': {}, }}",
        shape_literal(&array.shape)
    );
    // magic (6) + version (2) + header length (2) + dict + padding + '\n'
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
    let header_len = dict.len() + padding + 1;

    let mut out = Vec::with_capacity(unpadded + padding + 4 * array.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.extend(std::iter::repeat_n(b' ', padding));
    out.push(b'\n');
    for v in &array.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write<W: Write>(writer: &mut W, array: &NpyArray) -> std::io::Result<()> {
    writer.write_all(&encode(array))
}

pub fn read<R: Read>(reader: &mut R) -> Result<NpyArray, String> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| format!("read failed: {e}"))?;
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<NpyArray, String> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err("not an NPY file (bad magic)".into());
    }
    let (major, minor) = (bytes[6], bytes[7]);
    let (header_len, header_start) = match major {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 => {
            if bytes.len() < 12 {
                return Err("truncated NPY header".into());
            }
            (
                u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize,
                12,
            )
        }
        _ => return Err(format!("unsupported NPY version {major}.{minor}")),
    };
    let payload_start = header_start + header_len;
    if bytes.len() < payload_start {
        return Err("truncated NPY header".into());
    }
    let header = std::str::from_utf8(&bytes[header_start..payload_start])
        .map_err(|_| "NPY header is not valid text".to_string())?;
    let dict = parse_header(header)?;

    if dict.descr != "<f4" {
        return Err(format!(
            "unsupported dtype '{}' (expected '<f4')",
            dict.descr
        ));
    }
    if dict.fortran_order {
        return Err("Fortran-ordered arrays are not supported".into());
    }

    let count: usize = dict.shape.iter().product();
    let payload = &bytes[payload_start..];
    if payload.len() != count * 4 {
        return Err(format!(
            "shape {:?} needs {} payload bytes, file has {}",
            dict.shape,
            count * 4,
            payload.len()
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(NpyArray {
        shape: dict.shape,
        data,
    })
}

#[derive(Debug)]
struct HeaderDict {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

/// Parses the Python dict literal of an NPY header. Only the three standard
/// keys are understood.
fn parse_header(header: &str) -> Result<HeaderDict, String> {
    let body = header
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| format!("malformed NPY header: {header:?}"))?;

    let value_after = |key: &str| -> Result<&str, String> {
        let quoted = [format!("'{key}'"), format!("\"{key}\"")];
        let pos = quoted
            .iter()
            .find_map(|q| body.find(q.as_str()).map(|p| p + q.len()))
            .ok_or_else(|| format!("NPY header missing key '{key}'"))?;
        let rest = body[pos..].trim_start();
        rest.strip_prefix(':')
            .map(str::trim_start)
            .ok_or_else(|| format!("malformed value for '{key}'"))
    };

    let descr_raw = value_after("descr")?;
    let quote = descr_raw
        .chars()
        .next()
        .filter(|c| *c == '\'' || *c == '"')
        .ok_or("descr must be a string")?;
    let descr = descr_raw[1..]
        .split(quote)
        .next()
        .ok_or("unterminated descr")?
        .to_string();

    let fortran_raw = value_after("fortran_order")?;
    let fortran_order = if fortran_raw.starts_with("False") {
        false
    } else if fortran_raw.starts_with("True") {
        true
    } else {
        return Err("fortran_order must be True or False".into());
    };

    let shape_raw = value_after("shape")?;
    let inner = shape_raw
        .strip_prefix('(')
        .and_then(|s| s.split(')').next())
        .ok_or("shape must be a tuple")?;
    let shape = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim_end_matches('L')
                .parse::<usize>()
                .map_err(|_| format!("bad shape entry '{s}'"))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(HeaderDict {
        descr,
        fortran_order,
        shape,
    })
}
