//! Line-oriented wire formats exchanged between users and the mainframe.
//!
//! All three share the same shape: UTF-8, LF line endings, a fixed header
//! line, then comma-separated records with canonical unsigned decimals (no
//! sign, no leading zeros, no whitespace). Decoding is strict so that
//! `encode(decode(bytes)) == bytes` for every accepted input.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{CellCoord, LatticeDims, Region};
use crate::stabilizer::{Outcome, PauliBasis};

pub const STREAM_HEADER: &str = "HPQC-MS 1";
pub const EIGENVALUE_HEADER: &str = "HPQC-ER 1";
pub const DESCRIPTOR_HEADER: &str = "HPQC-SD 1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("missing or malformed header (expected `{expected}`)")]
    MalformedHeader { expected: &'static str },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: unknown basis code `{code}`")]
    UnknownBasisCode { line: usize, code: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeasurementInstruction {
    pub cell: CellCoord,
    pub basis: PauliBasis,
}

impl MeasurementInstruction {
    pub fn new(cell: CellCoord, basis: PauliBasis) -> Self {
        Self { cell, basis }
    }
}

pub fn basis_code(basis: PauliBasis) -> char {
    match basis {
        PauliBasis::X => 'X',
        PauliBasis::Y => 'Y',
        PauliBasis::Z => 'Z',
        PauliBasis::AncillaA => 'A',
        PauliBasis::AncillaY => 'T',
    }
}

pub fn basis_from_code(code: &str) -> Option<PauliBasis> {
    Some(match code {
        "X" => PauliBasis::X,
        "Y" => PauliBasis::Y,
        "Z" => PauliBasis::Z,
        "A" => PauliBasis::AncillaA,
        "T" => PauliBasis::AncillaY,
        _ => return None,
    })
}

pub fn encode_stream(instructions: &[MeasurementInstruction]) -> Vec<u8> {
    let mut out = String::with_capacity(12 + instructions.len() * 12);
    out.push_str(STREAM_HEADER);
    out.push('\n');
    for i in instructions {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i.cell.x,
            i.cell.y,
            i.cell.z,
            basis_code(i.basis)
        );
    }
    out.into_bytes()
}

pub fn decode_stream(bytes: &[u8]) -> Result<Vec<MeasurementInstruction>, CodecError> {
    let body = split_document(bytes, STREAM_HEADER)?;
    body.map(|(line, text)| {
        let fields = fields::<4>(line, text)?;
        let cell = CellCoord::new(
            decimal(line, fields[0])?,
            decimal(line, fields[1])?,
            decimal(line, fields[2])?,
        );
        let basis = basis_from_code(fields[3]).ok_or_else(|| CodecError::UnknownBasisCode {
            line,
            code: fields[3].to_string(),
        })?;
        Ok(MeasurementInstruction { cell, basis })
    })
    .collect()
}

/// Signs of the prepared lattice generators, one entry per generator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EigenvalueRecord {
    entries: Vec<(usize, Outcome)>,
}

impl EigenvalueRecord {
    pub fn new(entries: Vec<(usize, Outcome)>) -> Self {
        Self { entries }
    }

    /// Record listing `signs[i]` for generator `i`.
    pub fn from_signs(signs: impl IntoIterator<Item = Outcome>) -> Self {
        Self {
            entries: signs.into_iter().enumerate().collect(),
        }
    }

    pub fn all_plus(n: usize) -> Self {
        Self::from_signs(std::iter::repeat_n(Outcome::Plus, n))
    }

    pub fn entries(&self) -> &[(usize, Outcome)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sign_of(&self, generator: usize) -> Option<Outcome> {
        self.entries.iter().find(|(g, _)| *g == generator).map(|(_, s)| *s)
    }

    /// `true` for generators with a `-1` sign, indexed by generator. Missing
    /// generators count as `+1`.
    pub fn negative_flags(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; n];
        for &(g, s) in &self.entries {
            if g < n {
                flags[g] = s.is_minus();
            }
        }
        flags
    }

    pub fn set(&mut self, generator: usize, sign: Outcome) {
        match self.entries.iter_mut().find(|(g, _)| *g == generator) {
            Some(entry) => entry.1 = sign,
            None => self.entries.push((generator, sign)),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = String::from(EIGENVALUE_HEADER);
        out.push('\n');
        for (g, s) in &self.entries {
            let _ = writeln!(out, "{g},{}", s.symbol());
        }
        out.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CodecError> {
        let body = split_document(bytes, EIGENVALUE_HEADER)?;
        let entries = body
            .map(|(line, text)| {
                let [g, s] = fields::<2>(line, text)?;
                let sign = match s {
                    "+" => Outcome::Plus,
                    "-" => Outcome::Minus,
                    _ => {
                        return Err(CodecError::MalformedRecord {
                            line,
                            reason: format!("sign `{s}` is not + or -"),
                        })
                    }
                };
                Ok((decimal(line, g)? as usize, sign))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }
}

/// What the mainframe announces when routing a partition to a secure user.
///
/// The serialized form carries only the region and layer count; the cell
/// emission order (layer by layer, row-major) follows from those alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhotonStreamDescriptor {
    pub origin_x: u64,
    pub origin_y: u64,
    pub width: u64,
    pub depth: u64,
    pub layers: u64,
}

impl PhotonStreamDescriptor {
    pub fn for_region(region: &Region) -> Self {
        Self {
            origin_x: region.origin.x,
            origin_y: region.origin.y,
            width: region.dims.width(),
            depth: region.dims.depth(),
            layers: region.dims.layers(),
        }
    }

    /// Cells in emission order.
    pub fn emission_order(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (0..self.layers).flat_map(move |z| {
            (self.origin_y..self.origin_y + self.depth).flat_map(move |y| {
                (self.origin_x..self.origin_x + self.width).map(move |x| CellCoord::new(x, y, z))
            })
        })
    }

    pub fn cells_per_layer(&self) -> u128 {
        self.width as u128 * self.depth as u128
    }

    pub fn dims(&self) -> Option<LatticeDims> {
        LatticeDims::new(self.width, self.depth, self.layers).ok()
    }

    pub fn encode(&self) -> Vec<u8> {
        format!(
            "{DESCRIPTOR_HEADER}\n{},{},{},{},{}\n",
            self.origin_x, self.origin_y, self.width, self.depth, self.layers
        )
        .into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut body = split_document(bytes, DESCRIPTOR_HEADER)?;
        let Some((line, text)) = body.next() else {
            return Err(CodecError::MalformedRecord {
                line: 2,
                reason: "missing region line".into(),
            });
        };
        let f = fields::<5>(line, text)?;
        if let Some((extra, _)) = body.next() {
            return Err(CodecError::MalformedRecord {
                line: extra,
                reason: "descriptor has exactly one region line".into(),
            });
        }
        let d = Self {
            origin_x: decimal(line, f[0])?,
            origin_y: decimal(line, f[1])?,
            width: decimal(line, f[2])?,
            depth: decimal(line, f[3])?,
            layers: decimal(line, f[4])?,
        };
        if d.dims().is_none() {
            return Err(CodecError::MalformedRecord {
                line,
                reason: "region dimensions must be at least 1".into(),
            });
        }
        Ok(d)
    }
}

/// Checks the header and yields `(line_number, text)` for each record line.
fn split_document<'a>(
    bytes: &'a [u8],
    header: &'static str,
) -> Result<impl Iterator<Item = (usize, &'a str)>, CodecError> {
    let text = std::str::from_utf8(bytes).map_err(|_| CodecError::NotUtf8)?;
    let rest = text
        .strip_prefix(header)
        .and_then(|r| r.strip_prefix('\n'))
        .ok_or(CodecError::MalformedHeader { expected: header })?;
    let mut lines: Vec<(usize, &str)> = Vec::new();
    let mut remaining = rest;
    let mut line = 2;
    while !remaining.is_empty() {
        let Some(end) = remaining.find('\n') else {
            return Err(CodecError::MalformedRecord {
                line,
                reason: "record is not terminated by LF".into(),
            });
        };
        lines.push((line, &remaining[..end]));
        remaining = &remaining[end + 1..];
        line += 1;
    }
    Ok(lines.into_iter())
}

fn fields<const N: usize>(line: usize, text: &str) -> Result<[&str; N], CodecError> {
    let parts: Vec<&str> = text.split(',').collect();
    parts.try_into().map_err(|p: Vec<&str>| CodecError::MalformedRecord {
        line,
        reason: format!("expected {N} comma-separated fields, found {}", p.len()),
    })
}

fn decimal(line: usize, s: &str) -> Result<u64, CodecError> {
    let canonical = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit())
        && (s == "0" || !s.starts_with('0'));
    let bad = || CodecError::MalformedRecord {
        line,
        reason: format!("`{s}` is not a canonical unsigned decimal"),
    };
    if !canonical {
        return Err(bad());
    }
    s.parse().map_err(|_| bad())
}
