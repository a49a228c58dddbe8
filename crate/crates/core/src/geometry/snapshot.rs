//! Binary field snapshots.
//!
//! Layout: a 16-byte header followed by little-endian `f64` payload.
//!
//! | bytes  | content                                              |
//! |--------|------------------------------------------------------|
//! | 0..4   | magic `CRFS`                                         |
//! | 4..6   | format version (`u16`)                               |
//! | 6      | complex dimension `n`                                |
//! | 7      | kind: 1 scalar, 2 Hermitian matrix                   |
//! | 8      | bit mask of active real axes                         |
//! | 9      | reserved                                             |
//! | 10..14 | log2 of the resolution, one nibble per real axis     |
//! | 14..16 | reserved                                             |
//!
//! Scalars store one value per node; matrices store `n * n` entries per
//! node with real and imaginary parts interleaved. Nodes are row-major.

use num_complex::Complex64;

use super::chart::ChartRef;
use super::field::{HermitianMatrixField, ScalarField};
use super::GeometryError;

pub const MAGIC: [u8; 4] = *b"CRFS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone)]
pub enum Snapshot {
    Scalar(ScalarField),
    Matrix(HermitianMatrixField),
}

fn header(chart: &ChartRef, kind: u8) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[0..4].copy_from_slice(&MAGIC);
    h[4..6].copy_from_slice(&VERSION.to_le_bytes());
    h[6] = chart.complex_dim() as u8;
    h[7] = kind;
    h[8] = chart.active_axes().iter().fold(0u8, |m, &a| m | (1 << a));
    for (axis, &r) in chart.resolution().iter().enumerate() {
        let log2 = r.trailing_zeros() as u8;
        h[10 + axis / 2] |= if axis % 2 == 0 { log2 } else { log2 << 4 };
    }
    h
}

pub fn encode(snapshot: &Snapshot) -> Vec<u8> {
    let mut out = Vec::new();
    match snapshot {
        Snapshot::Scalar(f) => {
            out.extend_from_slice(&header(f.chart(), 1));
            for v in f.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Snapshot::Matrix(f) => {
            out.extend_from_slice(&header(f.chart(), 2));
            for v in f.data() {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    out
}

/// Decodes a snapshot written for `chart`; returns the field and the
/// number of bytes consumed.
pub fn decode(bytes: &[u8], chart: &ChartRef) -> Result<(Snapshot, usize), GeometryError> {
    if bytes.len() < HEADER_LEN {
        return Err(GeometryError::Snapshot("truncated header".into()));
    }
    if bytes[0..4] != MAGIC {
        return Err(GeometryError::Snapshot("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(GeometryError::Snapshot(format!("unsupported version {version}")));
    }
    let kind = bytes[7];
    if bytes[..HEADER_LEN] != header(chart, kind)[..] {
        return Err(GeometryError::Snapshot("header does not match chart".into()));
    }
    let nodes = chart.node_count();
    let n = chart.complex_dim();
    let floats = match kind {
        1 => nodes,
        2 => nodes * n * n * 2,
        k => return Err(GeometryError::Snapshot(format!("unknown kind {k}"))),
    };
    let end = HEADER_LEN + 8 * floats;
    if bytes.len() < end {
        return Err(GeometryError::Snapshot("truncated payload".into()));
    }
    let vals: Vec<f64> = bytes[HEADER_LEN..end]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let snap = if kind == 1 {
        Snapshot::Scalar(ScalarField::new(chart.clone(), vals)?)
    } else {
        let data = vals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Snapshot::Matrix(HermitianMatrixField::new(chart.clone(), data)?)
    };
    Ok((snap, end))
}
