//! Checkpoints: a scalar field snapshot of `phi` followed by the footer
//! `b"CKPT"`, `t` and `dt` as little-endian `f64`.

use std::fs;
use std::path::Path;

use crate::geometry::snapshot::{self, Snapshot};
use crate::geometry::{ChartRef, ScalarField};

use super::FlowError;

const FOOTER_MAGIC: [u8; 4] = *b"CKPT";
const FOOTER_LEN: usize = 4 + 16;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub t: f64,
    pub dt: f64,
    pub phi: ScalarField,
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut bytes = snapshot::encode(&Snapshot::Scalar(self.phi.clone()));
        bytes.extend_from_slice(&FOOTER_MAGIC);
        bytes.extend_from_slice(&self.t.to_le_bytes());
        bytes.extend_from_slice(&self.dt.to_le_bytes());
        bytes
    }

    pub fn decode(bytes: &[u8], chart: &ChartRef) -> Result<Self, FlowError> {
        let (snap, used) = snapshot::decode(bytes, chart)?;
        let phi = match snap {
            Snapshot::Scalar(f) => f,
            Snapshot::Matrix(_) => return Err(FlowError::Checkpoint("expected a scalar snapshot".into())),
        };
        let footer = &bytes[used..];
        if footer.len() != FOOTER_LEN || footer[..4] != FOOTER_MAGIC {
            return Err(FlowError::Checkpoint("missing or malformed footer".into()));
        }
        let t = f64::from_le_bytes(footer[4..12].try_into().expect("8 bytes"));
        let dt = f64::from_le_bytes(footer[12..20].try_into().expect("8 bytes"));
        if !(t.is_finite() && dt.is_finite() && dt > 0.0) {
            return Err(FlowError::Checkpoint(format!("bad footer values t = {t}, dt = {dt}")));
        }
        Ok(Checkpoint { t, dt, phi })
    }
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<(), FlowError> {
    let io = |e: std::io::Error| FlowError::Checkpoint(format!("{}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, ck.encode()).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn read_checkpoint(path: &Path, chart: &ChartRef) -> Result<Checkpoint, FlowError> {
    let bytes = fs::read(path).map_err(|e| FlowError::Checkpoint(format!("{}: {e}", path.display())))?;
    Checkpoint::decode(&bytes, chart)
}
