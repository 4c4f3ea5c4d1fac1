//! Binary field snapshots and 1D CSV export.
//!
//! Snapshot layout, all little-endian:
//!
//! ```text
//! b"RDM1"            magic
//! u64                dimension n
//! u64 x n            cells per axis
//! f64 x prod(N_j)    values, row-major (last axis fastest)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use super::{BoxDomain, ScalarField};
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"RDM1";

/// Decoded snapshot contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn encode_snapshot(field: &ScalarField) -> Vec<u8> {
    let cells = field.domain().cells();
    let mut buf = Vec::with_capacity(4 + 8 * (1 + cells.len() + field.values().len()));
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&(cells.len() as u64).to_le_bytes());
    for &c in cells {
        buf.extend_from_slice(&(c as u64).to_le_bytes());
    }
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let mut rest = bytes
        .strip_prefix(SNAPSHOT_MAGIC.as_slice())
        .ok_or_else(|| Error::Format("missing RDM1 magic".into()))?;
    let mut next_u64 = |what: &str| -> Result<u64> {
        let (head, tail) = rest
            .split_first_chunk::<8>()
            .ok_or_else(|| Error::Format(format!("truncated snapshot header ({what})")))?;
        rest = tail;
        Ok(u64::from_le_bytes(*head))
    };
    let n = next_u64("dimension")? as usize;
    if !(1..=3).contains(&n) {
        return Err(Error::Format(format!("snapshot dimension {n} not in 1..=3")));
    }
    let cells = (0..n).map(|_| next_u64("cells").map(|c| c as usize)).collect::<Result<Vec<_>>>()?;
    let count = cells
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .ok_or_else(|| Error::Format("snapshot cell count overflows".into()))?;
    if rest.len() != count * 8 {
        return Err(Error::Format(format!("snapshot payload has {} bytes, expected {}", rest.len(), count * 8)));
    }
    let values = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    Ok(Snapshot { cells, values })
}

/// Writes atomically via a temporary sibling file.
pub fn write_snapshot(path: &Path, field: &ScalarField) -> Result<()> {
    write_atomic(path, &encode_snapshot(field))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}

/// Loads a snapshot as a field on `domain`, checking the grid shape.
pub fn load_field(path: &Path, domain: &Arc<BoxDomain>) -> Result<ScalarField> {
    let snap = read_snapshot(path)?;
    if snap.cells != domain.cells() {
        return Err(Error::Format(format!(
            "{}: snapshot grid {:?} does not match domain {:?}",
            path.display(),
            snap.cells,
            domain.cells()
        )));
    }
    ScalarField::new(domain.clone(), snap.values)
}

/// `x,value` rows at cell centers of a 1D field.
pub fn field_to_csv(field: &ScalarField) -> Result<String> {
    let domain = field.domain();
    if domain.dim() != 1 {
        return Err(Error::InvalidArgument(format!("CSV export needs a 1D field, got dimension {}", domain.dim())));
    }
    let mut out = String::from("x,value\n");
    for (x, v) in domain.centers(0).iter().zip(field.values()) {
        out.push_str(&format!("{x},{v}\n"));
    }
    Ok(out)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path.file_name().ok_or_else(|| Error::Format(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
