//! Persistence: the binary snapshot format, the model file format, and
//! CSV report emission. All on-disk reals are little-endian f64,
//! column-major, and every payload carries a CRC32.

mod csv;
mod model;
mod snapshot;

pub use csv::{fmt_float, read_csv, write_csv, CsvTable};
pub use model::{
    load_model, save_model, AnyModel, ModelMeta, TrainingMeta, MODEL_FORMAT_VERSION,
};
pub use snapshot::{read_snapshots, read_snapshots_raw, write_snapshots, SNAPSHOT_MAGIC};

use crate::error::Result;
use std::path::Path;

/// Writes `bytes` atomically: a unique temporary file in the target
/// directory is renamed over the destination.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(dir)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{}.{}.tmp", file_name, std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Little-endian f64 encoding of a slice.
pub(crate) fn f64s_to_bytes(values: &[f64], out: &mut Vec<u8>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Little-endian f64 decoding; the byte count must be a multiple of 8.
pub(crate) fn bytes_to_f64s(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(crate::error::Error::Format(
            "real payload length is not a multiple of 8".into(),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
