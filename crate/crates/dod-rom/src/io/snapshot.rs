//! Binary snapshot files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    4 bytes  "DODM"
//! version  u16      = 1
//! counts   4 × u64  N_h, N_samples, p, p'
//! payload  f64 LE   μ block (N_samples×p), ν block (N_samples×p'),
//!                   snapshot block (N_h×N_samples), column-major
//! crc      u32      CRC32 of the payload bytes
//! ```

use super::{atomic_write, bytes_to_f64s, f64s_to_bytes};
use crate::error::{Error, Result};
use crate::linalg::{GramMatrix, Matrix};
use crate::pod::SnapshotSet;
use std::path::Path;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"DODM";
const SNAPSHOT_VERSION: u16 = 1;

/// Serializes a snapshot set. The Gram matrix is not stored; it is
/// reattached from the problem definition on read.
pub fn write_snapshots(path: &Path, snaps: &SnapshotSet) -> Result<()> {
    let n_h = snaps.dim() as u64;
    let n_samples = snaps.len() as u64;
    let p = snaps.mu.cols() as u64;
    let p_prime = snaps.nu.cols() as u64;

    let mut payload = Vec::with_capacity(8 * (snaps.mu.data().len() + snaps.nu.data().len() + snaps.u.data().len()));
    f64s_to_bytes(snaps.mu.data(), &mut payload);
    f64s_to_bytes(snaps.nu.data(), &mut payload);
    f64s_to_bytes(snaps.u.data(), &mut payload);
    let crc = crc32fast::hash(&payload);

    let mut bytes = Vec::with_capacity(4 + 2 + 32 + payload.len() + 4);
    bytes.extend_from_slice(SNAPSHOT_MAGIC);
    bytes.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    for count in [n_h, n_samples, p, p_prime] {
        bytes.extend_from_slice(&count.to_le_bytes());
    }
    bytes.extend_from_slice(&payload);
    bytes.extend_from_slice(&crc.to_le_bytes());
    atomic_write(path, &bytes)
}

/// Reads the raw matrices `(μ, ν, u)` of a snapshot file, verifying
/// magic, version, declared counts, and the payload CRC.
pub fn read_snapshots_raw(path: &Path) -> Result<(Matrix, Matrix, Matrix)> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 4 + 2 + 32 + 4 {
        return Err(Error::Format(format!(
            "snapshot file too short: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad magic: not a snapshot file".into()));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!(
            "unsupported snapshot version {version}"
        )));
    }
    let mut counts = [0u64; 4];
    for (k, c) in counts.iter_mut().enumerate() {
        let off = 6 + 8 * k;
        *c = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    }
    let [n_h, n_samples, p, p_prime] = counts.map(|c| c as usize);
    let expected = n_samples * p + n_samples * p_prime + n_h * n_samples;
    let payload_start = 6 + 32;
    let payload_end = bytes.len() - 4;
    if payload_end - payload_start != expected * 8 {
        return Err(Error::Format(format!(
            "declared counts need {} payload bytes, file has {}",
            expected * 8,
            payload_end - payload_start
        )));
    }
    let payload = &bytes[payload_start..payload_end];
    let stored_crc = u32::from_le_bytes(bytes[payload_end..].try_into().unwrap());
    let crc = crc32fast::hash(payload);
    if crc != stored_crc {
        return Err(Error::Format(format!(
            "payload CRC mismatch: stored {stored_crc:#010x}, computed {crc:#010x}"
        )));
    }
    let values = bytes_to_f64s(payload)?;
    let (mu_vals, rest) = values.split_at(n_samples * p);
    let (nu_vals, u_vals) = rest.split_at(n_samples * p_prime);
    Ok((
        Matrix::from_col_major(n_samples, p, mu_vals.to_vec())?,
        Matrix::from_col_major(n_samples, p_prime, nu_vals.to_vec())?,
        Matrix::from_col_major(n_h, n_samples, u_vals.to_vec())?,
    ))
}

/// Reads a snapshot file and attaches the given Gram matrix.
pub fn read_snapshots(path: &Path, g: GramMatrix) -> Result<SnapshotSet> {
    let (mu, nu, u) = read_snapshots_raw(path)?;
    SnapshotSet::new(mu, nu, u, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_set(seed: u64) -> SnapshotSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Matrix::from_fn(9, 5, |_, _| rng.gen_range(-1.0..1.0));
        let mu = Matrix::from_fn(5, 2, |_, _| rng.gen_range(0.0..1.0));
        let nu = Matrix::from_fn(5, 2, |_, _| rng.gen_range(0.5..1.5));
        SnapshotSet::new(mu, nu, u, GramMatrix::identity(9)).unwrap()
    }

    #[test]
    fn bitwise_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snaps.bin");
        let snaps = sample_set(1);
        write_snapshots(&path, &snaps).unwrap();
        let (mu, nu, u) = read_snapshots_raw(&path).unwrap();
        assert_eq!(mu.data(), snaps.mu.data());
        assert_eq!(nu.data(), snaps.nu.data());
        assert_eq!(u.data(), snaps.u.data());
        // A second write produces identical bytes.
        let first = std::fs::read(&path).unwrap();
        write_snapshots(&path, &snaps).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }

    #[test]
    fn corrupted_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snaps.bin");
        write_snapshots(&path, &sample_set(2)).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let idx = bytes.len() / 2;
        bytes[idx] ^= 0xff;
        std::fs::write(&path, &bytes).unwrap();
        match read_snapshots_raw(&path) {
            Err(e @ Error::Format(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("expected Format error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not_snaps.bin");
        std::fs::write(&path, b"NOPEnope this is not a snapshot file at all").unwrap();
        assert!(matches!(read_snapshots_raw(&path), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_counts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snaps.bin");
        write_snapshots(&path, &sample_set(3)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        assert!(matches!(read_snapshots_raw(&path), Err(Error::Format(_))));
    }
}
