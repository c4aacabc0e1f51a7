//! On-disk cache of eigendecompositions keyed by the SHA-256 of the
//! operator's coordinate dump.
//!
//! Entries are written to a temporary file and renamed into place, so a
//! reader either sees a complete entry or none.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};
use xxz_core::operators::SparseSymmetricOperator;
use xxz_core::spectral::{eigh, SpectralDecomposition};

const MAGIC: &[u8; 8] = b"XXZEIG01";

#[derive(Clone, Debug)]
pub struct DecompositionCache {
    dir: Option<PathBuf>,
}

impl DecompositionCache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir: Some(dir) })
    }

    /// A cache that never stores anything.
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn key(op: &SparseSymmetricOperator) -> String {
        format!("{:x}", Sha256::digest(op.to_coordinate_text().as_bytes()))
    }

    /// Returns the decomposition of `op` and whether it came from disk.
    pub fn decompose(&self, op: &SparseSymmetricOperator) -> xxz_core::Result<(SpectralDecomposition, bool)> {
        let Some(dir) = &self.dir else {
            return Ok((eigh(op)?, false));
        };
        let path = dir.join(format!("{}.eig", Self::key(op)));
        if let Ok(d) = read_entry(&path) {
            if d.dim() == op.dim() {
                return Ok((d, true));
            }
        }
        let d = eigh(op)?;
        // a failed write only costs a recomputation next time
        let _ = write_entry(&path, &d);
        Ok((d, false))
    }
}

fn write_entry(path: &Path, d: &SpectralDecomposition) -> io::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut w = io::BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_all(&(d.dim() as u64).to_le_bytes())?;
        for x in d.eigenvalues.iter().chain(d.eigenvectors.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)
}

fn read_entry(path: &Path) -> io::Result<SpectralDecomposition> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || io::Error::new(io::ErrorKind::InvalidData, "corrupt cache entry");
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad());
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let floats: Vec<f64> = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if floats.len() != n + n * n {
        return Err(bad());
    }
    Ok(SpectralDecomposition {
        eigenvalues: floats[..n].to_vec(),
        eigenvectors: DMatrix::from_column_slice(n, n, &floats[n..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DecompositionCache::new(dir.path()).unwrap();
        let op = SparseSymmetricOperator::from_upper_triplets(2, vec![(0, 0, 1.0), (0, 1, -0.25), (1, 1, 1.0)]).unwrap();
        let (a, hit) = cache.decompose(&op).unwrap();
        assert!(!hit);
        let (b, hit) = cache.decompose(&op).unwrap();
        assert!(hit);
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }
}
