//! Bit-exact snapshots of the spinor state.
//!
//! A snapshot is a pair of files sharing a stem: `<stem>.toml` holds the
//! header and an echo of the run configuration, `<stem>.bin` holds `q0`
//! then `q1` as little-endian `(re, im)` pairs of `f64`. The header records
//! the payload length and its SHA-256 digest, and a restore refuses any
//! file whose shape, version or digest does not match.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::SpinorField;
use crate::runner::config::RunConfig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub format_version: u32,
    #[serde(rename = "L")]
    pub l: usize,
    pub dx: f64,
    pub g: f64,
    pub t: u64,
    pub payload_bytes: u64,
    pub sha256: String,
    pub config: RunConfig,
}

pub fn header_path(stem: &Path) -> PathBuf {
    stem.with_extension("toml")
}

pub fn payload_path(stem: &Path) -> PathBuf {
    stem.with_extension("bin")
}

fn encode(field: &SpinorField) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(32 * field.grid().sites());
    for z in field.q0().iter().chain(field.q1()) {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    bytes
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file and renames, so a reader never sees a
/// half-written snapshot.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_checkpoint(stem: &Path, field: &SpinorField, config: &RunConfig) -> Result<()> {
    let grid = field.grid();
    if config.grid.l != grid.l() || config.grid.dx.to_bits() != grid.dx().to_bits() {
        return Err(Error::Checkpoint(format!(
            "field grid (L = {}, dx = {}) does not match the configured grid (L = {}, dx = {})",
            grid.l(),
            grid.dx(),
            config.grid.l,
            config.grid.dx
        )));
    }
    if let Some(parent) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let payload = encode(field);
    let header = CheckpointHeader {
        format_version: FORMAT_VERSION,
        l: field.grid().l(),
        dx: field.grid().dx(),
        g: config.coupling.g,
        t: field.t(),
        payload_bytes: payload.len() as u64,
        sha256: hex_digest(&payload),
        config: config.clone(),
    };
    let text = toml::to_string(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
    write_atomic(&payload_path(stem), &payload)?;
    write_atomic(&header_path(stem), text.as_bytes())
}

pub fn read_header(stem: &Path) -> Result<CheckpointHeader> {
    let path = header_path(stem);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let header: CheckpointHeader =
        toml::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: unreadable header: {e}", path.display())))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: format version {} is not supported (expected {FORMAT_VERSION})",
            path.display(),
            header.format_version
        )));
    }
    let grid = &header.config.grid;
    if grid.l != header.l || grid.dx.to_bits() != header.dx.to_bits() || header.config.coupling.g.to_bits() != header.g.to_bits()
    {
        return Err(Error::Checkpoint(format!(
            "{}: header (L = {}, dx = {}, g = {}) disagrees with its configuration echo (L = {}, dx = {}, g = {})",
            path.display(),
            header.l,
            header.dx,
            header.g,
            grid.l,
            grid.dx,
            header.config.coupling.g
        )));
    }
    Ok(header)
}

/// Restores the field and the configuration it was produced with.
pub fn read_checkpoint(stem: &Path) -> Result<(SpinorField, RunConfig)> {
    let header = read_header(stem)?;
    let grid = header.config.grid().map_err(|e| Error::Checkpoint(e.to_string()))?;
    let path = payload_path(stem);
    let payload = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let expected = 32 * grid.sites() as u64;
    if header.payload_bytes != expected || payload.len() as u64 != expected {
        return Err(Error::Checkpoint(format!(
            "{}: payload has {} bytes, header says {}, a {}^2 grid needs {expected}",
            path.display(),
            payload.len(),
            header.payload_bytes,
            grid.l()
        )));
    }
    let digest = hex_digest(&payload);
    if digest != header.sha256 {
        return Err(Error::Checkpoint(format!("{}: SHA-256 {digest} does not match header {}", path.display(), header.sha256)));
    }
    let values: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let (q0, q1) = values.split_at(grid.sites());
    let field = SpinorField::new(grid, q0.to_vec(), q1.to_vec(), header.t)?;
    if let Some((i, j)) = field.first_non_finite() {
        return Err(Error::Checkpoint(format!("{}: non-finite value at site ({i}, {j})", path.display())));
    }
    Ok((field, header.config))
}
