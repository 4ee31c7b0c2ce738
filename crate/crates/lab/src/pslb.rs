//! "PSLB" grid files: magic, `u32` version, `u32` d, `u32` n per axis, `f64` R,
//! then `n^d` little-endian `(re, im)` pairs in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use psido_core::{Complex64, Grid, SampledFunction};

use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 4] = b"PSLB";
pub const VERSION: u32 = 1;
/// Bytes before the payload.
pub const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

pub fn write_pslb<W: Write>(mut w: W, f: &SampledFunction) -> std::io::Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&g.half_extent().to_le_bytes())?;
    for v in f.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()
}

/// Reads one file; `origin` names the source in diagnostics.
pub fn read_pslb<R: Read>(mut r: R, origin: &str) -> Result<SampledFunction> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|_| LabError::invalid(format!("{origin}: truncated PSLB header")))?;
    if &header[..4] != MAGIC {
        return Err(LabError::invalid(format!("{origin}: bad magic {:?}, expected \"PSLB\"", &header[..4])));
    }
    let word = |k: usize| u32::from_le_bytes(header[k..k + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(LabError::invalid(format!("{origin}: unsupported PSLB version {version}")));
    }
    let (d, n) = (word(8) as usize, word(12) as usize);
    let half = f64::from_le_bytes(header[16..24].try_into().unwrap());
    let grid = Grid::new(d, n, half).map_err(|e| LabError::invalid(format!("{origin}: {e}")))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(|e| LabError::invalid(format!("{origin}: {e}")))?;
    if payload.len() != 16 * grid.len() {
        return Err(LabError::invalid(format!(
            "{origin}: payload has {} bytes, expected {} for {d}-D grid with n = {n}",
            payload.len(),
            16 * grid.len()
        )));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap()))
        })
        .collect();
    SampledFunction::new(grid, values).map_err(|e| LabError::invalid(format!("{origin}: {e}")))
}

pub fn save(path: &Path, f: &SampledFunction) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_pslb(BufWriter::new(file), f).map_err(|e| LabError::io(path, e))
}

pub fn load(path: &Path) -> Result<SampledFunction> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    read_pslb(BufReader::new(file), &path.display().to_string())
}

/// CSV export: one row per sample with index columns `i0..`, then `re`, `im`.
pub fn export_csv(path: &Path, f: &SampledFunction) -> Result<()> {
    let wrap = |e: csv::Error| LabError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    let g = f.grid();
    let d = g.dim();
    let mut header: Vec<String> = (0..d).map(|a| format!("i{a}")).collect();
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header).map_err(wrap)?;
    for (flat, v) in f.values().iter().enumerate() {
        let idx = g.unravel(flat);
        let mut row: Vec<String> = idx[..d].iter().map(|i| i.to_string()).collect();
        row.push(format!("{:e}", v.re));
        row.push(format!("{:e}", v.im));
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}
