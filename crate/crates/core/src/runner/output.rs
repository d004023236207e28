//! Layout and formats of the output directory.
//!
//! Floating-point columns are written with 17 significant digits so that
//! every value reads back to the same `f64`.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use crate::diagnostics::EnergyRecord;
use crate::error::{Error, Result};
use crate::spectra::SpectrumRecord;
use crate::vortex::VortexSet;

pub const TIMESERIES: &str = "timeseries.csv";
pub const VORTEX_SERIES: &str = "vortex_series.csv";
pub const FITS: &str = "fits.csv";
pub const SUMMARY: &str = "summary.toml";
pub const SPECTRA_DIR: &str = "spectra";
pub const VORTICES_DIR: &str = "vortices";
pub const DUMPS_DIR: &str = "dumps";
pub const CHECKPOINT_STEM: &str = "checkpoint";

pub const TIMESERIES_HEADER: [&str; 8] = ["t", "E_T", "E_K", "E_I", "E_Q", "E_C", "E_IC", "Z"];
pub const VORTEX_SERIES_HEADER: [&str; 3] = ["t", "count", "abs_circulation"];
pub const FITS_HEADER: [&str; 6] = ["t", "k_min", "k_max", "which", "alpha", "stderr"];

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn spectrum_path(dir: &Path, t: u64) -> PathBuf {
    dir.join(SPECTRA_DIR).join(format!("spectrum_{t:08}.csv"))
}

pub fn vortices_path(dir: &Path, t: u64) -> PathBuf {
    dir.join(VORTICES_DIR).join(format!("vortices_{t:08}.csv"))
}

pub fn dump_stem(dir: &Path, t: u64) -> PathBuf {
    dir.join(DUMPS_DIR).join(format!("dump_{t:08}"))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Append-only CSV table, flushed after every row.
pub struct Table {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl Table {
    /// Starts a fresh table, replacing any existing file.
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut table = Table { path: path.to_path_buf(), writer: csv::Writer::from_writer(file) };
        table.row(header.iter().map(|s| s.to_string()))?;
        Ok(table)
    }

    /// Continues an existing table.
    pub fn append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(Table { path: path.to_path_buf(), writer: csv::Writer::from_writer(file) })
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        self.writer.write_record(fields).map_err(|e| Error::csv(&self.path, e))?;
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn energy_row(r: &EnergyRecord) -> Vec<String> {
    let mut row = vec![r.t.to_string()];
    row.extend([r.e_t, r.e_k, r.e_i, r.e_q, r.e_c, r.e_ic, r.z].map(num));
    row
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))
}

fn parse<T: std::str::FromStr>(path: &Path, field: &str, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Undefined(format!("{}: cannot parse {what} from `{field}`", path.display())))
}

pub fn read_timeseries(path: &Path) -> Result<Vec<EnergyRecord>> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.len() != TIMESERIES_HEADER.len() {
            return Err(Error::Undefined(format!("{}: row has {} columns, expected 8", path.display(), rec.len())));
        }
        let v: Vec<f64> = (1..8).map(|c| parse(path, &rec[c], TIMESERIES_HEADER[c])).collect::<Result<_>>()?;
        out.push(EnergyRecord {
            t: parse(path, &rec[0], "t")?,
            e_t: v[0],
            e_k: v[1],
            e_i: v[2],
            e_q: v[3],
            e_c: v[4],
            e_ic: v[5],
            z: v[6],
            gamma_running: f64::NAN,
        });
    }
    Ok(out)
}

/// Drops every row whose leading `t` column exceeds `t_max`.
pub fn truncate_after(path: &Path, t_max: u64) -> Result<()> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let mut kept = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let t: u64 = parse(path, &rec[0], "t")?;
        if t <= t_max {
            kept.push(rec);
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for rec in kept {
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a whole table in one go.
fn write_table<R: IntoIterator<Item = [String; 3]>>(path: &Path, header: [&str; 3], rows: R) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_spectrum(path: &Path, spec: &SpectrumRecord) -> Result<()> {
    let rows = spec.k_bins.iter().zip(&spec.eps_ic).zip(&spec.eps_c).map(|((k, ic), c)| [num(*k), num(*ic), num(*c)]);
    write_table(path, ["k", "eps_ic", "eps_c"], rows)
}

/// Reads a spectrum file, taking `t` from its name.
pub fn read_spectrum(path: &Path) -> Result<SpectrumRecord> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let t = stem
        .strip_prefix("spectrum_")
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| Error::Undefined(format!("{}: file name does not carry an iteration", path.display())))?;
    let mut spec = SpectrumRecord { t, k_bins: Vec::new(), eps_ic: Vec::new(), eps_c: Vec::new() };
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.len() != 3 {
            return Err(Error::Undefined(format!("{}: row has {} columns, expected 3", path.display(), rec.len())));
        }
        spec.k_bins.push(parse(path, &rec[0], "k")?);
        spec.eps_ic.push(parse(path, &rec[1], "eps_ic")?);
        spec.eps_c.push(parse(path, &rec[2], "eps_c")?);
    }
    Ok(spec)
}

/// Spectrum files in `dir`, ordered by iteration.
pub fn list_spectra(dir: &Path) -> Result<Vec<PathBuf>> {
    list_with_prefix(&dir.join(SPECTRA_DIR), "spectrum_", "csv")
}

pub fn list_dumps(dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(list_with_prefix(&dir.join(DUMPS_DIR), "dump_", "toml")?.into_iter().map(|p| p.with_extension("")).collect())
}

fn list_with_prefix(dir: &Path, prefix: &str, ext: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut found = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with(prefix) && path.extension().and_then(|e| e.to_str()) == Some(ext) {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}

pub fn write_vortices(path: &Path, set: &VortexSet) -> Result<()> {
    write_table(path, ["i", "j", "w"], set.vortices.iter().map(|v| [v.i.to_string(), v.j.to_string(), v.w.to_string()]))
}
