//! The simulation loop and the offline analysis passes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{energies_from_hydro, gamma_ratio, hydro_fields, EnergyRecord};
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::lattice::{CouplingParams, SpinorField};
use crate::runner::checkpoint::{read_checkpoint, read_header, write_checkpoint};
use crate::runner::config::{FitWindow, RunConfig};
use crate::runner::output::{self as out, Table};
use crate::runner::recurrence::{detect_recurrence, RecurrenceReport};
use crate::spectra::{fit_powerlaw, spectrum, SpectrumRecord, Which};
use crate::vortex::detect_vortices;

/// Time-averaged power-law exponent over the stored spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub which: Which,
    pub k_min: f64,
    pub k_max: f64,
    pub spectra: usize,
    pub failed: usize,
    pub mean_alpha: f64,
    pub std_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_t: u64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<RecurrenceReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<FitSummary>,
    pub config: RunConfig,
}

struct Tables {
    timeseries: Table,
    vortex_series: Table,
    fits: Table,
}

impl Tables {
    fn create(dir: &Path) -> Result<Self> {
        Ok(Tables {
            timeseries: Table::create(&dir.join(out::TIMESERIES), &out::TIMESERIES_HEADER)?,
            vortex_series: Table::create(&dir.join(out::VORTEX_SERIES), &out::VORTEX_SERIES_HEADER)?,
            fits: Table::create(&dir.join(out::FITS), &out::FITS_HEADER)?,
        })
    }

    fn reopen(dir: &Path, t: u64) -> Result<Self> {
        for name in [out::TIMESERIES, out::VORTEX_SERIES, out::FITS] {
            out::truncate_after(&dir.join(name), t)?;
        }
        Ok(Tables {
            timeseries: Table::append(&dir.join(out::TIMESERIES))?,
            vortex_series: Table::append(&dir.join(out::VORTEX_SERIES))?,
            fits: Table::append(&dir.join(out::FITS))?,
        })
    }
}

fn fit_row(t: u64, w: &FitWindow, which: Which, spec: &SpectrumRecord) -> [String; 6] {
    let (alpha, stderr) = match fit_powerlaw(spec, which, w.k_min, w.k_max) {
        Ok(f) => (f.alpha, f.stderr),
        Err(_) => (f64::NAN, f64::NAN),
    };
    [t.to_string(), out::num(w.k_min), out::num(w.k_max), which.as_str().to_string(), out::num(alpha), out::num(stderr)]
}

struct Simulation {
    config: RunConfig,
    dir: PathBuf,
    field: SpinorField,
    coupling: CouplingParams,
    fft: Fft2,
    tables: Tables,
}

impl Simulation {
    fn cadences(&self) -> [u64; 5] {
        let s = &self.config.schedule;
        [s.sample_every, s.spectra_every, s.vortex_every, s.dump_every, s.checkpoint_every]
    }

    fn next_event(&self, t: u64) -> u64 {
        self.cadences().into_iter().filter(|&c| c > 0).map(|c| (t / c + 1) * c).fold(self.config.schedule.steps, u64::min)
    }

    fn due(every: u64, t: u64) -> bool {
        every > 0 && t.is_multiple_of(every)
    }

    fn emit(&mut self, t: u64) -> Result<()> {
        let s = self.config.schedule.clone();
        let sample = Self::due(s.sample_every, t);
        let spectra = Self::due(s.spectra_every, t);
        let vortices = Self::due(s.vortex_every, t);
        if sample || spectra || vortices {
            let wave = self.field.wave();
            if sample || spectra {
                let hydro = hydro_fields(&wave, &self.fft);
                if sample {
                    let rec = energies_from_hydro(&hydro, self.config.coupling.g, t);
                    self.tables.timeseries.row(out::energy_row(&rec))?;
                }
                if spectra {
                    let spec = spectrum(&hydro.q, t);
                    out::write_spectrum(&out::spectrum_path(&self.dir, t), &spec)?;
                    for w in &self.config.analysis.fit_windows {
                        for &which in &self.config.analysis.fit_spectra {
                            self.tables.fits.row(fit_row(t, w, which, &spec))?;
                        }
                    }
                }
            }
            let set = detect_vortices(&wave, t);
            if sample {
                self.tables.vortex_series.row([t.to_string(), set.count().to_string(), set.abs_circulation().to_string()])?;
            }
            if vortices {
                out::write_vortices(&out::vortices_path(&self.dir, t), &set)?;
            }
        }
        if Self::due(s.dump_every, t) {
            write_checkpoint(&out::dump_stem(&self.dir, t), &self.field, &self.config)?;
        }
        if Self::due(s.checkpoint_every, t) {
            self.checkpoint(&self.field)?;
        }
        Ok(())
    }

    fn checkpoint(&self, field: &SpinorField) -> Result<()> {
        write_checkpoint(&self.dir.join(out::CHECKPOINT_STEM), field, &self.config)
    }

    /// Advances to the configured step count. On a numerical failure the
    /// state at the last output boundary is checkpointed before the error
    /// is returned.
    fn drive(mut self) -> Result<RunSummary> {
        let steps = self.config.schedule.steps;
        while self.field.t() < steps {
            let target = self.next_event(self.field.t());
            let last_good = self.field.clone();
            if let Err(e) = self.field.advance(&self.coupling, target - last_good.t()) {
                self.checkpoint(&last_good)?;
                return Err(e);
            }
            self.emit(target)?;
        }
        self.checkpoint(&self.field)?;
        let summary = summarize(&self.dir, &self.config)?;
        write_summary(&self.dir, &summary)?;
        Ok(summary)
    }
}

fn prepare_dirs(dir: &Path) -> Result<()> {
    for sub in [out::SPECTRA_DIR, out::VORTICES_DIR, out::DUMPS_DIR] {
        out::ensure_dir(&dir.join(sub))?;
    }
    Ok(())
}

/// Runs a configuration from its initial condition.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let grid = config.grid()?;
    let dir = config.output.dir.clone();
    prepare_dirs(&dir)?;
    remove_later_files(&dir, 0)?;
    let field = SpinorField::from_wave(&config.init.build(grid, config.seed)?);
    let mut sim = Simulation {
        config: config.clone(),
        coupling: config.coupling()?,
        fft: Fft2::new(grid),
        tables: Tables::create(&dir)?,
        dir,
        field,
    };
    sim.emit(0)?;
    sim.drive()
}

/// Continues the run stored in `dir` from its checkpoint, optionally to a
/// new step count. Output rows and files written after the checkpoint are
/// discarded first.
pub fn resume(dir: &Path, steps: Option<u64>) -> Result<RunSummary> {
    let (field, mut config) = read_checkpoint(&dir.join(out::CHECKPOINT_STEM))?;
    config.output.dir = dir.to_path_buf();
    if let Some(steps) = steps {
        config.schedule.steps = steps;
    }
    config.validate()?;
    let t = field.t();
    if config.schedule.steps < t {
        return Err(Error::Config(format!("cannot resume to step {} from a checkpoint at step {t}", config.schedule.steps)));
    }
    prepare_dirs(dir)?;
    remove_later_files(dir, t)?;
    let grid = config.grid()?;
    let sim = Simulation {
        coupling: config.coupling()?,
        fft: Fft2::new(grid),
        tables: Tables::reopen(dir, t)?,
        dir: dir.to_path_buf(),
        field,
        config,
    };
    sim.drive()
}

fn remove_later_files(dir: &Path, t: u64) -> Result<()> {
    for (sub, prefix) in [(out::SPECTRA_DIR, "spectrum_"), (out::VORTICES_DIR, "vortices_"), (out::DUMPS_DIR, "dump_")] {
        let path = dir.join(sub);
        for entry in fs::read_dir(&path).map_err(|e| Error::io(&path, e))? {
            let p = entry.map_err(|e| Error::io(&path, e))?.path();
            let stamp =
                p.file_stem().and_then(|s| s.to_str()).and_then(|s| s.strip_prefix(prefix)).and_then(|s| s.parse::<u64>().ok());
            if stamp.is_some_and(|s| s > t) {
                fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
            }
        }
    }
    Ok(())
}

/// Builds the run summary from the files on disk.
pub fn summarize(dir: &Path, config: &RunConfig) -> Result<RunSummary> {
    let records = out::read_timeseries(&dir.join(out::TIMESERIES))?;
    let mut notes = Vec::new();
    let gamma = match gamma_ratio(&records) {
        Ok(g) => Some(g),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let recurrence = match detect_recurrence(&records, config.analysis.kappa) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let fits = summarize_fits(&read_fits(&dir.join(out::FITS))?);
    let final_t = match read_header(&dir.join(out::CHECKPOINT_STEM)) {
        Ok(header) => header.t,
        Err(_) => records.last().map_or(0, |r| r.t),
    };
    Ok(RunSummary { final_t, samples: records.len(), gamma, notes, recurrence, fits, config: config.clone() })
}

pub fn write_summary(dir: &Path, summary: &RunSummary) -> Result<()> {
    let text = toml::to_string(summary).map_err(|e| Error::Undefined(format!("summary does not serialize: {e}")))?;
    let path = dir.join(out::SUMMARY);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// `(t, k_min, k_max, which, alpha)` row of a fits table.
type FitRow = (u64, f64, f64, Which, f64);

fn read_fits(path: &Path) -> Result<Vec<FitRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let bad = |what: &str| {
            Error::Undefined(format!("{}: bad {what} in `{}`", path.display(), rec.iter().collect::<Vec<_>>().join(",")))
        };
        if rec.len() != out::FITS_HEADER.len() {
            return Err(bad("row length"));
        }
        rows.push((
            rec[0].parse().map_err(|_| bad("t"))?,
            rec[1].parse().map_err(|_| bad("k_min"))?,
            rec[2].parse().map_err(|_| bad("k_max"))?,
            rec[3].parse().map_err(|_| bad("which"))?,
            rec[4].parse().map_err(|_| bad("alpha"))?,
        ));
    }
    Ok(rows)
}

fn summarize_fits(rows: &[FitRow]) -> Vec<FitSummary> {
    let mut groups: Vec<FitSummary> = Vec::new();
    let mut alphas: Vec<Vec<f64>> = Vec::new();
    for &(_, k_min, k_max, which, alpha) in rows {
        let pos = groups.iter().position(|g| g.which == which && g.k_min == k_min && g.k_max == k_max).unwrap_or_else(|| {
            groups.push(FitSummary { which, k_min, k_max, spectra: 0, failed: 0, mean_alpha: f64::NAN, std_alpha: f64::NAN });
            alphas.push(Vec::new());
            groups.len() - 1
        });
        groups[pos].spectra += 1;
        if alpha.is_finite() {
            alphas[pos].push(alpha);
        } else {
            groups[pos].failed += 1;
        }
    }
    for (g, a) in groups.iter_mut().zip(&alphas) {
        if !a.is_empty() {
            let n = a.len() as f64;
            g.mean_alpha = a.iter().sum::<f64>() / n;
            g.std_alpha = (a.iter().map(|x| (x - g.mean_alpha).powi(2)).sum::<f64>() / n).sqrt();
        }
    }
    groups
}

/// Recomputes spectrum and vortex files from every field dump in `dir`.
/// Returns the number of dumps processed.
pub fn analyze(dir: &Path) -> Result<usize> {
    prepare_dirs(dir)?;
    let dumps = out::list_dumps(dir)?;
    let mut fft: Option<Fft2> = None;
    for stem in &dumps {
        let (field, _) = read_checkpoint(stem)?;
        let grid = field.grid();
        let fft = match &fft {
            Some(f) if f.grid() == grid => f,
            _ => fft.insert(Fft2::new(grid)),
        };
        let wave = field.wave();
        let hydro = hydro_fields(&wave, fft);
        out::write_spectrum(&out::spectrum_path(dir, field.t()), &spectrum(&hydro.q, field.t()))?;
        out::write_vortices(&out::vortices_path(dir, field.t()), &detect_vortices(&wave, field.t()))?;
    }
    Ok(dumps.len())
}

/// Fits every stored spectrum in `dir` over each window and rewrites the
/// fits table.
pub fn fit(dir: &Path, windows: &[FitWindow], spectra: &[Which]) -> Result<Vec<FitSummary>> {
    if windows.is_empty() || spectra.is_empty() {
        return Err(Error::Config("fitting needs at least one window and one spectrum selector".into()));
    }
    let mut records = out::list_spectra(dir)?.iter().map(|p| out::read_spectrum(p)).collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|s| s.t);
    let mut table = Table::create(&dir.join(out::FITS), &out::FITS_HEADER)?;
    for spec in &records {
        for w in windows {
            for &which in spectra {
                table.row(fit_row(spec.t, w, which, spec))?;
            }
        }
    }
    Ok(summarize_fits(&read_fits(&dir.join(out::FITS))?))
}

/// Samples of a finished run, as written to its time series.
pub fn load_series(dir: &Path) -> Result<Vec<EnergyRecord>> {
    out::read_timeseries(&dir.join(out::TIMESERIES))
}
