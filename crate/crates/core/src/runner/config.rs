//! Run configuration, read from TOML and overridable from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::init::{
    gaussian_vortex_state, quadrupole_vortices, random_phase_state, GaussianCloudParams, RandomPhaseParams, VortexSpec,
};
use crate::lattice::{CouplingParams, WaveField};
use crate::spectra::Which;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub l: usize,
    pub dx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub g: f64,
}

/// Four vortices of alternating sign on a square centred in the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupoleConfig {
    pub winding: i32,
    /// Side of the square in lattice units. Defaults to `L / 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    GaussianVortices {
        h: f64,
        a: f64,
        w_g: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrupole: Option<QuadrupoleConfig>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        vortices: Vec<VortexSpec>,
    },
    RandomPhase {
        m: usize,
        #[serde(default = "unit_amplitude")]
        amplitude: f64,
    },
}

fn unit_amplitude() -> f64 {
    1.0
}

impl InitConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            InitConfig::GaussianVortices { .. } => "gaussian_vortices",
            InitConfig::RandomPhase { .. } => "random_phase",
        }
    }

    /// Default parameters for an init kind given by name.
    pub fn default_for(kind: &str) -> Result<Self> {
        match kind {
            "gaussian_vortices" => Ok(InitConfig::GaussianVortices {
                h: 0.05,
                a: 0.01,
                w_g: 0.01,
                quadrupole: Some(QuadrupoleConfig { winding: 1, spacing: None }),
                vortices: Vec::new(),
            }),
            "random_phase" => Ok(InitConfig::RandomPhase { m: 8, amplitude: 1.0 }),
            other => Err(Error::Config(format!("unknown init kind `{other}`; expected `gaussian_vortices` or `random_phase`"))),
        }
    }

    pub fn build(&self, grid: Grid, seed: u64) -> Result<WaveField> {
        match self {
            InitConfig::GaussianVortices { h, a, w_g, quadrupole, vortices } => {
                let mut all = vortices.clone();
                if let Some(q) = quadrupole {
                    let spacing = q.spacing.unwrap_or(grid.l() as f64 / 4.0);
                    all.extend(quadrupole_vortices(grid.l(), q.winding, spacing));
                }
                gaussian_vortex_state(grid, &GaussianCloudParams { h: *h, a: *a, w_g: *w_g }, &all)
            }
            InitConfig::RandomPhase { m, amplitude } => {
                random_phase_state(grid, &RandomPhaseParams { m: *m, seed, amplitude: *amplitude })
            }
        }
    }
}

/// Iteration cadences. Zero disables the corresponding output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub steps: u64,
    #[serde(default = "default_sample_every")]
    pub sample_every: u64,
    #[serde(default)]
    pub spectra_every: u64,
    #[serde(default)]
    pub vortex_every: u64,
    #[serde(default)]
    pub dump_every: u64,
    #[serde(default)]
    pub checkpoint_every: u64,
}

fn default_sample_every() -> u64 {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    pub k_min: f64,
    pub k_max: f64,
}

impl std::str::FromStr for FitWindow {
    type Err = Error;

    /// Parses `kmin:kmax`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("fit window `{s}` is not of the form kmin:kmax"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let w = FitWindow { k_min: lo.trim().parse().map_err(|_| bad())?, k_max: hi.trim().parse().map_err(|_| bad())? };
        w.validate()?;
        Ok(w)
    }
}

impl FitWindow {
    pub fn validate(&self) -> Result<()> {
        if self.k_min.is_finite() && self.k_max.is_finite() && 0.0 <= self.k_min && self.k_min < self.k_max {
            Ok(())
        } else {
            Err(Error::Config(format!("fit window [{}, {}] must satisfy 0 <= k_min < k_max", self.k_min, self.k_max)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Outlier multiplier for the recurrence detector.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Windows in units of the fundamental wavenumber.
    #[serde(default)]
    pub fit_windows: Vec<FitWindow>,
    #[serde(default = "default_fit_spectra")]
    pub fit_spectra: Vec<Which>,
}

fn default_kappa() -> f64 {
    3.0
}

fn default_fit_spectra() -> Vec<Which> {
    vec![Which::Ic]
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { kappa: default_kappa(), fit_windows: Vec::new(), fit_spectra: default_fit_spectra() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub grid: GridConfig,
    pub coupling: CouplingConfig,
    pub init: InitConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: default_seed(),
            grid: GridConfig { l: 128, dx: 0.4 },
            coupling: CouplingConfig { g: 5.0 },
            init: InitConfig::GaussianVortices {
                h: 0.05,
                a: 0.16,
                w_g: 0.01,
                quadrupole: Some(QuadrupoleConfig { winding: 1, spacing: None }),
                vortices: Vec::new(),
            },
            schedule: ScheduleConfig {
                steps: 1000,
                sample_every: default_sample_every(),
                spectra_every: 100,
                vortex_every: 100,
                dump_every: 0,
                checkpoint_every: 0,
            },
            analysis: AnalysisConfig::default(),
            output: OutputConfig { dir: PathBuf::from("qla2d-out") },
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configuration always serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.l, self.grid.dx)
    }

    pub fn coupling(&self) -> Result<CouplingParams> {
        CouplingParams::new(self.coupling.g)
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid().map_err(as_config)?;
        self.coupling().map_err(as_config)?;
        if !(self.analysis.kappa.is_finite() && self.analysis.kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.analysis.kappa)));
        }
        for w in &self.analysis.fit_windows {
            w.validate()?;
        }
        if self.schedule.sample_every == 0 {
            return Err(Error::Config("sample_every must be positive; the time series is always written".into()));
        }
        self.init.build(grid, self.seed).map_err(as_config)?;
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(msg),
        other => Error::Config(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
seed = 7

[grid]
L = 32
dx = 0.5

[coupling]
g = 1.5

[init]
kind = "random_phase"
m = 4

[schedule]
steps = 100
sample_every = 5
spectra_every = 50

[analysis]
kappa = 2.5
fit_windows = [{ k_min = 2.0, k_max = 10.0 }]

[output]
dir = "out"
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = RunConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid.l, 32);
        assert_eq!(c.init, InitConfig::RandomPhase { m: 4, amplitude: 1.0 });
        assert_eq!(c.schedule.vortex_every, 0);
        assert_eq!(c.analysis.fit_spectra, vec![Which::Ic]);
        let again = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("L = 32", "L = 2"),
            ("g = 1.5", "g = -1.0"),
            ("m = 4", "m = 5"),
            ("kappa = 2.5", "kappa = 0.0"),
            ("sample_every = 5", "sample_every = 0"),
        ] {
            let text = EXAMPLE.replace(from, to);
            assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))), "{to}");
        }
        assert!(RunConfig::from_toml_str(&EXAMPLE.replace("seed = 7", "seed = 7\nbogus = 1")).is_err());
    }

    #[test]
    fn fit_window_parsing() {
        let w: FitWindow = "20:31.5".parse().unwrap();
        assert_eq!(w, FitWindow { k_min: 20.0, k_max: 31.5 });
        assert!("20".parse::<FitWindow>().is_err());
        assert!("5:2".parse::<FitWindow>().is_err());
    }

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
        for kind in ["gaussian_vortices", "random_phase"] {
            let c = RunConfig { init: InitConfig::default_for(kind).unwrap(), ..RunConfig::default() };
            c.validate().unwrap();
        }
        assert!(InitConfig::default_for("vortex").is_err());
    }
}
