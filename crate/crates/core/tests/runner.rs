use std::fs;

use qla2d::runner::config::{CouplingConfig, GridConfig, OutputConfig, ScheduleConfig};
use qla2d::runner::{self, load_series, InitConfig, RunConfig};

fn uniform(dir: &std::path::Path) -> RunConfig {
    RunConfig {
        seed: 1,
        grid: GridConfig { l: 64, dx: 0.5 },
        coupling: CouplingConfig { g: 0.0 },
        init: InitConfig::GaussianVortices { h: 0.8, a: 1.0, w_g: 0.0, quadrupole: None, vortices: Vec::new() },
        schedule: ScheduleConfig {
            steps: 100,
            sample_every: 1,
            spectra_every: 0,
            vortex_every: 20,
            dump_every: 0,
            checkpoint_every: 0,
        },
        analysis: Default::default(),
        output: OutputConfig { dir: dir.to_path_buf() },
    }
}

#[test]
fn uniform_free_state_stays_put() {
    let dir = tempfile::tempdir().unwrap();
    let summary = runner::run(&uniform(dir.path())).unwrap();
    assert_eq!(summary.samples, 101);
    let series = load_series(dir.path()).unwrap();
    let e0 = series[0];
    for r in &series {
        for (a, b) in [(r.e_t, e0.e_t), (r.e_k, e0.e_k), (r.e_i, e0.e_i), (r.e_q, e0.e_q), (r.z, e0.z)] {
            assert!((a - b).abs() <= 1e-12, "t = {}: {a} vs {b}", r.t);
        }
    }
    let counts = fs::read_to_string(dir.path().join("vortex_series.csv")).unwrap();
    assert!(counts.lines().skip(1).all(|row| row.split(',').nth(1) == Some("0")), "{counts}");
    assert!(summary.recurrence.is_some_and(|r| r.is_empty()));
}

#[test]
fn identical_configs_give_identical_outputs() {
    let root = tempfile::tempdir().unwrap();
    let config = |name: &str| RunConfig {
        grid: GridConfig { l: 32, dx: 0.25 },
        init: InitConfig::RandomPhase { m: 4, amplitude: 1.0 },
        schedule: ScheduleConfig {
            steps: 120,
            sample_every: 10,
            spectra_every: 40,
            vortex_every: 40,
            dump_every: 60,
            checkpoint_every: 50,
        },
        output: OutputConfig { dir: root.path().join(name) },
        ..RunConfig::default()
    };
    runner::run(&config("a")).unwrap();
    runner::run(&config("b")).unwrap();
    for name in ["timeseries.csv", "vortex_series.csv", "checkpoint.bin", "dumps/dump_00000060.bin", "spectra/spectrum_00000080.csv"] {
        assert_eq!(fs::read(root.path().join("a").join(name)).unwrap(), fs::read(root.path().join("b").join(name)).unwrap(), "{name}");
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let config = RunConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(RunConfig::from_toml_str(&config.to_toml_string()).unwrap(), config);
        seen += 1;
    }
    assert!(seen >= 2);
}
