use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qla2d::runner::checkpoint::read_header;
use qla2d::runner::output::CHECKPOINT_STEM;
use qla2d::runner::{self, FitSummary, FitWindow, InitConfig, RunConfig, RunSummary};
use qla2d::spectra::Which;
use qla2d::Error;

/// Quantum lattice simulator for the 2D Gross-Pitaevskii equation.
#[derive(Parser)]
#[command(name = "qla2d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start a run from its initial condition.
    Run(RunArgs),
    /// Continue a run from the checkpoint in its output directory.
    Resume {
        #[arg(long)]
        out: PathBuf,
        /// New total step count.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Recompute spectra and vortex lists from the field dumps of a run.
    Analyze {
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit power laws to the stored spectra of a run.
    Fit {
        #[arg(long)]
        out: PathBuf,
        /// Window `kmin:kmax` in units of the fundamental wavenumber; may be
        /// repeated. Defaults to the windows of the run's configuration.
        #[arg(long = "fit-window")]
        fit_window: Vec<FitWindow>,
        /// Spectrum to fit, `ic` or `c`; may be repeated.
        #[arg(long, default_values = ["ic"])]
        which: Vec<Which>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; flags given alongside override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sites per dimension.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    /// `gaussian_vortices` or `random_phase`.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sample_every: Option<u64>,
    #[arg(long)]
    spectra_every: Option<u64>,
    #[arg(long)]
    dump_every: Option<u64>,
    /// Window `kmin:kmax`; may be repeated. Replaces the configured windows.
    #[arg(long = "fit-window")]
    fit_window: Vec<FitWindow>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(l) = self.grid {
            c.grid.l = l;
        }
        if let Some(dx) = self.dx {
            c.grid.dx = dx;
        }
        if let Some(g) = self.g {
            c.coupling.g = g;
        }
        if let Some(steps) = self.steps {
            c.schedule.steps = steps;
        }
        if let Some(kind) = self.init {
            if kind != c.init.kind() {
                c.init = InitConfig::default_for(&kind)?;
            }
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(out) = self.out {
            c.output.dir = out;
        }
        if let Some(n) = self.sample_every {
            c.schedule.sample_every = n;
        }
        if let Some(n) = self.spectra_every {
            c.schedule.spectra_every = n;
        }
        if let Some(n) = self.dump_every {
            c.schedule.dump_every = n;
        }
        if !self.fit_window.is_empty() {
            c.analysis.fit_windows = self.fit_window;
        }
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidGrid(_) | Error::InitialCondition(_) => 1,
        Error::NonFinite { .. } | Error::Undefined(_) | Error::Fit(_) => 2,
        Error::Io { .. } | Error::Csv { .. } | Error::Checkpoint(_) => 3,
    }
}

fn print_fits(fits: &[FitSummary]) {
    for f in fits {
        println!(
            "fit {} [{}, {}]: mean alpha {:.4} (std {:.4}) over {} spectra, {} failed",
            f.which.as_str(),
            f.k_min,
            f.k_max,
            f.mean_alpha,
            f.std_alpha,
            f.spectra,
            f.failed
        );
    }
}

fn print_summary(dir: &Path, s: &RunSummary) {
    println!("finished at t = {} with {} samples in {}", s.final_t, s.samples, dir.display());
    if let Some(g) = s.gamma {
        println!("gamma = {g:.6}");
    }
    match &s.recurrence {
        Some(r) if r.is_empty() => println!("recurrence: no signatures"),
        Some(r) => println!(
            "recurrence: E_I peaks {:?}, E_IC dips {:?}, Z dips {:?}; T_P/2 = {:?}, T_P = {:?}",
            r.e_i_peaks, r.e_ic_dips, r.z_dips, r.half_period, r.period
        ),
        None => {}
    }
    for note in &s.notes {
        println!("note: {note}");
    }
    print_fits(&s.fits);
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(args) => {
            let config = args.into_config()?;
            let summary = runner::run(&config)?;
            print_summary(&config.output.dir, &summary);
        }
        Command::Resume { out, steps } => {
            let summary = runner::resume(&out, steps)?;
            print_summary(&out, &summary);
        }
        Command::Analyze { out } => {
            let n = runner::analyze(&out)?;
            println!("analyzed {n} dumps in {}", out.display());
        }
        Command::Fit { out, fit_window, which } => {
            let windows = if fit_window.is_empty() {
                read_header(&out.join(CHECKPOINT_STEM))?.config.analysis.fit_windows
            } else {
                fit_window
            };
            print_fits(&runner::fit(&out, &windows, &which)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
