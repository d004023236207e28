//! Configured runs: initial state, time stepping, sampled diagnostics,
//! output files, recurrence detection and checkpoint/restart.

pub mod checkpoint;
pub mod config;
pub mod output;
pub mod recurrence;
mod run;

pub use config::{FitWindow, InitConfig, RunConfig};
pub use recurrence::{detect_recurrence, RecurrenceReport};
pub use run::{analyze, fit, load_series, resume, run, summarize, write_summary, FitSummary, RunSummary};
