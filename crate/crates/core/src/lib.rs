pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod grid;
pub mod init;
pub mod lattice;
pub mod runner;
pub mod spectra;
pub mod vortex;

pub use error::{Error, Result};
pub use grid::Grid;
pub use lattice::{Axis, Component, CouplingParams, Shift, SpinorField, WaveField};
