//! Hydrodynamic fields and integral diagnostics of a wave function.
//!
//! Conventions follow `hbar = 1`, `m = 1/2`: momentum density
//! `j = i (psi grad psi* - psi* grad psi) = 2 Im(psi* grad psi)`, velocity
//! `v = j / rho`, and density-weighted velocity `q = sqrt(rho) v`. All
//! derivatives are spectral and all integrals are lattice sums times `dx^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::lattice::WaveField;
use crate::spectra::{helmholtz_energies, QField};

/// Relative floor on `sqrt(rho)` used when dividing by it.
pub const SQRT_RHO_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct HydroFields {
    pub rho: Vec<f64>,
    pub jx: Vec<f64>,
    pub jy: Vec<f64>,
    pub sqrt_rho: Vec<f64>,
    /// Density-weighted velocity `q = j / sqrt(rho)`.
    pub q: QField,
    /// `(grad x q) . e_z`.
    pub omega_q: Vec<f64>,
    /// `|grad sqrt(rho)|^2`, evaluated as `(Re psi* grad psi)^2 / rho`.
    pub grad_sqrt_rho_sqr: Vec<f64>,
    cell_area: f64,
}

impl HydroFields {
    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }
}

pub fn hydro_fields(psi: &WaveField, fft: &Fft2) -> HydroFields {
    let grid = psi.grid();
    let values = psi.values();
    let (gx, gy) = fft.gradient(values);

    let rho: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
    let sqrt_rho: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let mean_sqrt = sqrt_rho.iter().sum::<f64>() / sqrt_rho.len() as f64;
    let floor = SQRT_RHO_FLOOR * mean_sqrt;

    let n = grid.sites();
    let mut jx = Vec::with_capacity(n);
    let mut jy = Vec::with_capacity(n);
    let mut qx = Vec::with_capacity(n);
    let mut qy = Vec::with_capacity(n);
    let mut grad_sqrt_rho_sqr = Vec::with_capacity(n);
    for idx in 0..n {
        let conj = values[idx].conj();
        let (px, py) = (conj * gx[idx], conj * gy[idx]);
        let (cx, cy) = (2.0 * px.im, 2.0 * py.im);
        jx.push(cx);
        jy.push(cy);
        let s = sqrt_rho[idx].max(floor);
        if s > 0.0 {
            qx.push(cx / s);
            qy.push(cy / s);
            grad_sqrt_rho_sqr.push((px.re * px.re + py.re * py.re) / (s * s));
        } else {
            qx.push(0.0);
            qy.push(0.0);
            grad_sqrt_rho_sqr.push(0.0);
        }
    }

    let q = QField::new(grid, qx, qy, fft);
    let omega_q = q.curl(fft);
    HydroFields { rho, jx, jy, sqrt_rho, q, omega_q, grad_sqrt_rho_sqr, cell_area: grid.cell_area() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: u64,
    pub e_t: f64,
    pub e_k: f64,
    pub e_i: f64,
    pub e_q: f64,
    pub e_c: f64,
    pub e_ic: f64,
    pub z: f64,
    /// Mean of `E_I / E_K` over the records up to and including this one.
    pub gamma_running: f64,
}

/// Energy functionals of `psi`. `gamma_running` is filled with this
/// snapshot's own `E_I / E_K` (or NaN when `E_K = 0`).
pub fn energies(psi: &WaveField, g: f64, fft: &Fft2) -> EnergyRecord {
    let h = hydro_fields(psi, fft);
    energies_from_hydro(&h, g, 0)
}

pub fn energies_from_hydro(h: &HydroFields, g: f64, t: u64) -> EnergyRecord {
    let da = h.cell_area;
    let e_k = 0.5 * h.q.x.iter().zip(&h.q.y).map(|(a, b)| a * a + b * b).sum::<f64>() * da;
    let e_i = g * h.rho.iter().map(|r| r * r).sum::<f64>() * da;
    let e_q = 2.0 * h.grad_sqrt_rho_sqr.iter().sum::<f64>() * da;
    let (e_c, e_ic) = helmholtz_energies(&h.q);
    EnergyRecord {
        t,
        e_t: e_k + e_i + e_q,
        e_k,
        e_i,
        e_q,
        e_c,
        e_ic,
        z: enstrophy(h),
        gamma_running: if e_k > 0.0 { e_i / e_k } else { f64::NAN },
    }
}

/// `Z = int |omega_q|^2`.
pub fn enstrophy(h: &HydroFields) -> f64 {
    h.omega_q.iter().map(|w| w * w).sum::<f64>() * h.cell_area
}

/// Time average of `E_I / E_K` over the sampled records.
pub fn gamma_ratio(records: &[EnergyRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Undefined("gamma needs at least one record".into()));
    }
    let mut sum = 0.0;
    for r in records {
        if r.e_k.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Undefined(format!("E_K = {} at t = {}; gamma is undefined", r.e_k, r.t)));
        }
        sum += r.e_i / r.e_k;
    }
    Ok(sum / records.len() as f64)
}

/// Running-mean tracker for `gamma_running`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GammaAccumulator {
    sum: f64,
    count: u64,
}

impl GammaAccumulator {
    pub fn push(&mut self, record: &mut EnergyRecord) {
        if record.e_k > 0.0 {
            self.sum += record.e_i / record.e_k;
            self.count += 1;
        }
        record.gamma_running = if self.count > 0 { self.sum / self.count as f64 } else { f64::NAN };
    }
}

/// `2 int |grad psi|^2 + g int |psi|^4`, computed independently of the
/// hydrodynamic split.
pub fn total_energy_direct(psi: &WaveField, g: f64, fft: &Fft2) -> f64 {
    let (gx, gy) = fft.gradient(psi.values());
    let da = psi.grid().cell_area();
    let grad: f64 = gx.iter().zip(&gy).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).sum();
    let quartic: f64 = psi.values().iter().map(|z: &Complex64| z.norm_sqr().powi(2)).sum();
    (2.0 * grad + g * quartic) * da
}
