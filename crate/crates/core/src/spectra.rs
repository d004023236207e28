//! Helmholtz decomposition of the density-weighted velocity, shell-binned
//! kinetic energy spectra, and power-law fits.
//!
//! Wavenumbers are reported in units of `k_u = 2 pi / (L dx)`, so shell `j`
//! collects modes with `j - 1/2 <= |k| / k_u < j + 1/2`. Bin values are the
//! plain shell sums of the modal energy, which makes the bin sums equal the
//! compressible and incompressible energies exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::Grid;

/// Density-weighted velocity and its Fourier transform.
#[derive(Debug, Clone)]
pub struct QField {
    grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_hat: Vec<Complex64>,
    pub y_hat: Vec<Complex64>,
}

impl QField {
    pub fn new(grid: Grid, x: Vec<f64>, y: Vec<f64>, fft: &Fft2) -> Self {
        let transform = |v: &[f64]| {
            let mut h: Vec<Complex64> = v.iter().map(|&a| Complex64::new(a, 0.0)).collect();
            fft.forward(&mut h);
            h
        };
        let x_hat = transform(&x);
        let y_hat = transform(&y);
        QField { grid, x, y, x_hat, y_hat }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// `dq_y/dx - dq_x/dy`, spectrally.
    pub fn curl(&self, fft: &Fft2) -> Vec<f64> {
        let l = self.grid.l();
        let inv_dx = 1.0 / self.grid.dx();
        let k: Vec<f64> = (0..l).map(|n| fft.derivative_wavenumber(n) * inv_dx).collect();
        let mut w = vec![Complex64::default(); self.grid.sites()];
        for j in 0..l {
            for i in 0..l {
                let idx = j * l + i;
                w[idx] = Complex64::new(0.0, k[i]) * self.y_hat[idx] - Complex64::new(0.0, k[j]) * self.x_hat[idx];
            }
        }
        fft.inverse(&mut w);
        w.into_iter().map(|z| z.re).collect()
    }
}

/// Compressible and incompressible parts of a transformed vector field.
#[derive(Debug, Clone)]
pub struct HelmholtzSplit {
    pub c_x: Vec<Complex64>,
    pub c_y: Vec<Complex64>,
    pub ic_x: Vec<Complex64>,
    pub ic_y: Vec<Complex64>,
}

/// Signed integer wave vector of FFT index `idx`.
#[inline]
fn wave_vector(grid: Grid, idx: usize) -> (f64, f64) {
    let (i, j) = grid.coords(idx);
    (grid.mode_number(i) as f64, grid.mode_number(j) as f64)
}

/// Projects `(x_hat, y_hat)` onto and off the wave vector. The `k = 0`
/// mode goes wholly to the compressible part.
pub fn helmholtz_split(grid: Grid, x_hat: &[Complex64], y_hat: &[Complex64]) -> HelmholtzSplit {
    let n = grid.sites();
    let mut out = HelmholtzSplit {
        c_x: vec![Complex64::default(); n],
        c_y: vec![Complex64::default(); n],
        ic_x: vec![Complex64::default(); n],
        ic_y: vec![Complex64::default(); n],
    };
    for idx in 0..n {
        let (kx, ky) = wave_vector(grid, idx);
        let k2 = kx * kx + ky * ky;
        let (a, b) = (x_hat[idx], y_hat[idx]);
        let (cx, cy) = if k2 == 0.0 {
            (a, b)
        } else {
            let proj = (a * kx + b * ky) / k2;
            (proj * kx, proj * ky)
        };
        out.c_x[idx] = cx;
        out.c_y[idx] = cy;
        out.ic_x[idx] = a - cx;
        out.ic_y[idx] = b - cy;
    }
    out
}

/// Per-mode compressible and incompressible energy, scaled so that their
/// totals over all modes are `E_C` and `E_IC`.
fn modal_energies(q: &QField) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
    let grid = q.grid;
    let scale = 0.5 * grid.cell_area() / grid.sites() as f64;
    (0..grid.sites()).map(move |idx| {
        let (kx, ky) = wave_vector(grid, idx);
        let (a, b) = (q.x_hat[idx], q.y_hat[idx]);
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            return (idx, scale * (a.norm_sqr() + b.norm_sqr()), 0.0);
        }
        let par = (a * kx + b * ky).norm_sqr() / k2;
        let perp = (b * kx - a * ky).norm_sqr() / k2;
        (idx, scale * par, scale * perp)
    })
}

/// `(E_C, E_IC)` of a density-weighted velocity field.
pub fn helmholtz_energies(q: &QField) -> (f64, f64) {
    modal_energies(q).fold((0.0, 0.0), |(c, ic), (_, a, b)| (c + a, ic + b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub t: u64,
    /// Shell centres in units of `k_u`.
    pub k_bins: Vec<f64>,
    pub eps_ic: Vec<f64>,
    pub eps_c: Vec<f64>,
}

fn shell_of(grid: Grid, idx: usize) -> usize {
    let (kx, ky) = wave_vector(grid, idx);
    (kx.hypot(ky) + 0.5).floor() as usize
}

fn shell_count(grid: Grid) -> usize {
    let half = (grid.l() / 2) as f64;
    (half * std::f64::consts::SQRT_2 + 0.5).floor() as usize + 1
}

/// Shell-binned energy of one vector field given in Fourier space.
pub fn spectral_density(grid: Grid, x_hat: &[Complex64], y_hat: &[Complex64]) -> Vec<f64> {
    let scale = 0.5 * grid.cell_area() / grid.sites() as f64;
    let mut eps = vec![0.0; shell_count(grid)];
    for idx in 0..grid.sites() {
        eps[shell_of(grid, idx)] += scale * (x_hat[idx].norm_sqr() + y_hat[idx].norm_sqr());
    }
    eps
}

/// Incompressible and compressible spectra of `q` at iteration `t`.
pub fn spectrum(q: &QField, t: u64) -> SpectrumRecord {
    let grid = q.grid;
    let bins = shell_count(grid);
    let mut eps_c = vec![0.0; bins];
    let mut eps_ic = vec![0.0; bins];
    for (idx, c, ic) in modal_energies(q) {
        let s = shell_of(grid, idx);
        eps_c[s] += c;
        eps_ic[s] += ic;
    }
    SpectrumRecord { t, k_bins: (0..bins).map(|j| j as f64).collect(), eps_ic, eps_c }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Ic,
    C,
}

impl Which {
    pub fn as_str(self) -> &'static str {
        match self {
            Which::Ic => "ic",
            Which::C => "c",
        }
    }
}

impl std::str::FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ic" => Ok(Which::Ic),
            "c" => Ok(Which::C),
            other => Err(Error::Config(format!("spectrum selector must be `ic` or `c`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub which: Which,
    pub k_min: f64,
    pub k_max: f64,
    pub alpha: f64,
    pub stderr: f64,
    pub used: usize,
    /// Bins inside the window skipped for being zero or non-finite.
    pub excluded: usize,
}

pub const MIN_FIT_BINS: usize = 5;

/// Least-squares slope of `ln eps` against `ln k` over bins with
/// `k_min <= k <= k_max`.
pub fn fit_powerlaw(spec: &SpectrumRecord, which: Which, k_min: f64, k_max: f64) -> Result<PowerLawFit> {
    if !(k_min.is_finite() && k_max.is_finite() && k_min < k_max) {
        return Err(Error::Fit(format!("window [{k_min}, {k_max}] is not a valid interval")));
    }
    let eps = match which {
        Which::Ic => &spec.eps_ic,
        Which::C => &spec.eps_c,
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for (&k, &e) in spec.k_bins.iter().zip(eps) {
        if k < k_min || k > k_max {
            continue;
        }
        if k > 0.0 && e > 0.0 && e.is_finite() {
            xs.push(k.ln());
            ys.push(e.ln());
        } else {
            excluded += 1;
        }
    }
    if xs.len() < MIN_FIT_BINS {
        return Err(Error::Fit(format!("window [{k_min}, {k_max}] has {} usable bins, need {MIN_FIT_BINS}", xs.len())));
    }
    let (alpha, stderr) = ols_slope(&xs, &ys);
    Ok(PowerLawFit { which, k_min, k_max, alpha, stderr, used: xs.len(), excluded })
}

/// Slope and its standard error for `y = c + alpha x`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if xs.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_q(grid: Grid, fft: &Fft2) -> QField {
        let x = (0..grid.sites()).map(|n| ((n * 37 % 101) as f64 * 0.3).sin()).collect();
        let y = (0..grid.sites()).map(|n| ((n * 53 % 97) as f64 * 0.7).cos()).collect();
        QField::new(grid, x, y, fft)
    }

    #[test]
    fn split_is_exact_and_orthogonal() {
        let grid = Grid::new(16, 0.5).unwrap();
        let fft = Fft2::new(grid);
        let q = random_q(grid, &fft);
        let s = helmholtz_split(grid, &q.x_hat, &q.y_hat);
        let mut cross = 0.0;
        let mut total = 0.0;
        for idx in 0..grid.sites() {
            assert!((s.c_x[idx] + s.ic_x[idx] - q.x_hat[idx]).norm() < 1e-13 * q.x_hat[idx].norm().max(1.0));
            assert!((s.c_y[idx] + s.ic_y[idx] - q.y_hat[idx]).norm() < 1e-13 * q.y_hat[idx].norm().max(1.0));
            let (kx, ky) = wave_vector(grid, idx);
            assert!(
                (s.ic_x[idx] * kx + s.ic_y[idx] * ky).norm()
                    < 1e-12 * (1.0 + q.x_hat[idx].norm() + q.y_hat[idx].norm()) * (kx.abs() + ky.abs() + 1.0)
            );
            cross += (s.c_x[idx] * s.ic_x[idx].conj() + s.c_y[idx] * s.ic_y[idx].conj()).re;
            total += q.x_hat[idx].norm_sqr() + q.y_hat[idx].norm_sqr();
        }
        assert!(cross.abs() < 1e-12 * total);
    }

    #[test]
    fn gradient_and_solenoidal_fields() {
        let grid = Grid::new(16, 1.0).unwrap();
        let fft = Fft2::new(grid);
        let phase = |i: usize, j: usize| 2.0 * PI * (2.0 * i as f64 + 3.0 * j as f64) / 16.0;
        let gx: Vec<f64> = (0..256).map(|n| 2.0 * phase(n % 16, n / 16).cos()).collect();
        let gy: Vec<f64> = (0..256).map(|n| 3.0 * phase(n % 16, n / 16).cos()).collect();
        let grad = QField::new(grid, gx.clone(), gy.clone(), &fft);
        let (c, ic) = helmholtz_energies(&grad);
        assert!(ic < 1e-14 * c);
        let sol = QField::new(grid, gy.iter().map(|v| -v).collect(), gx, &fft);
        let (c, ic) = helmholtz_energies(&sol);
        assert!(c < 1e-14 * ic);
    }

    #[test]
    fn single_mode_fills_one_shell() {
        let grid = Grid::new(32, 0.5).unwrap();
        let fft = Fft2::new(grid);
        let x: Vec<f64> = (0..grid.sites()).map(|n| (2.0 * PI * 7.0 * (n / 32) as f64 / 32.0).sin()).collect();
        let q = QField::new(grid, x, vec![0.0; grid.sites()], &fft);
        let s = spectrum(&q, 0);
        let (c, ic) = helmholtz_energies(&q);
        assert!((s.eps_ic[7] - ic).abs() < 1e-12 * ic);
        assert!(c < 1e-14 * ic);
        assert!(s.eps_ic.iter().enumerate().all(|(j, &v)| j == 7 || v < 1e-14 * ic));
    }

    #[test]
    fn bins_sum_to_energies() {
        let grid = Grid::new(32, 0.3).unwrap();
        let fft = Fft2::new(grid);
        let q = random_q(grid, &fft);
        let s = spectrum(&q, 5);
        let (c, ic) = helmholtz_energies(&q);
        assert!((s.eps_c.iter().sum::<f64>() - c).abs() < 1e-12 * c);
        assert!((s.eps_ic.iter().sum::<f64>() - ic).abs() < 1e-12 * ic);
        let split = helmholtz_split(grid, &q.x_hat, &q.y_hat);
        let direct = spectral_density(grid, &split.ic_x, &split.ic_y);
        for (a, b) in direct.iter().zip(&s.eps_ic) {
            assert!((a - b).abs() < 1e-12 * ic);
        }
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let k_bins: Vec<f64> = (0..40).map(|j| j as f64).collect();
        let eps: Vec<f64> = k_bins.iter().map(|&k| if k > 0.0 { 2.5 * k.powf(-3.0) } else { 0.0 }).collect();
        let spec = SpectrumRecord { t: 0, k_bins, eps_ic: eps.clone(), eps_c: eps };
        let fit = fit_powerlaw(&spec, Which::Ic, 5.0, 30.0).unwrap();
        assert!((fit.alpha + 3.0).abs() < 1e-10);
        assert_eq!(fit.used, 26);
        assert!(fit_powerlaw(&spec, Which::C, 5.0, 8.0).is_err());
        assert!(fit_powerlaw(&spec, Which::C, 8.0, 5.0).is_err());
    }

    #[test]
    fn zero_bins_are_excluded() {
        let k_bins: Vec<f64> = (0..20).map(|j| j as f64).collect();
        let eps: Vec<f64> = k_bins.iter().map(|&k| if (k as usize).is_multiple_of(2) { 0.0 } else { k.powi(-2) }).collect();
        let spec = SpectrumRecord { t: 0, k_bins, eps_ic: eps, eps_c: vec![0.0; 20] };
        let fit = fit_powerlaw(&spec, Which::Ic, 1.0, 19.0).unwrap();
        assert_eq!((fit.used, fit.excluded), (10, 9));
        assert!((fit.alpha + 2.0).abs() < 1e-10);
    }

    #[test]
    fn which_parses() {
        assert_eq!("ic".parse::<Which>().unwrap(), Which::Ic);
        assert!("x".parse::<Which>().is_err());
    }
}
