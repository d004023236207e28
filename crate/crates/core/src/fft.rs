//! Square 2D FFTs and spectral derivatives on the periodic grid.
//!
//! Forward transforms are unnormalized; the inverse divides by `L^2`, so
//! `inverse(forward(f)) == f` and Parseval reads `sum |f|^2 = sum |F|^2 / L^2`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

#[derive(Clone)]
pub struct Fft2 {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("grid", &self.grid).finish()
    }
}

impl Fft2 {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.l());
        let inverse = planner.plan_fft_inverse(grid.l());
        Fft2 { grid, forward, inverse }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &*self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &*self.inverse);
        let norm = 1.0 / self.grid.sites() as f64;
        for z in data.iter_mut() {
            *z *= norm;
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &dyn Fft<f64>) {
        assert_eq!(data.len(), self.grid.sites(), "field does not match grid");
        let l = self.grid.l();
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // rows, transpose, rows, transpose back
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, l);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, l);
    }

    /// Lattice wavenumber (radians per site) along one axis for FFT index
    /// `n`, with the Nyquist mode zeroed as is usual for odd derivatives.
    #[inline]
    pub fn derivative_wavenumber(&self, n: usize) -> f64 {
        if self.grid.is_nyquist(n) {
            0.0
        } else {
            2.0 * std::f64::consts::PI * self.grid.mode_number(n) as f64 / self.grid.l() as f64
        }
    }

    /// Physical-unit gradient of a complex field, computed spectrally.
    pub fn gradient(&self, field: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut hat = field.to_vec();
        self.forward(&mut hat);
        self.gradient_of_transform(&hat)
    }

    /// Gradient of a field whose forward transform is already known.
    pub fn gradient_of_transform(&self, hat: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let l = self.grid.l();
        let inv_dx = 1.0 / self.grid.dx();
        let kx: Vec<f64> = (0..l).map(|n| self.derivative_wavenumber(n) * inv_dx).collect();
        let mut gx = vec![Complex64::default(); hat.len()];
        let mut gy = vec![Complex64::default(); hat.len()];
        for j in 0..l {
            for i in 0..l {
                let idx = j * l + i;
                let h = hat[idx];
                gx[idx] = Complex64::new(0.0, kx[i]) * h;
                gy[idx] = Complex64::new(0.0, kx[j]) * h;
            }
        }
        self.inverse(&mut gx);
        self.inverse(&mut gy);
        (gx, gy)
    }

    /// Physical-unit gradient of a real field.
    pub fn gradient_real(&self, field: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let (gx, gy) = self.gradient(&c);
        (gx.iter().map(|z| z.re).collect(), gy.iter().map(|z| z.re).collect())
    }
}

fn transpose_square(data: &mut [Complex64], l: usize) {
    for j in 0..l {
        for i in (j + 1)..l {
            data.swap(j * l + i, i * l + j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn roundtrip_is_identity() {
        let grid = Grid::new(16, 0.5).unwrap();
        let fft = Fft2::new(grid);
        let orig: Vec<Complex64> =
            (0..grid.sites()).map(|n| Complex64::new((n as f64 * 0.37).sin(), (n as f64 * 0.11).cos())).collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let grid = Grid::new(16, 1.0).unwrap();
        let fft = Fft2::new(grid);
        let mut data: Vec<Complex64> = (0..grid.sites())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                Complex64::from_polar(1.0, 2.0 * PI * (3.0 * i as f64 + 2.0 * j as f64) / 16.0)
            })
            .collect();
        fft.forward(&mut data);
        let peak = grid.index(3, 2);
        assert!((data[peak].re - 256.0).abs() < 1e-9);
        let rest: f64 = data.iter().enumerate().filter(|(k, _)| *k != peak).map(|(_, z)| z.norm()).sum();
        assert!(rest < 1e-9);
    }

    #[test]
    fn gradient_of_plane_wave_in_physical_units() {
        let grid = Grid::new(32, 0.25).unwrap();
        let fft = Fft2::new(grid);
        let k = 2.0 * PI * 3.0 / grid.extent();
        let f: Vec<f64> = (0..grid.sites()).map(|idx| (k * grid.coords(idx).0 as f64 * grid.dx()).sin()).collect();
        let (gx, gy) = fft.gradient_real(&f);
        for idx in 0..grid.sites() {
            let x = grid.coords(idx).0 as f64 * grid.dx();
            assert!((gx[idx] - k * (k * x).cos()).abs() < 1e-11);
            assert!(gy[idx].abs() < 1e-11);
        }
    }
}
