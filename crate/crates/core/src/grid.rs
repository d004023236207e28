//! Periodic square lattice geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `L x L` periodic lattice with spacing `dx`.
///
/// The time step is not a free parameter: diffusion ordering fixes it to
/// `dx * dx`. Fields on the grid are stored row-major with `x` fastest, so
/// site `(i, j)` lives at `j * L + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    l: usize,
    dx: f64,
}

impl Grid {
    pub fn new(l: usize, dx: f64) -> Result<Self> {
        if l < 4 {
            return Err(Error::InvalidGrid(format!("L must be at least 4, got {l}")));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be positive and finite, got {dx}")));
        }
        Ok(Grid { l, dx })
    }

    /// Sites per dimension.
    #[inline]
    pub fn l(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Time step per iteration, `dx^2`.
    #[inline]
    pub fn dt(&self) -> f64 {
        self.dx * self.dx
    }

    /// Total number of sites, `L^2`.
    #[inline]
    pub fn sites(&self) -> usize {
        self.l * self.l
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.l + i
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.l, idx / self.l)
    }

    /// Physical side length `L * dx`.
    pub fn extent(&self) -> f64 {
        self.l as f64 * self.dx
    }

    /// Area element for lattice quadrature.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dx
    }

    /// Smallest nonzero wavenumber `2 pi / (L dx)` in physical units.
    pub fn k_unit(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.extent()
    }

    /// Signed integer mode number for FFT index `n` (FFT ordering).
    #[inline]
    pub fn mode_number(&self, n: usize) -> i64 {
        let l = self.l as i64;
        let n = n as i64;
        if n < (l + 1) / 2 {
            n
        } else {
            n - l
        }
    }

    /// True when FFT index `n` is the unpaired Nyquist mode of an even grid.
    #[inline]
    pub fn is_nyquist(&self, n: usize) -> bool {
        self.l.is_multiple_of(2) && n == self.l / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_bad_grids() {
        assert!(Grid::new(3, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, f64::NAN).is_err());
        assert!(Grid::new(8, -0.5).is_err());
    }

    #[test]
    fn dt_is_dx_squared() {
        let g = Grid::new(16, 0.03).unwrap();
        assert_eq!(g.dt(), 0.03 * 0.03);
    }

    #[test]
    fn mode_numbers_follow_fft_order() {
        let g = Grid::new(8, 1.0).unwrap();
        let m: Vec<i64> = (0..8).map(|n| g.mode_number(n)).collect();
        assert_eq!(m, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(4));
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(8, 1.0).unwrap();
        assert_eq!(g.coords(g.index(3, 5)), (3, 5));
    }
}
