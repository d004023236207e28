//! Two-component spinor field and the unitary lattice operators that advance
//! it: collision, streaming, their interleaved products, and the local
//! potential rotation.
//!
//! The wave function is carried as `psi = q0 + q1`. Initialized with `q0`
//! real and `q1` imaginary, every full [`SpinorField::step`] keeps that
//! structure, so the cross term `q0* q1 + q0 q1*` vanishes and the mean
//! density equals the spinor norm.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// `(1 - i) / 2`, diagonal entry of the collision matrix.
const DIAG: Complex64 = Complex64::new(0.5, -0.5);
/// `(1 + i) / 2`, off-diagonal entry of the collision matrix.
const OFF: Complex64 = Complex64::new(0.5, 0.5);

/// Sites handed to one worker at a time; keeps task overhead small on
/// modest grids.
const SITES_PER_TASK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Which spinor component an operator streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Q0,
    Q1,
}

/// Direction of a one-site cyclic shift. `Forward` moves content towards
/// increasing index: the value at site `i` ends up at `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Forward,
    Backward,
}

/// Nonlinear coupling `g` of the `g |psi|^2` potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    g: f64,
}

impl CouplingParams {
    /// Repulsive (or free) coupling; negative `g` is rejected.
    pub fn new(g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::Config(format!("coupling g must be finite, got {g}")));
        }
        if g < 0.0 {
            return Err(Error::Config(format!("coupling g = {g} is attractive; pass an explicit override to allow it")));
        }
        Ok(CouplingParams { g })
    }

    /// Accepts any finite `g`, including attractive couplings.
    pub fn with_override(g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::Config(format!("coupling g must be finite, got {g}")));
        }
        Ok(CouplingParams { g })
    }

    pub fn g(&self) -> f64 {
        self.g
    }
}

/// The GP wave function on the lattice, `psi = q0 + q1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid,
    psi: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: Grid, psi: Vec<Complex64>) -> Result<Self> {
        if psi.len() != grid.sites() {
            return Err(Error::InvalidGrid(format!("field has {} sites, grid needs {}", psi.len(), grid.sites())));
        }
        Ok(WaveField { grid, psi })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let psi = (0..grid.sites())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                f(i, j)
            })
            .collect();
        WaveField { grid, psi }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.psi
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.psi
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.psi[self.grid.index(i, j)]
    }

    /// `sum |psi|^2` over sites (no area element).
    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Spinor state advanced by the lattice algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    q0: Vec<Complex64>,
    q1: Vec<Complex64>,
    t: u64,
}

impl SpinorField {
    pub fn new(grid: Grid, q0: Vec<Complex64>, q1: Vec<Complex64>, t: u64) -> Result<Self> {
        if q0.len() != grid.sites() || q1.len() != grid.sites() {
            return Err(Error::InvalidGrid(format!(
                "spinor components have {} and {} sites, grid needs {}",
                q0.len(),
                q1.len(),
                grid.sites()
            )));
        }
        Ok(SpinorField { grid, q0, q1, t })
    }

    /// Splits `psi` as `q0 = Re psi`, `q1 = i Im psi`.
    pub fn from_wave(wave: &WaveField) -> Self {
        let q0 = wave.psi.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
        let q1 = wave.psi.iter().map(|z| Complex64::new(0.0, z.im)).collect();
        SpinorField { grid: wave.grid, q0, q1, t: 0 }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Completed iterations.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn set_t(&mut self, t: u64) {
        self.t = t;
    }

    pub fn q0(&self) -> &[Complex64] {
        &self.q0
    }

    pub fn q1(&self) -> &[Complex64] {
        &self.q1
    }

    pub fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.q0, &mut self.q1)
    }

    pub fn wave(&self) -> WaveField {
        let psi = self.q0.iter().zip(&self.q1).map(|(a, b)| a + b).collect();
        WaveField { grid: self.grid, psi }
    }

    /// `sum (|q0|^2 + |q1|^2)`.
    pub fn norm_sqr(&self) -> f64 {
        self.q0.iter().zip(&self.q1).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).sum()
    }

    /// `sum |q0 + q1|^2`.
    pub fn density_sum(&self) -> f64 {
        self.q0.iter().zip(&self.q1).map(|(a, b)| (a + b).norm_sqr()).sum()
    }

    /// Largest deviation from the `q0` real, `q1` imaginary structure:
    /// `max(|Im q0|, |Re q1|)` over sites.
    pub fn structure_error(&self) -> f64 {
        self.q0.iter().zip(&self.q1).map(|(a, b)| a.im.abs().max(b.re.abs())).fold(0.0, f64::max)
    }

    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.q0
            .iter()
            .zip(&self.q1)
            .position(|(a, b)| !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()))
            .map(|idx| self.grid.coords(idx))
    }

    fn rows_per_task(&self) -> usize {
        (SITES_PER_TASK / self.grid.l()).max(1)
    }

    /// Applies the sqrt(SWAP) collision matrix at every site.
    pub fn collide(&mut self) {
        let chunk = self.rows_per_task() * self.grid.l();
        self.q0.par_chunks_mut(chunk).zip(self.q1.par_chunks_mut(chunk)).for_each(|(a, b)| collide_slice(a, b));
    }

    /// Cyclic one-site shift of a single component.
    pub fn stream(&mut self, axis: Axis, shift: Shift, component: Component) {
        let l = self.grid.l();
        let chunk = self.rows_per_task() * l;
        let field = match component {
            Component::Q0 => &mut self.q0,
            Component::Q1 => &mut self.q1,
        };
        match axis {
            Axis::X => field.par_chunks_mut(chunk).for_each(|rows| {
                for row in rows.chunks_mut(l) {
                    match shift {
                        Shift::Forward => row.rotate_right(1),
                        Shift::Backward => row.rotate_left(1),
                    }
                }
            }),
            Axis::Y => match shift {
                Shift::Forward => field.rotate_right(l),
                Shift::Backward => field.rotate_left(l),
            },
        }
    }

    /// One interleaved collide-stream sequence along `axis`: collide, stream
    /// the component forward, collide, stream it back.
    pub fn interleave(&mut self, axis: Axis, component: Component) {
        self.interleave_n(axis, component, 1);
    }

    fn interleave_n(&mut self, axis: Axis, component: Component, repeats: usize) {
        let l = self.grid.l();
        let rows = self.rows_per_task();
        let (streamed, other) = match component {
            Component::Q0 => (&mut self.q0, &mut self.q1),
            Component::Q1 => (&mut self.q1, &mut self.q0),
        };
        match axis {
            Axis::X => streamed.par_chunks_mut(rows * l).zip(other.par_chunks_mut(rows * l)).for_each(|(s, o)| {
                let mut u = vec![Complex64::default(); l];
                let mut w = vec![Complex64::default(); l];
                for (srow, orow) in s.chunks_mut(l).zip(o.chunks_mut(l)) {
                    for _ in 0..repeats {
                        interleave_line(srow, orow, &mut u, &mut w);
                    }
                }
            }),
            Axis::Y => {
                for _ in 0..repeats {
                    interleave_columns(streamed, other, l, rows);
                }
            }
        }
    }

    /// `U_alpha`: two interleaves along x, then two along y, streaming
    /// `component`.
    pub fn evolve_u(&mut self, component: Component) {
        self.interleave_n(Axis::X, component, 2);
        self.interleave_n(Axis::Y, component, 2);
    }

    /// Applies `exp(-i sigma_x V dt scale)` at every site. Leaves `q0 + q1`
    /// multiplied by `exp(-i scale V dt)` and preserves the real/imaginary
    /// structure.
    pub fn potential_rotate(&mut self, potential: &[f64], scale: f64) -> Result<()> {
        if potential.len() != self.grid.sites() {
            return Err(Error::InvalidGrid(format!("potential has {} sites, grid needs {}", potential.len(), self.grid.sites())));
        }
        if let Some(idx) = potential.iter().position(|v| !v.is_finite()) {
            let (i, j) = self.grid.coords(idx);
            return Err(Error::NonFinite { i, j, what: "potential" });
        }
        let angle = scale * self.grid.dt();
        let chunk = self.rows_per_task() * self.grid.l();
        self.q0.par_chunks_mut(chunk).zip(self.q1.par_chunks_mut(chunk)).zip(potential.par_chunks(chunk)).for_each(
            |((a, b), v)| {
                for ((a, b), &v) in a.iter_mut().zip(b.iter_mut()).zip(v) {
                    rotate_site(a, b, angle * v);
                }
            },
        );
        Ok(())
    }

    /// Potential rotation with `V = g |q0 + q1|^2` evaluated site by site.
    /// Same arithmetic as building the potential field and calling
    /// [`SpinorField::potential_rotate`].
    fn nonlinear_rotate(&mut self, g: f64, scale: f64) -> Result<()> {
        if let Some((i, j)) = self.first_non_finite() {
            return Err(Error::NonFinite { i, j, what: "spinor" });
        }
        let angle = scale * self.grid.dt();
        let chunk = self.rows_per_task() * self.grid.l();
        self.q0.par_chunks_mut(chunk).zip(self.q1.par_chunks_mut(chunk)).for_each(|(a, b)| {
            for (a, b) in a.iter_mut().zip(b.iter_mut()) {
                let v = g * (*a + *b).norm_sqr();
                rotate_site(a, b, angle * v);
            }
        });
        Ok(())
    }

    /// `g |q0 + q1|^2` at every site.
    pub fn nonlinear_potential(&self, coupling: &CouplingParams) -> Vec<f64> {
        let g = coupling.g();
        self.q0.iter().zip(&self.q1).map(|(a, b)| g * (a + b).norm_sqr()).collect()
    }

    /// One full time step of size `dt = dx^2`:
    /// `q <- U_1 Omega[V(t + dt/2) / 2] U_0 Omega[V(t) / 2] q`, where the
    /// midpoint potential is recomputed from the field after `U_0`.
    pub fn step(&mut self, coupling: &CouplingParams) -> Result<()> {
        let g = coupling.g();
        self.nonlinear_rotate(g, 0.5)?;
        self.evolve_u(Component::Q0);
        self.nonlinear_rotate(g, 0.5)?;
        self.evolve_u(Component::Q1);
        self.t += 1;
        Ok(())
    }

    /// Advances `n` steps, stopping at the first failure.
    pub fn advance(&mut self, coupling: &CouplingParams, n: u64) -> Result<()> {
        for _ in 0..n {
            self.step(coupling)?;
        }
        Ok(())
    }
}

#[inline]
fn collide_pair(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    (DIAG * a + OFF * b, OFF * a + DIAG * b)
}

fn collide_slice(a: &mut [Complex64], b: &mut [Complex64]) {
    for (a, b) in a.iter_mut().zip(b.iter_mut()) {
        let (na, nb) = collide_pair(*a, *b);
        *a = na;
        *b = nb;
    }
}

#[inline]
fn rotate_site(a: &mut Complex64, b: &mut Complex64, theta: f64) {
    let (s, c) = theta.sin_cos();
    let mis = Complex64::new(0.0, -s);
    let na = c * *a + mis * *b;
    let nb = mis * *a + c * *b;
    *a = na;
    *b = nb;
}

/// Collide, shift `streamed` forward, collide, shift it back, along one
/// periodic line. With `(u, w)` the once-collided (streamed, other) values:
/// `streamed[i] = D u[i] + F w[i+1]`, `other[i] = F u[i-1] + D w[i]`.
fn interleave_line(streamed: &mut [Complex64], other: &mut [Complex64], u: &mut [Complex64], w: &mut [Complex64]) {
    let n = streamed.len();
    for i in 0..n {
        let (cu, cw) = collide_pair(streamed[i], other[i]);
        u[i] = cu;
        w[i] = cw;
    }
    for i in 0..n {
        let next = if i + 1 == n { 0 } else { i + 1 };
        let prev = if i == 0 { n - 1 } else { i - 1 };
        streamed[i] = DIAG * u[i] + OFF * w[next];
        other[i] = OFF * u[prev] + DIAG * w[i];
    }
}

/// Same update as [`interleave_line`] applied along y, sweeping whole rows.
/// Rows are split into blocks whose boundary rows are captured up front, so
/// blocks update independently.
fn interleave_columns(streamed: &mut [Complex64], other: &mut [Complex64], l: usize, rows_per_block: usize) {
    let collided_row = |s: &[Complex64], o: &[Complex64], j: usize, u: &mut [Complex64], w: &mut [Complex64]| {
        let base = j * l;
        for i in 0..l {
            let (cu, cw) = collide_pair(s[base + i], o[base + i]);
            u[i] = cu;
            w[i] = cw;
        }
    };

    let blocks: Vec<(usize, usize)> = (0..l).step_by(rows_per_block).map(|r0| (r0, (r0 + rows_per_block).min(l))).collect();
    // u of the row below each block and w of the row above it, from the
    // unmodified field.
    let halos: Vec<(Vec<Complex64>, Vec<Complex64>)> = blocks
        .iter()
        .map(|&(r0, r1)| {
            let mut u = vec![Complex64::default(); l];
            let mut w = vec![Complex64::default(); l];
            let mut scratch = vec![Complex64::default(); l];
            collided_row(streamed, other, (r0 + l - 1) % l, &mut u, &mut scratch);
            collided_row(streamed, other, r1 % l, &mut scratch, &mut w);
            (u, w)
        })
        .collect();

    let chunk = rows_per_block * l;
    streamed.par_chunks_mut(chunk).zip(other.par_chunks_mut(chunk)).zip(halos.par_iter()).for_each(
        |((s, o), (halo_u, halo_w))| {
            let rows = s.len() / l;
            let mut prev_u = halo_u.clone();
            let mut cur_u = vec![Complex64::default(); l];
            let mut cur_w = vec![Complex64::default(); l];
            let mut next_u = vec![Complex64::default(); l];
            let mut next_w = vec![Complex64::default(); l];
            collided_row(s, o, 0, &mut cur_u, &mut cur_w);
            for r in 0..rows {
                if r + 1 < rows {
                    collided_row(s, o, r + 1, &mut next_u, &mut next_w);
                } else {
                    next_w.copy_from_slice(halo_w);
                }
                let base = r * l;
                for i in 0..l {
                    s[base + i] = DIAG * cur_u[i] + OFF * next_w[i];
                    o[base + i] = OFF * prev_u[i] + DIAG * cur_w[i];
                }
                std::mem::swap(&mut prev_u, &mut cur_u);
                std::mem::swap(&mut cur_u, &mut next_u);
                std::mem::swap(&mut cur_w, &mut next_w);
            }
        },
    );
}
