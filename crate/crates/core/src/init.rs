//! Initial wave functions: vortices embedded in a Gaussian cloud, and
//! uniform-density states with a smooth random phase built from periodic
//! bicubic patches.
//!
//! Lattice site `i` sits at continuum coordinate `i + 0.5`, so the domain
//! centre is at `L / 2` and a vortex placed at an integer coordinate lies at
//! the centre of a plaquette.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lattice::WaveField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexSpec {
    pub x: f64,
    pub y: f64,
    pub winding: i32,
}

impl VortexSpec {
    pub fn new(x: f64, y: f64, winding: i32) -> Self {
        VortexSpec { x, y, winding }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianCloudParams {
    pub h: f64,
    pub a: f64,
    pub w_g: f64,
}

impl GaussianCloudParams {
    pub fn validate(&self) -> Result<()> {
        let ok =
            self.h.is_finite() && self.h > 0.0 && self.a.is_finite() && self.a > 0.0 && self.w_g.is_finite() && self.w_g >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InitialCondition(format!(
                "cloud needs h > 0, a > 0, w_g >= 0; got h={}, a={}, w_g={}",
                self.h, self.a, self.w_g
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomPhaseParams {
    /// Cells per dimension.
    pub m: usize,
    pub seed: u64,
    pub amplitude: f64,
}

/// Continuum coordinate of lattice index `i`.
#[inline]
pub fn site_coordinate(i: usize) -> f64 {
    i as f64 + 0.5
}

/// `psi = h exp(-a w_g r^2) prod_i tanh(sqrt(a) |r - r_i|) exp(i n_i Arg(r - r_i))`
/// with `r` measured from the domain centre.
pub fn gaussian_vortex_state(grid: Grid, cloud: &GaussianCloudParams, vortices: &[VortexSpec]) -> Result<WaveField> {
    cloud.validate()?;
    let net: i64 = vortices.iter().map(|v| v.winding as i64).sum();
    if net != 0 {
        return Err(Error::InitialCondition(format!("vortex windings sum to {net}, must be 0")));
    }
    let extent = grid.l() as f64;
    for v in vortices {
        let inside = (0.0..extent).contains(&v.x) && (0.0..extent).contains(&v.y);
        if !inside || v.winding == 0 {
            return Err(Error::InitialCondition(format!(
                "vortex at ({}, {}) with winding {} must lie in [0, {extent}) and have nonzero winding",
                v.x, v.y, v.winding
            )));
        }
    }
    let centre = extent / 2.0;
    let sqrt_a = cloud.a.sqrt();
    Ok(WaveField::from_fn(grid, |i, j| {
        let (x, y) = (site_coordinate(i), site_coordinate(j));
        let r2 = (x - centre).powi(2) + (y - centre).powi(2);
        let mut psi = Complex64::new(cloud.h * (-cloud.a * cloud.w_g * r2).exp(), 0.0);
        for v in vortices {
            let (dx, dy) = (x - v.x, y - v.y);
            let core = (sqrt_a * dx.hypot(dy)).tanh();
            psi *= Complex64::from_polar(core, v.winding as f64 * dy.atan2(dx));
        }
        psi
    }))
}

/// Four alternating unit vortices on a square of side `L / 4` centred in
/// the domain, positive winding on one diagonal.
pub fn quadrupole_vortices(l: usize, winding: i32, spacing: f64) -> Vec<VortexSpec> {
    let c = l as f64 / 2.0;
    let d = spacing / 2.0;
    vec![
        VortexSpec::new(c + d, c + d, winding),
        VortexSpec::new(c - d, c + d, -winding),
        VortexSpec::new(c - d, c - d, winding),
        VortexSpec::new(c + d, c - d, -winding),
    ]
}

const M_INV: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [-3.0, 3.0, -2.0, -1.0], [2.0, -2.0, 1.0, 1.0]];

/// Coefficients `a[i][j]` of `p(x, y) = sum a[i][j] x^i y^j` on the unit
/// square matching value, `d/dx`, `d/dy` and `d2/dxdy` at the corners.
///
/// `corner_data` is grouped by quantity, each group ordered by corner
/// `(0,0), (1,0), (0,1), (1,1)`:
/// `[f.., fx.., fy.., fxy..]`.
pub fn bicubic_cell_coefficients(corner_data: &[f64; 16]) -> [[f64; 4]; 4] {
    let d = |q: usize, cx: usize, cy: usize| corner_data[4 * q + cx + 2 * cy];
    let mut f = [[0.0; 4]; 4];
    for cx in 0..2 {
        for cy in 0..2 {
            f[cx][cy] = d(0, cx, cy);
            f[cx + 2][cy] = d(1, cx, cy);
            f[cx][cy + 2] = d(2, cx, cy);
            f[cx + 2][cy + 2] = d(3, cx, cy);
        }
    }
    let mut tmp = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            tmp[r][c] = (0..4).map(|k| M_INV[r][k] * f[k][c]).sum();
        }
    }
    let mut a = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            a[r][c] = (0..4).map(|k| tmp[r][k] * M_INV[c][k]).sum();
        }
    }
    a
}

/// Value and first partial derivatives of a bicubic patch at `(x, y)`.
pub fn bicubic_eval(a: &[[f64; 4]; 4], x: f64, y: f64) -> (f64, f64, f64) {
    let xp = [1.0, x, x * x, x * x * x];
    let yp = [1.0, y, y * y, y * y * y];
    let dxp = [0.0, 1.0, 2.0 * x, 3.0 * x * x];
    let dyp = [0.0, 1.0, 2.0 * y, 3.0 * y * y];
    let (mut p, mut px, mut py) = (0.0, 0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            p += a[i][j] * xp[i] * yp[j];
            px += a[i][j] * dxp[i] * yp[j];
            py += a[i][j] * xp[i] * dyp[j];
        }
    }
    (p, px, py)
}

/// Periodic `C^1` surface on an `m x m` torus of unit cells, defined by
/// `(f, df/du, df/dv, d2f/dudv)` at each node in cell units.
#[derive(Debug, Clone)]
pub struct PhaseSurface {
    m: usize,
    cells: Vec<[[f64; 4]; 4]>,
}

impl PhaseSurface {
    /// `nodes[c * m + r]` holds the data of the node at column `r`, row `c`.
    pub fn from_nodes(m: usize, nodes: &[[f64; 4]]) -> Result<Self> {
        if m == 0 || nodes.len() != m * m {
            return Err(Error::InitialCondition(format!(
                "need m >= 1 and m^2 node records, got m={m} with {} records",
                nodes.len()
            )));
        }
        let node = |r: usize, c: usize| nodes[(c % m) * m + (r % m)];
        let mut cells = Vec::with_capacity(m * m);
        for cy in 0..m {
            for cx in 0..m {
                let corners = [node(cx, cy), node(cx + 1, cy), node(cx, cy + 1), node(cx + 1, cy + 1)];
                let mut data = [0.0; 16];
                for q in 0..4 {
                    for (k, corner) in corners.iter().enumerate() {
                        data[4 * q + k] = corner[q];
                    }
                }
                cells.push(bicubic_cell_coefficients(&data));
            }
        }
        Ok(PhaseSurface { m, cells })
    }

    /// Node data drawn uniformly from `[-pi, pi)` with a ChaCha8 stream
    /// seeded by `seed`; nodes are visited row by row, four draws each.
    pub fn random(m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = std::f64::consts::PI;
        let nodes: Vec<[f64; 4]> = (0..m * m)
            .map(|_| {
                let mut n = [0.0; 4];
                for v in &mut n {
                    *v = pi * rng.gen_range(-1.0..1.0);
                }
                n
            })
            .collect();
        Self::from_nodes(m, &nodes)
    }

    pub fn cells(&self) -> usize {
        self.m
    }

    pub fn cell(&self, cx: usize, cy: usize) -> &[[f64; 4]; 4] {
        &self.cells[cy * self.m + cx]
    }

    /// Value and gradient (per cell unit) at torus coordinates `(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let m = self.m as f64;
        let (u, v) = (u.rem_euclid(m), v.rem_euclid(m));
        let (cx, cy) = ((u.floor() as usize).min(self.m - 1), (v.floor() as usize).min(self.m - 1));
        bicubic_eval(self.cell(cx, cy), u - cx as f64, v - cy as f64)
    }

    /// Surface sampled on the grid with nodes on sites `0, L/m, 2L/m, ...`.
    pub fn sample(&self, grid: Grid) -> Result<Vec<f64>> {
        let l = grid.l();
        if !l.is_multiple_of(self.m) {
            return Err(Error::InitialCondition(format!("m = {} does not divide L = {l}", self.m)));
        }
        let s = l / self.m;
        let local: Vec<f64> = (0..s).map(|i| i as f64 / s as f64).collect();
        Ok((0..grid.sites())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                bicubic_eval(self.cell(i / s, j / s), local[i % s], local[j % s]).0
            })
            .collect())
    }
}

/// `psi = amplitude * exp(i theta)` with `theta` a random periodic bicubic
/// surface of `m x m` cells.
pub fn random_phase_state(grid: Grid, params: &RandomPhaseParams) -> Result<WaveField> {
    if params.m == 0 || !grid.l().is_multiple_of(params.m) {
        return Err(Error::InitialCondition(format!("m = {} must be positive and divide L = {}", params.m, grid.l())));
    }
    if !(params.amplitude.is_finite() && params.amplitude >= 0.0) {
        return Err(Error::InitialCondition(format!("amplitude must be finite and non-negative, got {}", params.amplitude)));
    }
    let theta = PhaseSurface::random(params.m, params.seed)?.sample(grid)?;
    let psi = theta.iter().map(|&t| Complex64::from_polar(params.amplitude, t)).collect();
    WaveField::new(grid, psi)
}
