//! Vortex detection from the phase winding around lattice plaquettes.
//!
//! Plaquette `(i, j)` has corners `(i, j)`, `(i+1, j)`, `(i+1, j+1)`,
//! `(i, j+1)` traversed counterclockwise, with periodic wrap. Its centre
//! lies at continuum coordinate `(i + 1, j + 1)`.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lattice::WaveField;

/// `Arg psi` in `(-pi, pi]`.
pub fn phase_field(psi: &WaveField) -> Vec<f64> {
    psi.values()
        .iter()
        .map(|z| {
            let a = z.im.atan2(z.re);
            if a == -PI {
                PI
            } else {
                a
            }
        })
        .collect()
}

/// Wraps an angle difference into `(-pi, pi]`.
#[inline]
pub fn wrap_phase(d: f64) -> f64 {
    let r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Sum of wrapped phase differences around plaquette `(i, j)`.
pub fn plaquette_circulation(grid: Grid, theta: &[f64], i: usize, j: usize) -> f64 {
    let l = grid.l();
    let (i1, j1) = ((i + 1) % l, (j + 1) % l);
    let loop_sites = [grid.index(i, j), grid.index(i1, j), grid.index(i1, j1), grid.index(i, j1)];
    (0..4).map(|k| wrap_phase(theta[loop_sites[(k + 1) % 4]] - theta[loop_sites[k]])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vortex {
    pub i: usize,
    pub j: usize,
    pub w: i32,
}

/// Same-sign detections that touch (including diagonally, across the
/// periodic boundary) and so resolve one physical core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexCluster {
    /// Indices into [`VortexSet::vortices`].
    pub members: Vec<usize>,
    pub winding: i32,
    /// Mean plaquette centre in continuum coordinates, wrapped into the
    /// domain.
    pub centre: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSet {
    pub t: u64,
    pub vortices: Vec<Vortex>,
    pub clusters: Vec<VortexCluster>,
}

impl VortexSet {
    /// Number of resolved cores (clusters).
    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    pub fn abs_circulation(&self) -> i64 {
        self.vortices.iter().map(|v| v.w.abs() as i64).sum()
    }

    pub fn net_circulation(&self) -> i64 {
        self.vortices.iter().map(|v| v.w as i64).sum()
    }
}

/// Plaquettes with nonzero winding, ordered by `(i, j)`, grouped into
/// clusters.
pub fn detect_vortices(psi: &WaveField, t: u64) -> VortexSet {
    let grid = psi.grid();
    let l = grid.l();
    let theta = phase_field(psi);
    let mut winding = vec![0i32; grid.sites()];
    for j in 0..l {
        for i in 0..l {
            winding[grid.index(i, j)] = (plaquette_circulation(grid, &theta, i, j) / (2.0 * PI)).round() as i32;
        }
    }
    let mut vortices = Vec::new();
    let mut slot = vec![usize::MAX; grid.sites()];
    for i in 0..l {
        for j in 0..l {
            let w = winding[grid.index(i, j)];
            if w != 0 {
                slot[grid.index(i, j)] = vortices.len();
                vortices.push(Vortex { i, j, w });
            }
        }
    }
    let clusters = cluster(grid, &vortices, &winding, &slot);
    VortexSet { t, vortices, clusters }
}

fn cluster(grid: Grid, vortices: &[Vortex], winding: &[i32], slot: &[usize]) -> Vec<VortexCluster> {
    let l = grid.l() as i64;
    let mut seen = vec![false; vortices.len()];
    let mut out = Vec::new();
    for seed in 0..vortices.len() {
        if seen[seed] {
            continue;
        }
        seen[seed] = true;
        let sign = vortices[seed].w.signum();
        let mut members = Vec::new();
        let (mut sx, mut sy) = (0.0, 0.0);
        let mut queue = VecDeque::from([(seed, vortices[seed].i as i64, vortices[seed].j as i64)]);
        while let Some((m, ui, uj)) = queue.pop_front() {
            members.push(m);
            sx += ui as f64;
            sy += uj as f64;
            for di in -1..=1i64 {
                for dj in -1..=1i64 {
                    let (ni, nj) = (ui + di, uj + dj);
                    let idx = grid.index(ni.rem_euclid(l) as usize, nj.rem_euclid(l) as usize);
                    if winding[idx].signum() != sign {
                        continue;
                    }
                    let n = slot[idx];
                    if !seen[n] {
                        seen[n] = true;
                        queue.push_back((n, ni, nj));
                    }
                }
            }
        }
        members.sort_unstable();
        let count = members.len() as f64;
        let lf = l as f64;
        let centre = ((sx / count + 1.0).rem_euclid(lf), (sy / count + 1.0).rem_euclid(lf));
        let winding = members.iter().map(|&m| vortices[m].w).sum();
        out.push(VortexCluster { members, winding, centre });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VortexCountRow {
    pub t: u64,
    pub count: usize,
    pub abs_circulation: i64,
}

/// `(t, count, sum |w|)` rows for snapshots taken at a uniform cadence.
pub fn vortex_count_series(sets: &[VortexSet]) -> Result<Vec<VortexCountRow>> {
    if sets.len() > 2 {
        let step = sets[1].t.checked_sub(sets[0].t);
        for pair in sets.windows(2) {
            if pair[1].t.checked_sub(pair[0].t) != step || step == Some(0) {
                return Err(Error::Undefined(format!(
                    "vortex snapshots are not evenly spaced (t = {} then {})",
                    pair[0].t, pair[1].t
                )));
            }
        }
    }
    Ok(sets.iter().map(|s| VortexCountRow { t: s.t, count: s.count(), abs_circulation: s.abs_circulation() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{gaussian_vortex_state, quadrupole_vortices, GaussianCloudParams, VortexSpec};
    use num_complex::Complex64;

    #[test]
    fn phase_of_uniform_fields() {
        let grid = Grid::new(8, 1.0).unwrap();
        let psi = WaveField::from_fn(grid, |_, _| Complex64::new(2.0, 0.0));
        assert!(phase_field(&psi).iter().all(|&t| t == 0.0));
        let psi = WaveField::from_fn(grid, |_, _| Complex64::from_polar(1.0, PI / 3.0));
        assert!(phase_field(&psi).iter().all(|&t| (t - PI / 3.0).abs() < 1e-15));
        let psi = WaveField::from_fn(grid, |_, _| Complex64::new(-1.0, -0.0));
        assert!(phase_field(&psi).iter().all(|&t| t == PI));
        assert!(detect_vortices(&psi, 0).vortices.is_empty());
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    fn four_vortices(grid: Grid) -> (WaveField, Vec<VortexSpec>) {
        let cloud = GaussianCloudParams { h: 1.0, a: 0.2, w_g: 0.001 };
        let v = quadrupole_vortices(grid.l(), 1, grid.l() as f64 / 4.0);
        (gaussian_vortex_state(grid, &cloud, &v).unwrap(), v)
    }

    #[test]
    fn finds_specified_cores() {
        let grid = Grid::new(32, 1.0).unwrap();
        let (psi, specs) = four_vortices(grid);
        let set = detect_vortices(&psi, 0);
        assert_eq!(set.vortices.len(), 4);
        assert_eq!(set.count(), 4);
        assert_eq!(set.net_circulation(), 0);
        for s in specs {
            let (i, j) = (s.x as usize - 1, s.y as usize - 1);
            assert!(set.vortices.contains(&Vortex { i, j, w: s.winding }));
        }
        let theta = phase_field(&psi);
        for v in &set.vortices {
            let c = plaquette_circulation(grid, &theta, v.i, v.j);
            assert!((c - 2.0 * PI * v.w as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn translation_shifts_detections() {
        let grid = Grid::new(32, 1.0).unwrap();
        let (psi, _) = four_vortices(grid);
        let shifted = WaveField::from_fn(grid, |i, j| psi.at((i + 32 - 5) % 32, (j + 32 - 3) % 32));
        let a = detect_vortices(&psi, 0);
        let b = detect_vortices(&shifted, 0);
        let mut moved: Vec<Vortex> = a.vortices.iter().map(|v| Vortex { i: (v.i + 5) % 32, j: (v.j + 3) % 32, w: v.w }).collect();
        moved.sort_by_key(|v| (v.i, v.j));
        assert_eq!(moved, b.vortices);
    }

    #[test]
    fn double_winding_core_forms_one_cluster() {
        let grid = Grid::new(32, 1.0).unwrap();
        let cloud = GaussianCloudParams { h: 1.0, a: 0.2, w_g: 0.0 };
        let v = [VortexSpec::new(10.3, 15.7, 2), VortexSpec::new(22.2, 16.4, -2)];
        let set = detect_vortices(&gaussian_vortex_state(grid, &cloud, &v).unwrap(), 0);
        assert_eq!(set.count(), 2);
        assert_eq!(set.abs_circulation(), 4);
        let mut w: Vec<i32> = set.clusters.iter().map(|c| c.winding).collect();
        w.sort();
        assert_eq!(w, vec![-2, 2]);
    }

    #[test]
    fn cluster_across_periodic_edge() {
        let grid = Grid::new(8, 1.0).unwrap();
        let vortices = vec![Vortex { i: 0, j: 3, w: 1 }, Vortex { i: 7, j: 3, w: 1 }];
        let mut winding = vec![0; 64];
        let mut slot = vec![usize::MAX; 64];
        for (n, v) in vortices.iter().enumerate() {
            winding[grid.index(v.i, v.j)] = v.w;
            slot[grid.index(v.i, v.j)] = n;
        }
        let c = cluster(grid, &vortices, &winding, &slot);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].winding, 2);
        assert!((c[0].centre.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn count_series_checks_cadence() {
        let empty = |t| VortexSet { t, vortices: vec![], clusters: vec![] };
        let rows = vortex_count_series(&[empty(0), empty(10), empty(20)]).unwrap();
        assert!(rows.iter().all(|r| r.count == 0 && r.abs_circulation == 0));
        assert!(vortex_count_series(&[empty(0), empty(10), empty(25)]).is_err());
    }
}
