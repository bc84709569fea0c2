//! Full Q-tensor fields `Q = v E0 + u E1(phi)` on a polar grid.

use std::f64::consts::{PI, SQRT_2};
use std::io::{self, Write};

use nalgebra::{Matrix3, Vector3};

use crate::grid::RadialGrid;
use crate::params::{bulk_density, MaterialParams};
use crate::solver::ProfilePair;

pub const DEFAULT_ANGLES: usize = 256;

/// `E0 = sqrt(3/2) (e3 x e3 - I/3)`.
pub fn basis_e0() -> Matrix3<f64> {
    let s = (1.5f64).sqrt();
    Matrix3::from_diagonal(&Vector3::new(-s / 3.0, -s / 3.0, 2.0 * s / 3.0))
}

/// `E1(phi) = sqrt2 (n x n - I2/2)` with `n = (cos(k phi/2), sin(k phi/2), 0)`.
pub fn basis_e1(k: i32, phi: f64) -> Matrix3<f64> {
    let (s, c) = (f64::from(k) * phi).sin_cos();
    let a = SQRT_2 / 2.0;
    Matrix3::new(a * c, a * s, 0.0, a * s, -a * c, 0.0, 0.0, 0.0, 0.0)
}

/// `Q(r, phi)` for the profile values `(u, v)` at radius `r`.
pub fn tensor_at(u: f64, v: f64, k: i32, phi: f64) -> Matrix3<f64> {
    basis_e1(k, phi) * u + basis_e0() * v
}

/// Rotation about `e3` by `k psi / 2`.
pub fn frame_rotation(k: i32, psi: f64) -> Matrix3<f64> {
    let (s, c) = (0.5 * f64::from(k) * psi).sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct QField {
    pub grid: RadialGrid,
    pub angles: Vec<f64>,
    pub k: i32,
    /// `(w0, ..., w4)` in the rotating basis `E0, E1(phi), E2(phi), E3, E4`, radius-major.
    pub coords: Vec<[f64; 5]>,
    pub matrices: Vec<Matrix3<f64>>,
}

impl QField {
    pub fn index(&self, radius: usize, angle: usize) -> usize {
        radius * self.angles.len() + angle
    }

    /// Columns `x, y, r, phi, u, v, q11, q12, q13, q22, q23`, radius-major, shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,r,phi,u,v,q11,q12,q13,q22,q23")?;
        for (i, &r) in self.grid.nodes().iter().enumerate() {
            for (j, &phi) in self.angles.iter().enumerate() {
                let idx = self.index(i, j);
                let [v, u, ..] = self.coords[idx];
                let q = &self.matrices[idx];
                let (x, y) = (r * phi.cos(), r * phi.sin());
                writeln!(
                    out,
                    "{x},{y},{r},{phi},{u},{v},{},{},{},{},{}",
                    q[(0, 0)],
                    q[(0, 1)],
                    q[(0, 2)],
                    q[(1, 1)],
                    q[(1, 2)]
                )?;
            }
        }
        Ok(())
    }
}

/// Samples `Q` at every profile node and `angles` equally spaced directions.
pub fn reconstruct(profile: &ProfilePair, angles: usize) -> QField {
    let k = profile.params.k();
    let phis: Vec<f64> = (0..angles).map(|j| 2.0 * PI * j as f64 / angles as f64).collect();
    let mut coords = Vec::with_capacity(profile.grid.len() * angles);
    let mut matrices = Vec::with_capacity(profile.grid.len() * angles);
    for (&u, &v) in profile.u.iter().zip(&profile.v) {
        for &phi in &phis {
            coords.push([v, u, 0.0, 0.0, 0.0]);
            matrices.push(tensor_at(u, v, k, phi));
        }
    }
    QField { grid: profile.grid.clone(), angles: phis, k, coords, matrices }
}

/// Per-node `|grad Q|^2/2 + f_bulk` from the radial formula. The gradient part of each
/// edge is split equally between its end nodes, so the disk integral with the grid
/// weights equals `2 pi` times the discrete reduced energy.
pub fn energy_density_2d(field: &QField, p: &MaterialParams) -> Vec<f64> {
    let g = &field.grid;
    let na = field.angles.len();
    let (r, wt) = (g.nodes(), g.weights());
    let uv = |i: usize| {
        let [v, u, ..] = field.coords[field.index(i, 0)];
        (u, v)
    };
    let mut radial = vec![0.0; g.len()];
    for e in 0..g.intervals() {
        let ((u0, v0), (u1, v1)) = (uv(e), uv(e + 1));
        let half = 0.25 * g.edge_conductance(e) * ((u1 - u0).powi(2) + (v1 - v0).powi(2));
        radial[e] += half;
        radial[e + 1] += half;
    }
    let k2 = p.k2();
    let mut out = Vec::with_capacity(g.len() * na);
    for i in 0..g.len() {
        let (u, v) = uv(i);
        let winding = if i > 0 { 0.5 * k2 * u * u / (r[i] * r[i]) } else { 0.0 };
        let density = radial[i] / wt[i] + winding + bulk_density(p, u, v);
        out.extend(std::iter::repeat_n(density, na));
    }
    out
}

/// `int_disk density dA` with grid weights in `r` and the uniform rule in `phi`.
pub fn disk_integral(field: &QField, density: &[f64]) -> f64 {
    let na = field.angles.len();
    let dphi = 2.0 * PI / na as f64;
    field
        .grid
        .weights()
        .iter()
        .enumerate()
        .map(|(i, w)| w * dphi * density[i * na..(i + 1) * na].iter().sum::<f64>())
        .sum()
}

/// `max |Q(r, phi + psi) - R_k(psi) Q(r, phi) R_k(psi)^T|` entrywise.
pub fn frame_covariance_defect(u: f64, v: f64, k: i32, phi: f64, psi: f64) -> f64 {
    let rot = frame_rotation(k, psi);
    let lhs = tensor_at(u, v, k, phi + psi);
    let rhs = rot * tensor_at(u, v, k, phi) * rot.transpose();
    (lhs - rhs).abs().max()
}
