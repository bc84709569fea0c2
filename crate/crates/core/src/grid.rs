//! Radial meshes on `[0, R]`.
//!
//! Every node carries the exact measure `int r dr` of its dual cell
//! `[r_{i-1/2}, r_{i+1/2}]` (clipped to `[0, R]`), so the weights integrate
//! constants exactly. The radial Laplacian is written in flux form on the
//! same dual cells, which makes it the weighted adjoint of the edge
//! difference operator: discrete integration by parts holds exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_INTERVALS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least {MIN_INTERVALS} intervals, got {0}")]
    TooFewIntervals(usize),
    #[error("domain radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("geometric ratio must be positive and finite, got {0}")]
    BadRatio(f64),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("nodes must start at 0 and increase strictly")]
    BadNodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    /// Consecutive spacings grow by `ratio`.
    Geometric { ratio: f64 },
    /// Uniform core on `[0, min(1, R/10)]` carrying a quarter of the intervals,
    /// geometric spacing outside with the first outer step continuing the core step.
    Composite,
    /// Nodes supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    grading: Grading,
}

impl RadialGrid {
    pub fn build(radius: f64, n: usize, grading: Grading) -> Result<Self, GridError> {
        build_grid(radius, n, grading)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, GridError> {
        if nodes.len() < MIN_INTERVALS + 1 {
            return Err(GridError::TooFewIntervals(nodes.len().saturating_sub(1)));
        }
        if nodes[0] != 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|r| r.is_finite()) {
            return Err(GridError::BadNodes);
        }
        Ok(Self::with_nodes(nodes, Grading::Custom))
    }

    fn with_nodes(nodes: Vec<f64>, grading: Grading) -> Self {
        let weights = cell_weights(&nodes);
        Self { nodes, weights, grading }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn spacing(&self, edge: usize) -> f64 {
        self.nodes[edge + 1] - self.nodes[edge]
    }

    pub fn midpoint(&self, edge: usize) -> f64 {
        0.5 * (self.nodes[edge] + self.nodes[edge + 1])
    }

    /// `r_{e+1/2} / h_e`: coefficient of the squared edge difference in `int f'^2 r dr`.
    pub fn edge_conductance(&self, edge: usize) -> f64 {
        self.midpoint(edge) / self.spacing(edge)
    }

    pub fn check_len(&self, len: usize) -> Result<(), GridError> {
        if len != self.len() {
            return Err(GridError::LengthMismatch { expected: self.len(), got: len });
        }
        Ok(())
    }

    /// Index of the first node with `r >= radius`.
    pub fn index_at_or_above(&self, radius: f64) -> usize {
        self.nodes.partition_point(|&r| r < radius)
    }

    /// Piecewise-linear interpolation of grid samples at `r`; clamps outside `[0, R]`.
    pub fn interpolate(&self, f: &[f64], r: f64) -> f64 {
        let i = self.nodes.partition_point(|&x| x <= r);
        if i == 0 {
            return f[0];
        }
        if i >= self.len() {
            return f[self.len() - 1];
        }
        let (r0, r1) = (self.nodes[i - 1], self.nodes[i]);
        let t = (r - r0) / (r1 - r0);
        f[i - 1] + t * (f[i] - f[i - 1])
    }
}

fn cell_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len() - 1;
    let mut w = Vec::with_capacity(n + 1);
    let mut lower = 0.0f64;
    for i in 0..=n {
        let upper = if i == n { nodes[n] } else { 0.5 * (nodes[i] + nodes[i + 1]) };
        w.push(0.5 * (upper - lower) * (upper + lower));
        lower = upper;
    }
    w
}

pub fn build_grid(radius: f64, n: usize, grading: Grading) -> Result<RadialGrid, GridError> {
    if n < MIN_INTERVALS {
        return Err(GridError::TooFewIntervals(n));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(GridError::BadRadius(radius));
    }
    let nodes = match grading {
        Grading::Uniform | Grading::Custom => (0..=n).map(|i| radius * i as f64 / n as f64).collect(),
        Grading::Geometric { ratio } => {
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(GridError::BadRatio(ratio));
            }
            let spacings: Vec<f64> = (0..n).map(|j| ratio.powi(j as i32)).collect();
            let total: f64 = spacings.iter().sum();
            accumulate(&spacings, radius / total, 0.0, radius)
        }
        Grading::Composite => composite_nodes(radius, n),
    };
    let grading = if matches!(grading, Grading::Custom) { Grading::Uniform } else { grading };
    Ok(RadialGrid::with_nodes(nodes, grading))
}

fn accumulate(spacings: &[f64], scale: f64, start: f64, end: f64) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(spacings.len() + 1);
    let mut r = start;
    nodes.push(r);
    for h in spacings {
        r += h * scale;
        nodes.push(r);
    }
    *nodes.last_mut().unwrap() = end;
    nodes
}

fn composite_nodes(radius: f64, n: usize) -> Vec<f64> {
    let core_radius = (radius / 10.0).min(1.0);
    let core_intervals = n.div_ceil(4);
    let outer_intervals = n - core_intervals;
    let h = core_radius / core_intervals as f64;
    let mut nodes: Vec<f64> = (0..=core_intervals).map(|i| h * i as f64).collect();
    nodes[core_intervals] = core_radius;

    // sum_{j=1}^{m} h q^j = R - r_core; the core never covers more than a third
    // of the uniform continuation, so the root has q > 1.
    let outer_len = radius - core_radius;
    let reach = |q: f64| -> f64 {
        let mut s = 0.0;
        let mut p = 1.0;
        for _ in 0..outer_intervals {
            p *= q;
            s += p;
            if !s.is_finite() {
                return f64::INFINITY;
            }
        }
        h * s
    };
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if reach(mid) < outer_len {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut p = 1.0;
    let spacings: Vec<f64> = (0..outer_intervals)
        .map(|_| {
            p *= q;
            h * p
        })
        .collect();
    let outer = accumulate(&spacings, 1.0, core_radius, radius);
    nodes.extend_from_slice(&outer[1..]);
    nodes
}

/// `int_0^R f(r) r dr` with the dual-cell weights.
pub fn quadrature(g: &RadialGrid, f: &[f64]) -> Result<f64, GridError> {
    g.check_len(f.len())?;
    Ok(g.weights.iter().zip(f).map(|(w, v)| w * v).sum())
}

/// `f'' + f'/r - m^2 f / r^2` in flux form.
///
/// Dirichlet rows carry the identity: index `N` always, index `0` when `m >= 1`.
/// For `m = 0` the origin row is the even-reflection limit `4 (f_1 - f_0) / h_0^2`.
pub fn apply_radial_laplacian(g: &RadialGrid, f: &[f64], m: u32) -> Result<Vec<f64>, GridError> {
    g.check_len(f.len())?;
    let n = g.intervals();
    let m2 = (m as f64) * (m as f64);
    let mut out = vec![0.0; n + 1];
    let flux: Vec<f64> = (0..n).map(|e| g.edge_conductance(e) * (f[e + 1] - f[e])).collect();
    out[0] = if m == 0 { flux[0] / g.weights[0] } else { f[0] };
    for i in 1..n {
        out[i] = (flux[i] - flux[i - 1]) / g.weights[i] - m2 * f[i] / (g.nodes[i] * g.nodes[i]);
    }
    out[n] = f[n];
    Ok(out)
}
