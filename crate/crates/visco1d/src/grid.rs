//! Uniform periodic 1-D grid, grid functions and central difference stencils.
//!
//! The solvers and the energy diagnostics share the same stencils, so the
//! discrete Sobolev energies are Lyapunov candidates for the discrete
//! dynamics rather than for some other discretization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)` with `cells` points `x_i = -L + i*dx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Domain half-length.
    pub half_length: f64,
    /// Number of grid points (at least 8; powers of two recommended).
    pub cells: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_length: std::f64::consts::PI,
            cells: 512,
        }
    }
}

impl GridSpec {
    pub fn new(half_length: f64, cells: usize) -> Result<Self> {
        let g = GridSpec { half_length, cells };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0) {
            return Err(Error::Validation(format!(
                "grid.half_length must be positive, got {}",
                self.half_length
            )));
        }
        if self.cells < 8 {
            return Err(Error::Validation(format!(
                "grid.cells must be at least 8, got {}",
                self.cells
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.cells as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.cells)
            .map(|i| -self.half_length + i as f64 * dx)
            .collect()
    }

    /// Refined grid with twice the resolution on the same domain.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            half_length: self.half_length,
            cells: self.cells * 2,
        }
    }
}

/// Second-order central first derivative on a periodic sequence.
pub fn d1(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let h = 0.5 / dx;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let im = if i == 0 { n - 1 } else { i - 1 };
        out[i] = (f[ip] - f[im]) * h;
    }
    out
}

/// Standard three-point second derivative on a periodic sequence.
pub fn d2(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let h = 1.0 / (dx * dx);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let im = if i == 0 { n - 1 } else { i - 1 };
        out[i] = (f[ip] - 2.0 * f[i] + f[im]) * h;
    }
    out
}

/// Rectangle-rule integral over the periodic domain (exact for constants).
pub fn integrate(f: &[f64], dx: f64) -> f64 {
    f.iter().sum::<f64>() * dx
}

/// Discrete L2 norm `sqrt(sum f_i^2 dx)`.
pub fn l2_norm(f: &[f64], dx: f64) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() * dx).sqrt()
}

/// Grid functions of the relaxed system: specific volume, velocity, stress,
/// and optionally the Neo-Hookean conformation variable.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    /// Conformation scalar of the Neo-Hookean variant, when active.
    pub a_conf: Option<Vec<f64>>,
    /// Current time.
    pub t: f64,
}

impl StateField {
    pub fn uniform(grid: &GridSpec, v: f64, u: f64, s: f64) -> StateField {
        let n = grid.cells;
        StateField {
            v: vec![v; n],
            u: vec![u; n],
            s: vec![s; n],
            a_conf: None,
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Max over cells of |S - G(A v - 1/v)|, when the conformation field is
    /// carried. Tracked, never auto-enforced.
    pub fn consistency_defect(&self, g: f64) -> Option<f64> {
        let a = self.a_conf.as_ref()?;
        let mut worst: f64 = 0.0;
        for i in 0..self.v.len() {
            let v = self.v[i];
            let d = (self.s[i] - g * (a[i] * v - 1.0 / v)).abs();
            worst = worst.max(d);
        }
        Some(worst)
    }

    /// First cell holding a non-finite value in any component, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        for i in 0..self.v.len() {
            if !self.v[i].is_finite() || !self.u[i].is_finite() || !self.s[i].is_finite() {
                return Some(i);
            }
            if let Some(a) = &self.a_conf {
                if !a[i].is_finite() {
                    return Some(i);
                }
            }
        }
        None
    }
}

/// Grid functions of the limit Navier-Stokes system.
#[derive(Clone, Debug, PartialEq)]
pub struct NsField {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl NsField {
    pub fn uniform(grid: &GridSpec, v: f64, u: f64) -> NsField {
        NsField {
            v: vec![v; grid.cells],
            u: vec![u; grid.cells],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }
}
