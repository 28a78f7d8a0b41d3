//! Physical model: equation of state, constitutive law (standard and
//! Neo-Hookean), the symmetrizer triple of the first-order system, the
//! characteristic speeds and the admissibility checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::StateField;

/// Physical and model constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysParams {
    /// Adiabatic index, > 1.
    pub gamma: f64,
    /// Pressure constant of the gamma-law, > 0.
    pub b: f64,
    /// Viscosity, > 0.
    pub mu: f64,
    /// Kinematic slip constant, in [-1, 1].
    pub a: f64,
    /// Relaxation time, > 0.
    pub tau: f64,
    /// Elastic modulus of the Neo-Hookean variant, > 0 when present.
    pub g: Option<f64>,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            gamma: 1.4,
            b: 1.0,
            mu: 1.0,
            a: 0.5,
            tau: 0.1,
            g: None,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::Validation(format!(
                "phys.gamma must be > 1, got {}",
                self.gamma
            )));
        }
        if !(self.b > 0.0) {
            return Err(Error::Validation(format!(
                "phys.b must be > 0, got {}",
                self.b
            )));
        }
        if !(self.mu > 0.0) {
            return Err(Error::Validation(format!(
                "phys.mu must be > 0, got {}",
                self.mu
            )));
        }
        if !(-1.0..=1.0).contains(&self.a) {
            return Err(Error::Validation(format!(
                "phys.a must lie in [-1,1], got {}",
                self.a
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Validation(format!(
                "phys.tau must be > 0, got {}",
                self.tau
            )));
        }
        if let Some(g) = self.g {
            if !(g > 0.0) {
                return Err(Error::Validation(format!("phys.g must be > 0, got {g}")));
            }
        }
        Ok(())
    }

    /// Whether `tau < min(1, mu^2)` holds. Outside this window the solver is
    /// still well defined; callers may emit a warning.
    pub fn in_limit_regime(&self) -> bool {
        self.tau < 1.0_f64.min(self.mu * self.mu)
    }

    /// Viscosity of the Neo-Hookean variant in Lagrangian variables,
    /// `mu(v) = 2 G tau / v`.
    pub fn neo_mu(&self, v: f64) -> Result<f64> {
        let g = self
            .g
            .ok_or_else(|| Error::Validation("phys.g required for the Neo-Hookean variant".into()))?;
        Ok(2.0 * g * self.tau / v)
    }
}

/// Point state of the Lagrangian relaxed system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellState {
    /// Specific volume, > 0.
    pub v: f64,
    /// Velocity.
    pub u: f64,
    /// Stress.
    pub s: f64,
}

impl CellState {
    /// Hyperbolicity margin `2 tau a S + mu`; must stay positive.
    pub fn margin(&self, p: &PhysParams) -> f64 {
        2.0 * p.tau * p.a * self.s + p.mu
    }

    pub fn is_admissible(&self, p: &PhysParams) -> bool {
        self.v > 0.0 && self.margin(p) > 0.0
    }

    fn require_admissible(&self, p: &PhysParams) -> Result<()> {
        if !(self.v > 0.0) {
            return Err(Error::Inadmissible {
                cell: 0,
                reason: format!("specific volume not positive: v = {}", self.v),
            });
        }
        let m = self.margin(p);
        if !(m > 0.0) {
            return Err(Error::Inadmissible {
                cell: 0,
                reason: format!("hyperbolicity margin not positive: 2*tau*a*S + mu = {m}"),
            });
        }
        Ok(())
    }
}

/// Gamma-law pressure in Lagrangian form, `p(v) = B v^(-gamma)`.
pub fn pressure(v: f64, p: &PhysParams) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "pressure requires positive specific volume, got v = {v}"
        )));
    }
    Ok(p.b * v.powf(-p.gamma))
}

/// Derivative `p'(v) = -gamma B v^(-gamma-1)`; always negative.
pub fn dpressure(v: f64, p: &PhysParams) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "dpressure requires positive specific volume, got v = {v}"
        )));
    }
    Ok(-p.gamma * p.b * v.powf(-p.gamma - 1.0))
}

/// The symmetrizer triple (A0, A1, B) of the symmetric hyperbolic form
/// `A0 W_t + A1 W_x + B W = 0`, W = (v, u, S).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetrizerTriple {
    pub a0: [[f64; 3]; 3],
    pub a1: [[f64; 3]; 3],
    pub bmat: [[f64; 3]; 3],
}

/// Builds the symmetrizer triple at an admissible state.
pub fn symmetrizer(w: &CellState, p: &PhysParams) -> Result<SymmetrizerTriple> {
    w.require_admissible(p)?;
    let dp = dpressure(w.v, p)?;
    let m = w.margin(p);
    let a0 = [
        [-dp, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, p.tau * w.v / m],
    ];
    let a1 = [[0.0, dp, 0.0], [dp, 0.0, -1.0], [0.0, -1.0, 0.0]];
    let mut bmat = [[0.0; 3]; 3];
    bmat[2][2] = w.v / m;
    Ok(SymmetrizerTriple { a0, a1, bmat })
}

/// Eigenvalues of a symmetric 3x3 matrix, ascending.
///
/// Trigonometric closed form followed by Newton polishing on the
/// characteristic polynomial, so roots are accurate to round-off.
pub fn sym_eigenvalues_3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let mut ev = if p1 == 0.0 {
        [m[0][0], m[1][1], m[2][2]]
    } else {
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = |i: usize, j: usize| (m[i][j] - if i == j { q } else { 0.0 }) / p;
        let detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(1, 2))
            - b(0, 1) * (b(0, 1) * b(2, 2) - b(1, 2) * b(0, 2))
            + b(0, 2) * (b(0, 1) * b(1, 2) - b(1, 1) * b(0, 2));
        let r = (detb / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        [e3, e2, e1]
    };
    // characteristic polynomial p(x) = -x^3 + c2 x^2 - c1 x + c0
    let c2 = m[0][0] + m[1][1] + m[2][2];
    let c1 = m[0][0] * m[1][1] + m[0][0] * m[2][2] + m[1][1] * m[2][2]
        - m[0][1] * m[0][1]
        - m[0][2] * m[0][2]
        - m[1][2] * m[1][2];
    let c0 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[1][2])
        - m[0][1] * (m[0][1] * m[2][2] - m[1][2] * m[0][2])
        + m[0][2] * (m[0][1] * m[1][2] - m[1][1] * m[0][2]);
    for x in ev.iter_mut() {
        for _ in 0..2 {
            let f = -x.powi(3) + c2 * x.powi(2) - c1 * *x + c0;
            let df = -3.0 * x.powi(2) + 2.0 * c2 * *x - c1;
            if df.abs() > 1e-300 {
                let step = f / df;
                if step.is_finite() {
                    *x -= step;
                }
            }
        }
    }
    // total_cmp: overflowed inputs can yield NaN roots, reported by callers
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Characteristic speeds: the generalized eigenvalues of (A1, A0), ascending.
///
/// Computed as eigenvalues of the symmetric matrix `A0^{-1/2} A1 A0^{-1/2}`;
/// A0 is diagonal positive at admissible states.
pub fn characteristic_speeds(w: &CellState, p: &PhysParams) -> Result<[f64; 3]> {
    let trip = symmetrizer(w, p)?;
    let d = [trip.a0[0][0], trip.a0[1][1], trip.a0[2][2]];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = trip.a1[i][j] / (d[i] * d[j]).sqrt();
        }
    }
    let ev = sym_eigenvalues_3(&m);
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Internal(format!(
            "non-finite characteristic speed at state {w:?}"
        )));
    }
    Ok(ev)
}

/// Stress of the Neo-Hookean constitutive choice in Lagrangian variables,
/// `S = G (A v - 1/v)`.
pub fn neo_hookean_stress(a_conf: f64, v: f64, g: f64) -> Result<f64> {
    if !(a_conf > 0.0) {
        return Err(Error::Domain(format!(
            "conformation must be positive, got A = {a_conf}"
        )));
    }
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "specific volume must be positive, got v = {v}"
        )));
    }
    if !(g > 0.0) {
        return Err(Error::Domain(format!(
            "elastic modulus must be positive, got G = {g}"
        )));
    }
    Ok(g * (a_conf * v - 1.0 / v))
}

/// Conformation value consistent with a given stress, `A = (S/G + 1/v)/v`.
pub fn conformation_from_stress(s: f64, v: f64, g: f64) -> Result<f64> {
    if !(v > 0.0) || !(g > 0.0) {
        return Err(Error::Domain(format!(
            "conformation_from_stress requires v > 0 and G > 0, got v = {v}, G = {g}"
        )));
    }
    Ok((s / g + 1.0 / v) / v)
}

/// Field-wide admissibility measurement. Pure; never fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub min_v: f64,
    pub min_v_cell: usize,
    pub max_v: f64,
    /// Field minimum of `2 tau a S + mu`.
    pub min_margin: f64,
    pub min_margin_cell: usize,
    pub pass: bool,
    /// Informational: whether v stays inside the small-data window [3/4, 5/4].
    pub v_in_small_data_window: bool,
}

pub fn admissibility_scan(field: &StateField, p: &PhysParams) -> AdmissibilityReport {
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    let mut min_v_cell = 0;
    let mut min_margin = f64::INFINITY;
    let mut min_margin_cell = 0;
    for i in 0..field.len() {
        let v = field.v[i];
        if v < min_v {
            min_v = v;
            min_v_cell = i;
        }
        max_v = max_v.max(v);
        let m = 2.0 * p.tau * p.a * field.s[i] + p.mu;
        if m < min_margin {
            min_margin = m;
            min_margin_cell = i;
        }
    }
    AdmissibilityReport {
        min_v,
        min_v_cell,
        max_v,
        min_margin,
        min_margin_cell,
        pass: min_v > 0.0 && min_margin > 0.0,
        v_in_small_data_window: min_v >= 0.75 && max_v <= 1.25,
    }
}
