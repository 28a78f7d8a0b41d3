//! Discrete versions of the functionals the analysis is built on: the
//! Sobolev energies E and D, the physical energy/dissipation ledger, the
//! Taylor-bound constants for the pressure potential, and the a priori
//! inequality ratio. All quadratures are rectangle rule on the periodic grid
//! (exact for constants); time integrals over run samples use the trapezoid
//! rule. The derivative stencils are shared with the solvers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{d1, d2, l2_norm, GridSpec, StateField};
use crate::model::PhysParams;
use crate::relaxed::RunSample;

/// Instantaneous values of the squared Sobolev norms: `e` is
/// `||(v-1, u, sqrt(tau) S)||_{H^2}^2`, `d` is
/// `||(v_x, u_x)||_{H^1}^2 + ||S||_{H^2}^2`. The running sup over time is
/// assembled at sink level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SobolevEnergy {
    pub e: f64,
    pub d: f64,
}

/// Central first or second discrete derivative of a periodic sequence.
pub fn discrete_derivative(f: &[f64], order: u8, dx: f64) -> Result<Vec<f64>> {
    if f.len() < 5 {
        return Err(Error::Size(format!(
            "discrete_derivative needs at least 5 points, got {}",
            f.len()
        )));
    }
    match order {
        1 => Ok(d1(f, dx)),
        2 => Ok(d2(f, dx)),
        _ => Err(Error::Validation(format!(
            "derivative order must be 1 or 2, got {order}"
        ))),
    }
}

fn h2_sq(f: &[f64], dx: f64) -> f64 {
    let f1 = d1(f, dx);
    let f2 = d2(f, dx);
    (sum_sq(f) + sum_sq(&f1) + sum_sq(&f2)) * dx
}

fn sum_sq(f: &[f64]) -> f64 {
    f.iter().map(|x| x * x).sum()
}

/// Discrete Sobolev energies of a state.
pub fn sobolev_energy(field: &StateField, p: &PhysParams, grid: &GridSpec) -> SobolevEnergy {
    let dx = grid.dx();
    let dev: Vec<f64> = field.v.iter().map(|v| v - 1.0).collect();
    let e = h2_sq(&dev, dx) + h2_sq(&field.u, dx) + p.tau * h2_sq(&field.s, dx);

    let vx = d1(&dev, dx);
    let ux = d1(&field.u, dx);
    let d = (sum_sq(&vx) + sum_sq(&d1(&vx, dx)) + sum_sq(&ux) + sum_sq(&d1(&ux, dx))) * dx
        + h2_sq(&field.s, dx);
    SobolevEnergy { e, d }
}

/// Pressure potential `Pi(v) = (v^{1-gamma} - 1)/(gamma - 1) + v - 1`.
pub fn pressure_potential(v: f64, gamma: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "pressure potential requires v > 0, got {v}"
        )));
    }
    Ok((v.powf(1.0 - gamma) - 1.0) / (gamma - 1.0) + v - 1.0)
}

/// Which weight multiplies the squared stress in the energy density:
/// the lemma statement uses `tau v / (2 mu)`, its higher-order proof uses
/// `tau v / (2 (2 a tau S + mu))`. Both are logged, neither is asserted as
/// "the" energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StressWeight {
    Statement,
    Proof,
}

/// Integral of the weighted squared stress with the selected weight.
pub fn stress_energy(field: &StateField, p: &PhysParams, grid: &GridSpec, w: StressWeight) -> f64 {
    let dx = grid.dx();
    let mut total = 0.0;
    for i in 0..field.len() {
        let v = field.v[i];
        let s = field.s[i];
        let weight = match w {
            StressWeight::Statement => p.tau * v / (2.0 * p.mu),
            StressWeight::Proof => p.tau * v / (2.0 * (2.0 * p.a * p.tau * s + p.mu)),
        };
        total += weight * s * s;
    }
    total * dx
}

/// Physical energy: integral of
/// `u^2/2 + (tau v / 2 mu) S^2 + (v^{1-gamma} - 1)/(gamma - 1) + v - 1`.
/// Exactly zero at the constant equilibrium.
pub fn physical_energy(field: &StateField, p: &PhysParams, grid: &GridSpec) -> Result<f64> {
    let dx = grid.dx();
    let mut total = 0.0;
    for i in 0..field.len() {
        let v = field.v[i];
        let u = field.u[i];
        let s = field.s[i];
        total += 0.5 * u * u
            + p.tau * v / (2.0 * p.mu) * s * s
            + pressure_potential(v, p.gamma)?;
    }
    Ok(total * dx)
}

/// Instantaneous physical dissipation: integral of `(v/mu) S^2`.
pub fn physical_dissipation(field: &StateField, p: &PhysParams, grid: &GridSpec) -> f64 {
    let dx = grid.dx();
    field
        .v
        .iter()
        .zip(&field.s)
        .map(|(&v, &s)| v / p.mu * s * s)
        .sum::<f64>()
        * dx
}

/// Instantaneous cross term `(4a+1) tau/(2 mu) * integral(u_x S^2)`.
pub fn cross_term(field: &StateField, p: &PhysParams, grid: &GridSpec) -> f64 {
    let dx = grid.dx();
    let ux = d1(&field.u, dx);
    let coeff = (4.0 * p.a + 1.0) * p.tau / (2.0 * p.mu);
    coeff
        * ux.iter()
            .zip(&field.s)
            .map(|(&d, &s)| d * s * s)
            .sum::<f64>()
        * dx
}

fn sample_field(s: &RunSample) -> StateField {
    StateField {
        v: s.v.clone(),
        u: s.u.clone(),
        s: s.s.clone(),
        a_conf: s.a_conf.clone(),
        t: s.t,
    }
}

fn trapezoid_cumulative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for i in 1..f.len() {
        out[i] = out[i - 1] + 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
    }
    out
}

/// Residual of the discrete physical-energy balance over a run:
/// `E_phys(t) - E_phys(0) + int diss - int cross`. Zero for an exact
/// solution; the scheme defect for a discrete run.
pub fn energy_ledger(samples: &[RunSample], p: &PhysParams, grid: &GridSpec) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::Size(format!(
            "energy ledger needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let mut e_phys = Vec::with_capacity(samples.len());
    let mut diss = Vec::with_capacity(samples.len());
    let mut cross = Vec::with_capacity(samples.len());
    for s in samples {
        let f = sample_field(s);
        e_phys.push(physical_energy(&f, p, grid)?);
        diss.push(physical_dissipation(&f, p, grid));
        cross.push(cross_term(&f, p, grid));
    }
    let cum_diss = trapezoid_cumulative(&t, &diss);
    let cum_cross = trapezoid_cumulative(&t, &cross);
    Ok((0..samples.len())
        .map(|i| e_phys[i] - e_phys[0] + cum_diss[i] - cum_cross[i])
        .collect())
}

/// Empirical constants of the Taylor bound
/// `c0 int (v-1)^2 <= int Pi(v) <= c1 int (v-1)^2` over a v-interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaylorBounds {
    pub c0: f64,
    pub c1: f64,
}

/// Ratio `g(v) = Pi(v)/(v-1)^2`, with the v -> 1 limit `gamma/2` and a series
/// expansion near 1 to avoid cancellation.
pub fn taylor_ratio(v: f64, gamma: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("taylor ratio requires v > 0, got {v}")));
    }
    let h = v - 1.0;
    if h.abs() < 1e-5 {
        // Pi = g/2 h^2 - g(g+1)/6 h^3 + g(g+1)(g+2)/24 h^4 + O(h^5)
        return Ok(gamma / 2.0 - gamma * (gamma + 1.0) / 6.0 * h
            + gamma * (gamma + 1.0) * (gamma + 2.0) / 24.0 * h * h);
    }
    Ok(pressure_potential(v, gamma)? / (h * h))
}

/// Scans `g(v)` over `[v_lo, v_hi]` (fine uniform sampling, with the limiting
/// value gamma/2 inserted whenever the interval contains 1).
pub fn taylor_bounds(gamma: f64, v_lo: f64, v_hi: f64) -> Result<TaylorBounds> {
    if !(gamma > 1.0) {
        return Err(Error::Validation(format!(
            "taylor_bounds requires gamma > 1, got {gamma}"
        )));
    }
    if !(v_lo > 0.0) || !(v_hi >= v_lo) {
        return Err(Error::Domain(format!(
            "taylor_bounds requires 0 < v_lo <= v_hi, got [{v_lo}, {v_hi}]"
        )));
    }
    let n = 4000usize;
    let mut c0 = f64::INFINITY;
    let mut c1 = f64::NEG_INFINITY;
    for k in 0..=n {
        let v = v_lo + (v_hi - v_lo) * k as f64 / n as f64;
        let g = taylor_ratio(v, gamma)?;
        c0 = c0.min(g);
        c1 = c1.max(g);
    }
    if (v_lo..=v_hi).contains(&1.0) {
        c0 = c0.min(gamma / 2.0);
        c1 = c1.max(gamma / 2.0);
    }
    Ok(TaylorBounds { c0, c1 })
}

/// Ratio series `R(t) = [E(t) + int D] / [E0 + E(t)^{1/2} int D]` with E the
/// running sup of the instantaneous Sobolev energy. Boundedness uniformly in
/// tau is the measured surrogate for the a priori estimate's constant.
pub fn apriori_residual(
    samples: &[RunSample],
    p: &PhysParams,
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::Size(format!(
            "apriori residual needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let energies: Vec<SobolevEnergy> = samples
        .iter()
        .map(|s| sobolev_energy(&sample_field(s), p, grid))
        .collect();
    let e0 = energies[0].e;
    if !(e0 > 0.0) {
        return Err(Error::Validation(
            "apriori residual is degenerate at the equilibrium (E0 = 0)".into(),
        ));
    }
    let d_series: Vec<f64> = energies.iter().map(|s| s.d).collect();
    let cum_d = trapezoid_cumulative(&t, &d_series);
    let mut sup_e = e0;
    Ok(energies
        .iter()
        .zip(&cum_d)
        .map(|(s, &cd)| {
            sup_e = sup_e.max(s.e);
            (sup_e + cd) / (e0 + sup_e.sqrt() * cd)
        })
        .collect())
}

/// Full per-run time series: everything the output CSV carries, plus the two
/// weighted stress energies.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub t: Vec<f64>,
    /// Instantaneous Sobolev energy E.
    pub e: Vec<f64>,
    /// Running sup of E (non-decreasing).
    pub sup_e: Vec<f64>,
    /// Instantaneous dissipation functional D.
    pub d: Vec<f64>,
    /// Cumulative trapezoid integral of D.
    pub cum_d: Vec<f64>,
    pub e_phys: Vec<f64>,
    /// Cumulative physical dissipation.
    pub cum_diss: Vec<f64>,
    pub ledger_residual: Vec<f64>,
    pub min_v: Vec<f64>,
    pub max_v: Vec<f64>,
    /// Field minimum of `2 tau a S + mu`.
    pub min_margin: Vec<f64>,
    /// L2 norm of `S - mu_eff D(u)/v`.
    pub stress_defect: Vec<f64>,
    pub stress_energy_statement: Vec<f64>,
    pub stress_energy_proof: Vec<f64>,
}

/// L2 norm of the stress defect `S - mu_eff(v) D(u)/v` of a sample;
/// `mu_eff = 2 G tau / v` when the sample carries a conformation field.
pub fn stress_defect_l2(sample: &RunSample, p: &PhysParams, grid: &GridSpec) -> f64 {
    let dx = grid.dx();
    let ux = d1(&sample.u, dx);
    let neo = sample.a_conf.is_some();
    let defect: Vec<f64> = (0..sample.v.len())
        .map(|i| {
            let v = sample.v[i];
            let mu = if neo {
                2.0 * p.g.unwrap_or(0.0) * p.tau / v
            } else {
                p.mu
            };
            sample.s[i] - mu * ux[i] / v
        })
        .collect();
    l2_norm(&defect, dx)
}

impl EnergyReport {
    pub fn from_samples(samples: &[RunSample], p: &PhysParams, grid: &GridSpec) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Size("energy report needs at least 1 sample".into()));
        }
        let n = samples.len();
        let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let mut e = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut e_phys = Vec::with_capacity(n);
        let mut diss = Vec::with_capacity(n);
        let mut cross = Vec::with_capacity(n);
        let mut min_v = Vec::with_capacity(n);
        let mut max_v = Vec::with_capacity(n);
        let mut min_margin = Vec::with_capacity(n);
        let mut stress_defect = Vec::with_capacity(n);
        let mut w_stmt = Vec::with_capacity(n);
        let mut w_proof = Vec::with_capacity(n);
        for s in samples {
            let f = sample_field(s);
            let se = sobolev_energy(&f, p, grid);
            e.push(se.e);
            d.push(se.d);
            e_phys.push(physical_energy(&f, p, grid)?);
            diss.push(physical_dissipation(&f, p, grid));
            cross.push(cross_term(&f, p, grid));
            let rep = crate::model::admissibility_scan(&f, p);
            min_v.push(rep.min_v);
            max_v.push(rep.max_v);
            min_margin.push(rep.min_margin);
            stress_defect.push(stress_defect_l2(s, p, grid));
            w_stmt.push(stress_energy(&f, p, grid, StressWeight::Statement));
            w_proof.push(stress_energy(&f, p, grid, StressWeight::Proof));
        }
        let mut sup_e = Vec::with_capacity(n);
        let mut m = f64::NEG_INFINITY;
        for &x in &e {
            m = m.max(x);
            sup_e.push(m);
        }
        let cum_d = trapezoid_cumulative(&t, &d);
        let cum_diss = trapezoid_cumulative(&t, &diss);
        let cum_cross = trapezoid_cumulative(&t, &cross);
        let ledger_residual = (0..n)
            .map(|i| e_phys[i] - e_phys[0] + cum_diss[i] - cum_cross[i])
            .collect();
        Ok(EnergyReport {
            t,
            e,
            sup_e,
            d,
            cum_d,
            e_phys,
            cum_diss,
            ledger_residual,
            min_v,
            max_v,
            min_margin,
            stress_defect,
            stress_energy_statement: w_stmt,
            stress_energy_proof: w_proof,
        })
    }
}
