//! Semi-implicit reference solver for the relaxation-limit system
//!
//! ```text
//! v_t = u_x
//! u_t + p(v)_x = (mu_eff(v) u_x / v)_x
//! ```
//!
//! v and the pressure term are advanced explicitly (SSP-RK2), the diffusion
//! term implicitly through a cyclic tridiagonal solve with coefficients frozen
//! at the start of the diffusion stage. Unconditionally stable in the
//! diffusion number; CFL-limited only by the acoustic speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{d1, GridSpec, NsField};
use crate::model::{dpressure, pressure, PhysParams};
use crate::relaxed::{RunSample, StepControl};
use crate::tridiag::cyclic;

/// Effective viscosity law of the limit system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum ViscosityLaw {
    /// mu_eff(v) = mu.
    Constant(f64),
    /// Neo-Hookean limit viscosity: mu_eff(v) = mu_bar / v.
    NeoLimit(f64),
}

impl ViscosityLaw {
    pub fn mu_eff(&self, v: f64) -> f64 {
        match self {
            ViscosityLaw::Constant(mu) => *mu,
            ViscosityLaw::NeoLimit(mu_bar) => mu_bar / v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let val = match self {
            ViscosityLaw::Constant(m) | ViscosityLaw::NeoLimit(m) => *m,
        };
        if !(val > 0.0) {
            return Err(Error::Validation(format!(
                "viscosity law value must be positive, got {val}"
            )));
        }
        Ok(())
    }
}

/// Test-harness hooks; the default runs the full system.
#[derive(Clone, Copy, Debug)]
pub struct NsOptions {
    /// When false the pressure gradient is dropped (pure-diffusion checks).
    pub include_pressure: bool,
}

impl Default for NsOptions {
    fn default() -> Self {
        NsOptions {
            include_pressure: true,
        }
    }
}

fn check_positive_volume(field: &NsField, stage: &'static str) -> Result<()> {
    for (i, v) in field.v.iter().enumerate() {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(Error::Breakdown {
                time: field.t,
                stage,
                cell: i,
                reason: format!("v = {v} not positive"),
            });
        }
        if !field.u[i].is_finite() {
            return Err(Error::Breakdown {
                time: field.t,
                stage,
                cell: i,
                reason: "non-finite velocity".into(),
            });
        }
    }
    Ok(())
}

/// One semi-implicit step. v is updated explicitly, then the velocity gets an
/// explicit pressure/stress-free update followed by an implicit diffusion
/// solve `(I - dt L) u_new = u*` with `L u = D(mu_eff(v)/v D u)`.
pub fn ns_step(
    field: &mut NsField,
    p: &PhysParams,
    law: &ViscosityLaw,
    grid: &GridSpec,
    dt: f64,
    opts: &NsOptions,
) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("ns_step needs dt > 0, got {dt}")));
    }
    let n = field.len();
    let dx = grid.dx();
    check_positive_volume(field, "ns-explicit")?;

    let press = |v: &[f64], t: f64| -> Result<Vec<f64>> {
        v.iter()
            .enumerate()
            .map(|(i, &vi)| {
                pressure(vi, p).map_err(|_| Error::Breakdown {
                    time: t,
                    stage: "ns-explicit",
                    cell: i,
                    reason: format!("v = {vi} <= 0"),
                })
            })
            .collect()
    };

    // SSP-RK2 on the hyperbolic part
    let du0 = d1(&field.u, dx);
    let dp0 = if opts.include_pressure {
        d1(&press(&field.v, field.t)?, dx)
    } else {
        vec![0.0; n]
    };
    let mut v1 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    for i in 0..n {
        v1[i] = field.v[i] + dt * du0[i];
        u1[i] = field.u[i] - dt * dp0[i];
    }
    let du1 = d1(&u1, dx);
    let dp1 = if opts.include_pressure {
        d1(&press(&v1, field.t)?, dx)
    } else {
        vec![0.0; n]
    };
    let mut v_star = vec![0.0; n];
    let mut u_star = vec![0.0; n];
    for i in 0..n {
        v_star[i] = 0.5 * (field.v[i] + v1[i] + dt * du1[i]);
        u_star[i] = 0.5 * (field.u[i] + u1[i] - dt * dp1[i]);
    }
    for (i, v) in v_star.iter().enumerate() {
        if !(*v > 0.0) {
            return Err(Error::Breakdown {
                time: field.t,
                stage: "ns-explicit",
                cell: i,
                reason: format!("v = {v} <= 0"),
            });
        }
    }

    // implicit diffusion with coefficients frozen on v_star
    let kappa: Vec<f64> = v_star.iter().map(|&v| law.mu_eff(v) / v).collect();
    let r = dt / (dx * dx);
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        let nu_p = 0.5 * (kappa[i] + kappa[ip]);
        let nu_m = 0.5 * (kappa[i] + kappa[im]);
        sub[i] = -r * nu_m;
        sup[i] = -r * nu_p;
        diag[i] = 1.0 + r * (nu_m + nu_p);
    }
    let u_new = cyclic(&sub, &diag, &sup, &u_star)?;

    field.v = v_star;
    field.u = u_new;
    field.t += dt;
    check_positive_volume(field, "ns-implicit")?;
    Ok(())
}

/// Acoustic CFL step, capped by dt_max and the remaining time.
pub fn ns_cfl_dt(field: &NsField, p: &PhysParams, grid: &GridSpec, control: &StepControl) -> Result<f64> {
    let mut smax: f64 = 0.0;
    for (i, &v) in field.v.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::Breakdown {
                time: field.t,
                stage: "ns-cfl",
                cell: i,
                reason: format!("v = {v} <= 0"),
            });
        }
        smax = smax.max((-dpressure(v, p)?).sqrt());
    }
    if !(smax > 0.0) {
        return Err(Error::Internal("vanishing acoustic speed".into()));
    }
    let mut dt = control.cfl * grid.dx() / smax;
    dt = dt.min(control.dt_max);
    let remaining = control.t_end - field.t;
    if remaining > 0.0 {
        dt = dt.min(remaining);
    }
    Ok(dt)
}

/// Output of a reference run. Samples carry the limit stress
/// `S0 = mu_eff(v) D(u) / v` in the stress slot.
#[derive(Clone, Debug)]
pub struct NsRunOutput {
    pub samples: Vec<RunSample>,
    pub final_field: NsField,
    pub breakdown: Option<crate::relaxed::BreakdownRecord>,
    pub steps: usize,
}

fn ns_sample(field: &NsField, law: &ViscosityLaw, grid: &GridSpec) -> RunSample {
    let ux = d1(&field.u, grid.dx());
    let s0 = field
        .v
        .iter()
        .zip(&ux)
        .map(|(&v, &d)| law.mu_eff(v) * d / v)
        .collect();
    RunSample {
        t: field.t,
        v: field.v.clone(),
        u: field.u.clone(),
        s: s0,
        a_conf: None,
    }
}

/// Advances the limit system to `t_end`, emitting (v, u, S0) at the same
/// sample-time lattice `k / cadence` as the relaxed runs.
pub fn run_ns(
    initial: NsField,
    p: &PhysParams,
    law: &ViscosityLaw,
    grid: &GridSpec,
    control: &StepControl,
    cadence: f64,
) -> Result<NsRunOutput> {
    p.validate()?;
    grid.validate()?;
    control.validate()?;
    law.validate()?;
    if !(cadence > 0.0) {
        return Err(Error::Validation(format!(
            "sink cadence must be positive, got {cadence}"
        )));
    }
    if initial.len() != grid.cells {
        return Err(Error::Validation(format!(
            "initial field has {} cells, grid has {}",
            initial.len(),
            grid.cells
        )));
    }
    check_positive_volume(&initial, "initial")?;

    let opts = NsOptions::default();
    let mut field = initial;
    let sample_dt = 1.0 / cadence;
    let mut samples = vec![ns_sample(&field, law, grid)];
    let mut k = 1usize;
    let mut t_next = (k as f64 * sample_dt).min(control.t_end);
    let mut steps = 0usize;
    let eps = 1e-12 * control.t_end.max(1.0);

    while field.t < control.t_end - eps {
        let step = (|| -> Result<()> {
            let mut dt = ns_cfl_dt(&field, p, grid, control)?;
            dt = dt.min(t_next - field.t).max(0.0);
            if dt <= 0.0 {
                return Err(Error::Internal("non-positive time step".into()));
            }
            ns_step(&mut field, p, law, grid, dt, &opts)
        })();
        if let Err(e) = step {
            if let Error::Breakdown {
                time,
                stage,
                cell,
                reason,
            } = e
            {
                return Ok(NsRunOutput {
                    samples,
                    final_field: field,
                    breakdown: Some(crate::relaxed::BreakdownRecord {
                        time,
                        stage: stage.to_string(),
                        cell,
                        reason,
                    }),
                    steps,
                });
            }
            return Err(e);
        }
        steps += 1;
        if field.t >= t_next - eps {
            field.t = t_next;
            samples.push(ns_sample(&field, law, grid));
            k += 1;
            t_next = (k as f64 * sample_dt).min(control.t_end);
        }
    }
    Ok(NsRunOutput {
        final_field: field,
        samples,
        breakdown: None,
        steps,
    })
}
