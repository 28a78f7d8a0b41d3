//! Strang-split integrator for the Lagrangian relaxed system
//!
//! ```text
//! v_t - u_x = 0
//! u_t + p(v)_x = S_x
//! tau (S_t - (2 a S / v) u_x) + S = mu u_x / v
//! ```
//!
//! on a periodic grid: explicit SSP-RK2 transport substeps with second-order
//! central differences, and an exact per-cell exponential update for the stiff
//! stress equation (u_x frozen over the substep). The Neo-Hookean variant
//! carries a conformation field A with its own exact relaxation toward 1/v^2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{d1, d2, GridSpec, StateField};
use crate::model::{
    admissibility_scan, characteristic_speeds, neo_hookean_stress, pressure, CellState, PhysParams,
};

/// Which stage integrates the stretch term `(2 a S / v) u_x`.
///
/// With `Relaxation` (the default) both S-linear terms go into the exact
/// scalar ODE of the stiff substep and the transport stage carries no stress
/// source; with `Transport` only `-S/tau + mu u_x/(tau v)` is stiff-integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StretchStage {
    #[default]
    Relaxation,
    Transport,
}

/// Time-stepping control knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    /// Courant number, in (0, 1).
    pub cfl: f64,
    /// Final time.
    pub t_end: f64,
    /// Hard cap on dt.
    pub dt_max: f64,
    /// Hyperviscosity coefficient; the added term is `nu_h dx^2 D2(.)`.
    pub hyperviscosity: f64,
    pub stretch_in: StretchStage,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl: 0.45,
            t_end: 1.0,
            dt_max: f64::INFINITY,
            hyperviscosity: 0.0,
            stretch_in: StretchStage::Relaxation,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Validation(format!(
                "control.cfl must lie in (0,1), got {}",
                self.cfl
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Validation(format!(
                "control.t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::Validation(format!(
                "control.dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if self.hyperviscosity < 0.0 {
            return Err(Error::Validation(format!(
                "control.hyperviscosity must be nonnegative, got {}",
                self.hyperviscosity
            )));
        }
        Ok(())
    }
}

/// Constitutive variant of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Constant viscosity mu, stress equation only.
    #[default]
    Standard,
    /// Neo-Hookean (`mu = 2 G tau / v`, a = 1/2): stress equation evolved,
    /// conformation field carried alongside as a consistency companion.
    NeoStress,
    /// Neo-Hookean with the conformation equation as the primary route; the
    /// stress is recomputed from A after every substep.
    NeoConformation,
}

impl Variant {
    pub fn is_neo(&self) -> bool {
        !matches!(self, Variant::Standard)
    }

    /// Effective viscosity at a cell.
    pub fn mu_at(&self, p: &PhysParams, v: f64) -> f64 {
        match self {
            Variant::Standard => p.mu,
            _ => 2.0 * p.g.expect("neo variant requires G") * p.tau / v,
        }
    }

    pub fn validate(&self, p: &PhysParams) -> Result<()> {
        if self.is_neo() {
            if p.g.is_none() {
                return Err(Error::Validation(
                    "Neo-Hookean variant requires phys.g".into(),
                ));
            }
            if (p.a - 0.5).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "Neo-Hookean variant requires a = 1/2, got a = {}",
                    p.a
                )));
            }
        }
        Ok(())
    }
}

/// Time derivatives produced by the transport stage.
#[derive(Clone, Debug)]
pub struct TransportRhs {
    pub dv: Vec<f64>,
    pub du: Vec<f64>,
    pub ds: Vec<f64>,
}

fn check_admissible(field: &StateField, p: &PhysParams, stage: &'static str) -> Result<()> {
    let rep = admissibility_scan(field, p);
    if !rep.pass {
        let (cell, reason) = if rep.min_v <= 0.0 {
            (rep.min_v_cell, format!("v = {} <= 0", rep.min_v))
        } else {
            (
                rep.min_margin_cell,
                format!("2*tau*a*S + mu = {} <= 0", rep.min_margin),
            )
        };
        return Err(Error::Breakdown {
            time: field.t,
            stage,
            cell,
            reason,
        });
    }
    if let Some(cell) = field.first_non_finite() {
        return Err(Error::Breakdown {
            time: field.t,
            stage,
            cell,
            reason: "non-finite value".into(),
        });
    }
    Ok(())
}

/// Transport/pressure part of the right-hand side:
/// `v' = D(u)`, `u' = -D(p(v)) + D(S)`, plus the stretch term on S when it is
/// assigned to the transport stage, plus optional hyperviscosity on every
/// equation.
pub fn transport_rhs(
    field: &StateField,
    p: &PhysParams,
    grid: &GridSpec,
    control: &StepControl,
) -> Result<TransportRhs> {
    let n = field.len();
    let dx = grid.dx();
    let ux = d1(&field.u, dx);
    let mut pr = vec![0.0; n];
    for i in 0..n {
        pr[i] = pressure(field.v[i], p).map_err(|_| Error::Breakdown {
            time: field.t,
            stage: "transport",
            cell: i,
            reason: format!("v = {} <= 0", field.v[i]),
        })?;
    }
    let dpr = d1(&pr, dx);
    let dsx = d1(&field.s, dx);

    let mut dv = ux;
    let mut du = vec![0.0; n];
    for i in 0..n {
        du[i] = -dpr[i] + dsx[i];
    }
    let mut ds = vec![0.0; n];
    if control.stretch_in == StretchStage::Transport {
        // reuse dv, which currently holds D(u)
        for i in 0..n {
            ds[i] = 2.0 * p.a * field.s[i] / field.v[i] * dv[i];
        }
    }
    if control.hyperviscosity > 0.0 {
        let c = control.hyperviscosity * dx * dx;
        let lv = d2(&field.v, dx);
        let lu = d2(&field.u, dx);
        let ls = d2(&field.s, dx);
        for i in 0..n {
            dv[i] += c * lv[i];
            du[i] += c * lu[i];
            ds[i] += c * ls[i];
        }
    }
    Ok(TransportRhs { dv, du, ds })
}

/// Exact exponential update of the stiff stress equation with u_x frozen:
/// per cell, `S' = alpha S + beta` with
/// `alpha = 2 a D(u)/v - 1/tau` (stretch in the relaxation stage) or
/// `alpha = -1/tau` (stretch in the transport stage), and
/// `beta = mu D(u) / (tau v)`.
///
/// Returns the number of cells where the exponent had to be clamped to avoid
/// overflow (growing modes with very large dt).
pub fn relaxation_substep(
    field: &mut StateField,
    p: &PhysParams,
    grid: &GridSpec,
    control: &StepControl,
    variant: Variant,
    dt: f64,
) -> Result<usize> {
    if !(dt > 0.0) {
        return Err(Error::Validation(format!(
            "relaxation substep needs dt > 0, got {dt}"
        )));
    }
    let ux = d1(&field.u, grid.dx());
    let mut clamped = 0usize;
    const Z_MAX: f64 = 500.0;
    for i in 0..field.len() {
        let v = field.v[i];
        let mu = variant.mu_at(p, v);
        let stretch = match control.stretch_in {
            StretchStage::Relaxation => 2.0 * p.a * ux[i] / v,
            StretchStage::Transport => 0.0,
        };
        let alpha = stretch - 1.0 / p.tau;
        let beta = mu * ux[i] / (p.tau * v);
        let mut z = alpha * dt;
        if z > Z_MAX {
            z = Z_MAX;
            clamped += 1;
        }
        // phi = (e^z - 1)/alpha, evaluated stably
        let s = field.s[i];
        field.s[i] = if z.abs() > 1e-12 {
            s + (alpha * s + beta) * (z.exp_m1() / alpha)
        } else {
            // Taylor fallback for vanishing exponent
            s + dt * (alpha * s + beta)
        };
    }
    Ok(clamped)
}

/// Exact per-cell update of the conformation equation `tau A_t + A = 1/v^2`
/// with v frozen, followed by recomputing `S = G (A v - 1/v)`.
pub fn neo_hookean_substep(field: &mut StateField, p: &PhysParams, dt: f64) -> Result<()> {
    update_conformation(field, p, dt)?;
    sync_stress_from_conformation(field, p)
}

/// Conformation update only; used internally by the stress-formulation runs
/// that keep their own evolved S.
pub fn update_conformation(field: &mut StateField, p: &PhysParams, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Validation(format!(
            "conformation substep needs dt > 0, got {dt}"
        )));
    }
    let t_now = field.t;
    let decay = (-dt / p.tau).exp();
    let a = field
        .a_conf
        .as_mut()
        .ok_or_else(|| Error::Validation("conformation field not present".into()))?;
    for i in 0..field.v.len() {
        let eq = 1.0 / (field.v[i] * field.v[i]);
        a[i] = eq + (a[i] - eq) * decay;
        if !(a[i] > 0.0) {
            return Err(Error::Internal(format!(
                "conformation lost positivity at t = {}, cell {i}: A = {}",
                t_now, a[i]
            )));
        }
    }
    Ok(())
}

/// Recomputes `S = G (A v - 1/v)` everywhere from the conformation field.
pub fn sync_stress_from_conformation(field: &mut StateField, p: &PhysParams) -> Result<()> {
    let g = p
        .g
        .ok_or_else(|| Error::Validation("phys.g required to sync stress".into()))?;
    let a = field
        .a_conf
        .as_ref()
        .ok_or_else(|| Error::Validation("conformation field not present".into()))?;
    for i in 0..field.v.len() {
        field.s[i] = neo_hookean_stress(a[i], field.v[i], g)?;
    }
    Ok(())
}

/// CFL time step from the numerically computed characteristic speeds,
/// capped by `dt_max` and by the remaining time to `t_end`.
pub fn cfl_dt(
    field: &StateField,
    p: &PhysParams,
    grid: &GridSpec,
    control: &StepControl,
    variant: Variant,
) -> Result<f64> {
    check_admissible(field, p, "cfl")?;
    let mut smax: f64 = 0.0;
    for i in 0..field.len() {
        let w = CellState {
            v: field.v[i],
            u: field.u[i],
            s: field.s[i],
        };
        let speeds = if variant.is_neo() {
            let p_cell = PhysParams {
                mu: variant.mu_at(p, w.v),
                ..*p
            };
            characteristic_speeds(&w, &p_cell)
        } else {
            characteristic_speeds(&w, p)
        };
        // states that are admissible but astronomically large overflow the
        // eigensolver; report that as breakdown, not an internal bug
        let speeds = speeds.map_err(|_| Error::Breakdown {
            time: field.t,
            stage: "cfl",
            cell: i,
            reason: format!("characteristic speeds overflow at state {w:?}"),
        })?;
        smax = smax.max(speeds[0].abs()).max(speeds[2].abs());
    }
    if !(smax > 0.0) {
        return Err(Error::Internal(
            "vanishing maximal characteristic speed on an admissible field".into(),
        ));
    }
    let mut dt = control.cfl * grid.dx() / smax;
    dt = dt.min(control.dt_max);
    let remaining = control.t_end - field.t;
    if remaining > 0.0 {
        dt = dt.min(remaining);
    }
    Ok(dt)
}

fn rk2_transport(
    field: &mut StateField,
    p: &PhysParams,
    grid: &GridSpec,
    control: &StepControl,
    variant: Variant,
    dt: f64,
) -> Result<()> {
    let n = field.len();
    let conformation = matches!(variant, Variant::NeoConformation);

    // Heun / SSP-RK2: w1 = w + dt F(w); w_new = (w + w1 + dt F(w1)) / 2.
    let r0 = transport_rhs(field, p, grid, control)?;
    let mut stage = field.clone();
    for i in 0..n {
        stage.v[i] += dt * r0.dv[i];
        stage.u[i] += dt * r0.du[i];
        if !conformation {
            stage.s[i] += dt * r0.ds[i];
        }
    }
    if conformation {
        sync_stress_from_conformation(&mut stage, p)?;
    }
    let r1 = transport_rhs(&stage, p, grid, control)?;
    for i in 0..n {
        field.v[i] = 0.5 * (field.v[i] + stage.v[i] + dt * r1.dv[i]);
        field.u[i] = 0.5 * (field.u[i] + stage.u[i] + dt * r1.du[i]);
        if !conformation {
            field.s[i] = 0.5 * (field.s[i] + stage.s[i] + dt * r1.ds[i]);
        }
    }
    if conformation {
        sync_stress_from_conformation(field, p)?;
    }
    Ok(())
}

/// One Strang step: half relaxation, full SSP-RK2 transport, half relaxation.
/// Second order in dt for smooth solutions. Returns the clamp count of the
/// relaxation substeps.
pub fn strang_step(
    field: &mut StateField,
    p: &PhysParams,
    grid: &GridSpec,
    control: &StepControl,
    variant: Variant,
    dt: f64,
) -> Result<usize> {
    let mut clamped = 0;
    let half = 0.5 * dt;

    match variant {
        Variant::Standard => {
            clamped += relaxation_substep(field, p, grid, control, variant, half)?;
        }
        Variant::NeoStress => {
            clamped += relaxation_substep(field, p, grid, control, variant, half)?;
            if field.a_conf.is_some() {
                update_conformation(field, p, half)?;
            }
        }
        Variant::NeoConformation => {
            update_conformation(field, p, half)?;
            sync_stress_from_conformation(field, p)?;
        }
    }
    check_admissible(field, p, "relaxation")?;

    rk2_transport(field, p, grid, control, variant, dt)?;
    check_admissible(field, p, "transport")?;

    match variant {
        Variant::Standard => {
            clamped += relaxation_substep(field, p, grid, control, variant, half)?;
        }
        Variant::NeoStress => {
            clamped += relaxation_substep(field, p, grid, control, variant, half)?;
            if field.a_conf.is_some() {
                update_conformation(field, p, half)?;
            }
        }
        Variant::NeoConformation => {
            update_conformation(field, p, half)?;
            sync_stress_from_conformation(field, p)?;
        }
    }
    check_admissible(field, p, "relaxation")?;

    field.t += dt;
    Ok(clamped)
}

/// A state snapshot recorded at a sink time.
#[derive(Clone, Debug)]
pub struct RunSample {
    pub t: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub a_conf: Option<Vec<f64>>,
}

impl RunSample {
    fn of(field: &StateField) -> RunSample {
        RunSample {
            t: field.t,
            v: field.v.clone(),
            u: field.u.clone(),
            s: field.s.clone(),
            a_conf: field.a_conf.clone(),
        }
    }
}

/// Record of an admissibility loss or non-finite value during a run.
#[derive(Clone, Debug, Serialize)]
pub struct BreakdownRecord {
    pub time: f64,
    pub stage: String,
    pub cell: usize,
    pub reason: String,
}

/// Output of a full run: snapshots at the sink cadence, the final (or last
/// valid) field, and the breakdown record when the run stopped early.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub samples: Vec<RunSample>,
    pub final_field: StateField,
    pub breakdown: Option<BreakdownRecord>,
    pub steps: usize,
    pub clamped: usize,
}

impl RunOutput {
    pub fn broke_down(&self) -> bool {
        self.breakdown.is_some()
    }
}

/// Advances the relaxed system to `t_end`, recording snapshots at the sink
/// cadence (samples per unit time). Sample times are `k / cadence`, shared by
/// every run with the same cadence so sweep error norms never interpolate in
/// time. On breakdown the partial output is returned, flagged.
pub fn run_relaxed(
    initial: StateField,
    p: &PhysParams,
    grid: &GridSpec,
    control: &StepControl,
    variant: Variant,
    cadence: f64,
) -> Result<RunOutput> {
    p.validate()?;
    grid.validate()?;
    control.validate()?;
    variant.validate(p)?;
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
    if let Err(Error::Breakdown {
        time,
        stage,
        cell,
        reason,
    }) = check_admissible(&initial, p, "initial")
    {
        // inadmissible data is a flagged outcome, not a hard error, so
        // threshold probes can record it like any mid-run breakdown
        return Ok(RunOutput {
            samples: vec![RunSample::of(&initial)],
            final_field: initial,
            breakdown: Some(BreakdownRecord {
                time,
                stage: stage.to_string(),
                cell,
                reason,
            }),
            steps: 0,
            clamped: 0,
        });
    }

    let mut field = initial;
    let sample_dt = 1.0 / cadence;
    let mut samples = vec![RunSample::of(&field)];
    let mut k = 1usize;
    let mut t_next = (k as f64 * sample_dt).min(control.t_end);
    let mut steps = 0usize;
    let mut clamped = 0usize;
    let eps = 1e-12 * control.t_end.max(1.0);

    while field.t < control.t_end - eps {
        let step = (|| -> Result<usize> {
            let mut dt = cfl_dt(&field, p, grid, control, variant)?;
            dt = dt.min(t_next - field.t).max(0.0);
            if dt <= 0.0 {
                return Err(Error::Internal("non-positive time step".into()));
            }
            strang_step(&mut field, p, grid, control, variant, dt)
        })();
        match step {
            Ok(c) => clamped += c,
            Err(Error::Breakdown {
                time,
                stage,
                cell,
                reason,
            }) => {
                return Ok(RunOutput {
                    samples,
                    final_field: field,
                    breakdown: Some(BreakdownRecord {
                        time,
                        stage: stage.to_string(),
                        cell,
                        reason,
                    }),
                    steps,
                    clamped,
                });
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        if field.t >= t_next - eps {
            field.t = t_next;
            samples.push(RunSample::of(&field));
            k += 1;
            t_next = (k as f64 * sample_dt).min(control.t_end);
        }
    }
    Ok(RunOutput {
        final_field: field,
        samples,
        breakdown: None,
        steps,
        clamped,
    })
}
