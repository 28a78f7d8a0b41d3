//! Numerical experiments: relaxation-limit tau sweep against the
//! Navier-Stokes reference, grid self-convergence, empirical stability
//! threshold, initial-layer measurement for ill-prepared data, Neo-Hookean
//! G-sweep, and the breakdown probe.
//!
//! Every sweep constructs its initial data once per grid and reuses it
//! bit-identically across parameter points; error norms are only ever taken
//! on coincident sample times (shared cadence), never interpolated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::diagnostics::{apriori_residual, stress_defect_l2};
use crate::error::{Error, Result};
use crate::grid::{d1, l2_norm, GridSpec, NsField, StateField};
use crate::model::{conformation_from_stress, PhysParams};
use crate::ns::{run_ns, NsRunOutput, ViscosityLaw};
use crate::relaxed::{run_relaxed, BreakdownRecord, RunOutput, RunSample, StepControl, Variant};

/// Initial-data family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GaussianBump,
    #[default]
    SingleMode,
    CustomTable,
}

/// Whether the initial stress starts on the limit manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Preparation {
    /// `S0 = mu_eff D(u0) / v0`: no initial layer.
    #[default]
    WellPrepared,
    /// `S0 = 0` (or a user table): relaxes in an O(tau) layer.
    IllPrepared,
}

/// Recipe for periodic smooth initial fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialDataSpec {
    pub family: Family,
    /// Velocity perturbation amplitude.
    pub amplitude: f64,
    /// Volume perturbation amplitude; defaults to `amplitude` when absent.
    pub v_amplitude: Option<f64>,
    /// Gaussian bump width sigma.
    pub width: f64,
    /// Mode number of the single-mode family.
    pub mode: u32,
    pub preparation: Preparation,
    /// Tables for the custom-table family (lengths must match the grid).
    pub custom_v: Option<Vec<f64>>,
    pub custom_u: Option<Vec<f64>>,
    /// Overrides the preparation rule for S0 when present.
    pub custom_s: Option<Vec<f64>>,
    /// Seeded uniform noise added to u (the only randomness in the artifact).
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        InitialDataSpec {
            family: Family::SingleMode,
            amplitude: 1e-3,
            v_amplitude: None,
            width: 0.5,
            mode: 1,
            preparation: Preparation::WellPrepared,
            custom_v: None,
            custom_u: None,
            custom_s: None,
            noise_amplitude: 0.0,
            seed: 0,
        }
    }
}

impl InitialDataSpec {
    pub fn validate(&self) -> Result<()> {
        if self.amplitude < 0.0 {
            return Err(Error::Validation(format!(
                "initial.amplitude must be nonnegative, got {}",
                self.amplitude
            )));
        }
        if self.family == Family::GaussianBump && !(self.width > 0.0) {
            return Err(Error::Validation(format!(
                "initial.width must be positive, got {}",
                self.width
            )));
        }
        if self.family == Family::SingleMode && self.mode == 0 {
            return Err(Error::Validation("initial.mode must be >= 1".into()));
        }
        if self.noise_amplitude < 0.0 {
            return Err(Error::Validation(format!(
                "initial.noise_amplitude must be nonnegative, got {}",
                self.noise_amplitude
            )));
        }
        if self.family == Family::CustomTable && self.custom_v.is_none() && self.custom_u.is_none()
        {
            return Err(Error::Validation(
                "initial.custom-table needs custom_v and/or custom_u".into(),
            ));
        }
        Ok(())
    }
}

/// Builds periodic smooth initial fields from a spec. Well-prepared data gets
/// `S0` consistent with the limit identification; the Neo-Hookean variants
/// also get a conformation field consistent with `S0`.
pub fn make_initial(
    spec: &InitialDataSpec,
    grid: &GridSpec,
    p: &PhysParams,
    variant: Variant,
) -> Result<StateField> {
    spec.validate()?;
    grid.validate()?;
    let n = grid.cells;
    let x = grid.points();
    let eps_u = spec.amplitude;
    let eps_v = spec.v_amplitude.unwrap_or(spec.amplitude);

    let shape: Vec<f64> = match spec.family {
        Family::SingleMode => {
            let k = spec.mode as f64 * std::f64::consts::PI / grid.half_length;
            x.iter().map(|x| (k * x).sin()).collect()
        }
        Family::GaussianBump => {
            let s2 = 2.0 * spec.width * spec.width;
            x.iter().map(|x| (-x * x / s2).exp()).collect()
        }
        Family::CustomTable => vec![0.0; n],
    };

    let v: Vec<f64>;
    let mut u: Vec<f64>;
    match spec.family {
        Family::CustomTable => {
            let check = |t: &Option<Vec<f64>>, name: &str| -> Result<()> {
                if let Some(t) = t {
                    if t.len() != n {
                        return Err(Error::Validation(format!(
                            "initial.{name} has {} entries, grid has {n}",
                            t.len()
                        )));
                    }
                }
                Ok(())
            };
            check(&spec.custom_v, "custom_v")?;
            check(&spec.custom_u, "custom_u")?;
            check(&spec.custom_s, "custom_s")?;
            v = spec.custom_v.clone().unwrap_or_else(|| vec![1.0; n]);
            u = spec.custom_u.clone().unwrap_or_else(|| vec![0.0; n]);
        }
        _ => {
            v = shape.iter().map(|s| 1.0 + eps_v * s).collect();
            u = shape.iter().map(|s| eps_u * s).collect();
        }
    }
    if spec.noise_amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for ui in u.iter_mut() {
            *ui += spec.noise_amplitude * rng.gen_range(-1.0..1.0);
        }
    }
    for (i, &vi) in v.iter().enumerate() {
        if !(vi > 0.0) {
            return Err(Error::Validation(format!(
                "initial amplitude too large: v0 = {vi} <= 0 at cell {i}"
            )));
        }
    }

    let s: Vec<f64> = if let Some(table) = &spec.custom_s {
        table.clone()
    } else {
        match spec.preparation {
            Preparation::IllPrepared => vec![0.0; n],
            Preparation::WellPrepared => {
                let ux = d1(&u, grid.dx());
                (0..n)
                    .map(|i| variant.mu_at(p, v[i]) * ux[i] / v[i])
                    .collect()
            }
        }
    };

    let a_conf = if variant.is_neo() {
        let g = p.g.ok_or_else(|| {
            Error::Validation("Neo-Hookean initial data requires phys.g".into())
        })?;
        Some(
            (0..n)
                .map(|i| conformation_from_stress(s[i], v[i], g))
                .collect::<Result<Vec<f64>>>()?,
        )
    } else {
        None
    };

    Ok(StateField {
        v,
        u,
        s,
        a_conf,
        t: 0.0,
    })
}

/// Ordered map over parameter indices, optionally on several workers.
/// The reduction is by index, so results are deterministic regardless of the
/// worker count.
fn par_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(count.max(1));
    if workers <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= count {
                    break;
                }
                let out = f(i);
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|x| x.unwrap())
        .collect()
}

/// One parameter point of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    /// Max over coincident sample times of the L2 state error against the
    /// reference, `||(v - v0, u - u0)||_{L2}`.
    pub state_error: f64,
    /// Final-time L2 state error.
    pub final_error: f64,
    /// Max over sample times (past the layer-skip horizon) of the L2 stress
    /// defect `||S - mu_eff D(u)/v||_{L2}`.
    pub stress_defect: f64,
    /// Sup over time of the a priori energy ratio; bounded uniformly in the
    /// parameter when the uniform estimate holds. None on the equilibrium.
    pub apriori_sup: Option<f64>,
    pub breakdown: Option<BreakdownRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Fitted log-log slope of the state error (>= 3 finite points).
    pub state_slope: Option<f64>,
    pub defect_slope: Option<f64>,
    pub state_monotone: bool,
    pub defect_monotone: bool,
    /// True when a run broke down and the sweep stopped early.
    pub aborted: bool,
}

fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

fn state_error(a: &RunSample, b: &RunSample, dx: f64) -> f64 {
    let dv: Vec<f64> = a.v.iter().zip(&b.v).map(|(x, y)| x - y).collect();
    let du: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
    (l2_norm(&dv, dx).powi(2) + l2_norm(&du, dx).powi(2)).sqrt()
}

fn check_coincident(a: &[RunSample], b: &[RunSample]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Internal(format!(
            "sample counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    for (x, y) in a.iter().zip(b) {
        if (x.t - y.t).abs() > 1e-10 {
            return Err(Error::Internal(format!(
                "non-coincident sample times {} vs {}",
                x.t, y.t
            )));
        }
    }
    Ok(())
}

fn monotone_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn sweep_report_from(params: Vec<f64>, results: Vec<Result<SweepPoint>>) -> Result<SweepReport> {
    let mut points = Vec::new();
    let mut aborted = false;
    for r in results {
        match r {
            Ok(pt) => {
                aborted |= pt.breakdown.is_some();
                points.push(pt);
            }
            Err(e) => return Err(e),
        }
    }
    let ok: Vec<&SweepPoint> = points.iter().filter(|p| p.breakdown.is_none()).collect();
    let xs: Vec<f64> = ok.iter().map(|p| p.param).collect();
    let es: Vec<f64> = ok.iter().map(|p| p.state_error).collect();
    let ds: Vec<f64> = ok.iter().map(|p| p.stress_defect).collect();
    let _ = params;
    Ok(SweepReport {
        state_slope: fit_loglog(&xs, &es),
        defect_slope: fit_loglog(&xs, &ds),
        state_monotone: !ok.is_empty() && monotone_decreasing(&es),
        defect_monotone: !ok.is_empty() && monotone_decreasing(&ds),
        aborted,
        points,
    })
}

fn validate_descending(taus: &[f64]) -> Result<()> {
    if taus.len() < 3 {
        return Err(Error::Validation(format!(
            "sweep needs at least 3 parameter values, got {}",
            taus.len()
        )));
    }
    for w in taus.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Validation(format!(
                "sweep parameters must be strictly descending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Relaxation-limit sweep: runs the relaxed system for each tau (descending)
/// against a single Navier-Stokes reference on the same grid and cadence.
/// `ns_control` lets the reference use a smaller dt cap than the stiff runs.
pub fn tau_sweep(
    spec: &InitialDataSpec,
    grid: &GridSpec,
    p_base: &PhysParams,
    taus: &[f64],
    control: &StepControl,
    ns_control: &StepControl,
    cadence: f64,
    workers: usize,
) -> Result<SweepReport> {
    validate_descending(taus)?;
    for &t in taus {
        if !(t > 0.0) {
            return Err(Error::Validation(format!("tau must be positive, got {t}")));
        }
    }
    let initial = make_initial(spec, grid, p_base, Variant::Standard)?;
    let ns0 = NsField {
        v: initial.v.clone(),
        u: initial.u.clone(),
        t: 0.0,
    };
    let law = ViscosityLaw::Constant(p_base.mu);
    let reference = run_ns(ns0, p_base, &law, grid, ns_control, cadence)?;
    if reference.breakdown.is_some() {
        return Err(Error::Validation(
            "Navier-Stokes reference run broke down".into(),
        ));
    }
    let t_skip = |tau: f64| match spec.preparation {
        Preparation::WellPrepared => 0.0,
        Preparation::IllPrepared => 10.0 * tau,
    };
    let dx = grid.dx();
    let results = par_map(taus.len(), workers, |i| -> Result<SweepPoint> {
        let tau = taus[i];
        let p = PhysParams { tau, ..*p_base };
        let out = run_relaxed(initial.clone(), &p, grid, control, Variant::Standard, cadence)?;
        if let Some(b) = out.breakdown {
            return Ok(SweepPoint {
                param: tau,
                state_error: f64::NAN,
                final_error: f64::NAN,
                stress_defect: f64::NAN,
                apriori_sup: None,
                breakdown: Some(b),
            });
        }
        check_coincident(&out.samples, &reference.samples)?;
        let mut e = 0.0f64;
        let mut d = 0.0f64;
        for (s, r) in out.samples.iter().zip(&reference.samples) {
            e = e.max(state_error(s, r, dx));
            if s.t >= t_skip(tau) {
                d = d.max(stress_defect_l2(s, &p, grid));
            }
        }
        let final_err = state_error(
            out.samples.last().unwrap(),
            reference.samples.last().unwrap(),
            dx,
        );
        Ok(SweepPoint {
            param: tau,
            state_error: e,
            final_error: final_err,
            stress_defect: d,
            apriori_sup: apriori_residual(&out.samples, &p, grid)
                .ok()
                .map(|r| r.iter().fold(0.0f64, |m, &x| m.max(x))),
            breakdown: None,
        })
    });
    sweep_report_from(taus.to_vec(), results)
}

/// Neo-Hookean sweep: for each elastic modulus G (increasing), runs the
/// conformation-formulation solver with tau = mu_bar / G and a = 1/2 against
/// the Navier-Stokes reference with the limit viscosity mu_eff(v) = mu_bar/v.
pub fn neo_hookean_sweep(
    spec: &InitialDataSpec,
    grid: &GridSpec,
    p_base: &PhysParams,
    mu_bar: f64,
    gs: &[f64],
    control: &StepControl,
    ns_control: &StepControl,
    cadence: f64,
    workers: usize,
) -> Result<SweepReport> {
    if gs.len() < 3 {
        return Err(Error::Validation(format!(
            "G sweep needs at least 3 values, got {}",
            gs.len()
        )));
    }
    for w in gs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation(format!(
                "G values must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !(mu_bar > 0.0) {
        return Err(Error::Validation(format!(
            "mu_bar must be positive, got {mu_bar}"
        )));
    }
    // the velocity/volume seed is shared; S0 and A0 depend on (G, tau) via
    // the preparation rule
    let base_spec = spec.clone();
    let ns0_spec = make_initial(spec, grid, p_base, Variant::Standard)?;
    let ns0 = NsField {
        v: ns0_spec.v.clone(),
        u: ns0_spec.u.clone(),
        t: 0.0,
    };
    let law = ViscosityLaw::NeoLimit(mu_bar);
    let reference = run_ns(ns0, p_base, &law, grid, ns_control, cadence)?;
    if reference.breakdown.is_some() {
        return Err(Error::Validation(
            "Navier-Stokes reference run broke down".into(),
        ));
    }
    let dx = grid.dx();
    let results = par_map(gs.len(), workers, |i| -> Result<SweepPoint> {
        let g = gs[i];
        let p = PhysParams {
            tau: mu_bar / g,
            a: 0.5,
            g: Some(g),
            ..*p_base
        };
        let initial = make_initial(&base_spec, grid, &p, Variant::NeoConformation)?;
        let out = run_relaxed(
            initial,
            &p,
            grid,
            control,
            Variant::NeoConformation,
            cadence,
        )?;
        if let Some(b) = out.breakdown {
            return Ok(SweepPoint {
                param: g,
                state_error: f64::NAN,
                final_error: f64::NAN,
                stress_defect: f64::NAN,
                apriori_sup: None,
                breakdown: Some(b),
            });
        }
        check_coincident(&out.samples, &reference.samples)?;
        let mut e = 0.0f64;
        let mut d = 0.0f64;
        for (s, r) in out.samples.iter().zip(&reference.samples) {
            e = e.max(state_error(s, r, dx));
            d = d.max(stress_defect_l2(s, &p, grid));
        }
        let final_err = state_error(
            out.samples.last().unwrap(),
            reference.samples.last().unwrap(),
            dx,
        );
        Ok(SweepPoint {
            param: g,
            state_error: e,
            final_error: final_err,
            stress_defect: d,
            apriori_sup: apriori_residual(&out.samples, &p, grid)
                .ok()
                .map(|r| r.iter().fold(0.0f64, |m, &x| m.max(x))),
            breakdown: None,
        })
    });
    sweep_report_from(gs.to_vec(), results)
}

/// Max over a run's samples of the cell-wise consistency defect
/// `|S - G(A v - 1/v)|`; None when the run carries no conformation field.
pub fn max_consistency_defect(out: &RunOutput, g: f64) -> Option<f64> {
    let mut worst: f64 = 0.0;
    for s in &out.samples {
        let a = s.a_conf.as_ref()?;
        for i in 0..s.v.len() {
            let v = s.v[i];
            worst = worst.max((s.s[i] - g * (a[i] * v - 1.0 / v)).abs());
        }
    }
    Some(worst)
}

/// One tau point of the initial-layer probe.
#[derive(Clone, Debug, Serialize)]
pub struct LayerPoint {
    pub tau: f64,
    /// First sample time at which the stress defect fell below half of its
    /// initial value; None when censored.
    pub t_star: Option<f64>,
    /// `t_star / tau`; ln 2 for the frozen-coefficient scalar model.
    pub ratio: Option<f64>,
    pub censored: bool,
    /// Horizon actually integrated for this tau.
    pub horizon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerReport {
    pub points: Vec<LayerPoint>,
}

/// Measures the O(tau) relaxation layer of ill-prepared data: for each tau
/// the run is sampled at tau/20 and `t*` is the first time the L2 stress
/// defect halves. Well-prepared data (defect starting at ~0) is censored.
pub fn initial_layer_probe(
    spec: &InitialDataSpec,
    grid: &GridSpec,
    p_base: &PhysParams,
    taus: &[f64],
    control: &StepControl,
    workers: usize,
) -> Result<LayerReport> {
    validate_descending(taus)?;
    let initial = make_initial(spec, grid, p_base, Variant::Standard)?;
    let results = par_map(taus.len(), workers, |i| -> Result<LayerPoint> {
        let tau = taus[i];
        let p = PhysParams { tau, ..*p_base };
        let horizon = (20.0 * tau).min(control.t_end);
        let probe_control = StepControl {
            t_end: horizon,
            ..*control
        };
        let cadence = 20.0 / tau;
        let out = run_relaxed(
            initial.clone(),
            &p,
            grid,
            &probe_control,
            Variant::Standard,
            cadence,
        )?;
        let defect0 = stress_defect_l2(&out.samples[0], &p, grid);
        let scale = l2_norm(&out.samples[0].u, grid.dx()).max(1e-300);
        if defect0 <= 1e-10 * scale {
            // degenerate: data already on the limit manifold
            return Ok(LayerPoint {
                tau,
                t_star: None,
                ratio: None,
                censored: true,
                horizon,
            });
        }
        let mut t_star = None;
        for s in &out.samples[1..] {
            if stress_defect_l2(s, &p, grid) <= 0.5 * defect0 {
                t_star = Some(s.t);
                break;
            }
        }
        Ok(LayerPoint {
            tau,
            t_star,
            ratio: t_star.map(|t| t / tau),
            censored: t_star.is_none(),
            horizon,
        })
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(LayerReport { points })
}

/// Outcome of one amplitude in the threshold probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeOutcome {
    pub epsilon: f64,
    pub completed: bool,
    pub breakdown: Option<BreakdownRecord>,
    pub min_v: f64,
    pub min_margin: f64,
    /// Max over samples of max|D(u)| divided by its initial value.
    pub max_ux_growth: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    pub outcomes: Vec<ProbeOutcome>,
    /// Largest amplitude that completed.
    pub eps_ok: Option<f64>,
    /// Smallest amplitude that broke down.
    pub eps_break: Option<f64>,
}

/// Amplitude-ladder probe of the empirical stability window. Deterministic:
/// runs every ladder value, records completion or the breakdown record.
pub fn threshold_probe(
    spec: &InitialDataSpec,
    grid: &GridSpec,
    p: &PhysParams,
    ladder: &[f64],
    control: &StepControl,
    workers: usize,
) -> Result<ThresholdReport> {
    if ladder.is_empty() {
        return Err(Error::Validation("threshold ladder is empty".into()));
    }
    for w in ladder.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation(format!(
                "threshold ladder must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let dx = grid.dx();
    let outcomes = par_map(ladder.len(), workers, |i| -> Result<ProbeOutcome> {
        let eps = ladder[i];
        let run_spec = InitialDataSpec {
            amplitude: eps,
            ..spec.clone()
        };
        let initial = match make_initial(&run_spec, grid, p, Variant::Standard) {
            Ok(f) => f,
            Err(Error::Validation(msg)) => {
                // inadmissible initial data counts as breakdown at t = 0
                return Ok(ProbeOutcome {
                    epsilon: eps,
                    completed: false,
                    breakdown: Some(BreakdownRecord {
                        time: 0.0,
                        stage: "initial".into(),
                        cell: 0,
                        reason: msg,
                    }),
                    min_v: f64::NAN,
                    min_margin: f64::NAN,
                    max_ux_growth: f64::NAN,
                });
            }
            Err(e) => return Err(e),
        };
        let out = run_relaxed(initial, p, grid, control, Variant::Standard, 20.0)?;
        let mut min_v = f64::INFINITY;
        let mut min_margin = f64::INFINITY;
        let mut max_ux: f64 = 0.0;
        let mut ux0: f64 = 0.0;
        for (k, s) in out.samples.iter().enumerate() {
            for i in 0..s.v.len() {
                min_v = min_v.min(s.v[i]);
                min_margin = min_margin.min(2.0 * p.tau * p.a * s.s[i] + p.mu);
            }
            let ux = d1(&s.u, dx).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if k == 0 {
                ux0 = ux;
            }
            max_ux = max_ux.max(ux);
        }
        Ok(ProbeOutcome {
            epsilon: eps,
            completed: out.breakdown.is_none(),
            breakdown: out.breakdown,
            min_v,
            min_margin,
            max_ux_growth: if ux0 > 0.0 { max_ux / ux0 } else { max_ux },
        })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let eps_ok = outcomes
        .iter()
        .filter(|o| o.completed)
        .map(|o| o.epsilon)
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
    let eps_break = outcomes
        .iter()
        .filter(|o| !o.completed)
        .map(|o| o.epsilon)
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.min(e))));
    Ok(ThresholdReport {
        outcomes,
        eps_ok,
        eps_break,
    })
}

/// Which solver the grid-convergence harness exercises.
#[derive(Clone, Copy, Debug)]
pub enum ConvergenceTarget {
    Relaxed(Variant),
    /// Navier-Stokes with the given law; `dt0` is the fixed step on the
    /// coarsest grid, scaled by 1/4 per refinement (dt proportional to dx^2).
    Ns { law: ViscosityLaw, dt0: Option<f64> },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub cells: [usize; 3],
    /// Coarse-vs-medium and medium-vs-fine L2 differences per variable.
    pub errors_v: [f64; 2],
    pub errors_u: [f64; 2],
    pub errors_s: Option<[f64; 2]>,
    pub order_v: Option<f64>,
    pub order_u: Option<f64>,
    pub order_s: Option<f64>,
    /// All differences at round-off: the run is exact (e.g. equilibrium).
    pub exact: bool,
}

fn restrict(fine: &[f64], factor: usize) -> Vec<f64> {
    fine.iter().step_by(factor).copied().collect()
}

fn diff_l2(coarse: &[f64], fine: &[f64], factor: usize, dx: f64) -> f64 {
    let r = restrict(fine, factor);
    let d: Vec<f64> = coarse.iter().zip(&r).map(|(a, b)| a - b).collect();
    l2_norm(&d, dx)
}

fn richardson_order(e: [f64; 2]) -> Option<f64> {
    if e[0] > 1e-13 && e[1] > 1e-13 {
        Some((e[0] / e[1]).log2())
    } else {
        None
    }
}

/// Three-grid Richardson self-convergence at the final time. The grids must
/// be nested (same domain, cells doubling).
pub fn grid_convergence(
    spec: &InitialDataSpec,
    p: &PhysParams,
    grids: &[GridSpec; 3],
    control: &StepControl,
    target: ConvergenceTarget,
) -> Result<ConvergenceReport> {
    for w in grids.windows(2) {
        if w[1].cells != 2 * w[0].cells || (w[1].half_length - w[0].half_length).abs() > 1e-14 {
            return Err(Error::Validation(format!(
                "convergence grids must be nested with doubling cells, got {} then {}",
                w[0].cells, w[1].cells
            )));
        }
    }

    let mut finals: Vec<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> = Vec::new();
    for (level, grid) in grids.iter().enumerate() {
        match target {
            ConvergenceTarget::Relaxed(variant) => {
                let initial = make_initial(spec, grid, p, variant)?;
                let out = run_relaxed(initial, p, grid, control, variant, 1.0 / control.t_end)?;
                if let Some(b) = out.breakdown {
                    return Err(Error::Validation(format!(
                        "convergence run broke down at t = {} ({})",
                        b.time, b.reason
                    )));
                }
                let f = out.final_field;
                finals.push((f.v, f.u, Some(f.s)));
            }
            ConvergenceTarget::Ns { law, dt0 } => {
                let initial = make_initial(spec, grid, p, Variant::Standard)?;
                let ns0 = NsField {
                    v: initial.v,
                    u: initial.u,
                    t: 0.0,
                };
                let mut c = *control;
                if let Some(dt0) = dt0 {
                    c.dt_max = dt0 / 4.0f64.powi(level as i32);
                }
                let out: NsRunOutput = run_ns(ns0, p, &law, grid, &c, 1.0 / control.t_end)?;
                if out.breakdown.is_some() {
                    return Err(Error::Validation("convergence NS run broke down".into()));
                }
                finals.push((out.final_field.v, out.final_field.u, None));
            }
        }
    }

    let dx0 = grids[0].dx();
    let dx1 = grids[1].dx();
    let ev = [
        diff_l2(&finals[0].0, &finals[1].0, 2, dx0),
        diff_l2(&finals[1].0, &finals[2].0, 2, dx1),
    ];
    let eu = [
        diff_l2(&finals[0].1, &finals[1].1, 2, dx0),
        diff_l2(&finals[1].1, &finals[2].1, 2, dx1),
    ];
    let es = match (&finals[0].2, &finals[1].2, &finals[2].2) {
        (Some(a), Some(b), Some(c)) => Some([diff_l2(a, b, 2, dx0), diff_l2(b, c, 2, dx1)]),
        _ => None,
    };
    let exact = ev.iter().all(|e| *e < 1e-13)
        && eu.iter().all(|e| *e < 1e-13)
        && es.map_or(true, |e| e.iter().all(|e| *e < 1e-13));
    Ok(ConvergenceReport {
        cells: [grids[0].cells, grids[1].cells, grids[2].cells],
        order_v: richardson_order(ev),
        order_u: richardson_order(eu),
        order_s: es.and_then(richardson_order),
        errors_v: ev,
        errors_u: eu,
        errors_s: es,
        exact,
    })
}
