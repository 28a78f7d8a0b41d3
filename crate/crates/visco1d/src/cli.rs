//! Batch CLI: loads a TOML config, applies `--set` overrides, dispatches one
//! experiment, and writes deterministic CSV/JSON outputs.
//!
//! Exit codes: 0 success, 2 validation failure, 3 breakdown during a run,
//! 4 internal error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{apply_overrides, parse_config, serialize_config, RunConfig};
use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};
use crate::experiments::{
    grid_convergence, initial_layer_probe, make_initial, neo_hookean_sweep, tau_sweep,
    threshold_probe, ConvergenceTarget,
};
use crate::grid::NsField;
use crate::model::{admissibility_scan, characteristic_speeds, symmetrizer, CellState};
use crate::ns::{run_ns, ViscosityLaw};
use crate::output::{
    series_csv, snapshot_csv, summary_json, write_file, write_meta, RunMeta,
};
use crate::relaxed::{run_relaxed, RunSample, StepControl};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "visco1d",
    about = "1-D compressible viscoelastic flow lab: relaxed stress system, \
             its Navier-Stokes limit, and verification experiments",
    version
)]
pub struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override a config key, e.g. --set phys.tau=0.05 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output directory; overrides output.dir from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate the relaxed system and write the diagnostics series.
    Run,
    /// Integrate the Navier-Stokes limit system.
    RunNs,
    /// Relaxation-limit sweep over experiment.taus against the NS reference.
    SweepTau,
    /// Neo-Hookean sweep over experiment.gs with G*tau = mu_bar fixed.
    SweepNeo,
    /// Three-grid Richardson self-convergence study.
    Converge {
        /// Which solver to refine: "relaxed" or "ns".
        #[arg(long, default_value = "relaxed")]
        solver: String,
    },
    /// Amplitude-ladder probe of the breakdown threshold.
    ProbeThreshold,
    /// Initial-layer probe for ill-prepared data over experiment.taus.
    ProbeLayer,
    /// Print symmetrizer matrices, characteristic speeds and admissibility
    /// for a single state.
    InspectModel {
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    run_cli(cli)
}

pub fn run_cli(cli: Cli) -> i32 {
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Config { .. } | Error::Size(_) | Error::Domain(_) => {
            EXIT_VALIDATION
        }
        Error::Breakdown { .. } | Error::Inadmissible { .. } => EXIT_BREAKDOWN,
        _ => EXIT_INTERNAL,
    }
}

fn load_config(cli: &Cli) -> Result<(RunConfig, Vec<String>)> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let text = if cli.overrides.is_empty() {
        text
    } else {
        apply_overrides(&text, &cli.overrides)?
    };
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    let warnings = cfg.validate()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok((cfg, warnings))
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::InspectModel { v, u, s } => {
            // inspect-model needs no output directory, only phys
            let (cfg, _) = load_config(cli)?;
            inspect_model(&cfg, *v, *u, *s)
        }
        cmd => {
            let (cfg, warnings) = load_config(cli)?;
            let dir = PathBuf::from(&cfg.output.dir);
            match cmd {
                Command::Run => cmd_run(&cfg, &warnings, &dir),
                Command::RunNs => cmd_run_ns(&cfg, &warnings, &dir),
                Command::SweepTau => cmd_sweep_tau(&cfg, &warnings, &dir),
                Command::SweepNeo => cmd_sweep_neo(&cfg, &warnings, &dir),
                Command::Converge { solver } => cmd_converge(&cfg, &warnings, &dir, solver),
                Command::ProbeThreshold => cmd_probe_threshold(&cfg, &warnings, &dir),
                Command::ProbeLayer => cmd_probe_layer(&cfg, &warnings, &dir),
                Command::InspectModel { .. } => unreachable!(),
            }
        }
    }
}

fn inspect_model(cfg: &RunConfig, v: f64, u: f64, s: f64) -> Result<i32> {
    let w = CellState { v, u, s };
    let p = &cfg.phys;
    let trip = symmetrizer(&w, p)?;
    let speeds = characteristic_speeds(&w, p)?;
    println!("state: v = {v}, u = {u}, S = {s}");
    println!(
        "admissible: {} (margin 2*tau*a*S + mu = {})",
        w.is_admissible(p),
        w.margin(p)
    );
    let show = |name: &str, m: &[[f64; 3]; 3]| {
        println!("{name}:");
        for row in m {
            println!("  [{:>24} {:>24} {:>24}]", row[0], row[1], row[2]);
        }
    };
    show("A0 (symmetrizer)", &trip.a0);
    show("A1 (symmetrized flux)", &trip.a1);
    show("B (dissipation)", &trip.bmat);
    println!("characteristic speeds: {} {} {}", speeds[0], speeds[1], speeds[2]);
    Ok(EXIT_OK)
}

fn snapshot_name(t: f64) -> String {
    // file-name-safe: 0.25 -> snapshot_t0p25.csv
    format!("snapshot_t{}.csv", format!("{t}").replace('.', "p").replace('-', "m"))
}

fn write_snapshots(
    cfg: &RunConfig,
    samples: &[RunSample],
    dir: &Path,
) -> Result<Vec<String>> {
    let mut written = Vec::new();
    let half = 0.5 / cfg.output.cadence;
    for &t_req in &cfg.output.snapshot_times {
        if let Some(s) = samples
            .iter()
            .min_by(|a, b| (a.t - t_req).abs().total_cmp(&(b.t - t_req).abs()))
        {
            if (s.t - t_req).abs() <= half + 1e-12 {
                let name = snapshot_name(s.t);
                write_file(dir, &name, &snapshot_csv(s, &cfg.grid))?;
                written.push(name);
            }
        }
    }
    Ok(written)
}

fn cmd_run(cfg: &RunConfig, warnings: &[String], dir: &Path) -> Result<i32> {
    let clock = Instant::now();
    let initial = make_initial(&cfg.initial, &cfg.grid, &cfg.phys, cfg.experiment.variant)?;
    let out = run_relaxed(
        initial,
        &cfg.phys,
        &cfg.grid,
        &cfg.control,
        cfg.experiment.variant,
        cfg.output.cadence,
    )?;
    let report = EnergyReport::from_samples(&out.samples, &cfg.phys, &cfg.grid)?;
    write_file(dir, "series.csv", &series_csv(&report))?;
    let snapshots = write_snapshots(cfg, &out.samples, dir)?;
    let admissibility = admissibility_scan(&out.final_field, &cfg.phys);
    let body = json!({
        "experiment": "run",
        "steps": out.steps,
        "clamped_relaxation_updates": out.clamped,
        "final_time": out.final_field.t,
        "breakdown": out.breakdown,
        "final_admissibility": admissibility,
        "snapshots": snapshots,
        "stress_energy_statement": report.stress_energy_statement,
        "stress_energy_proof": report.stress_energy_proof,
    });
    write_file(dir, "summary.json", &summary_json(cfg, warnings, body)?)?;
    write_meta(
        dir,
        &RunMeta {
            wall_clock_seconds: clock.elapsed().as_secs_f64(),
            steps: out.steps,
        },
    )?;
    Ok(if out.breakdown.is_some() {
        EXIT_BREAKDOWN
    } else {
        EXIT_OK
    })
}

fn ns_law(cfg: &RunConfig) -> ViscosityLaw {
    cfg.experiment
        .law
        .unwrap_or(ViscosityLaw::Constant(cfg.phys.mu))
}

fn cmd_run_ns(cfg: &RunConfig, warnings: &[String], dir: &Path) -> Result<i32> {
    let clock = Instant::now();
    let initial = make_initial(&cfg.initial, &cfg.grid, &cfg.phys, Default::default())?;
    let ns0 = NsField {
        v: initial.v,
        u: initial.u,
        t: 0.0,
    };
    let law = ns_law(cfg);
    let out = run_ns(
        ns0,
        &cfg.phys,
        &law,
        &cfg.grid,
        &cfg.control,
        cfg.output.cadence,
    )?;
    let report = EnergyReport::from_samples(&out.samples, &cfg.phys, &cfg.grid)?;
    write_file(dir, "series.csv", &series_csv(&report))?;
    let snapshots = write_snapshots(cfg, &out.samples, dir)?;
    let body = json!({
        "experiment": "run-ns",
        "viscosity_law": law,
        "steps": out.steps,
        "final_time": out.final_field.t,
        "breakdown": out.breakdown,
        "snapshots": snapshots,
    });
    write_file(dir, "summary.json", &summary_json(cfg, warnings, body)?)?;
    write_meta(
        dir,
        &RunMeta {
            wall_clock_seconds: clock.elapsed().as_secs_f64(),
            steps: out.steps,
        },
    )?;
    Ok(if out.breakdown.is_some() {
        EXIT_BREAKDOWN
    } else {
        EXIT_OK
    })
}

/// Reference-run control: the NS limit is compared against stiff runs, so by
/// default its dt cap is tightened to keep its own time error subdominant.
fn ns_reference_control(cfg: &RunConfig) -> StepControl {
    let mut c = cfg.control;
    let dx = cfg.grid.dx();
    let default_cap = 0.25 * dx * dx / ns_law(cfg).mu_eff(1.0).max(1e-12);
    c.dt_max = c.dt_max.min(cfg.experiment.ns_dt_max.unwrap_or(default_cap));
    c
}

fn cmd_sweep_tau(cfg: &RunConfig, warnings: &[String], dir: &Path) -> Result<i32> {
    let report = tau_sweep(
        &cfg.initial,
        &cfg.grid,
        &cfg.phys,
        &cfg.experiment.taus,
        &cfg.control,
        &ns_reference_control(cfg),
        cfg.output.cadence,
        cfg.experiment.workers,
    )?;
    let body = json!({ "experiment": "sweep-tau", "report": report });
    write_file(dir, "summary.json", &summary_json(cfg, warnings, body)?)?;
    Ok(if report.aborted { EXIT_BREAKDOWN } else { EXIT_OK })
}

fn cmd_sweep_neo(cfg: &RunConfig, warnings: &[String], dir: &Path) -> Result<i32> {
    let report = neo_hookean_sweep(
        &cfg.initial,
        &cfg.grid,
        &cfg.phys,
        cfg.experiment.mu_bar,
        &cfg.experiment.gs,
        &cfg.control,
        &ns_reference_control(cfg),
        cfg.output.cadence,
        cfg.experiment.workers,
    )?;
    let body = json!({ "experiment": "sweep-neo", "report": report });
    write_file(dir, "summary.json", &summary_json(cfg, warnings, body)?)?;
    Ok(if report.aborted { EXIT_BREAKDOWN } else { EXIT_OK })
}

fn cmd_converge(cfg: &RunConfig, warnings: &[String], dir: &Path, solver: &str) -> Result<i32> {
    let grids = [cfg.grid, cfg.grid.refined(), cfg.grid.refined().refined()];
    let target = match solver {
        "relaxed" => ConvergenceTarget::Relaxed(cfg.experiment.variant),
        "ns" => ConvergenceTarget::Ns {
            law: ns_law(cfg),
            dt0: cfg.experiment.ns_dt0,
        },
        other => {
            return Err(Error::Validation(format!(
                "converge --solver must be 'relaxed' or 'ns', got '{other}'"
            )))
        }
    };
    let report = grid_convergence(&cfg.initial, &cfg.phys, &grids, &cfg.control, target)?;
    let body = json!({ "experiment": "converge", "solver": solver, "report": report });
    write_file(dir, "summary.json", &summary_json(cfg, warnings, body)?)?;
    Ok(EXIT_OK)
}

fn cmd_probe_threshold(cfg: &RunConfig, warnings: &[String], dir: &Path) -> Result<i32> {
    let report = threshold_probe(
        &cfg.initial,
        &cfg.grid,
        &cfg.phys,
        &cfg.experiment.ladder,
        &cfg.control,
        cfg.experiment.workers,
    )?;
    let body = json!({ "experiment": "probe-threshold", "report": report });
    write_file(dir, "summary.json", &summary_json(cfg, warnings, body)?)?;
    Ok(EXIT_OK)
}

fn cmd_probe_layer(cfg: &RunConfig, warnings: &[String], dir: &Path) -> Result<i32> {
    let report = initial_layer_probe(
        &cfg.initial,
        &cfg.grid,
        &cfg.phys,
        &cfg.experiment.taus,
        &cfg.control,
        cfg.experiment.workers,
    )?;
    let body = json!({ "experiment": "probe-layer", "report": report });
    write_file(dir, "summary.json", &summary_json(cfg, warnings, body)?)?;
    Ok(EXIT_OK)
}

/// Re-serializes the effective config (used by tests and `--help` examples).
pub fn effective_config_text(cfg: &RunConfig) -> Result<String> {
    serialize_config(cfg)
}
