//! Bit-stable output writers.
//!
//! Data files never contain timestamps or other machine state, so two runs of
//! the same config produce byte-identical CSV/JSON. Floats are written with
//! the shortest representation that parses back to the identical value (the
//! standard `Display` for f64). Wall-clock timing goes to a separate meta
//! file that golden-file comparisons exclude.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::relaxed::RunSample;

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed, ordered column contract of the per-run series file.
pub const SERIES_COLUMNS: [&str; 12] = [
    "t",
    "E",
    "supE",
    "D",
    "cumD",
    "E_phys",
    "cumDiss",
    "ledger_residual",
    "minv",
    "maxv",
    "min2taS+mu",
    "stress_defect",
];

/// Renders the per-run time-series CSV.
pub fn series_csv(report: &EnergyReport) -> String {
    let mut out = String::new();
    out.push_str(&SERIES_COLUMNS.join(","));
    out.push('\n');
    for i in 0..report.t.len() {
        let row = [
            report.t[i],
            report.e[i],
            report.sup_e[i],
            report.d[i],
            report.cum_d[i],
            report.e_phys[i],
            report.cum_diss[i],
            report.ledger_residual[i],
            report.min_v[i],
            report.max_v[i],
            report.min_margin[i],
            report.stress_defect[i],
        ];
        let mut first = true;
        for x in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{x}");
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Renders a state snapshot CSV (`x,v,u,S` plus `A` when present).
pub fn snapshot_csv(sample: &RunSample, grid: &GridSpec) -> String {
    let mut out = String::new();
    let has_a = sample.a_conf.is_some();
    out.push_str(if has_a { "x,v,u,S,A\n" } else { "x,v,u,S\n" });
    let x = grid.points();
    for i in 0..sample.v.len() {
        let _ = write!(out, "{},{},{},{}", x[i], sample.v[i], sample.u[i], sample.s[i]);
        if let Some(a) = &sample.a_conf {
            let _ = write!(out, ",{}", a[i]);
        }
        out.push('\n');
    }
    out
}

/// Wraps an experiment result with the schema version and the full config
/// echo, so every summary is self-describing.
#[derive(Serialize)]
pub struct Summary<'a, T: Serialize> {
    pub schema_version: u32,
    pub config: &'a RunConfig,
    /// Non-fatal validation warnings (e.g. outside the small-tau regime).
    pub warnings: &'a [String],
    #[serde(flatten)]
    pub body: T,
}

pub fn summary_json<T: Serialize>(
    config: &RunConfig,
    warnings: &[String],
    body: T,
) -> Result<String> {
    let s = Summary {
        schema_version: SCHEMA_VERSION,
        config,
        warnings,
        body,
    };
    let mut text = serde_json::to_string_pretty(&s)
        .map_err(|e| Error::Internal(format!("summary serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Wall-clock metadata, written to its own file so data files stay
/// deterministic.
#[derive(Serialize)]
pub struct RunMeta {
    pub wall_clock_seconds: f64,
    pub steps: usize,
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

pub fn write_meta(dir: &Path, meta: &RunMeta) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::Internal(format!("meta serialization failed: {e}")))?;
    write_file(dir, "meta.json", &(text + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhysParams;
    use crate::relaxed::{run_relaxed, StepControl, Variant};
    use crate::grid::StateField;
    use std::f64::consts::PI;

    fn small_run() -> (EnergyReport, Vec<RunSample>, GridSpec, PhysParams) {
        let p = PhysParams::default();
        let grid = GridSpec::new(PI, 32).unwrap();
        let control = StepControl {
            t_end: 0.2,
            ..Default::default()
        };
        let x = grid.points();
        let mut f = StateField::uniform(&grid, 1.0, 0.0, 0.0);
        for i in 0..f.len() {
            f.u[i] = 1e-3 * x[i].sin();
        }
        let out = run_relaxed(f, &p, &grid, &control, Variant::Standard, 10.0).unwrap();
        let rep = EnergyReport::from_samples(&out.samples, &p, &grid).unwrap();
        (rep, out.samples, grid, p)
    }

    #[test]
    fn series_csv_contract() {
        let (rep, _, _, _) = small_run();
        let text = series_csv(&rep);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,E,supE,D,cumD,E_phys,cumDiss,ledger_residual,minv,maxv,min2taS+mu,stress_defect"
        );
        for line in lines {
            assert_eq!(line.split(',').count(), 12);
        }
        // all floats round-trip exactly
        for line in text.lines().skip(1) {
            for tok in line.split(',') {
                let x: f64 = tok.parse().unwrap();
                assert_eq!(format!("{x}"), tok);
            }
        }
    }

    #[test]
    fn snapshot_csv_columns() {
        let (_, samples, grid, _) = small_run();
        let text = snapshot_csv(&samples[0], &grid);
        assert!(text.starts_with("x,v,u,S\n"));
        assert_eq!(text.lines().count(), 1 + grid.cells);
        let mut with_a = samples[0].clone();
        with_a.a_conf = Some(vec![1.0; grid.cells]);
        let text = snapshot_csv(&with_a, &grid);
        assert!(text.starts_with("x,v,u,S,A\n"));
    }

    #[test]
    fn summary_echoes_config_and_schema() {
        let cfg = RunConfig::default();
        let body = serde_json::json!({ "steps": 7 });
        let text = summary_json(&cfg, &["w".to_string()], body).unwrap();
        let val: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(val["schema_version"], 1);
        assert_eq!(val["steps"], 7);
        assert_eq!(val["config"]["phys"]["gamma"], 1.4);
        assert_eq!(val["config"]["output"]["cadence"], 10.0);
        assert_eq!(val["warnings"][0], "w");
    }

    #[test]
    fn identical_reports_render_identical_bytes() {
        let (rep1, _, _, _) = small_run();
        let (rep2, _, _, _) = small_run();
        assert_eq!(series_csv(&rep1), series_csv(&rep2));
    }
}
