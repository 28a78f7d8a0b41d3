//! The relaxation limit: as tau decreases, solutions of the relaxed stress
//! system converge to the Navier-Stokes reference, and the stress converges
//! to the closure mu D(u) / v. Errors shrink roughly linearly in tau.

use std::f64::consts::PI;

use visco1d::experiments::{tau_sweep, InitialDataSpec};
use visco1d::grid::GridSpec;
use visco1d::model::PhysParams;
use visco1d::relaxed::StepControl;

fn main() {
    let p = PhysParams::default();
    let grid = GridSpec::new(PI, 512).unwrap();
    let spec = InitialDataSpec::default(); // eps = 1e-3 single mode, well-prepared
    let control = StepControl {
        t_end: 1.0,
        ..Default::default()
    };
    let dx = grid.dx();
    let ns_control = StepControl {
        dt_max: 0.25 * dx * dx,
        ..control
    };
    let taus = [1e-1, 5e-2, 2.5e-2, 1.25e-2];
    let rep = tau_sweep(&spec, &grid, &p, &taus, &control, &ns_control, 10.0, 2).unwrap();
    println!("{:>10} {:>14} {:>14} {:>10}", "tau", "state error", "stress defect", "sup R");
    for pt in &rep.points {
        println!(
            "{:>10} {:>14.5e} {:>14.5e} {:>10.4}",
            pt.param,
            pt.state_error,
            pt.stress_defect,
            pt.apriori_sup.unwrap_or(f64::NAN)
        );
    }
    println!(
        "\nfitted slopes: state {:?}, defect {:?} (roughly first order in tau)",
        rep.state_slope, rep.defect_slope
    );
    println!(
        "monotone decrease: state {}, defect {}",
        rep.state_monotone, rep.defect_monotone
    );
}
