//! Ill-prepared data (S0 = 0 off the limit closure) relaxes onto the closure
//! in an O(tau) initial layer. The halving time t* of the stress defect
//! scales like tau ln 2, the frozen-coefficient prediction.

use std::f64::consts::PI;

use visco1d::experiments::{initial_layer_probe, InitialDataSpec, Preparation};
use visco1d::grid::GridSpec;
use visco1d::model::PhysParams;
use visco1d::relaxed::StepControl;

fn main() {
    let p = PhysParams::default();
    let grid = GridSpec::new(PI, 256).unwrap();
    let spec = InitialDataSpec {
        preparation: Preparation::IllPrepared,
        ..Default::default()
    };
    let control = StepControl {
        t_end: 2.0,
        ..Default::default()
    };
    let taus = [1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3];
    let rep = initial_layer_probe(&spec, &grid, &p, &taus, &control, 2).unwrap();
    println!("{:>10} {:>12} {:>12} {:>10}", "tau", "t*", "t*/tau", "censored");
    for pt in &rep.points {
        println!(
            "{:>10} {:>12.5e} {:>12.4} {:>10}",
            pt.tau,
            pt.t_star.unwrap_or(f64::NAN),
            pt.ratio.unwrap_or(f64::NAN),
            pt.censored
        );
    }
    println!("\nreference value ln 2 = {}", std::f64::consts::LN_2);
}
