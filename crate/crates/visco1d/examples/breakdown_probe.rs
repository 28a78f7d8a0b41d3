//! Large data can leave the admissible region (v > 0 and 2 tau a S + mu > 0)
//! in finite time. The amplitude ladder brackets the empirical threshold
//! between the largest completing and the smallest breaking amplitude.

use std::f64::consts::PI;

use visco1d::experiments::{threshold_probe, InitialDataSpec, Preparation};
use visco1d::grid::GridSpec;
use visco1d::model::PhysParams;
use visco1d::relaxed::StepControl;

fn main() {
    let p = PhysParams::default();
    let grid = GridSpec::new(PI, 256).unwrap();
    // velocity-only, ill-prepared data: always admissible at t = 0, so any
    // breakdown is a genuine runtime event
    let spec = InitialDataSpec {
        v_amplitude: Some(0.9),
        preparation: Preparation::IllPrepared,
        ..Default::default()
    };
    let control = StepControl {
        t_end: 2.0,
        ..Default::default()
    };
    let ladder = [0.5, 1.0, 2.0, 4.0, 8.0, 10.0, 12.0];
    let rep = threshold_probe(&spec, &grid, &p, &ladder, &control, 2).unwrap();
    println!(
        "{:>8} {:>10} {:>12} {:>12} {:>14}",
        "eps", "completed", "min v", "min margin", "max|u_x| growth"
    );
    for o in &rep.outcomes {
        println!(
            "{:>8} {:>10} {:>12.4e} {:>12.4e} {:>14.3}",
            o.epsilon, o.completed, o.min_v, o.min_margin, o.max_ux_growth
        );
        if let Some(b) = &o.breakdown {
            println!("         -> breakdown at t = {:.4} ({}): {}", b.time, b.stage, b.reason);
        }
    }
    println!(
        "\nbracket: eps_ok = {:?}, eps_break = {:?}",
        rep.eps_ok, rep.eps_break
    );
}
