//! Three-grid Richardson self-convergence for both solvers: the relaxed
//! system under CFL time stepping (order 2 in dx) and the Navier-Stokes
//! limit with dt proportional to dx^2.

use std::f64::consts::PI;

use visco1d::experiments::{grid_convergence, ConvergenceTarget, InitialDataSpec};
use visco1d::grid::GridSpec;
use visco1d::model::PhysParams;
use visco1d::ns::ViscosityLaw;
use visco1d::relaxed::{StepControl, Variant};

fn main() {
    let p = PhysParams::default();
    let spec = InitialDataSpec::default();
    let control = StepControl {
        t_end: 0.5,
        ..Default::default()
    };
    let g = GridSpec::new(PI, 128).unwrap();
    let grids = [g, g.refined(), g.refined().refined()];

    let rep = grid_convergence(
        &spec,
        &p,
        &grids,
        &control,
        ConvergenceTarget::Relaxed(Variant::Standard),
    )
    .unwrap();
    println!("relaxed solver, N in {:?}:", rep.cells);
    println!("  errors v: {:?}", rep.errors_v);
    println!("  orders: v {:?}, u {:?}, S {:?}", rep.order_v, rep.order_u, rep.order_s);

    let dx0 = grids[0].dx();
    let rep = grid_convergence(
        &spec,
        &p,
        &grids,
        &control,
        ConvergenceTarget::Ns {
            law: ViscosityLaw::Constant(p.mu),
            dt0: Some(0.2 * dx0 * dx0),
        },
    )
    .unwrap();
    println!("\nns solver (dt ~ dx^2), N in {:?}:", rep.cells);
    println!("  errors v: {:?}", rep.errors_v);
    println!("  orders: v {:?}, u {:?}", rep.order_v, rep.order_u);
}
