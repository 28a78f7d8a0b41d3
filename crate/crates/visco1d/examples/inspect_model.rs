//! Symmetrizer algebra at a glance: prints the symmetric triple (A0, A1, B),
//! the characteristic speeds, and the admissibility margin for a few states.

use visco1d::model::{characteristic_speeds, symmetrizer, CellState, PhysParams};

fn main() {
    let p = PhysParams::default();
    println!(
        "parameters: gamma {} B {} mu {} a {} tau {}\n",
        p.gamma, p.b, p.mu, p.a, p.tau
    );
    let states = [
        CellState { v: 1.0, u: 0.0, s: 0.0 },
        CellState { v: 0.5, u: 0.3, s: -2.0 },
        CellState { v: 2.5, u: -0.1, s: 1.5 },
    ];
    for w in states {
        println!("state v = {}, u = {}, S = {}", w.v, w.u, w.s);
        println!("  margin 2*tau*a*S + mu = {}", w.margin(&p));
        let trip = symmetrizer(&w, &p).unwrap();
        println!(
            "  A0 diag: [{}, {}, {}]",
            trip.a0[0][0], trip.a0[1][1], trip.a0[2][2]
        );
        println!(
            "  A1 row 1: [{}, {}, {}]",
            trip.a1[0][0], trip.a1[0][1], trip.a1[0][2]
        );
        println!("  B(3,3): {}", trip.bmat[2][2]);
        let speeds = characteristic_speeds(&w, &p).unwrap();
        println!("  speeds: {:?}\n", speeds);
    }
    // the speeds collapse onto the acoustic pair sqrt(gamma B + mu/tau) at rest
    let rest = CellState { v: 1.0, u: 0.0, s: 0.0 };
    let speeds = characteristic_speeds(&rest, &p).unwrap();
    let closed_form = (p.gamma * p.b + p.mu / p.tau).sqrt();
    println!(
        "rest-state check: computed {} vs closed form {}",
        speeds[2], closed_form
    );
}
