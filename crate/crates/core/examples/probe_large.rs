//! Timing probe for the large (d = 23, n = 2) model build and closure.

use std::time::Instant;

use llv_core::lefschetz::{gtot_closure, gtot_setup, verify_gtot_structure};
use llv_core::quadspace::QuadraticSpace;
use llv_core::verbitsky::build_model;

fn main() {
    let d = std::env::args()
        .nth(1)
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(23);
    let space = QuadraticSpace::diagonal(&vec![1; d]);
    let t0 = Instant::now();
    let model = build_model(&space, 2).unwrap();
    println!("build d={d} n=2: {:?} dims={:?}", t0.elapsed(), model.dims());

    let t1 = Instant::now();
    let setup = gtot_setup(&model).unwrap();
    println!("setup (spanning + L + Lambda): {:?}", t1.elapsed());

    let t2 = Instant::now();
    let basis = gtot_closure(&setup);
    println!("closure: {:?} dim={}", t2.elapsed(), basis.dim());

    let t3 = Instant::now();
    let report = verify_gtot_structure(&model, &setup, &basis, true);
    println!(
        "verify: {:?} pass={} killing={:?}",
        t3.elapsed(),
        report.pass,
        report.killing_signature
    );
    println!("total: {:?}", t0.elapsed());
}
