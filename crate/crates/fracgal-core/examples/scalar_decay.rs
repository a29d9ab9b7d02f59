//! Solve the scalar relaxation problem with the piecewise-constant scheme on a
//! sequence of graded meshes and print the observed convergence orders.
//!
//! Run with `cargo run -p fracgal-core --example scalar_decay`.

use fracgal_core::report::Metric;
use fracgal_core::stepper::scalar_error_study;

fn main() {
    let alpha = 0.5;
    let lambda = 1.0;
    let sigma = 2.0;
    let report = scalar_error_study(
        alpha,
        lambda,
        sigma,
        1.0,
        &[64, 128, 256, 512, 1024],
        Metric::MaxNode,
    )
    .expect("valid study parameters");

    println!(
        "scheme={} alpha={} sigma={} metric={}",
        report.scheme.label(),
        alpha,
        sigma,
        report.metric.label()
    );
    for row in report.rows() {
        match row.order {
            Some(p) => println!("J={:5}  error={:.3e}  order={:.2}", row.intervals, row.error, p),
            None => println!("J={:5}  error={:.3e}", row.intervals, row.error),
        }
    }
}
