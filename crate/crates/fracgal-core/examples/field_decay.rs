//! Convergence of the DG field solver for the fractional diffusion problem
//! on (0, 1) with a datum of limited regularity, at three mesh gradings.

use fracgal_core::fem::build_space;
use fracgal_core::pde::{field_error_study, Backend, FieldStudy};
use fracgal_core::report::Metric;

fn main() {
    let alpha = 0.5;
    let mut space = build_space(64).unwrap();
    space.eigen_decompose().unwrap();
    let u0 = space.l2_project(|x: f64| x.powf(0.51) * (1.0 - x)).unwrap();

    for sigma in [1.0, 2.0, 4.0] {
        let study = FieldStudy {
            space: &space,
            alpha,
            sigma,
            horizon: 1.0,
            initial: &u0,
            grids: &[32, 64, 128, 256],
            reference_intervals: 4096,
            reference_sigma: 4.0,
            backend: Backend::Spectral,
            metric: Metric::FieldSup,
        };
        let report = field_error_study(&study).unwrap();
        println!("alpha = {alpha}, sigma = {sigma}, metric = {}", report.metric.label());
        println!("{:>8} {:>12} {:>7}", "J", "E1", "order");
        for row in report.rows() {
            match row.order {
                Some(p) => println!("{:>8} {:>12.4e} {:>7.3}", row.intervals, row.error, p),
                None => println!("{:>8} {:>12.4e} {:>7}", row.intervals, row.error, "-"),
            }
        }
        println!();
    }
}
