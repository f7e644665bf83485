//! Builders shared by the benchmark targets.

use nlwr::{BoundaryPolicy, DensityField, VelocityModel};

pub fn greenshields() -> VelocityModel {
    VelocityModel::greenshields(1.0, 1.0, 1.0).expect("valid model")
}

/// A smeared Riemann profile on [-2, 2]; representative of what the
/// solvers push through the kernel every step.
pub fn step_field(n: usize) -> DensityField {
    let dx = 4.0 / n as f64;
    DensityField::from_fn(-2.0, dx, n, BoundaryPolicy::ConstantExtension, |x| {
        0.5 + 0.3 * (x / 0.05).tanh()
    })
    .expect("valid field")
}

pub fn sine_field(n: usize) -> DensityField {
    let dx = 4.0 / n as f64;
    DensityField::from_fn(-2.0, dx, n, BoundaryPolicy::Periodic, |x| {
        0.5 + 0.3 * (std::f64::consts::TAU * (x + 2.0) / 4.0).sin()
    })
    .expect("valid field")
}
