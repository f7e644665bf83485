//! Independent oracles shared by the integration and acceptance suites.
//! Everything here recomputes results along a different route from the
//! library code it checks.

#![allow(dead_code)]

use nlwr::{BoundaryPolicy, DensityField, VelocityModel};
use rand::rngs::StdRng;
use rand::Rng;

/// Compensated (Kahan) accumulator; the oracle must carry less roundoff
/// than the recursion it checks.
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn new() -> Self {
        Kahan {
            sum: 0.0,
            carry: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// O(N²) direct summation of q(x_i) = ∫ ε⁻¹ e^((x_i−y)/ε) ρ(y) dy: the
/// analytic integral of the kernel over each downstream cell, cell by
/// cell, with the constant tail (or periodic images) integrated
/// explicitly. Exponents are built from grid offsets (j − i)·dx, the
/// exact per-cell geometry of a uniform grid.
pub fn direct_exp_average(field: &DensityField, eps: f64) -> Vec<f64> {
    let n = field.len();
    let dx = field.dx();
    let rho = field.values();
    // weight of the cell whose left edge sits k cells downstream:
    // ∫ over that cell of ε⁻¹ e^((x_i − y)/ε) dy = e^(−k dx/ε) − e^(−(k+1) dx/ε)
    let cell_weight = |k: f64| (-k * dx / eps).exp() - (-(k + 1.0) * dx / eps).exp();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut q = Kahan::new();
        match field.boundary() {
            BoundaryPolicy::ConstantExtension => {
                for j in i..n {
                    q.add(rho[j] * cell_weight((j - i) as f64));
                }
                // tail: constant rho[n-1] from the right end to infinity
                q.add(rho[n - 1] * (-((n - i) as f64) * dx / eps).exp());
            }
            BoundaryPolicy::Periodic => {
                let mut image = 0usize;
                loop {
                    let offset = (image * n) as f64;
                    // nearest cell of this image sits offset − i cells away
                    if image > 0 && (-(offset - i as f64) * dx / eps).exp() < 1e-25 {
                        break;
                    }
                    let start = if image == 0 { i } else { 0 };
                    for j in start..n {
                        q.add(rho[j] * cell_weight(offset + j as f64 - i as f64));
                    }
                    image += 1;
                }
            }
        }
        out[i] = q.sum;
    }
    out
}

/// Random piecewise-constant field with uniformly positive values.
pub fn random_field(rng: &mut StdRng, boundary: BoundaryPolicy) -> DensityField {
    let n = rng.gen_range(1..=400);
    let dx = rng.gen_range(1e-4..0.1);
    let x0 = rng.gen_range(-1.0..1.0);
    let values = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    DensityField::new(x0, dx, values, boundary).unwrap()
}

/// Dense-grid interval extremum of the flux: 4096-interval scan plus a
/// local ternary refinement of the best bracket, independent of the
/// root-finding route the production flux uses.
pub fn dense_interval_extremum(model: &VelocityModel, a: f64, b: f64, maximize: bool) -> f64 {
    let samples = 4096usize;
    let f = |u: f64| {
        let flux = u * model.velocity(u);
        if maximize {
            -flux
        } else {
            flux
        }
    };
    let h = (b - a) / samples as f64;
    let mut best_k = 0usize;
    let mut best = f64::INFINITY;
    for k in 0..=samples {
        let u = if k == samples { b } else { a + k as f64 * h };
        let v = f(u);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    // refine within one sample of the best point
    let mut lo = (a + best_k.saturating_sub(1) as f64 * h).max(a);
    let mut hi = (a + (best_k + 1) as f64 * h).min(b);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let u = 0.5 * (lo + hi);
    let v = f(u).min(best);
    if maximize {
        -v
    } else {
        v
    }
}

/// Riemann similarity solution by the Hopf–Lax/Osher variational
/// formula: ρ(ξ) = argmin over [l, r] of f(u) − ξu for increasing data,
/// argmax for decreasing data. Dense search, no envelope machinery.
pub fn variational_riemann(model: &VelocityModel, rho_l: f64, rho_r: f64, xi: f64) -> f64 {
    let (lo, hi) = (rho_l.min(rho_r), rho_l.max(rho_r));
    let samples = 200_000usize;
    let mut best_u = lo;
    let mut best = f64::INFINITY;
    let sign = if rho_l <= rho_r { 1.0 } else { -1.0 };
    for k in 0..=samples {
        let u = lo + (hi - lo) * k as f64 / samples as f64;
        let v = sign * (u * model.velocity(u) - xi * u);
        if v < best {
            best = v;
            best_u = u;
        }
    }
    best_u
}

pub fn greenshields() -> VelocityModel {
    VelocityModel::greenshields(1.0, 1.0, 1.0).unwrap()
}

/// The strictly nonlinear built-in with a non-concave flux (inflection
/// at ρ = 0.75).
pub fn quadratic_model() -> VelocityModel {
    VelocityModel::quadratic(0.2, 0.8, 1.0, 0.2).unwrap()
}
