//! The O(N) recursion against the O(N²) direct-summation oracle, the
//! closed-form step value, and the algebraic kernel properties.

mod common;

use common::{direct_exp_average, random_field};
use nlwr::{exp_average, BoundaryPolicy, DensityField};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn recursion_matches_direct_summation() {
    let mut rng = StdRng::seed_from_u64(0x6b65726e);
    for case in 0..100 {
        let boundary = if case % 2 == 0 {
            BoundaryPolicy::ConstantExtension
        } else {
            BoundaryPolicy::Periodic
        };
        let field = random_field(&mut rng, boundary);
        let eps = {
            use rand::Rng;
            rng.gen_range(0.3..30.0) * field.dx()
        };
        let q = exp_average(&field, eps).unwrap();
        let oracle = direct_exp_average(&field, eps);
        for (i, (a, b)) in q.values().iter().zip(oracle.iter()).enumerate() {
            let rel = (a - b).abs() / b.abs().max(1e-30);
            assert!(
                rel <= 1e-13,
                "case {case} cell {i}: recursion {a} vs direct {b} (rel {rel:.2e})"
            );
        }
    }
}

#[test]
fn step_closed_form_one_kernel_length_upstream() {
    // Dyadic grid so that both the jump and the evaluation point
    // x_jump − eps land exactly on cell edges.
    let dx = 1.0 / 1024.0;
    let eps = 32.0 * dx; // 0.03125
    let n = 4096; // [-2, 2]
    let field = DensityField::from_fn(-2.0, dx, n, BoundaryPolicy::ConstantExtension, |x| {
        if x < 0.0 {
            0.3
        } else {
            0.9
        }
    })
    .unwrap();
    let q = exp_average(&field, eps).unwrap();
    // edge index of x = -eps
    let k = 2048 - 32;
    assert_eq!(field.edge(k), -eps);
    let expected = 0.3 * (1.0 - (-1.0f64).exp()) + 0.9 * (-1.0f64).exp();
    assert!(
        (q.at_edge(k) - expected).abs() <= 1e-14,
        "q(-eps) = {} vs closed form {expected}",
        q.at_edge(k)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn averaging_bounds(values in prop::collection::vec(0.0f64..1.0, 1..200),
                        eps_over_dx in 0.1f64..50.0,
                        periodic in any::<bool>()) {
        let boundary = if periodic { BoundaryPolicy::Periodic } else { BoundaryPolicy::ConstantExtension };
        let field = DensityField::new(0.0, 0.01, values, boundary).unwrap();
        let q = exp_average(&field, eps_over_dx * 0.01).unwrap();
        let (lo, hi) = (field.min_value(), field.max_value());
        for &v in q.values() {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "q = {v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn linearity(v1 in prop::collection::vec(0.0f64..1.0, 32),
                 v2 in prop::collection::vec(0.0f64..1.0, 32),
                 a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mk = |vals: Vec<f64>| DensityField::new(0.0, 0.02, vals, BoundaryPolicy::ConstantExtension).unwrap();
        let combo: Vec<f64> = v1.iter().zip(&v2).map(|(x, y)| a * x + b * y).collect();
        let q1 = exp_average(&mk(v1), 0.1).unwrap();
        let q2 = exp_average(&mk(v2), 0.1).unwrap();
        let qc = exp_average(&mk(combo), 0.1).unwrap();
        for i in 0..32 {
            let expect = a * q1.values()[i] + b * q2.values()[i];
            prop_assert!((qc.values()[i] - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn monotonicity(v1 in prop::collection::vec(0.0f64..0.5, 48),
                    bump in prop::collection::vec(0.0f64..0.5, 48)) {
        let mk = |vals: Vec<f64>| DensityField::new(0.0, 0.02, vals, BoundaryPolicy::ConstantExtension).unwrap();
        let v2: Vec<f64> = v1.iter().zip(&bump).map(|(x, d)| x + d).collect();
        let q1 = exp_average(&mk(v1), 0.07).unwrap();
        let q2 = exp_average(&mk(v2), 0.07).unwrap();
        for i in 0..48 {
            prop_assert!(q1.values()[i] <= q2.values()[i] + 1e-13);
        }
    }
}
