//! The downstream exponential average
//! q(x) = ∫ₓ^∞ ε⁻¹ e^((x−y)/ε) ρ(y) dy,
//! evaluated exactly (to roundoff) for piecewise-constant densities by a
//! right-to-left O(N) recursion.

use crate::error::{Error, Result};
use crate::field::{BoundaryPolicy, DensityField};

/// q sampled at cell left edges, tied to the grid and ε that produced it.
#[derive(Debug, Clone)]
pub struct QField {
    x0: f64,
    dx: f64,
    boundary: BoundaryPolicy,
    eps: f64,
    /// q at the left edge of each cell.
    values: Vec<f64>,
    /// q at the right end of the domain (seed of the recursion).
    right_edge: f64,
}

impl QField {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// q at edge k for k = 0..=N; k = N is the domain's right end.
    pub fn at_edge(&self, k: usize) -> f64 {
        if k < self.values.len() {
            self.values[k]
        } else {
            self.right_edge
        }
    }

    /// q at cell centers via the exact in-cell formula
    /// q(x) = ρ_i (1 − e^((x−x_{i+1})/ε)) + q_{i+1} e^((x−x_{i+1})/ε).
    pub fn at_cell_centers(&self, field: &DensityField) -> Result<Vec<f64>> {
        self.check_grid(field)?;
        let beta = (-0.5 * self.dx / self.eps).exp();
        let one_minus_beta = -(-0.5 * self.dx / self.eps).exp_m1();
        Ok((0..field.len())
            .map(|i| field.values()[i] * one_minus_beta + self.at_edge(i + 1) * beta)
            .collect())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(self.right_edge, f64::min)
    }

    fn check_grid(&self, field: &DensityField) -> Result<()> {
        if field.len() != self.values.len()
            || field.boundary() != self.boundary
            || (field.x0() - self.x0).abs() > 1e-9 * self.dx
            || (field.dx() - self.dx).abs() > 1e-12 * self.dx
        {
            return Err(Error::Usage(
                "density field and q field live on different grids".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluate q at every cell left edge.
///
/// With α = e^(−dx/ε) the average obeys q_i = (1−α) ρ_i + α q_{i+1}.
/// The seed is the exact tail integral: the last cell value for constant
/// extension, the closed geometric series for periodic data. `expm1`
/// keeps 1−α accurate when ε ≫ dx and α rounds to 1.
pub fn exp_average(field: &DensityField, eps: f64) -> Result<QField> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be > 0, got {eps}")));
    }
    let n = field.len();
    let dx = field.dx();
    let rho = field.values();
    let alpha = (-dx / eps).exp();
    let one_minus_alpha = -(-dx / eps).exp_m1();

    let right_edge = match field.boundary() {
        BoundaryPolicy::ConstantExtension => rho[n - 1],
        BoundaryPolicy::Periodic => {
            // q at the right end of the domain equals q at x0 by
            // periodicity: (1−α) Σ_{k≥0} α^k ρ_{k mod N} summed in closed
            // form over whole periods. Each weight comes from one exp
            // call (repeated multiplication by α drifts like u/(1−α)²)
            // and the sum is compensated, keeping the seed at roundoff.
            let length = n as f64 * dx;
            let one_minus_alpha_n = -(-length / eps).exp_m1();
            let mut weighted = 0.0;
            let mut carry = 0.0;
            for (k, &r) in rho.iter().enumerate() {
                let x = (-(k as f64) * dx / eps).exp() * r - carry;
                let t = weighted + x;
                carry = (t - weighted) - x;
                weighted = t;
            }
            one_minus_alpha * weighted / one_minus_alpha_n
        }
    };

    let mut values = vec![0.0; n];
    let mut next = right_edge;
    for i in (0..n).rev() {
        let q = one_minus_alpha * rho[i] + alpha * next;
        values[i] = q;
        next = q;
    }

    Ok(QField {
        x0: field.x0(),
        dx,
        boundary: field.boundary(),
        eps,
        values,
        right_edge,
    })
}

/// Residual norms of the pointwise identity ρ = q − ε q_x, with q_x
/// replaced by the one-sided difference D⁺q_i = (q_{i+1} − q_i)/dx.
#[derive(Debug, Clone, Copy)]
pub struct OdeResidual {
    pub max_abs: f64,
    pub l1: f64,
}

/// Measure ρ − (q − ε D⁺q) on the shared grid. No pass/fail judgement is
/// made here; callers compare against the O(dx) expectation.
pub fn check_ode_identity(field: &DensityField, q: &QField) -> Result<OdeResidual> {
    q.check_grid(field)?;
    let n = field.len();
    let dx = field.dx();
    let rho = field.values();
    let mut max_abs: f64 = 0.0;
    let mut l1 = 0.0;
    for i in 0..n {
        let qi = q.at_edge(i);
        let qnext = if i + 1 < n {
            q.at_edge(i + 1)
        } else {
            match field.boundary() {
                BoundaryPolicy::ConstantExtension => q.at_edge(n),
                BoundaryPolicy::Periodic => q.at_edge(0),
            }
        };
        let dq = (qnext - qi) / dx;
        let r = rho[i] - (qi - q.eps * dq);
        max_abs = max_abs.max(r.abs());
        l1 += r.abs() * dx;
    }
    Ok(OdeResidual { max_abs, l1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BoundaryPolicy::*;

    #[test]
    fn constant_field_is_fixed_point() {
        for boundary in [ConstantExtension, Periodic] {
            let field = DensityField::new(0.0, 0.01, vec![0.4; 200], boundary).unwrap();
            for eps in [1e-3, 0.05, 10.0] {
                let q = exp_average(&field, eps).unwrap();
                for &v in q.values() {
                    assert!((v - 0.4).abs() < 1e-14, "boundary {boundary:?} eps {eps}");
                }
            }
        }
    }

    #[test]
    fn two_cell_recursion() {
        let field = DensityField::new(0.0, 0.1, vec![0.3, 0.9], ConstantExtension).unwrap();
        let q = exp_average(&field, 0.1).unwrap(); // dx = eps ⇒ α = e⁻¹
        let alpha = (-1.0f64).exp();
        assert!((q.at_edge(1) - 0.9).abs() < 1e-15);
        assert!((q.at_edge(0) - ((1.0 - alpha) * 0.3 + alpha * 0.9)).abs() < 1e-15);
    }

    #[test]
    fn huge_eps_is_overflow_safe() {
        let field = DensityField::new(0.0, 0.01, vec![0.2, 0.4, 0.6, 0.8], ConstantExtension).unwrap();
        // α rounds to 1.0 here; expm1 keeps the update meaningful.
        let q = exp_average(&field, 1e18).unwrap();
        for &v in q.values() {
            assert!(v.is_finite());
            // Nearly everything is tail: q ≈ last value.
            assert!((v - 0.8).abs() < 1e-10);
        }

        let periodic = DensityField::new(0.0, 0.01, vec![0.2, 0.4, 0.6, 0.8], Periodic).unwrap();
        let q = exp_average(&periodic, 1e18).unwrap();
        for &v in q.values() {
            assert!((v - 0.5).abs() < 1e-10, "periodic huge-eps limit is the mean");
        }
    }

    #[test]
    fn rejects_nonpositive_eps() {
        let field = DensityField::new(0.0, 0.1, vec![0.5], ConstantExtension).unwrap();
        assert!(exp_average(&field, 0.0).is_err());
        assert!(exp_average(&field, -1.0).is_err());
    }

    #[test]
    fn ode_identity_constant_field() {
        let field = DensityField::new(0.0, 0.01, vec![0.7; 100], ConstantExtension).unwrap();
        let q = exp_average(&field, 0.05).unwrap();
        let r = check_ode_identity(&field, &q).unwrap();
        assert!(r.max_abs < 1e-14);
    }

    #[test]
    fn ode_identity_needs_matching_grid() {
        let a = DensityField::new(0.0, 0.01, vec![0.7; 100], ConstantExtension).unwrap();
        let b = DensityField::new(0.0, 0.01, vec![0.7; 50], ConstantExtension).unwrap();
        let q = exp_average(&a, 0.05).unwrap();
        assert!(matches!(check_ode_identity(&b, &q), Err(Error::Usage(_))));
    }

    #[test]
    fn ode_identity_halves_with_dx_on_smooth_data() {
        // ρ(x) = 0.5 + 0.3 sin x on [0, 2π], periodic.
        let eps = 0.05;
        let two_pi = std::f64::consts::TAU;
        let mut maxes = Vec::new();
        for n in [400usize, 800, 1600] {
            let dx = two_pi / n as f64;
            let field =
                DensityField::from_fn(0.0, dx, n, Periodic, |x| 0.5 + 0.3 * x.sin()).unwrap();
            let q = exp_average(&field, eps).unwrap();
            maxes.push(check_ode_identity(&field, &q).unwrap().max_abs);
        }
        for w in maxes.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (1.7..=2.3).contains(&ratio),
                "first-order halving expected, got ratio {ratio} from {maxes:?}"
            );
        }
    }

    #[test]
    fn ode_identity_step_residual_localized_at_jump() {
        // Jump at x = 0 on [-2, 2]; residual decays like e^(-d/eps) away
        // from it on the left and vanishes identically on the right.
        let n = 4000;
        let dx = 4.0 / n as f64;
        let eps = 0.05;
        let field = DensityField::from_fn(-2.0, dx, n, ConstantExtension, |x| {
            if x < 0.0 {
                0.2
            } else {
                0.8
            }
        })
        .unwrap();
        let q = exp_average(&field, eps).unwrap();
        let jump_cell = n / 2;
        let mut far_max: f64 = 0.0;
        let mut near_max: f64 = 0.0;
        for i in 0..n {
            let qi = q.at_edge(i);
            let qn = q.at_edge(i + 1);
            let r = (field.values()[i] - (qi - eps * (qn - qi) / dx)).abs();
            let dist = field.cell_center(i) - field.cell_center(jump_cell);
            if dist.abs() > 30.0 * eps {
                far_max = far_max.max(r);
            } else {
                near_max = near_max.max(r);
            }
        }
        assert!(far_max <= 1e-13, "far-field residual {far_max}");
        assert!(near_max > 1e-4, "jump region carries the residual");
    }
}
