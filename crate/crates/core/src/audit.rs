//! Numerical evaluation of every quantity in the admissibility
//! argument: the weak entropy residual ∬ [η(ρ)φ_t + ψ(ρ)φ_x] dx dt, the
//! J-decomposition of the entropy production rate with its sign facts
//! and integration-by-parts identity, and the TV / L¹ diagnostics.

use crate::error::{Error, Result};
use crate::field::{field_tv, BoundaryPolicy, DensityField, Window};
use crate::model::VelocityModel;
use crate::nonlocal::NonlocalState;
use crate::trajectory::Trajectory;

/// One-dimensional C² bump B((x−c)/r) with B(s) = (1−s²)³ on |s| < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump1d {
    pub center: f64,
    pub radius: f64,
}

impl Bump1d {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("bump radius must be > 0, got {radius}")));
        }
        Ok(Bump1d { center, radius })
    }

    fn b(s: f64) -> f64 {
        if s.abs() < 1.0 {
            let t = 1.0 - s * s;
            t * t * t
        } else {
            0.0
        }
    }

    fn b_prime(s: f64) -> f64 {
        if s.abs() < 1.0 {
            let t = 1.0 - s * s;
            -6.0 * s * t * t
        } else {
            0.0
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        Self::b((x - self.center) / self.radius)
    }

    /// Analytic derivative; never computed by differencing.
    pub fn deriv(&self, x: f64) -> f64 {
        Self::b_prime((x - self.center) / self.radius) / self.radius
    }

    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }
}

/// Space-time test function φ(t, x) = B((t−t₀)/σ_t) · B((x−x₀)/σ_x):
/// nonnegative, compactly supported, C².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub time: Bump1d,
    pub space: Bump1d,
}

impl TestFunction {
    pub fn new(t0: f64, x0: f64, sigma_t: f64, sigma_x: f64) -> Result<Self> {
        Ok(TestFunction {
            time: Bump1d::new(t0, sigma_t)?,
            space: Bump1d::new(x0, sigma_x)?,
        })
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.time.value(t) * self.space.value(x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.time.deriv(t) * self.space.value(x)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.time.value(t) * self.space.deriv(x)
    }

    /// max φ = φ(t₀, x₀) = 1.
    pub fn max_value(&self) -> f64 {
        1.0
    }

    /// Short deterministic label for CSV rows.
    pub fn label(&self) -> String {
        format!(
            "t{}r{}_x{}r{}",
            self.time.center, self.time.radius, self.space.center, self.space.radius
        )
    }
}

/// Total variation Σ|ρ_{i+1} − ρ_i|; the wraparound jump is included for
/// periodic fields.
pub fn total_variation(field: &DensityField) -> f64 {
    field_tv(field)
}

/// Windowed L¹ distance dx·Σ|a_i − b_i| over cells whose centers lie in
/// the window. The fields must share one grid.
pub fn l1_distance(a: &DensityField, b: &DensityField, window: &Window) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::Usage("l1_distance needs matching grids".into()));
    }
    let range = a.cells_in(window);
    let av = a.values();
    let bv = b.values();
    Ok(range.map(|i| (av[i] - bv[i]).abs()).sum::<f64>() * a.dx())
}

/// Weak entropy residual R(φ) = ∬ [η(ρ)φ_t + ψ(ρ)φ_x] dx dt over a
/// trajectory: midpoint quadrature in x over cells, trapezoid in t over
/// snapshots, with the test-function derivatives evaluated analytically.
///
/// Entropy-admissible limits satisfy R(φ) ≥ 0 for every φ ≥ 0; callers
/// compare against −tol to absorb scheme and quadrature error.
pub fn entropy_residual(
    traj: &Trajectory,
    model: &VelocityModel,
    phi: &TestFunction,
) -> Result<f64> {
    let snaps = traj.snapshots();
    let grid = &snaps[0].field;
    let t_last = traj.last().t;
    if phi.time.lo() <= 0.0 || phi.time.hi() >= t_last {
        return Err(Error::Usage(format!(
            "test function time support [{}, {}] must sit strictly inside (0, {t_last})",
            phi.time.lo(),
            phi.time.hi()
        )));
    }
    if phi.space.lo() <= grid.x0() || phi.space.hi() >= grid.x_end() {
        return Err(Error::Usage(format!(
            "test function space support [{}, {}] escapes the domain [{}, {}]",
            phi.space.lo(),
            phi.space.hi(),
            grid.x0(),
            grid.x_end()
        )));
    }
    let inside = snaps
        .iter()
        .filter(|s| s.t > phi.time.lo() && s.t < phi.time.hi())
        .count();
    if inside < 8 {
        return Err(Error::Usage(format!(
            "only {inside} snapshot times inside the test-function support; need at least 8"
        )));
    }

    let cells = grid.cells_in(&Window::new(phi.space.lo(), phi.space.hi()));
    let dx = grid.dx();
    let spatial_integral = |t: f64, field: &DensityField| -> f64 {
        let mut acc = 0.0;
        for i in cells.clone() {
            let x = field.cell_center(i);
            let rho = field.values()[i];
            acc += model.eta(rho) * phi.dt(t, x) + model.psi(rho) * phi.dx(t, x);
        }
        acc * dx
    };

    let mut residual = 0.0;
    for (k, snap) in snaps.iter().enumerate() {
        let w = if k == 0 {
            0.5 * (snaps[1].t - snaps[0].t)
        } else if k + 1 == snaps.len() {
            0.5 * (snaps[k].t - snaps[k - 1].t)
        } else {
            0.5 * (snaps[k + 1].t - snaps[k - 1].t)
        };
        if phi.time.value(snap.t) != 0.0 {
            residual += w * spatial_integral(snap.t, &snap.field);
        }
    }
    Ok(residual)
}

/// The J-terms of the entropy production rate at one time slice for one
/// spatial test profile, all by midpoint quadrature. `w_check` is the
/// independent integration-by-parts route −∫[W(ρ)−W(q)]φ_x dx that must
/// agree with J3 + J4.
#[derive(Debug, Clone, Copy)]
pub struct JDecomposition {
    pub j: f64,
    pub j1: f64,
    pub j21: f64,
    pub j22: f64,
    pub j23: f64,
    pub j3: f64,
    pub j4: f64,
    pub j5: f64,
    pub w_check: f64,
}

impl JDecomposition {
    /// |J − (J1 + J21 + J22 + J23)|.
    pub fn decomposition_residual(&self) -> f64 {
        (self.j - (self.j1 + self.j21 + self.j22 + self.j23)).abs()
    }

    /// |(J21 + J22) − (J3 + J4 + J5)|.
    pub fn split_residual(&self) -> f64 {
        ((self.j21 + self.j22) - (self.j3 + self.j4 + self.j5)).abs()
    }

    /// |(J3 + J4) − w_check|, the integration-by-parts identity.
    pub fn ibp_residual(&self) -> f64 {
        ((self.j3 + self.j4) - self.w_check).abs()
    }

    pub fn term_sum(&self) -> f64 {
        self.j1.abs()
            + self.j21.abs()
            + self.j22.abs()
            + self.j23.abs()
            + self.j3.abs()
            + self.j4.abs()
            + self.j5.abs()
    }
}

fn centered_diff(values: &[f64], dx: f64, boundary: BoundaryPolicy) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n == 1 {
        return out;
    }
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    match boundary {
        BoundaryPolicy::Periodic => {
            out[0] = (values[1] - values[n - 1]) / (2.0 * dx);
            out[n - 1] = (values[0] - values[n - 2]) / (2.0 * dx);
        }
        BoundaryPolicy::ConstantExtension => {
            // One-sided; the test profile vanishes near the edges, so the
            // stencil choice never reaches the integrals.
            out[0] = (values[1] - values[0]) / dx;
            out[n - 1] = (values[n - 1] - values[n - 2]) / dx;
        }
    }
    out
}

/// Evaluate the J-decomposition on one nonlocal state. The averaged
/// density is taken at cell centers through the exact in-cell kernel
/// formula; ρ_x and q_x use centered differences.
pub fn j_decomposition(
    state: &NonlocalState,
    model: &VelocityModel,
    phi: &Bump1d,
) -> Result<JDecomposition> {
    let field = state.field();
    if phi.lo() <= field.x0() || phi.hi() >= field.x_end() {
        return Err(Error::Usage(format!(
            "test profile support [{}, {}] escapes the domain [{}, {}]",
            phi.lo(),
            phi.hi(),
            field.x0(),
            field.x_end()
        )));
    }
    let dx = field.dx();
    let eps = state.eps();
    let rho = field.values();
    let q = state.q().at_cell_centers(field)?;
    let rho_x = centered_diff(rho, dx, field.boundary());
    let q_x = centered_diff(&q, dx, field.boundary());
    let g: Vec<f64> = rho
        .iter()
        .zip(q.iter())
        .map(|(&r, &qc)| r * (model.velocity(r) - model.velocity(qc)))
        .collect();
    let g_x = centered_diff(&g, dx, field.boundary());

    let cells = field.cells_in(&Window::new(phi.lo(), phi.hi()));
    let mut out = JDecomposition {
        j: 0.0,
        j1: 0.0,
        j21: 0.0,
        j22: 0.0,
        j23: 0.0,
        j3: 0.0,
        j4: 0.0,
        j5: 0.0,
        w_check: 0.0,
    };
    for i in cells {
        let x = field.cell_center(i);
        let p = phi.value(x);
        let p_x = phi.deriv(x);
        if p == 0.0 && p_x == 0.0 {
            continue;
        }
        let r = rho[i];
        let qc = q[i];
        let vr = model.velocity(r);
        let vq = model.velocity(qc);
        let dvr = model.velocity_prime(r);
        let dvq = model.velocity_prime(qc);

        out.j += 2.0 * r * g_x[i] * p;
        out.j1 -= r * r * (vr - vq) * p_x;
        out.j21 += r * r * dvr * rho_x[i] * p;
        out.j22 -= r * qc * dvq * q_x[i] * p;
        out.j23 += r * eps * q_x[i] * q_x[i] * dvq * p;
        out.j4 -= qc * qc * dvq * q_x[i] * p;
        out.j5 += qc * eps * q_x[i] * q_x[i] * dvq * p;
        out.w_check -= (model.w(r) - model.w(qc)) * p_x;
    }
    out.j *= dx;
    out.j1 *= dx;
    out.j21 *= dx;
    out.j22 *= dx;
    out.j23 *= dx;
    out.j4 *= dx;
    out.j5 *= dx;
    out.w_check *= dx;
    // J3 is the same integral as J21.
    out.j3 = out.j21;
    Ok(out)
}

/// Fractions of the window that generate the standard certificate
/// family: 3 centers × 3 spatial radii × 3 temporal radii = 27 bumps.
/// Centers stay close to the window midpoint so every bump keeps the
/// wave fan in view and the largest supports remain inside the window.
pub const CENTER_OFFSETS: [f64; 3] = [-0.05, 0.0, 0.05];
pub const RADIUS_FRACTIONS: [f64; 3] = [0.1, 0.25, 0.4];

/// The 27-bump family on a spatial window and time horizon: centers are
/// placed around the window midpoint, all bumps centered at t_end/2 so
/// their supports sit strictly inside (0, t_end).
pub fn standard_bumps(window: &Window, t_end: f64) -> Vec<TestFunction> {
    let w = window.width();
    let mid = 0.5 * (window.x_min + window.x_max);
    let t0 = 0.5 * t_end;
    let mut bumps = Vec::with_capacity(27);
    for &off in &CENTER_OFFSETS {
        for &fx in &RADIUS_FRACTIONS {
            for &ft in &RADIUS_FRACTIONS {
                bumps.push(TestFunction {
                    time: Bump1d {
                        center: t0,
                        radius: ft * t_end,
                    },
                    space: Bump1d {
                        center: mid + off * w,
                        radius: fx * w,
                    },
                });
            }
        }
    }
    bumps
}

/// The 9 distinct spatial profiles of the standard family.
pub fn standard_spatial_bumps(window: &Window) -> Vec<Bump1d> {
    let w = window.width();
    let mid = 0.5 * (window.x_min + window.x_max);
    let mut bumps = Vec::with_capacity(9);
    for &off in &CENTER_OFFSETS {
        for &fx in &RADIUS_FRACTIONS {
            bumps.push(Bump1d {
                center: mid + off * w,
                radius: fx * w,
            });
        }
    }
    bumps
}
