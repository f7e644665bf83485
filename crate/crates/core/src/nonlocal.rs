//! Conservative upwind finite-volume evolution of the nonlocal model
//! ρ_t + (ρ v(q))_x = 0 at fixed kernel scale ε.
//!
//! v(q) ≥ 0, so the interface flux takes the upwind (left) density:
//! F_{i+1/2} = ρ_i · v(q_{i+1/2}), with q_{i+1/2} the averaged density at
//! the left edge of cell i+1 — the natural pairing since q(x) only sees
//! the density at y ≥ x.

use crate::error::{Error, Result};
use crate::field::{BoundaryPolicy, DensityField};
use crate::kernel::{exp_average, QField};
use crate::march::{march, Marcher, StepStats};
use crate::model::{VelocityModel, DENSITY_SLACK};
use crate::trajectory::{RunMeta, Trajectory};

/// Explicit integrators for the semi-discrete scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeIntegrator {
    #[default]
    Euler,
    SspRk2,
}

impl TimeIntegrator {
    pub fn as_str(&self) -> &'static str {
        match self {
            TimeIntegrator::Euler => "euler",
            TimeIntegrator::SspRk2 => "ssp-rk2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euler" => Some(TimeIntegrator::Euler),
            "ssp-rk2" => Some(TimeIntegrator::SspRk2),
            _ => None,
        }
    }
}

/// Stepper knobs; the defaults are what the harness runs with.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Fallback dt when every interface speed vanishes (all-jam state);
    /// `None` means 0.01·dx/v(0), resolved at run time.
    pub dt_max: Option<f64>,
    /// Halvings allowed before a bound violation becomes a hard failure.
    pub retry_budget: u32,
    pub integrator: TimeIntegrator,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dt_max: None,
            retry_budget: 20,
            integrator: TimeIntegrator::Euler,
        }
    }
}

impl SolverOptions {
    pub fn resolved_dt_max(&self, dx: f64, model: &VelocityModel) -> f64 {
        self.dt_max.unwrap_or(0.01 * dx / model.velocity(0.0))
    }
}

/// The coupled (t, ρ, ε, q) state; q is recomputed whenever ρ changes.
#[derive(Debug, Clone)]
pub struct NonlocalState {
    pub t: f64,
    field: DensityField,
    eps: f64,
    q: QField,
}

impl NonlocalState {
    pub fn new(t: f64, field: DensityField, eps: f64, model: &VelocityModel) -> Result<Self> {
        field.validate_against(model)?;
        let q = exp_average(&field, eps)?;
        Ok(NonlocalState { t, field, eps, q })
    }

    pub fn field(&self) -> &DensityField {
        &self.field
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn q(&self) -> &QField {
        &self.q
    }

    /// q at interface x_k, k = 0..=N. For periodic data the closing
    /// interface reuses the first edge value so that the wrap fluxes
    /// telescope exactly.
    fn q_at_interface(&self, k: usize) -> f64 {
        if k == self.field.len() && self.field.boundary() == BoundaryPolicy::Periodic {
            self.q.at_edge(0)
        } else {
            self.q.at_edge(k)
        }
    }
}

/// Largest stable dt at this state: cfl·dx / max v(q) over interfaces,
/// or the configured dt_max when nothing moves.
pub fn cfl_dt(
    state: &NonlocalState,
    model: &VelocityModel,
    cfl: f64,
    options: &SolverOptions,
) -> f64 {
    let n = state.field.len();
    let mut max_speed: f64 = 0.0;
    for k in 0..=n {
        max_speed = max_speed.max(model.velocity(state.q_at_interface(k)));
    }
    if max_speed <= 0.0 {
        options.resolved_dt_max(state.field.dx(), model)
    } else {
        cfl * state.field.dx() / max_speed
    }
}

/// One conservative update. Fails with `StepRejected` if any cell leaves
/// [−slack, rho_jam + slack]; in-slack values are snapped to the bounds.
pub fn step_nonlocal(
    state: &NonlocalState,
    model: &VelocityModel,
    dt: f64,
) -> Result<NonlocalState> {
    let (field, _) = match_step(state, model, dt, TimeIntegrator::Euler)?;
    let q = exp_average(&field, state.eps)?;
    Ok(NonlocalState {
        t: state.t + dt,
        field,
        eps: state.eps,
        q,
    })
}

/// Interface fluxes F_0 ..= F_N (F_k sits at edge x_k).
fn interface_fluxes(state: &NonlocalState, model: &VelocityModel) -> Vec<f64> {
    let rho = state.field.values();
    let n = rho.len();
    let mut fluxes = Vec::with_capacity(n + 1);
    let ghost_left = match state.field.boundary() {
        BoundaryPolicy::ConstantExtension => rho[0],
        BoundaryPolicy::Periodic => rho[n - 1],
    };
    fluxes.push(ghost_left * model.velocity(state.q_at_interface(0)));
    for k in 1..=n {
        fluxes.push(rho[k - 1] * model.velocity(state.q_at_interface(k)));
    }
    fluxes
}

fn euler_values(
    state: &NonlocalState,
    model: &VelocityModel,
    dt: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let fluxes = interface_fluxes(state, model);
    let rho = state.field.values();
    let n = rho.len();
    let lambda = dt / state.field.dx();
    let mut out = Vec::with_capacity(n);
    let rho_jam = model.rho_jam();
    for i in 0..n {
        let v = rho[i] - lambda * (fluxes[i + 1] - fluxes[i]);
        if !v.is_finite() || v < -DENSITY_SLACK || v > rho_jam + DENSITY_SLACK {
            return Err(Error::StepRejected { dt });
        }
        out.push(v.clamp(0.0, rho_jam));
    }
    Ok((out, fluxes[0], fluxes[n]))
}

fn match_step(
    state: &NonlocalState,
    model: &VelocityModel,
    dt: f64,
    integrator: TimeIntegrator,
) -> Result<(DensityField, StepStats)> {
    match integrator {
        TimeIntegrator::Euler => {
            let (values, f_left, f_right) = euler_values(state, model, dt)?;
            let field = DensityField::new(
                state.field.x0(),
                state.field.dx(),
                values,
                state.field.boundary(),
            )?;
            Ok((
                field,
                StepStats {
                    inflow: dt * f_left,
                    outflow: dt * f_right,
                },
            ))
        }
        TimeIntegrator::SspRk2 => {
            let (v1, fl0, fr0) = euler_values(state, model, dt)?;
            let stage_field = DensityField::new(
                state.field.x0(),
                state.field.dx(),
                v1,
                state.field.boundary(),
            )?;
            let stage_q = exp_average(&stage_field, state.eps)?;
            let stage = NonlocalState {
                t: state.t + dt,
                field: stage_field,
                eps: state.eps,
                q: stage_q,
            };
            let (v2, fl1, fr1) = euler_values(&stage, model, dt)?;
            let rho = state.field.values();
            let rho_jam = model.rho_jam();
            let mut values = Vec::with_capacity(rho.len());
            for (u0, u2) in rho.iter().zip(v2.iter()) {
                let v = 0.5 * (u0 + u2);
                if !v.is_finite() || v < -DENSITY_SLACK || v > rho_jam + DENSITY_SLACK {
                    return Err(Error::StepRejected { dt });
                }
                values.push(v.clamp(0.0, rho_jam));
            }
            let field = DensityField::new(
                state.field.x0(),
                state.field.dx(),
                values,
                state.field.boundary(),
            )?;
            Ok((
                field,
                StepStats {
                    inflow: 0.5 * dt * (fl0 + fl1),
                    outflow: 0.5 * dt * (fr0 + fr1),
                },
            ))
        }
    }
}

struct NonlocalMarcher<'a> {
    state: NonlocalState,
    model: &'a VelocityModel,
    options: SolverOptions,
}

impl Marcher for NonlocalMarcher<'_> {
    fn stable_dt(&self, cfl: f64) -> f64 {
        cfl_dt(&self.state, self.model, cfl, &self.options)
    }

    fn try_step(&mut self, dt: f64) -> Result<StepStats> {
        let (field, stats) = match_step(&self.state, self.model, dt, self.options.integrator)?;
        let q = exp_average(&field, self.state.eps)?;
        self.state = NonlocalState {
            t: self.state.t + dt,
            field,
            eps: self.state.eps,
            q,
        };
        Ok(stats)
    }

    fn field(&self) -> &DensityField {
        &self.state.field
    }
}

/// March the nonlocal model to t_end, landing exactly on every requested
/// snapshot time. The returned trajectory always starts with the initial
/// datum.
pub fn solve_nonlocal(
    initial: &DensityField,
    model: &VelocityModel,
    eps: f64,
    t_end: f64,
    cfl: f64,
    snapshot_times: &[f64],
    options: &SolverOptions,
) -> Result<Trajectory> {
    let state = NonlocalState::new(0.0, initial.clone(), eps, model)?;
    let uniformly_positive = initial.min_value() > 0.0;
    let initial_mass = initial.mass();
    let mut marcher = NonlocalMarcher {
        state,
        model,
        options: *options,
    };
    let outcome = march(&mut marcher, t_end, cfl, snapshot_times, options.retry_budget)?;
    let final_mass = marcher.state.field.mass();
    let meta = RunMeta {
        solver: format!("nonlocal-upwind-{}", options.integrator.as_str()),
        model: model.descriptor(),
        eps: Some(eps),
        dx: initial.dx(),
        cfl,
        boundary: initial.boundary(),
        steps: outcome.steps,
        initial_mass,
        final_mass,
        inflow: outcome.inflow,
        outflow: outcome.outflow,
        max_tv: outcome.max_tv,
        uniformly_positive,
    };
    Trajectory::new(outcome.snapshots, meta)
}
