//! Shared explicit time-marching loop: CFL-limited steps that land
//! exactly on requested snapshot times, with a halve-and-retry guard on
//! bound violations.

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::trajectory::Snapshot;

/// Boundary fluxes of one accepted step, time-integrated over dt.
pub(crate) struct StepStats {
    pub inflow: f64,
    pub outflow: f64,
}

pub(crate) trait Marcher {
    /// Largest stable dt at the current state for the given CFL number.
    fn stable_dt(&self, cfl: f64) -> f64;
    /// Advance the internal state by dt, or fail with `StepRejected`.
    fn try_step(&mut self, dt: f64) -> Result<StepStats>;
    fn field(&self) -> &DensityField;
}

pub(crate) struct MarchOutcome {
    pub snapshots: Vec<Snapshot>,
    pub steps: u64,
    pub inflow: f64,
    pub outflow: f64,
    pub max_tv: f64,
}

/// Sorted, deduplicated target times in (0, t_end], always ending with
/// t_end itself.
fn resolve_targets(snapshot_times: &[f64], t_end: f64) -> Vec<f64> {
    let mut targets: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_end)
        .collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    targets
}

pub(crate) fn march(
    marcher: &mut dyn Marcher,
    t_end: f64,
    cfl: f64,
    snapshot_times: &[f64],
    retry_budget: u32,
) -> Result<MarchOutcome> {
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be > 0, got {t_end}")));
    }
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Domain(format!("cfl must lie in (0, 1], got {cfl}")));
    }

    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: marcher.field().clone(),
    }];
    let mut max_tv = crate::field::field_tv(marcher.field());
    let mut steps = 0u64;
    let mut inflow = 0.0;
    let mut outflow = 0.0;
    let mut t = 0.0;

    for target in resolve_targets(snapshot_times, t_end) {
        while t < target {
            let remaining = target - t;
            let mut dt = marcher.stable_dt(cfl).min(remaining);
            let mut retries = 0u32;
            let stats = loop {
                match marcher.try_step(dt) {
                    Ok(stats) => break stats,
                    Err(Error::StepRejected { .. }) if retries < retry_budget => {
                        dt *= 0.5;
                        retries += 1;
                    }
                    Err(Error::StepRejected { .. }) => {
                        return Err(Error::CflExhausted { t, dt, retries });
                    }
                    Err(e) => return Err(e),
                }
            };
            steps += 1;
            inflow += stats.inflow;
            outflow += stats.outflow;
            max_tv = max_tv.max(crate::field::field_tv(marcher.field()));
            t = if dt >= remaining || t + dt >= target {
                target
            } else {
                t + dt
            };
        }
        snapshots.push(Snapshot {
            t: target,
            field: marcher.field().clone(),
        });
    }

    Ok(MarchOutcome {
        snapshots,
        steps,
        inflow,
        outflow,
        max_tv,
    })
}
