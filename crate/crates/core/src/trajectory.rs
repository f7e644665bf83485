//! Time-stamped solution histories plus run bookkeeping.

use crate::error::{Error, Result};
use crate::field::{BoundaryPolicy, DensityField};

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: DensityField,
}

/// Metadata accumulated while a run marches.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub solver: String,
    pub model: String,
    /// Kernel scale; None for the local reference solver and synthetic
    /// candidates.
    pub eps: Option<f64>,
    pub dx: f64,
    pub cfl: f64,
    pub boundary: BoundaryPolicy,
    pub steps: u64,
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Time-integrated boundary flux entering at the left edge.
    pub inflow: f64,
    /// Time-integrated boundary flux leaving at the right edge.
    pub outflow: f64,
    /// Largest total variation seen over all accepted steps.
    pub max_tv: f64,
    /// Whether the initial datum was uniformly positive (min ρ̄ > 0);
    /// runs that touch vacuum sit outside the convergence theory and are
    /// tagged so in reports.
    pub uniformly_positive: bool,
}

/// An ordered sequence of snapshots sharing one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    snapshots: Vec<Snapshot>,
    pub meta: RunMeta,
}

impl Trajectory {
    pub fn new(snapshots: Vec<Snapshot>, meta: RunMeta) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::Usage("trajectory needs at least one snapshot".into()));
        }
        for pair in snapshots.windows(2) {
            if !(pair[1].t > pair[0].t) {
                return Err(Error::Usage(format!(
                    "snapshot times must increase strictly: {} then {}",
                    pair[0].t, pair[1].t
                )));
            }
            if !pair[1].field.same_grid(&pair[0].field) {
                return Err(Error::Usage("snapshots must share one grid".into()));
            }
        }
        Ok(Trajectory { snapshots, meta })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.t)
    }

    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("non-empty by construction")
    }

    /// Snapshot at time t (within tolerance), if any.
    pub fn at_time(&self, t: f64) -> Option<&Snapshot> {
        let tol = 1e-9 * (1.0 + t.abs());
        self.snapshots.iter().find(|s| (s.t - t).abs() <= tol)
    }

    /// Mass-balance defect |m_end − m_0 − (inflow − outflow)| relative to
    /// the initial mass; zero up to roundoff for conservative schemes.
    pub fn conservation_defect(&self) -> f64 {
        let m = &self.meta;
        let expected = m.initial_mass + m.inflow - m.outflow;
        (m.final_mass - expected).abs() / m.initial_mass.abs().max(1e-30)
    }
}
