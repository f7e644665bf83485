//! CSV emission and the generated plot script.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so
//! every value re-parses to the identical binary64. All writers are
//! deterministic: the same inputs produce byte-identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::audit::JDecomposition;
use crate::error::{Error, Result};
use crate::harness::ConvergenceReport;
use crate::trajectory::Trajectory;

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(BufWriter::new(
        fs::File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn finish(mut w: BufWriter<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write `t,x,rho` rows, time-major then x ascending.
pub fn write_csv_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io_err = |e| Error::io(path, e);
    writeln!(w, "t,x,rho").map_err(io_err)?;
    for snap in traj.snapshots() {
        for i in 0..snap.field.len() {
            writeln!(w, "{},{},{}", snap.t, snap.field.cell_center(i), snap.field.values()[i])
                .map_err(io_err)?;
        }
    }
    finish(w, path)
}

/// Read back the `t,x,rho` triplets of a trajectory file.
pub fn read_csv_trajectory(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "t,x,rho" {
                return Err(Error::Usage(format!(
                    "unexpected trajectory header `{line}` in {}",
                    path.display()
                )));
            }
            continue;
        }
        let mut parts = line.split(',');
        let mut next = || -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Usage(format!("short row at line {}", lineno + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Usage(format!("bad number at line {}: {e}", lineno + 1)))
        };
        rows.push((next()?, next()?, next()?));
    }
    Ok(rows)
}

/// Report rows, one per ε, with the scenario-level summary repeated.
pub fn write_report_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io_err = |e| Error::io(path, e);
    writeln!(
        w,
        "scenario,eps,l1_error,tv_max,residual_min,reference_residual_min,tv_initial,\
         rate_slope,rate_intercept,rate_max_residual,residual_tol,negative_threshold,\
         uniformly_positive,verdict"
    )
    .map_err(io_err)?;
    let (slope, intercept, fit_res) = report
        .rate
        .map(|r| (r.slope, r.intercept, r.max_residual))
        .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    for (k, &eps) in report.eps.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            report.scenario,
            eps,
            report.errors.get(k).copied().unwrap_or(f64::NAN),
            report.tv_max.get(k).copied().unwrap_or(f64::NAN),
            report.residual_min.get(k).copied().unwrap_or(f64::NAN),
            report.reference_residual_min,
            report.tv_initial,
            slope,
            intercept,
            fit_res,
            report.residual_tol,
            report.negative_threshold,
            report.uniformly_positive,
            report.verdict.as_str()
        )
        .map_err(io_err)?;
    }
    finish(w, path)
}

/// One audited frame for one spatial test profile.
#[derive(Debug, Clone)]
pub struct AuditRow {
    pub scenario: String,
    /// NaN for candidates without a kernel scale (reference, frozen jump).
    pub eps: f64,
    pub t: f64,
    pub phi: String,
    pub terms: JDecomposition,
    pub tv: f64,
}

/// Fixed column order:
/// scenario,eps,t,phi,j,j1,j21,j22,j23,j3,j4,j5,w_check,
/// res_decomp,res_split,res_ibp,tv
pub fn write_audit_csv(rows: &[AuditRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io_err = |e| Error::io(path, e);
    writeln!(
        w,
        "scenario,eps,t,phi,j,j1,j21,j22,j23,j3,j4,j5,w_check,res_decomp,res_split,res_ibp,tv"
    )
    .map_err(io_err)?;
    for r in rows {
        let j = &r.terms;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.eps,
            r.t,
            r.phi,
            j.j,
            j.j1,
            j.j21,
            j.j22,
            j.j23,
            j.j3,
            j.j4,
            j.j5,
            j.w_check,
            j.decomposition_residual(),
            j.split_residual(),
            j.ibp_residual(),
            r.tv
        )
        .map_err(io_err)?;
    }
    finish(w, path)
}

/// One space-time entropy residual for one bump.
#[derive(Debug, Clone)]
pub struct ResidualRow {
    pub scenario: String,
    pub eps: f64,
    pub phi: String,
    pub residual: f64,
}

pub fn write_residuals_csv(rows: &[ResidualRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io_err = |e| Error::io(path, e);
    writeln!(w, "scenario,eps,phi,residual").map_err(io_err)?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.scenario, r.eps, r.phi, r.residual).map_err(io_err)?;
    }
    finish(w, path)
}

/// The generated plotting helper. The library never links a plotting
/// backend; figures are post-hoc via this script and an external Python.
pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plot helper for solver output directories.

Usage: python3 plot.py <output-dir>

Reads report.csv and the per-run trajectory.csv files written next to it
and renders convergence and profile figures as PNG.
"""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_report(outdir):
    path = os.path.join(outdir, "report.csv")
    if not os.path.exists(path):
        return
    rows = read_rows(path)
    eps = [float(r["eps"]) for r in rows]
    err = [float(r["l1_error"]) for r in rows]
    if not eps or any(e != e for e in eps):
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(eps, err, "o-")
    ax.set_xlabel("eps")
    ax.set_ylabel("L1 error vs reference")
    ax.set_title(rows[0]["scenario"])
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(os.path.join(outdir, "convergence.png"), dpi=150)
    plt.close(fig)


def plot_trajectories(outdir):
    for name in sorted(os.listdir(outdir)):
        sub = os.path.join(outdir, name)
        path = os.path.join(sub, "trajectory.csv")
        if not os.path.isdir(sub) or not os.path.exists(path):
            continue
        rows = read_rows(path)
        times = sorted({float(r["t"]) for r in rows})
        pick = {times[0], times[len(times) // 2], times[-1]}
        fig, ax = plt.subplots(figsize=(6, 4))
        for t in sorted(pick):
            xs = [float(r["x"]) for r in rows if float(r["t"]) == t]
            ys = [float(r["rho"]) for r in rows if float(r["t"]) == t]
            ax.plot(xs, ys, label=f"t = {t:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("rho")
        ax.set_title(name)
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(sub, "profiles.png"), dpi=150)
        plt.close(fig)


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    plot_report(outdir)
    plot_trajectories(outdir)


if __name__ == "__main__":
    main()
"#;

pub fn write_plot_script(path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(PLOT_SCRIPT.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    finish(w, path)
}
