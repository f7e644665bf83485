//! Command-line surface: solver runs, convergence studies, entropy
//! audits, exact Riemann fans, and model validation.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure,
//! 3 i/o failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlwr::csvio::{
    write_audit_csv, write_csv_trajectory, write_plot_script, write_report_csv,
    write_residuals_csv, AuditRow, ResidualRow,
};
use nlwr::{
    convergence_study, entropy_residual, j_decomposition, negative_control_study, parse_config,
    riemann_similarity, solve_local, solve_nonlocal, standard_bumps, standard_spatial_bumps,
    total_variation, Error, ModelKind, NonlocalState, RunConfig, SolverOptions, StudyOutcome,
    Trajectory, VelocityModel, WaveKind,
};

#[derive(Parser)]
#[command(name = "nlwr", version, about = "Nonlocal traffic-flow solver and entropy toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the nonlocal model for every kernel scale in the config.
    RunNonlocal(RunArgs),
    /// Evolve the local reference model with the Godunov scheme.
    RunLocal(RunArgs),
    /// Full ε→0 study: errors, rates, audits, verdict.
    Convergence(RunArgs),
    /// Entropy audit: per-frame J-terms and per-bump residuals.
    EntropyAudit(AuditArgs),
    /// Exact similarity solution of a Riemann problem.
    Riemann(RiemannArgs),
    /// Check the admissibility assumptions of a velocity model.
    ValidateModel(ModelArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration document (TOML).
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured CFL number.
    #[arg(long)]
    cfl: Option<f64>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Audit a frozen expansion-shock candidate built from the config's
    /// Riemann data instead of solver output.
    #[arg(long)]
    negative_control: bool,
}

#[derive(Args)]
struct ModelArgs {
    /// greenshields | quadratic | custom-polynomial
    #[arg(long, default_value = "greenshields")]
    kind: String,
    #[arg(long, default_value_t = 1.0)]
    rho_jam: f64,
    /// Comma-separated parameter list (model-specific).
    #[arg(long, value_delimiter = ',')]
    params: Option<Vec<f64>>,
    #[arg(long)]
    delta_star: Option<f64>,
    /// Sample-grid size for the slope check.
    #[arg(long, default_value_t = 1001)]
    samples: usize,
}

#[derive(Args)]
struct RiemannArgs {
    rho_left: f64,
    rho_right: f64,
    #[command(flatten)]
    model: ModelArgs,
    /// Print the profile ρ(ξ) on this many sample rays.
    #[arg(long, default_value_t = 0)]
    samples_xi: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Usage(_) | Error::InvalidModel(_) => 1,
        Error::StepRejected { .. } | Error::CflExhausted { .. } => 2,
        Error::Io { .. } => 3,
    }
}

fn run(command: Command) -> nlwr::Result<ExitCode> {
    match command {
        Command::RunNonlocal(args) => run_nonlocal(&load(&args)?),
        Command::RunLocal(args) => run_local(&load(&args)?),
        Command::Convergence(args) => convergence(&load(&args)?),
        Command::EntropyAudit(args) => {
            let cfg = load(&args.run)?;
            entropy_audit(&cfg, args.negative_control)
        }
        Command::Riemann(args) => riemann(&args),
        Command::ValidateModel(args) => validate_model(&args),
    }
}

fn load(args: &RunArgs) -> nlwr::Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Io {
            path: args.config.clone(),
            source: e,
        })?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(cfl) = args.cfl {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Domain(format!("--cfl must lie in (0, 1], got {cfl}")));
        }
        cfg.cfl = cfl;
    }
    let min_eps = cfg.eps.iter().copied().fold(f64::INFINITY, f64::min);
    if cfg.dx > min_eps / 10.0 {
        eprintln!(
            "warning: dx = {} under-resolves the smallest kernel scale {min_eps}",
            cfg.dx
        );
    }
    Ok(cfg)
}

fn build_model(args: &ModelArgs) -> nlwr::Result<VelocityModel> {
    let kind = ModelKind::parse(&args.kind)
        .ok_or_else(|| Error::Domain(format!("unknown model kind `{}`", args.kind)))?;
    let params = args.params.clone().unwrap_or_else(|| match kind {
        ModelKind::Greenshields => vec![1.0],
        ModelKind::Quadratic => vec![0.5, 0.25],
        ModelKind::CustomPolynomial => vec![],
    });
    let delta_star = args.delta_star.unwrap_or(match kind {
        ModelKind::Greenshields => params.first().copied().unwrap_or(1.0) / args.rho_jam,
        ModelKind::Quadratic => params.first().copied().unwrap_or(0.5),
        ModelKind::CustomPolynomial => 1.0,
    });
    VelocityModel::from_spec(kind, args.rho_jam, &params, delta_star)
}

fn scenario_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join(&cfg.scenario)
}

fn print_run_summary(label: &str, traj: &Trajectory) {
    println!(
        "{label}: steps {}, mass defect {:.2e}, max TV {:.6}, snapshots {}",
        traj.meta.steps,
        traj.conservation_defect(),
        traj.meta.max_tv,
        traj.snapshots().len()
    );
    if !traj.meta.uniformly_positive {
        println!("  note: initial datum touches vacuum; outside the convergence theory");
    }
}

fn run_nonlocal(cfg: &RunConfig) -> nlwr::Result<ExitCode> {
    let model = cfg.model.build()?;
    require_valid(&model)?;
    let initial = cfg.initial_field()?;
    let options = SolverOptions {
        integrator: cfg.integrator,
        ..SolverOptions::default()
    };
    for &eps in &cfg.eps {
        let traj = solve_nonlocal(
            &initial,
            &model,
            eps,
            cfg.t_end,
            cfg.cfl,
            &cfg.snapshot_times,
            &options,
        )?;
        let path = scenario_dir(cfg).join(format!("eps_{eps}")).join("trajectory.csv");
        write_csv_trajectory(&traj, &path)?;
        print_run_summary(&format!("eps {eps}"), &traj);
        println!("  wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_local(cfg: &RunConfig) -> nlwr::Result<ExitCode> {
    let model = cfg.model.build()?;
    require_valid(&model)?;
    let initial = cfg.initial_field()?;
    let traj = solve_local(
        &initial,
        &model,
        cfg.t_end,
        cfg.cfl,
        &cfg.snapshot_times,
        &SolverOptions::default(),
    )?;
    let path = scenario_dir(cfg).join("local").join("trajectory.csv");
    write_csv_trajectory(&traj, &path)?;
    print_run_summary("godunov", &traj);
    println!("  wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn require_valid(model: &VelocityModel) -> nlwr::Result<()> {
    let report = model.validate(1001)?;
    if !report.pass() {
        return Err(Error::InvalidModel(format!(
            "v(rho_jam) = {:.3e}, max v' = {:.6} at rho = {:.6} (declared delta_star {})",
            report.v_at_jam, report.max_slope, report.max_slope_at, report.delta_star
        )));
    }
    Ok(())
}

fn write_study_outputs(cfg: &RunConfig, out: &StudyOutcome) -> nlwr::Result<()> {
    let dir = scenario_dir(cfg);
    write_report_csv(&out.report, &dir.join("report.csv"))?;
    for run in &out.runs {
        write_csv_trajectory(
            &run.trajectory,
            &dir.join(format!("eps_{}", run.eps)).join("trajectory.csv"),
        )?;
    }
    if let Some(reference) = &out.reference {
        write_csv_trajectory(reference, &dir.join("reference").join("trajectory.csv"))?;
    }
    write_plot_script(&dir.join("plot.py"))?;
    Ok(())
}

fn convergence(cfg: &RunConfig) -> nlwr::Result<ExitCode> {
    let out = convergence_study(cfg)?;
    write_study_outputs(cfg, &out)?;
    let report = &out.report;
    println!("scenario {}", report.scenario);
    println!("eps        l1_error      tv_max      residual_min");
    for k in 0..report.eps.len() {
        println!(
            "{:<10} {:<13.6e} {:<11.6} {:+.4e}",
            report.eps[k], report.errors[k], report.tv_max[k], report.residual_min[k]
        );
    }
    println!("reference residual_min {:+.4e}", report.reference_residual_min);
    if let Some(rate) = &report.rate {
        println!("fitted rate {:.4} (max log-residual {:.2e})", rate.slope, rate.max_residual);
    }
    if let Some(failure) = &report.failure {
        println!("failure: {failure}");
    }
    println!("verdict: {}", report.verdict.as_str());
    println!("outputs under {}", scenario_dir(cfg).display());
    Ok(ExitCode::SUCCESS)
}

fn entropy_audit(cfg: &RunConfig, negative_control: bool) -> nlwr::Result<ExitCode> {
    let model = cfg.model.build()?;
    require_valid(&model)?;
    let dir = scenario_dir(cfg);
    let bumps = standard_bumps(&cfg.window, cfg.t_end);
    let spatial = standard_spatial_bumps(&cfg.window);

    let mut audit_rows = Vec::new();
    let mut residual_rows = Vec::new();
    let mut audit_trajectory = |label: f64, traj: &Trajectory| -> nlwr::Result<()> {
        for phi in &bumps {
            residual_rows.push(ResidualRow {
                scenario: cfg.scenario.clone(),
                eps: label,
                phi: phi.label(),
                residual: entropy_residual(traj, &model, phi)?,
            });
        }
        if label.is_nan() {
            return Ok(()); // J-terms need a kernel scale
        }
        for snap in traj.snapshots() {
            let state = NonlocalState::new(snap.t, snap.field.clone(), label, &model)?;
            let tv = total_variation(&snap.field);
            for phi in &spatial {
                let terms = j_decomposition(&state, &model, phi)?;
                audit_rows.push(AuditRow {
                    scenario: cfg.scenario.clone(),
                    eps: label,
                    t: snap.t,
                    phi: format!("x{}r{}", phi.center, phi.radius),
                    terms,
                    tv,
                });
            }
        }
        Ok(())
    };

    if negative_control {
        let study = negative_control_study(cfg)?;
        audit_trajectory(f64::NAN, &study.runs[0].trajectory)?;
        let worst = study.report.residual_min[0];
        println!("negative control worst residual {worst:+.4e}");
        println!("verdict: {}", study.report.verdict.as_str());
    } else {
        let initial = cfg.initial_field()?;
        let options = SolverOptions {
            integrator: cfg.integrator,
            ..SolverOptions::default()
        };
        for &eps in &cfg.eps {
            let traj = solve_nonlocal(
                &initial,
                &model,
                eps,
                cfg.t_end,
                cfg.cfl,
                &cfg.snapshot_times,
                &options,
            )?;
            audit_trajectory(eps, &traj)?;
        }
        let reference = solve_local(
            &cfg.initial_field_ref()?,
            &model,
            cfg.t_end,
            cfg.cfl,
            &cfg.snapshot_times,
            &options,
        )?;
        audit_trajectory(f64::NAN, &reference)?;
    }

    let worst = residual_rows
        .iter()
        .map(|r| r.residual)
        .fold(f64::INFINITY, f64::min);
    let worst_sign = audit_rows
        .iter()
        .map(|r| r.terms.j23.max(r.terms.j5))
        .fold(f64::NEG_INFINITY, f64::max);
    write_audit_csv(&audit_rows, &dir.join("audit.csv"))?;
    write_residuals_csv(&residual_rows, &dir.join("residuals.csv"))?;
    write_plot_script(&dir.join("plot.py"))?;
    println!(
        "audited {} frames, {} residuals; worst residual {worst:+.4e}; max(J23, J5) {worst_sign:+.2e}",
        audit_rows.len(),
        residual_rows.len()
    );
    println!("outputs under {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn riemann(args: &RiemannArgs) -> nlwr::Result<ExitCode> {
    let model = build_model(&args.model)?;
    require_valid(&model)?;
    let sol = riemann_similarity(&model, args.rho_left, args.rho_right)?;
    println!(
        "riemann({}, {}) under {}",
        args.rho_left,
        args.rho_right,
        model.descriptor()
    );
    if sol.waves().is_empty() {
        println!("constant solution, no waves");
    }
    for (k, wave) in sol.waves().iter().enumerate() {
        match wave.kind {
            WaveKind::Shock => println!(
                "wave {k}: shock {} -> {} at speed {:.12}",
                wave.u_from, wave.u_to, wave.speed_lo
            ),
            WaveKind::Rarefaction => println!(
                "wave {k}: rarefaction {} -> {} over speeds [{:.12}, {:.12}]",
                wave.u_from, wave.u_to, wave.speed_lo, wave.speed_hi
            ),
        }
    }
    println!("rankine-hugoniot defect {:.2e}", sol.rankine_hugoniot_defect());
    if args.samples_xi > 1 {
        let span = model.max_flux_slope() * 1.05;
        println!("xi,rho");
        for k in 0..args.samples_xi {
            let xi = -span + 2.0 * span * k as f64 / (args.samples_xi - 1) as f64;
            println!("{xi},{}", sol.eval(xi));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn validate_model(args: &ModelArgs) -> nlwr::Result<ExitCode> {
    let model = build_model(args)?;
    let report = model.validate(args.samples)?;
    println!("model {}", model.descriptor());
    println!(
        "v(rho_jam) = {:.3e} ({})",
        report.v_at_jam,
        if report.jam_ok() { "ok" } else { "violated" }
    );
    println!(
        "max v' = {:.9} at rho = {:.6} vs bound -{} ({})",
        report.max_slope,
        report.max_slope_at,
        report.delta_star,
        if report.slope_ok() { "ok" } else { "violated" }
    );
    println!("slope margin {:.3e}", report.slope_margin());
    if report.pass() {
        println!("PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAIL");
        Ok(ExitCode::from(1))
    }
}
