// Temporary exploration harness; not part of the deliverable.
use nlwr::*;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "acc1" => acc1(),
        "acc2" => acc2(),
        "acc3" => acc3(),
        "acc4" => acc4(),
        "acc5" => acc5(),
        "tv" => tv_suite(),
        "bumps" => per_bump(),
        _ => eprintln!("usage: scratch <acc1|acc2|acc3|acc4|acc5|tv|bumps>"),
    }
}

fn per_bump() {
    let cfg = &standard_suite()[0];
    let model = cfg.model.build().unwrap();
    let initial = cfg.initial_field().unwrap();
    let eps = 0.0125;
    let traj = solve_nonlocal(
        &initial,
        &model,
        eps,
        cfg.t_end,
        cfg.cfl,
        &cfg.snapshot_times,
        &SolverOptions::default(),
    )
    .unwrap();
    for phi in standard_bumps(&cfg.window, cfg.t_end) {
        let r = entropy_residual(&traj, &model, &phi).unwrap();
        println!(
            "x0 {:+.3} sx {:.3} t0 {:.3} st {:.3}  R {:+.5e}",
            phi.space.center, phi.space.radius, phi.time.center, phi.time.radius, r
        );
    }
}

fn acc1() {
    let t0 = std::time::Instant::now();
    let cfg = &standard_suite()[0];
    let out = convergence_study(cfg).unwrap();
    println!("scenario {} in {:?}", out.report.scenario, t0.elapsed());
    println!("eps    error        tv_max     res_min");
    for ((e, err), (tv, r)) in out
        .report
        .eps
        .iter()
        .zip(&out.report.errors)
        .zip(out.report.tv_max.iter().zip(&out.report.residual_min))
    {
        println!("{e:<6} {err:<12.6e} {tv:<10.6} {r:<12.4e}");
    }
    println!("ref residual min {:\u{20}<12.4e}", out.report.reference_residual_min);
    println!("verdict {}", out.report.verdict.as_str());
    if let Some(rate) = out.report.rate {
        println!("slope {:.3}", rate.slope);
    }
    for w in out.report.errors.windows(2) {
        println!("ratio {:.3}", w[0] / w[1]);
    }
}

fn acc2() {
    let model = VelocityModel::greenshields(1.0, 1.0, 1.0).unwrap();
    let n = 4000;
    let dx = 4.0 / n as f64;
    let field = DensityField::from_fn(-2.0, dx, n, BoundaryPolicy::ConstantExtension, |x| {
        if x < 0.0 {
            0.8
        } else {
            0.2
        }
    })
    .unwrap();
    let traj = solve_nonlocal(
        &field,
        &model,
        0.0125,
        0.5,
        0.5,
        &[],
        &SolverOptions::default(),
    )
    .unwrap();
    let last = &traj.last().field;
    let sol = riemann_similarity(&model, 0.8, 0.2).unwrap();
    let exact = sol
        .sampled(-2.0, dx, n, BoundaryPolicy::ConstantExtension, 0.0, 0.5)
        .unwrap();
    let window = Window::new(-0.5, 0.5);
    let d_rare = l1_distance(last, &exact, &window).unwrap();
    let d_jump = l1_distance(last, &field, &window).unwrap();
    println!("dist to rarefaction {d_rare:.6}, dist to frozen jump {d_jump:.6}, ratio {:.3}", d_jump / d_rare);
}

fn acc3() {
    // residual floors per scenario for finest eps and reference
    for cfg in standard_suite() {
        let t0 = std::time::Instant::now();
        let out = convergence_study(&cfg).unwrap();
        println!(
            "{:<18} finest res {:+.4e}  ref res {:+.4e}  verdict {}  ({:?})",
            out.report.scenario,
            out.report.residual_min.last().unwrap(),
            out.report.reference_residual_min,
            out.report.verdict.as_str(),
            t0.elapsed()
        );
    }
    // negative control
    let model = VelocityModel::greenshields(1.0, 1.0, 1.0).unwrap();
    let traj = frozen_jump_trajectory(&model, -2.0, 1e-3, 4000, 0.0, 0.8, 0.2, 2.0, 101).unwrap();
    let bumps = standard_bumps(&Window::new(-1.0, 1.0), 2.0);
    let res = worst_residual(&traj, &model, &bumps).unwrap();
    println!("frozen jump worst residual {res:+.4e}");
}

fn acc4() {
    let model = VelocityModel::greenshields(1.0, 1.0, 1.0).unwrap();
    for (dx_label, n) in [("4e-3", 1000usize), ("2e-3", 2000), ("1e-3", 4000), ("5e-4", 8000)] {
        let dx = 4.0 / n as f64;
        let field = DensityField::from_fn(-2.0, dx, n, BoundaryPolicy::ConstantExtension, |x| {
            0.5 + 0.15 * (x / 0.1).tanh()
        })
        .unwrap();
        let state = NonlocalState::new(0.0, field, 0.05, &model).unwrap();
        let phi = Bump1d::new(0.0, 0.25).unwrap();
        let jd = j_decomposition(&state, &model, &phi).unwrap();
        println!(
            "dx {dx_label}: decomp {:.3e}  split {:.3e}  ibp {:.3e}  (sum {:.3})  tol {:.3e}",
            jd.decomposition_residual(),
            jd.split_residual(),
            jd.ibp_residual(),
            jd.term_sum(),
            1e-6 * (1.0 + jd.term_sum()),
        );
        println!(
            "   terms j={:+.5e} j1={:+.5e} j21={:+.5e} j22={:+.5e} j23={:+.5e} j4={:+.5e} j5={:+.5e} w={:+.5e}",
            jd.j, jd.j1, jd.j21, jd.j22, jd.j23, jd.j4, jd.j5, jd.w_check
        );
    }
}

fn acc5() {
    let cfg = &standard_suite()[3];
    let model = cfg.model.build().unwrap();
    let initial = cfg.initial_field().unwrap();
    let phi = Bump1d::new(0.0, 1.0).unwrap();
    let mut points_j1 = Vec::new();
    let mut points_j34 = Vec::new();
    for &eps in &cfg.eps {
        let traj = solve_nonlocal(
            &initial,
            &model,
            eps,
            0.2,
            cfg.cfl,
            &[0.2],
            &SolverOptions::default(),
        )
        .unwrap();
        let state = NonlocalState::new(0.2, traj.last().field.clone(), eps, &model).unwrap();
        let jd = j_decomposition(&state, &model, &phi).unwrap();
        println!("eps {eps}: j1 {:+.4e}  j3+j4 {:+.4e}", jd.j1, jd.j3 + jd.j4);
        points_j1.push((eps, jd.j1.abs()));
        points_j34.push((eps, (jd.j3 + jd.j4).abs()));
    }
    println!("slope j1  {:.3}", fit_rate(&points_j1).unwrap().slope);
    println!("slope j34 {:.3}", fit_rate(&points_j34).unwrap().slope);
}

fn tv_suite() {
    for cfg in standard_suite() {
        let model = cfg.model.build().unwrap();
        let initial = cfg.initial_field().unwrap();
        let tv0 = total_variation(&initial);
        for &eps in &cfg.eps {
            let traj = solve_nonlocal(
                &initial,
                &model,
                eps,
                cfg.t_end,
                cfg.cfl,
                &[],
                &SolverOptions::default(),
            )
            .unwrap();
            println!(
                "{:<18} eps {:<7} tv0 {:<6} max_tv {:<10.6} ratio {:.4} defect {:.2e}",
                cfg.scenario,
                eps,
                tv0,
                traj.meta.max_tv,
                traj.meta.max_tv / tv0.max(1e-300),
                traj.conservation_defect(),
            );
        }
    }
}
