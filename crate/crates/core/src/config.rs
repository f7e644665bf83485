//! Run configuration: a strict TOML schema with documented defaults.
//! Unknown keys are rejected and semantic violations are reported all at
//! once, so published run files stay reproducible.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::field::{BoundaryPolicy, DensityField, Window};
use crate::model::{ModelKind, VelocityModel};
use crate::nonlocal::TimeIntegrator;

pub const DEFAULT_EPS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
pub const DEFAULT_SNAPSHOT_COUNT: usize = 101;

/// Model section of a run config.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub rho_jam: f64,
    pub params: Vec<f64>,
    pub delta_star: f64,
}

impl ModelSpec {
    pub fn build(&self) -> Result<VelocityModel> {
        VelocityModel::from_spec(self.kind, self.rho_jam, &self.params, self.delta_star)
    }
}

/// Initial-datum families.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Riemann {
        rho_left: f64,
        rho_right: f64,
        x_jump: f64,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Sine {
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
    },
}

impl InitialData {
    pub fn kind_str(&self) -> &'static str {
        match self {
            InitialData::Riemann { .. } => "riemann",
            InitialData::Piecewise { .. } => "piecewise",
            InitialData::Sine { .. } => "sine",
        }
    }

    fn min_density(&self) -> f64 {
        match self {
            InitialData::Riemann {
                rho_left, rho_right, ..
            } => rho_left.min(*rho_right),
            InitialData::Piecewise { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            InitialData::Sine {
                mean, amplitude, ..
            } => mean - amplitude.abs(),
        }
    }

    fn max_density(&self) -> f64 {
        match self {
            InitialData::Riemann {
                rho_left, rho_right, ..
            } => rho_left.max(*rho_right),
            InitialData::Piecewise { values, .. } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
            InitialData::Sine {
                mean, amplitude, ..
            } => mean + amplitude.abs(),
        }
    }
}

/// A fully validated run description; every field is concrete.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub model: ModelSpec,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub boundary: BoundaryPolicy,
    pub initial: InitialData,
    pub eps: Vec<f64>,
    pub t_end: f64,
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
    pub dx_ref: f64,
    pub window: Window,
    pub integrator: TimeIntegrator,
    pub allow_coarse_kernel: bool,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn domain_length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn cell_count(&self) -> usize {
        (self.domain_length() / self.dx).round() as usize
    }

    pub fn cell_count_ref(&self) -> usize {
        (self.domain_length() / self.dx_ref).round() as usize
    }

    /// Ratio between comparison and reference resolution.
    pub fn refinement_factor(&self) -> usize {
        (self.dx / self.dx_ref).round() as usize
    }

    /// Sample the configured initial datum on the run grid.
    pub fn initial_field(&self) -> Result<DensityField> {
        self.initial_field_at(self.dx, self.cell_count())
    }

    /// Sample the configured initial datum on the reference grid.
    pub fn initial_field_ref(&self) -> Result<DensityField> {
        self.initial_field_at(self.dx_ref, self.cell_count_ref())
    }

    fn initial_field_at(&self, dx: f64, n: usize) -> Result<DensityField> {
        let x_min = self.x_min;
        let length = self.domain_length();
        match &self.initial {
            InitialData::Riemann {
                rho_left,
                rho_right,
                x_jump,
            } => DensityField::from_fn(x_min, dx, n, self.boundary, |x| {
                if x < *x_jump {
                    *rho_left
                } else {
                    *rho_right
                }
            }),
            InitialData::Piecewise {
                breakpoints,
                values,
            } => DensityField::from_fn(x_min, dx, n, self.boundary, |x| {
                let seg = breakpoints.iter().position(|&b| x < b).unwrap_or(breakpoints.len());
                values[seg]
            }),
            InitialData::Sine {
                mean,
                amplitude,
                wavenumber,
            } => DensityField::from_fn(x_min, dx, n, self.boundary, |x| {
                mean + amplitude
                    * (std::f64::consts::TAU * wavenumber * (x - x_min) / length).sin()
            }),
        }
    }

    /// Emit the canonical document: every field explicit, floats written
    /// in shortest round-trip form. Parsing it reproduces `self` exactly.
    pub fn to_canonical_toml(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("scenario = {:?}\n", self.scenario));
        s.push_str(&format!("output_dir = {:?}\n\n", self.output_dir.display().to_string()));
        s.push_str("[model]\n");
        s.push_str(&format!("kind = {:?}\n", self.model.kind.as_str()));
        s.push_str(&format!("rho_jam = {}\n", fmt(self.model.rho_jam)));
        s.push_str(&format!("params = [{}]\n", fmt_list(&self.model.params)));
        s.push_str(&format!("delta_star = {}\n\n", fmt(self.model.delta_star)));
        s.push_str("[domain]\n");
        s.push_str(&format!("x_min = {}\n", fmt(self.x_min)));
        s.push_str(&format!("x_max = {}\n", fmt(self.x_max)));
        s.push_str(&format!("dx = {}\n", fmt(self.dx)));
        s.push_str(&format!("boundary = {:?}\n\n", self.boundary.as_str()));
        s.push_str("[initial]\n");
        match &self.initial {
            InitialData::Riemann {
                rho_left,
                rho_right,
                x_jump,
            } => {
                s.push_str("kind = \"riemann\"\n");
                s.push_str(&format!("rho_left = {}\n", fmt(*rho_left)));
                s.push_str(&format!("rho_right = {}\n", fmt(*rho_right)));
                s.push_str(&format!("x_jump = {}\n", fmt(*x_jump)));
            }
            InitialData::Piecewise {
                breakpoints,
                values,
            } => {
                s.push_str("kind = \"piecewise\"\n");
                s.push_str(&format!("breakpoints = [{}]\n", fmt_list(breakpoints)));
                s.push_str(&format!("values = [{}]\n", fmt_list(values)));
            }
            InitialData::Sine {
                mean,
                amplitude,
                wavenumber,
            } => {
                s.push_str("kind = \"sine\"\n");
                s.push_str(&format!("mean = {}\n", fmt(*mean)));
                s.push_str(&format!("amplitude = {}\n", fmt(*amplitude)));
                s.push_str(&format!("wavenumber = {}\n", fmt(*wavenumber)));
            }
        }
        s.push('\n');
        s.push_str("[run]\n");
        s.push_str(&format!("eps = [{}]\n", fmt_list(&self.eps)));
        s.push_str(&format!("t_end = {}\n", fmt(self.t_end)));
        s.push_str(&format!("cfl = {}\n", fmt(self.cfl)));
        s.push_str(&format!("snapshot_times = [{}]\n", fmt_list(&self.snapshot_times)));
        s.push_str(&format!("dx_ref = {}\n", fmt(self.dx_ref)));
        s.push_str(&format!("integrator = {:?}\n", self.integrator.as_str()));
        s.push_str(&format!("allow_coarse_kernel = {}\n\n", self.allow_coarse_kernel));
        s.push_str("[window]\n");
        s.push_str(&format!("x_min = {}\n", fmt(self.window.x_min)));
        s.push_str(&format!("x_max = {}\n", fmt(self.window.x_max)));
        s
    }
}

/// Format a float so TOML reads it back as a float, bit-exactly.
fn fmt(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(", ")
}

/// Parse and validate a configuration document. On failure every
/// violation is reported, not just the first.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: toml::Table = toml::from_str(text)
        .map_err(|e| Error::Config(vec![format!("syntax error: {e}")]))?;
    let mut errs = Vec::new();
    let cfg = extract(&root, &mut errs);
    match cfg {
        Some(cfg) if errs.is_empty() => Ok(cfg),
        _ => {
            if errs.is_empty() {
                errs.push("configuration incomplete".into());
            }
            Err(Error::Config(errs))
        }
    }
}

fn check_keys(table: &toml::Table, allowed: &[&str], prefix: &str, errs: &mut Vec<String>) {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            errs.push(format!("unknown key `{prefix}{key}`"));
        }
    }
}

fn table_at<'a>(root: &'a toml::Table, key: &str, errs: &mut Vec<String>) -> Option<&'a toml::Table> {
    match root.get(key) {
        None => None,
        Some(toml::Value::Table(t)) => Some(t),
        Some(_) => {
            errs.push(format!("`{key}` must be a table"));
            None
        }
    }
}

fn f64_of(value: &toml::Value) -> Option<f64> {
    match value {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn f64_at(table: &toml::Table, key: &str, prefix: &str, errs: &mut Vec<String>) -> Option<f64> {
    table.get(key).and_then(|v| {
        f64_of(v).or_else(|| {
            errs.push(format!("`{prefix}{key}` must be a number"));
            None
        })
    })
}

fn str_at<'a>(
    table: &'a toml::Table,
    key: &str,
    prefix: &str,
    errs: &mut Vec<String>,
) -> Option<&'a str> {
    table.get(key).and_then(|v| {
        v.as_str().or_else(|| {
            errs.push(format!("`{prefix}{key}` must be a string"));
            None
        })
    })
}

fn bool_at(table: &toml::Table, key: &str, prefix: &str, errs: &mut Vec<String>) -> Option<bool> {
    table.get(key).and_then(|v| {
        v.as_bool().or_else(|| {
            errs.push(format!("`{prefix}{key}` must be a boolean"));
            None
        })
    })
}

fn list_at(table: &toml::Table, key: &str, prefix: &str, errs: &mut Vec<String>) -> Option<Vec<f64>> {
    let value = table.get(key)?;
    let arr = match value.as_array() {
        Some(a) => a,
        None => {
            errs.push(format!("`{prefix}{key}` must be an array of numbers"));
            return None;
        }
    };
    let mut out = Vec::with_capacity(arr.len());
    for v in arr {
        match f64_of(v) {
            Some(f) => out.push(f),
            None => {
                errs.push(format!("`{prefix}{key}` must contain only numbers"));
                return None;
            }
        }
    }
    Some(out)
}

fn extract(root: &toml::Table, errs: &mut Vec<String>) -> Option<RunConfig> {
    check_keys(
        root,
        &["scenario", "model", "domain", "initial", "run", "window", "output_dir"],
        "",
        errs,
    );

    let scenario = str_at(root, "scenario", "", errs).unwrap_or("run").to_string();
    let output_dir = PathBuf::from(str_at(root, "output_dir", "", errs).unwrap_or("out"));

    // [model]
    let model = if let Some(mt) = table_at(root, "model", errs) {
        check_keys(mt, &["kind", "rho_jam", "params", "delta_star"], "model.", errs);
        let kind = match str_at(mt, "kind", "model.", errs) {
            Some(k) => match ModelKind::parse(k) {
                Some(kind) => Some(kind),
                None => {
                    errs.push(format!(
                        "`model.kind` must be one of greenshields | quadratic | custom-polynomial, got `{k}`"
                    ));
                    None
                }
            },
            None => {
                if !mt.contains_key("kind") {
                    errs.push("`model.kind` is required".into());
                }
                None
            }
        };
        kind.map(|kind| {
            let rho_jam = f64_at(mt, "rho_jam", "model.", errs).unwrap_or(1.0);
            let params = list_at(mt, "params", "model.", errs).unwrap_or_else(|| match kind {
                ModelKind::Greenshields => vec![1.0],
                ModelKind::Quadratic => vec![0.5, 0.25],
                ModelKind::CustomPolynomial => {
                    errs.push("`model.params` is required for custom-polynomial".into());
                    vec![0.0]
                }
            });
            let delta_star = f64_at(mt, "delta_star", "model.", errs).unwrap_or_else(|| match kind {
                ModelKind::Greenshields => params.first().copied().unwrap_or(1.0) / rho_jam,
                ModelKind::Quadratic => params.first().copied().unwrap_or(0.5),
                ModelKind::CustomPolynomial => {
                    errs.push("`model.delta_star` is required for custom-polynomial".into());
                    1.0
                }
            });
            ModelSpec {
                kind,
                rho_jam,
                params,
                delta_star,
            }
        })
    } else {
        errs.push("`[model]` section is required".into());
        None
    };

    // [domain]
    let (x_min, x_max, dx, boundary) = if let Some(dt) = table_at(root, "domain", errs) {
        check_keys(dt, &["x_min", "x_max", "dx", "boundary"], "domain.", errs);
        let x_min = f64_at(dt, "x_min", "domain.", errs).unwrap_or(-2.0);
        let x_max = f64_at(dt, "x_max", "domain.", errs).unwrap_or(2.0);
        let dx = f64_at(dt, "dx", "domain.", errs).unwrap_or(1e-3);
        let boundary = match str_at(dt, "boundary", "domain.", errs) {
            Some(b) => BoundaryPolicy::parse(b).unwrap_or_else(|| {
                errs.push(format!(
                    "`domain.boundary` must be constant-extension | periodic, got `{b}`"
                ));
                BoundaryPolicy::ConstantExtension
            }),
            None => BoundaryPolicy::ConstantExtension,
        };
        (x_min, x_max, dx, boundary)
    } else {
        (-2.0, 2.0, 1e-3, BoundaryPolicy::ConstantExtension)
    };

    // [initial]
    let initial = if let Some(it) = table_at(root, "initial", errs) {
        let kind = str_at(it, "kind", "initial.", errs);
        match kind {
            Some("riemann") => {
                check_keys(it, &["kind", "rho_left", "rho_right", "x_jump"], "initial.", errs);
                let rho_left = f64_at(it, "rho_left", "initial.", errs);
                let rho_right = f64_at(it, "rho_right", "initial.", errs);
                if rho_left.is_none() && !it.contains_key("rho_left") {
                    errs.push("`initial.rho_left` is required for riemann data".into());
                }
                if rho_right.is_none() && !it.contains_key("rho_right") {
                    errs.push("`initial.rho_right` is required for riemann data".into());
                }
                Some(InitialData::Riemann {
                    rho_left: rho_left.unwrap_or(0.0),
                    rho_right: rho_right.unwrap_or(0.0),
                    x_jump: f64_at(it, "x_jump", "initial.", errs).unwrap_or(0.0),
                })
            }
            Some("piecewise") => {
                check_keys(it, &["kind", "breakpoints", "values"], "initial.", errs);
                let breakpoints = list_at(it, "breakpoints", "initial.", errs).unwrap_or_default();
                let values = list_at(it, "values", "initial.", errs).unwrap_or_default();
                if values.len() != breakpoints.len() + 1 {
                    errs.push(format!(
                        "`initial.values` must have one more entry than breakpoints ({} vs {})",
                        values.len(),
                        breakpoints.len()
                    ));
                }
                Some(InitialData::Piecewise {
                    breakpoints,
                    values,
                })
            }
            Some("sine") => {
                check_keys(it, &["kind", "mean", "amplitude", "wavenumber"], "initial.", errs);
                Some(InitialData::Sine {
                    mean: f64_at(it, "mean", "initial.", errs).unwrap_or(0.5),
                    amplitude: f64_at(it, "amplitude", "initial.", errs).unwrap_or(0.3),
                    wavenumber: f64_at(it, "wavenumber", "initial.", errs).unwrap_or(1.0),
                })
            }
            Some(other) => {
                errs.push(format!(
                    "`initial.kind` must be riemann | piecewise | sine, got `{other}`"
                ));
                None
            }
            None => {
                if !it.contains_key("kind") {
                    errs.push("`initial.kind` is required".into());
                }
                None
            }
        }
    } else {
        errs.push("`[initial]` section is required".into());
        None
    };

    // [run]
    let run_table = table_at(root, "run", errs);
    let (eps, t_end, cfl, snapshot_times, dx_ref, integrator, allow_coarse_kernel) =
        if let Some(rt) = run_table {
            check_keys(
                rt,
                &[
                    "eps",
                    "t_end",
                    "cfl",
                    "snapshots",
                    "snapshot_times",
                    "dx_ref",
                    "integrator",
                    "allow_coarse_kernel",
                ],
                "run.",
                errs,
            );
            let eps = list_at(rt, "eps", "run.", errs).unwrap_or_else(|| DEFAULT_EPS.to_vec());
            let t_end = f64_at(rt, "t_end", "run.", errs).unwrap_or(0.5);
            let cfl = f64_at(rt, "cfl", "run.", errs).unwrap_or(0.5);
            if rt.contains_key("snapshots") && rt.contains_key("snapshot_times") {
                errs.push("give `run.snapshots` or `run.snapshot_times`, not both".into());
            }
            let snapshot_times = match list_at(rt, "snapshot_times", "run.", errs) {
                Some(times) => times,
                None => {
                    let count = f64_at(rt, "snapshots", "run.", errs)
                        .map(|c| c as usize)
                        .unwrap_or(DEFAULT_SNAPSHOT_COUNT);
                    uniform_times(t_end, count.max(2))
                }
            };
            let dx_ref = f64_at(rt, "dx_ref", "run.", errs).unwrap_or(dx / 4.0);
            let integrator = match str_at(rt, "integrator", "run.", errs) {
                Some(s) => TimeIntegrator::parse(s).unwrap_or_else(|| {
                    errs.push(format!("`run.integrator` must be euler | ssp-rk2, got `{s}`"));
                    TimeIntegrator::Euler
                }),
                None => TimeIntegrator::Euler,
            };
            let allow = bool_at(rt, "allow_coarse_kernel", "run.", errs).unwrap_or(false);
            (eps, t_end, cfl, snapshot_times, dx_ref, integrator, allow)
        } else {
            (
                DEFAULT_EPS.to_vec(),
                0.5,
                0.5,
                uniform_times(0.5, DEFAULT_SNAPSHOT_COUNT),
                dx / 4.0,
                TimeIntegrator::Euler,
                false,
            )
        };

    let model = model?;
    let initial = initial?;
    let built_model = match model.build() {
        Ok(m) => Some(m),
        Err(e) => {
            errs.push(format!("model: {e}"));
            None
        }
    };

    // [window] — default derived from the boundary margin rule.
    let window = if let Some(wt) = table_at(root, "window", errs) {
        check_keys(wt, &["x_min", "x_max"], "window.", errs);
        Window::new(
            f64_at(wt, "x_min", "window.", errs).unwrap_or(x_min),
            f64_at(wt, "x_max", "window.", errs).unwrap_or(x_max),
        )
    } else {
        match boundary {
            BoundaryPolicy::Periodic => Window::new(x_min, x_max),
            BoundaryPolicy::ConstantExtension => {
                let v0 = built_model.as_ref().map(|m| m.velocity(0.0)).unwrap_or(1.0);
                let max_eps = eps.iter().copied().fold(0.0, f64::max);
                let margin = 10.0 * max_eps + t_end * v0;
                Window::new(x_min + margin, x_max - margin)
            }
        }
    };

    let cfg = RunConfig {
        scenario,
        model,
        x_min,
        x_max,
        dx,
        boundary,
        initial,
        eps,
        t_end,
        cfl,
        snapshot_times,
        dx_ref,
        window,
        integrator,
        allow_coarse_kernel,
        output_dir,
    };
    validate(&cfg, built_model.as_ref(), errs);
    Some(cfg)
}

fn uniform_times(t_end: f64, count: usize) -> Vec<f64> {
    (1..count)
        .map(|k| t_end * k as f64 / (count - 1) as f64)
        .collect()
}

fn validate(cfg: &RunConfig, model: Option<&VelocityModel>, errs: &mut Vec<String>) {
    if !(cfg.x_min < cfg.x_max) {
        errs.push(format!(
            "domain must satisfy x_min < x_max, got [{}, {}]",
            cfg.x_min, cfg.x_max
        ));
        return;
    }
    if !(cfg.dx > 0.0) {
        errs.push(format!("`domain.dx` must be > 0, got {}", cfg.dx));
        return;
    }
    let length = cfg.domain_length();
    let n = length / cfg.dx;
    if (n - n.round()).abs() > 1e-9 * n {
        errs.push(format!(
            "dx = {} does not divide the domain length {length} (N = {n})",
            cfg.dx
        ));
    }
    if !(cfg.dx_ref > 0.0) {
        errs.push(format!("`run.dx_ref` must be > 0, got {}", cfg.dx_ref));
    } else {
        let factor = cfg.dx / cfg.dx_ref;
        if factor < 1.0 - 1e-9 || (factor - factor.round()).abs() > 1e-9 * factor {
            errs.push(format!(
                "dx / dx_ref must be a positive integer for conservative restriction, got {factor}"
            ));
        }
    }

    if let Some(m) = model {
        let jam = m.rho_jam();
        let (lo, hi) = (cfg.initial.min_density(), cfg.initial.max_density());
        if lo < 0.0 || hi > jam {
            errs.push(format!(
                "initial densities span [{lo}, {hi}], outside [0, {jam}] (density exceeds rho_jam)"
            ));
        }
    }

    match &cfg.initial {
        InitialData::Riemann { x_jump, .. } => {
            if *x_jump <= cfg.x_min || *x_jump >= cfg.x_max {
                errs.push(format!("`initial.x_jump` = {x_jump} must lie inside the domain"));
            }
        }
        InitialData::Piecewise { breakpoints, .. } => {
            for pair in breakpoints.windows(2) {
                if !(pair[0] < pair[1]) {
                    errs.push("`initial.breakpoints` must increase strictly".into());
                    break;
                }
            }
            if breakpoints
                .iter()
                .any(|&b| b <= cfg.x_min || b >= cfg.x_max)
            {
                errs.push("`initial.breakpoints` must lie inside the domain".into());
            }
        }
        InitialData::Sine {
            amplitude,
            wavenumber,
            ..
        } => {
            if !(*wavenumber > 0.0) {
                errs.push(format!("`initial.wavenumber` must be > 0, got {wavenumber}"));
            } else if cfg.boundary == BoundaryPolicy::Periodic
                && (wavenumber - wavenumber.round()).abs() > 1e-9
            {
                errs.push(format!(
                    "`initial.wavenumber` must be an integer on a periodic domain, got {wavenumber}"
                ));
            }
            if *amplitude < 0.0 {
                errs.push(format!("`initial.amplitude` must be >= 0, got {amplitude}"));
            }
        }
    }

    if cfg.eps.is_empty() {
        errs.push("`run.eps` must not be empty".into());
    }
    for &e in &cfg.eps {
        if !(e > 0.0) {
            errs.push(format!("`run.eps` entries must be > 0, got {e}"));
        }
    }
    let mut sorted = cfg.eps.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        errs.push("`run.eps` entries must be distinct".into());
    }
    if !(cfg.t_end > 0.0) {
        errs.push(format!("`run.t_end` must be > 0, got {}", cfg.t_end));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        errs.push(format!("`run.cfl` must lie in (0, 1], got {}", cfg.cfl));
    }
    for &t in &cfg.snapshot_times {
        if t < 0.0 || t > cfg.t_end + 1e-12 {
            errs.push(format!("snapshot time {t} outside [0, t_end]"));
            break;
        }
    }
    let min_eps = cfg.eps.iter().copied().fold(f64::INFINITY, f64::min);
    if cfg.eps.iter().all(|e| *e > 0.0) && cfg.dx > min_eps / 10.0 && !cfg.allow_coarse_kernel {
        errs.push(format!(
            "dx = {} under-resolves the smallest kernel scale {min_eps} (need dx <= eps/10); \
             set `run.allow_coarse_kernel = true` to override",
            cfg.dx
        ));
    }
    if !(cfg.window.x_min < cfg.window.x_max) {
        errs.push(format!(
            "window [{}, {}] is empty; the domain is too small for the boundary margin",
            cfg.window.x_min, cfg.window.x_max
        ));
    } else if cfg.window.x_min < cfg.x_min - 1e-12 || cfg.window.x_max > cfg.x_max + 1e-12 {
        errs.push(format!(
            "window [{}, {}] escapes the domain [{}, {}]",
            cfg.window.x_min, cfg.window.x_max, cfg.x_min, cfg.x_max
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
kind = "greenshields"

[initial]
kind = "riemann"
rho_left = 0.2
rho_right = 0.8
"#;

    #[test]
    fn minimal_document_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.scenario, "run");
        assert_eq!(cfg.model.kind, ModelKind::Greenshields);
        assert_eq!(cfg.model.rho_jam, 1.0);
        assert_eq!(cfg.model.delta_star, 1.0);
        assert_eq!(cfg.eps, DEFAULT_EPS.to_vec());
        assert_eq!(cfg.t_end, 0.5);
        assert_eq!(cfg.cfl, 0.5);
        assert_eq!(cfg.dx, 1e-3);
        assert_eq!(cfg.dx_ref, 2.5e-4);
        assert_eq!(cfg.snapshot_times.len(), DEFAULT_SNAPSHOT_COUNT - 1);
        // margin = 10·0.1 + 0.5·1 = 1.5
        assert!((cfg.window.x_min + 0.5).abs() < 1e-12);
        assert!((cfg.window.x_max - 0.5).abs() < 1e-12);
    }

    #[test]
    fn density_above_jam_is_reported() {
        let text = MINIMAL.replace("rho_left = 0.2", "rho_left = 1.5");
        let err = parse_config(&text).unwrap_err();
        match err {
            Error::Config(list) => {
                assert!(list.iter().any(|e| e.contains("exceeds rho_jam")), "{list:?}")
            }
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{MINIMAL}\n[run]\nepsilonn = [0.1]\n");
        let err = parse_config(&text).unwrap_err();
        match err {
            Error::Config(list) => {
                assert!(list.iter().any(|e| e.contains("run.epsilonn")), "{list:?}")
            }
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn all_errors_reported_together() {
        let text = r#"
[model]
kind = "greenshields"

[initial]
kind = "riemann"
rho_left = 1.5
rho_right = -0.2

[run]
t_end = -1.0
cfl = 2.0
"#;
        let err = parse_config(text).unwrap_err();
        match err {
            Error::Config(list) => {
                assert!(list.len() >= 3, "want itemized errors, got {list:?}");
            }
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_config("[model\nkind = 3").unwrap_err();
        match err {
            Error::Config(list) => assert!(list[0].contains("line"), "{list:?}"),
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn canonical_roundtrip_is_identity() {
        let cfg = parse_config(MINIMAL).unwrap();
        let doc = cfg.to_canonical_toml();
        let back = parse_config(&doc).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn coarse_kernel_needs_override() {
        let text = format!("{MINIMAL}\n[run]\neps = [0.001]\n");
        assert!(parse_config(&text).is_err());
        let text = format!("{MINIMAL}\n[run]\neps = [0.001]\nallow_coarse_kernel = true\n");
        assert!(parse_config(&text).is_ok());
    }
}
