use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use sudbell::algebra::checks;
use sudbell::bell::cglmp_qft_max;
use sudbell::cv_map::tmsv_mapped_pure;
use sudbell::optimizer::{
    maximize_qft_phases, multistart_maximize_with, run_method, Method, MultistartOptions, OptimizationResult,
};
use sudbell::par::{map_indexed, Execution};
use sudbell::{BellSpec, BipartiteState, MeasurementConfig, ParameterMode, Squeezing};

use crate::config::ConfigFile;
use crate::output::{emit, num, sidecar_path, RunManifest, Table};
use crate::{Cli, Command, CommonArgs, Format};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invariant(String),
    NotConverged(String),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Invariant(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Invariant(m) => write!(f, "invariant failure: {m}"),
            Failure::NotConverged(m) => write!(f, "not converged: {m}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<sudbell::Error> for Failure {
    fn from(e: sudbell::Error) -> Self {
        Failure::Invariant(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Flag value, else config entry, else default.
fn pick<T: FromStr>(flag: Option<T>, config: &ConfigFile, key: &str, default: T) -> Outcome<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| usage(format!("config value '{raw}' for '{key}' does not parse"))),
        None => Ok(default),
    }
}

fn pick_str(flag: Option<String>, config: &ConfigFile, key: &str) -> Option<String> {
    flag.or_else(|| config.get(key).map(str::to_string))
}

pub fn parse_d_list(s: &str) -> Outcome<Vec<usize>> {
    let parse = |t: &str| -> Outcome<usize> {
        t.trim()
            .parse()
            .map_err(|_| usage(format!("cannot parse outcome count '{t}'")))
    };
    let list: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
        (lo..=hi).collect()
    } else {
        s.split(',').map(parse).collect::<Outcome<_>>()?
    };
    if list.is_empty() {
        return Err(usage("empty d list"));
    }
    if let Some(bad) = list.iter().find(|&&d| d < 2) {
        return Err(usage(format!("d = {bad}: at least 2 outcomes are required")));
    }
    Ok(list)
}

fn parse_reals(s: &str, what: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if t == "inf" {
                return Ok(f64::INFINITY);
            }
            t.parse::<f64>().map_err(|_| usage(format!("cannot parse {what} value '{t}'")))
        })
        .collect()
}

/// State descriptor: `maxent`, `tmsv:r=R`, `tmsv:tanh=T` or `pure2:phi=F`.
pub fn parse_state(descriptor: &str, d: usize) -> Outcome<BipartiteState> {
    let (kind, arg) = descriptor.split_once(':').unwrap_or((descriptor, ""));
    let value = |key: &str| -> Outcome<&str> {
        arg.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| usage(format!("state '{descriptor}' needs {key}=…")))
    };
    let state = match kind {
        "maxent" if arg.is_empty() => BipartiteState::maximally_entangled(d),
        "tmsv" => {
            let squeezing = if arg.starts_with("tanh") {
                let t: f64 = value("tanh")?
                    .parse()
                    .map_err(|_| usage(format!("bad tanh in '{descriptor}'")))?;
                Squeezing::from_tanh(t)
            } else {
                value("r")?.parse::<Squeezing>()
            }
            .map_err(|e| usage(e.to_string()))?;
            tmsv_mapped_pure(squeezing, d)
        }
        "pure2" => {
            if d != 2 {
                return Err(usage("pure2 states are qubit pairs; use --d 2"));
            }
            let phi: f64 = value("phi")?
                .parse()
                .map_err(|_| usage(format!("bad phi in '{descriptor}'")))?;
            BipartiteState::qubit_pair(phi)
        }
        _ => return Err(usage(format!("unknown state descriptor '{descriptor}'"))),
    };
    state.map_err(|e| usage(e.to_string()))
}

struct Resolved {
    config: ConfigFile,
    method: Method,
    restarts: usize,
    seed: u64,
    options: MultistartOptions,
    format: Option<Format>,
    d: Option<String>,
}

impl Resolved {
    fn new(common: &CommonArgs) -> Outcome<Self> {
        let config = match &common.config {
            Some(path) => ConfigFile::load(path).map_err(|e| usage(format!("{e:#}")))?,
            None => ConfigFile::default(),
        };
        let method: Method = pick_str(common.method.clone(), &config, "method")
            .unwrap_or_else(|| "cg".into())
            .parse()
            .map_err(|e: sudbell::Error| usage(e.to_string()))?;
        let mode = match pick_str(common.mode.clone(), &config, "mode").as_deref() {
            None | Some("reduced") => ParameterMode::Reduced,
            Some("full") => ParameterMode::Full,
            Some(other) => return Err(usage(format!("unknown mode '{other}' (full|reduced)"))),
        };
        let restarts = pick(common.restarts, &config, "restarts", 20)?;
        if restarts == 0 {
            return Err(usage("--restarts must be at least 1"));
        }
        let mut options = MultistartOptions {
            mode,
            ..Default::default()
        };
        options.search.max_iterations = pick(common.max_iterations, &config, "max-iterations", options.search.max_iterations)?;
        options.relaxation.max_steps = pick(common.max_iterations, &config, "max-iterations", options.relaxation.max_steps)?;
        let tolerance = pick(common.tolerance, &config, "tolerance", options.search.tolerance)?;
        options.search.tolerance = tolerance;
        options.relaxation.tolerance = tolerance;
        options.relaxation.mass = pick(common.mass, &config, "mass", options.relaxation.mass)?;
        options.relaxation.friction = pick(common.friction, &config, "friction", options.relaxation.friction)?;
        options.relaxation.dt = pick(common.dt, &config, "dt", options.relaxation.dt)?;
        options.search.validate().map_err(|e| usage(e.to_string()))?;
        for w in options.relaxation.validate().map_err(|e| usage(e.to_string()))? {
            eprintln!("warning: {w}");
        }
        let format = match (common.format, config.get("format")) {
            (Some(f), _) => Some(f),
            (None, Some("csv")) => Some(Format::Csv),
            (None, Some("json")) => Some(Format::Json),
            (None, Some(other)) => return Err(usage(format!("unknown format '{other}'"))),
            (None, None) => None,
        };
        Ok(Self {
            method,
            restarts,
            seed: pick(common.seed, &config, "seed", 1)?,
            options,
            format,
            d: pick_str(common.d.clone(), &config, "d"),
            config,
        })
    }

    fn d_list(&self, default: &str) -> Outcome<Vec<usize>> {
        parse_d_list(self.d.as_deref().unwrap_or(default))
    }

    fn manifest(&self, command: &str) -> RunManifest {
        let mut m = RunManifest::new(command);
        m.set("method", self.method);
        m.set("restarts", self.restarts);
        m.set("seed", self.seed);
        m.set("mode", format!("{:?}", self.options.mode).to_lowercase());
        m.set("tolerance", self.options.search.tolerance);
        m.set("max_iterations", self.options.search.max_iterations);
        m.set("max_steps", self.options.relaxation.max_steps);
        if self.method == Method::DynamicRelaxation {
            m.set("mass", self.options.relaxation.mass);
            m.set("friction", self.options.relaxation.friction);
            m.set("dt", self.options.relaxation.dt);
        }
        m
    }

    fn optimize(&self, state: &BipartiteState, spec: &BellSpec) -> Outcome<OptimizationResult> {
        Ok(multistart_maximize_with(state, spec, self.method, self.restarts, self.seed, &self.options)?)
    }
}

fn init_workers(workers: Option<usize>) -> Outcome<()> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(usage("worker count must be positive"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Io(e.into()))?;
    Ok(())
}

pub fn run(cli: Cli) -> Outcome<()> {
    init_workers(cli.common.workers)?;
    let resolved = Resolved::new(&cli.common)?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::CheckAlgebra { samples } => {
            let samples = pick(samples, &resolved.config, "samples", 100)?;
            check_algebra(&resolved, samples, out)
        }
        Command::Table1 { r_grid, refine_steps } => {
            let grid = pick_str(r_grid, &resolved.config, "r-grid")
                .unwrap_or_else(|| "0.25,0.5,0.75,1,1.25,1.5,1.75,2,2.25,2.5,2.75,3".into());
            let grid = parse_reals(&grid, "r")?;
            let steps = pick(refine_steps, &resolved.config, "refine-steps", 10)?;
            table1(&resolved, &grid, steps, out)
        }
        Command::Fig1 { phi_grid, qft_grid } => {
            let grid = match pick_str(phi_grid, &resolved.config, "phi-grid") {
                Some(s) => parse_reals(&s, "phi")?,
                None => (0..=30).map(|k| k as f64 * FRAC_PI_2 / 30.0).collect(),
            };
            if grid.iter().any(|p| !(0.0..=FRAC_PI_2).contains(p)) {
                return Err(usage("phi values must lie in [0, π/2]"));
            }
            let qft_grid = pick(qft_grid, &resolved.config, "qft-grid", 8)?;
            fig1(&resolved, &grid, qft_grid, out)
        }
        Command::Fig2 { tanh_grid } => {
            let grid = match pick_str(tanh_grid, &resolved.config, "tanh-grid") {
                Some(s) => parse_reals(&s, "tanh r")?,
                None => (1..=19).map(|k| k as f64 * 0.05).chain([1.0]).collect(),
            };
            if grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                return Err(usage("tanh r values must lie in (0, 1]"));
            }
            fig2(&resolved, &grid, out)
        }
        Command::Optimize {
            state,
            require_converged,
        } => {
            let state = pick_str(state, &resolved.config, "state").unwrap_or_else(|| "maxent".into());
            optimize(&resolved, &state, require_converged, out)
        }
    }
}

fn finish(resolved: &Resolved, table: &Table, mut manifest: RunManifest, started: Instant, out: Option<&std::path::Path>) -> Outcome<()> {
    manifest.duration_seconds = started.elapsed().as_secs_f64();
    let text = match resolved.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(&manifest),
        Format::Json => format!("{:#}\n", table.to_json(&manifest)),
    };
    Ok(emit(out, &text)?)
}

fn check_algebra(resolved: &Resolved, samples: usize, out: Option<&std::path::Path>) -> Outcome<()> {
    let started = Instant::now();
    let ds = resolved.d_list("2..5")?;
    let mut manifest = resolved.manifest("check-algebra");
    manifest.set("d", ds.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    manifest.set("samples", samples);
    let mut table = Table::new(vec!["d", "check", "worst", "tolerance", "passed"]);
    let mut failed = Vec::new();
    for &d in &ds {
        for c in checks::run_all(d, samples, resolved.seed)? {
            if !c.passed() {
                failed.push(format!("d={} {}", c.d, c.name));
            }
            table.rows.push(vec![
                d.to_string(),
                c.name.to_string(),
                num(c.worst),
                num(c.tolerance),
                c.passed().to_string(),
            ]);
        }
    }
    finish(resolved, &table, manifest, started, out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(failed.join("; ")))
    }
}

struct Point {
    value: f64,
    x: Vec<f64>,
    converged: bool,
}

/// Multi-start at `state`, plus a local run from `warm` when given.
fn optimize_point(resolved: &Resolved, state: &BipartiteState, spec: &BellSpec, restarts: usize, warm: Option<&[f64]>) -> Outcome<Point> {
    let r = multistart_maximize_with(state, spec, resolved.method, restarts, resolved.seed, &resolved.options)?;
    let mut best = Point {
        value: r.best_value,
        x: r.best_config.to_flat(),
        converged: r.best_converged(),
    };
    if let Some(x0) = warm {
        let objective = sudbell::optimizer::BellObjective::new(state.clone(), spec.clone(), resolved.options.mode)?;
        let local = run_method(&objective, resolved.method, x0, &resolved.options)?;
        if local.value > best.value {
            best = Point {
                value: local.value,
                x: local.x,
                converged: local.converged,
            };
        }
    }
    Ok(best)
}

fn table1(resolved: &Resolved, grid: &[f64], refine_steps: usize, out: Option<&std::path::Path>) -> Outcome<()> {
    let started = Instant::now();
    let ds = resolved.d_list("2..5")?;
    if ds.iter().any(|&d| d > 5) {
        return Err(usage("table1 covers d = 2..5"));
    }
    if grid.is_empty() || grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(usage("r grid must hold positive finite values"));
    }
    let mut manifest = resolved.manifest("table1");
    manifest.set("d", ds.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    manifest.set("r_grid", grid.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    manifest.set("refine_steps", refine_steps);
    let mut table = Table::new(vec!["d", "r_m", "b_rm", "b_inf", "b_inf_qft", "boundary", "converged"]);
    let exec = Execution::available();
    for &d in &ds {
        let spec = BellSpec::cglmp(d)?;
        let states: Vec<BipartiteState> = grid
            .iter()
            .map(|&r| tmsv_mapped_pure(Squeezing::Finite(r), d))
            .collect::<Result<_, _>>()?;
        let coarse: Vec<Point> = map_indexed(grid.len(), exec, |k| {
            optimize_point(resolved, &states[k], &spec, resolved.restarts, None)
        })
        .into_iter()
        .collect::<Outcome<_>>()?;
        let k_best = (0..coarse.len()).fold(0, |b, k| if coarse[k].value > coarse[b].value { k } else { b });
        let boundary = k_best + 1 == grid.len();
        let mut best_r = grid[k_best];
        let mut coarse = coarse;
        let mut best = coarse.swap_remove(k_best);
        if !boundary {
            // golden-section search on the bracket around the coarse maximum
            let lo = if k_best == 0 { grid[0] / 2.0 } else { grid[k_best - 1] };
            let hi = grid[k_best + 1];
            let refine_restarts = (resolved.restarts / 4).max(1);
            let golden = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b) = (lo, hi);
            let eval = |r: f64, warm: &[f64]| -> Outcome<Point> {
                let state = tmsv_mapped_pure(Squeezing::Finite(r), d)?;
                optimize_point(resolved, &state, &spec, refine_restarts, Some(warm))
            };
            let warm = best.x.clone();
            let mut c = b - golden * (b - a);
            let mut e = a + golden * (b - a);
            let mut fc = eval(c, &warm)?;
            let mut fe = eval(e, &warm)?;
            for _ in 0..refine_steps {
                if fc.value > fe.value {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - golden * (b - a);
                    fc = eval(c, &fe.x)?;
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + golden * (b - a);
                    fe = eval(e, &fc.x)?;
                }
            }
            for (r, p) in [(c, fc), (e, fe)] {
                if p.value > best.value {
                    best_r = r;
                    best = p;
                }
            }
        }
        let inf = optimize_point(resolved, &BipartiteState::maximally_entangled(d)?, &spec, resolved.restarts, None)?;
        table.rows.push(vec![
            d.to_string(),
            num(best_r),
            num(best.value),
            num(inf.value),
            num(cglmp_qft_max(d)?),
            boundary.to_string(),
            (best.converged && inf.converged).to_string(),
        ]);
    }
    finish(resolved, &table, manifest, started, out)
}

fn fig1(resolved: &Resolved, grid: &[f64], qft_grid: usize, out: Option<&std::path::Path>) -> Outcome<()> {
    let started = Instant::now();
    let mut manifest = resolved.manifest("fig1");
    manifest.set("phi_grid", grid.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    manifest.set("qft_grid", qft_grid);
    let spec = BellSpec::cglmp(2)?;
    let rows: Vec<Vec<String>> = map_indexed(grid.len(), Execution::available(), |k| -> Outcome<Vec<String>> {
        let phi = grid[k];
        let state = BipartiteState::qubit_pair(phi)?;
        let su2 = resolved.optimize(&state, &spec)?;
        let (qft, _) = maximize_qft_phases(&state, &spec, qft_grid, &resolved.options.search)?;
        Ok(vec![
            num(phi),
            num(2f64.sqrt() * phi.sin()),
            num(su2.best_value),
            num(qft),
            su2.best_converged().to_string(),
        ])
    })
    .into_iter()
    .collect::<Outcome<_>>()?;
    let mut table = Table::new(vec!["phi", "epsilon", "b_su2", "b_qft", "converged"]);
    table.rows = rows;
    finish(resolved, &table, manifest, started, out)
}

#[derive(serde::Serialize)]
struct Fig2Config {
    d: usize,
    tanh_r: f64,
    b: f64,
    config: MeasurementConfig,
}

fn fig2(resolved: &Resolved, grid: &[f64], out: Option<&std::path::Path>) -> Outcome<()> {
    let started = Instant::now();
    let ds = resolved.d_list("2..5")?;
    let mut manifest = resolved.manifest("fig2");
    manifest.set("d", ds.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    manifest.set("tanh_grid", grid.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    let points: Vec<(usize, f64)> = ds.iter().flat_map(|&d| grid.iter().map(move |&t| (d, t))).collect();
    let results: Vec<(OptimizationResult, Squeezing)> = map_indexed(points.len(), Execution::available(), |k| {
        let (d, t) = points[k];
        let squeezing = Squeezing::from_tanh(t)?;
        let state = tmsv_mapped_pure(squeezing, d)?;
        Ok((resolved.optimize(&state, &BellSpec::cglmp(d)?)?, squeezing))
    })
    .into_iter()
    .collect::<Outcome<_>>()?;
    let mut table = Table::new(vec!["d", "tanh_r", "r", "b", "converged"]);
    let mut configs = Vec::new();
    for (&(d, t), (result, squeezing)) in points.iter().zip(&results) {
        table.rows.push(vec![
            d.to_string(),
            num(t),
            num(squeezing.r()),
            num(result.best_value),
            result.best_converged().to_string(),
        ]);
        configs.push(Fig2Config {
            d,
            tanh_r: t,
            b: result.best_value,
            config: result.best_config.clone(),
        });
    }
    finish(resolved, &table, manifest.clone(), started, out)?;
    if let Some(path) = out {
        manifest.duration_seconds = started.elapsed().as_secs_f64();
        let json = serde_json::json!({ "manifest": manifest, "configs": configs });
        emit(Some(&sidecar_path(path)), &format!("{json:#}\n"))?;
    }
    Ok(())
}

fn optimize(resolved: &Resolved, descriptor: &str, require_converged: bool, out: Option<&std::path::Path>) -> Outcome<()> {
    let started = Instant::now();
    let ds = resolved.d_list("2")?;
    let [d] = ds[..] else {
        return Err(usage("optimize takes a single d"));
    };
    let state = parse_state(descriptor, d)?;
    let mut manifest = resolved.manifest("optimize");
    manifest.set("d", d);
    manifest.set("state", descriptor);
    let result = resolved.optimize(&state, &BellSpec::cglmp(d)?)?;
    manifest.duration_seconds = started.elapsed().as_secs_f64();
    let text = match resolved.format.unwrap_or(Format::Json) {
        Format::Json => format!("{:#}\n", serde_json::json!({ "manifest": manifest, "result": result })),
        Format::Csv => {
            let mut table = Table::new(vec!["d", "state", "method", "best_value", "best_restart", "converged"]);
            table.rows.push(vec![
                d.to_string(),
                descriptor.to_string(),
                result.method.to_string(),
                num(result.best_value),
                result.best_restart.to_string(),
                result.best_converged().to_string(),
            ]);
            table.to_csv(&manifest)
        }
    };
    emit(out, &text)?;
    if require_converged && !result.best_converged() {
        return Err(Failure::NotConverged(format!(
            "best restart {} stopped after {} iterations",
            result.best_restart, result.trace[result.best_restart].iterations
        )));
    }
    Ok(())
}
