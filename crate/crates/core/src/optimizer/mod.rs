//! Local maximizers of the Bell function and the multi-start driver.
//!
//! All methods maximize. The search vector is the concatenation
//! `(A1, A2, B1, B2)` of the four settings' parameters.

mod objective;
mod relax;
mod search;
mod settings;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::ParameterMode;
use crate::bell::BellSpec;
use crate::correlation::{BipartiteState, MeasurementConfig};
use crate::par::{map_indexed, Execution};
use crate::{Error, Result};

pub use objective::{fd_step, gradient, BellObjective, Objective, QftPhaseObjective};
pub use relax::{dynamic_relaxation, DIVERGENCE_NORM};
pub use search::{conjugate_gradient, steepest_descent};
pub use settings::{stationarity, RelaxationSettings, SearchSettings, DT_RANGE, FRICTION_RANGE};

/// Final point of one local run.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SearchOutcome {
    pub(crate) fn new(x: Vec<f64>, value: f64, iterations: usize, converged: bool) -> Self {
        Self {
            x,
            value,
            iterations,
            converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(rename = "sd")]
    SteepestDescent,
    #[serde(rename = "cg")]
    ConjugateGradient,
    #[serde(rename = "relax")]
    DynamicRelaxation,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::SteepestDescent, Method::ConjugateGradient, Method::DynamicRelaxation];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SteepestDescent => "sd",
            Method::ConjugateGradient => "cg",
            Method::DynamicRelaxation => "relax",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sd" => Ok(Method::SteepestDescent),
            "cg" => Ok(Method::ConjugateGradient),
            "relax" => Ok(Method::DynamicRelaxation),
            other => Err(Error::InvalidSettings(format!("unknown method '{other}' (sd|cg|relax)"))),
        }
    }
}

/// Everything besides `(state, spec, method, restarts, seed)` that shapes a
/// multi-start run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultistartOptions {
    pub mode: ParameterMode,
    pub search: SearchSettings,
    pub relaxation: RelaxationSettings,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self {
            mode: ParameterMode::default(),
            search: SearchSettings::default(),
            relaxation: RelaxationSettings::default(),
            execution: Execution::available(),
        }
    }
}

/// Run one local maximization from `x0`.
pub fn run_method<O: Objective + ?Sized>(
    objective: &O,
    method: Method,
    x0: &[f64],
    options: &MultistartOptions,
) -> Result<SearchOutcome> {
    match method {
        Method::SteepestDescent => steepest_descent(objective, x0, &options.search),
        Method::ConjugateGradient => conjugate_gradient(objective, x0, &options.search),
        Method::DynamicRelaxation => dynamic_relaxation(objective, x0, &options.relaxation),
    }
}

/// Start point of restart `index`: uniform on `[-π, π]` per coordinate from
/// the ChaCha8 stream `index` of `seed`.
pub fn start_point(dim: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..dim).map(|_| rng.random_range(-PI..=PI)).collect()
}

/// Local runs from each restart's start point, in restart order.
pub fn multistart<O: Objective + ?Sized>(
    objective: &O,
    method: Method,
    n_restarts: usize,
    seed: u64,
    options: &MultistartOptions,
) -> Result<Vec<SearchOutcome>> {
    if n_restarts == 0 {
        return Err(Error::InvalidSettings("at least one restart is required".into()));
    }
    map_indexed(n_restarts, options.execution, |i| {
        let x0 = start_point(objective.dim(), seed, i as u64);
        run_method(objective, method, &x0, options)
    })
    .into_iter()
    .collect()
}

/// Index of the largest value; ties go to the lowest index.
pub fn best_index(outcomes: &[SearchOutcome]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if best.is_none_or(|b| o.value > outcomes[b].value) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_value: f64,
    pub best_config: MeasurementConfig,
    pub best_restart: usize,
    pub method: Method,
    pub restarts: usize,
    pub seed: u64,
    pub trace: Vec<RestartRecord>,
}

impl OptimizationResult {
    fn from_outcomes(objective: &BellObjective, method: Method, seed: u64, outcomes: &[SearchOutcome]) -> Result<Self> {
        let best = best_index(outcomes).ok_or_else(|| Error::InvalidSettings("no restarts".into()))?;
        Ok(Self {
            best_value: outcomes[best].value,
            best_config: objective.config(&outcomes[best].x)?,
            best_restart: best,
            method,
            restarts: outcomes.len(),
            seed,
            trace: outcomes
                .iter()
                .map(|o| RestartRecord {
                    value: o.value,
                    iterations: o.iterations,
                    converged: o.converged,
                })
                .collect(),
        })
    }

    /// Running maximum over the restart sequence.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.trace
            .iter()
            .scan(f64::NEG_INFINITY, |best, r| {
                *best = best.max(r.value);
                Some(*best)
            })
            .collect()
    }

    pub fn any_converged(&self) -> bool {
        self.trace.iter().any(|r| r.converged)
    }

    pub fn best_converged(&self) -> bool {
        self.trace[self.best_restart].converged
    }
}

/// Maximize the Bell function over measurement settings with default options.
pub fn multistart_maximize(
    state: &BipartiteState,
    spec: &BellSpec,
    method: Method,
    n_restarts: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    multistart_maximize_with(state, spec, method, n_restarts, seed, &MultistartOptions::default())
}

pub fn multistart_maximize_with(
    state: &BipartiteState,
    spec: &BellSpec,
    method: Method,
    n_restarts: usize,
    seed: u64,
    options: &MultistartOptions,
) -> Result<OptimizationResult> {
    let objective = BellObjective::new(state.clone(), spec.clone(), options.mode)?;
    let outcomes = multistart(&objective, method, n_restarts, seed, options)?;
    OptimizationResult::from_outcomes(&objective, method, seed, &outcomes)
}

/// Best QFT phases: a `grid_points⁴` scan of `[-1/2, 1/2)⁴` followed by
/// conjugate-gradient refinement of the best grid point.
pub fn maximize_qft_phases(
    state: &BipartiteState,
    spec: &BellSpec,
    grid_points: usize,
    search: &SearchSettings,
) -> Result<(f64, [f64; 4])> {
    if grid_points == 0 {
        return Err(Error::InvalidSettings("empty phase grid".into()));
    }
    let objective = QftPhaseObjective::new(state.clone(), spec.clone())?;
    let phase = |k: usize| -0.5 + k as f64 / grid_points as f64;
    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    let total = grid_points.pow(4);
    for idx in 0..total {
        let mut rest = idx;
        let mut x = [0.0; 4];
        for xi in x.iter_mut() {
            *xi = phase(rest % grid_points);
            rest /= grid_points;
        }
        let v = objective.value(&x)?;
        if v > best.0 {
            best = (v, x);
        }
    }
    let refined = conjugate_gradient(&objective, &best.1, search)?;
    if refined.value > best.0 {
        let x: [f64; 4] = refined.x.as_slice().try_into().expect("four phases");
        best = (refined.value, x);
    }
    Ok(best)
}
