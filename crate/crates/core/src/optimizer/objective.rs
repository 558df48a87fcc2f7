//! Objectives to be maximized and their finite-difference gradients.

use crate::algebra::{unitary_from_params, GeneratorSet, ParameterMode, ParameterVector};
use crate::bell::{bell_value_unitaries, qft_settings, BellSpec};
use crate::correlation::{BipartiteState, MeasurementConfig};
use crate::linalg::CMatrix;
use crate::{Error, Result};

/// A real function of a real vector, to be maximized.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        central_difference(|y| self.value(y), x)
    }
}

/// Componentwise finite-difference step `1e-5 · max(1, |x_i|)`.
pub fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

/// Central differences with step [`fd_step`].
pub fn gradient<O: Objective + ?Sized>(objective: &O, x: &[f64]) -> Result<Vec<f64>> {
    objective.gradient(x)
}

pub(crate) fn central_difference<F>(f: F, x: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    check_finite(f(x)?, "objective at x")?;
    let mut y = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        y[i] = x[i] + h;
        let plus = check_finite(f(&y)?, "objective at x + h")?;
        y[i] = x[i] - h;
        let minus = check_finite(f(&y)?, "objective at x - h")?;
        y[i] = x[i];
        g.push((plus - minus) / (2.0 * h));
    }
    Ok(g)
}

pub(crate) fn check_finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Bell function of a fixed state over the flat search vector
/// `(A1, A2, B1, B2)`.
#[derive(Debug, Clone)]
pub struct BellObjective {
    state: BipartiteState,
    spec: BellSpec,
    mode: ParameterMode,
    gens: GeneratorSet,
}

impl BellObjective {
    pub fn new(state: BipartiteState, spec: BellSpec, mode: ParameterMode) -> Result<Self> {
        if state.d() != spec.d() {
            return Err(Error::DimensionMismatch {
                expected: spec.d(),
                found: state.d(),
            });
        }
        let gens = GeneratorSet::new(spec.d())?;
        Ok(Self { state, spec, mode, gens })
    }

    pub fn d(&self) -> usize {
        self.spec.d()
    }

    pub fn mode(&self) -> ParameterMode {
        self.mode
    }

    pub fn state(&self) -> &BipartiteState {
        &self.state
    }

    pub fn spec(&self) -> &BellSpec {
        &self.spec
    }

    /// Length of one setting's slice.
    pub fn block_len(&self) -> usize {
        self.mode.len(self.d())
    }

    pub fn config(&self, x: &[f64]) -> Result<MeasurementConfig> {
        MeasurementConfig::from_flat(self.d(), self.mode, x)
    }

    fn unitary(&self, block: &[f64]) -> Result<CMatrix> {
        let p = ParameterVector::new(self.d(), self.mode, block.to_vec())?;
        unitary_from_params(&p, &self.gens)
    }

    fn unitaries(&self, x: &[f64]) -> Result<[CMatrix; 4]> {
        self.check_len(x)?;
        let n = self.block_len();
        Ok([
            self.unitary(&x[0..n])?,
            self.unitary(&x[n..2 * n])?,
            self.unitary(&x[2 * n..3 * n])?,
            self.unitary(&x[3 * n..4 * n])?,
        ])
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::ParameterLength {
                d: self.d(),
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

impl Objective for BellObjective {
    fn dim(&self) -> usize {
        4 * self.block_len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let u = self.unitaries(x)?;
        bell_value_unitaries(&self.state, &u, &self.spec)
    }

    /// Same stencil as [`central_difference`], but a perturbed coordinate only
    /// rebuilds the unitary of its own setting. The arithmetic per evaluation
    /// is identical to [`Objective::value`], so the result is bitwise equal.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let base = self.unitaries(x)?;
        check_finite(bell_value_unitaries(&self.state, &base, &self.spec)?, "objective at x")?;
        let n = self.block_len();
        let mut g = Vec::with_capacity(x.len());
        for s in 0..4 {
            let mut block = x[s * n..(s + 1) * n].to_vec();
            let mut u = base.clone();
            for i in 0..n {
                let xi = block[i];
                let h = fd_step(xi);
                block[i] = xi + h;
                u[s] = self.unitary(&block)?;
                let plus = check_finite(bell_value_unitaries(&self.state, &u, &self.spec)?, "objective at x + h")?;
                block[i] = xi - h;
                u[s] = self.unitary(&block)?;
                let minus = check_finite(bell_value_unitaries(&self.state, &u, &self.spec)?, "objective at x - h")?;
                block[i] = xi;
                g.push((plus - minus) / (2.0 * h));
            }
        }
        Ok(g)
    }
}

/// Bell function restricted to QFT settings, over the four phases.
#[derive(Debug, Clone)]
pub struct QftPhaseObjective {
    state: BipartiteState,
    spec: BellSpec,
}

impl QftPhaseObjective {
    pub fn new(state: BipartiteState, spec: BellSpec) -> Result<Self> {
        if state.d() != spec.d() {
            return Err(Error::DimensionMismatch {
                expected: spec.d(),
                found: state.d(),
            });
        }
        Ok(Self { state, spec })
    }
}

impl Objective for QftPhaseObjective {
    fn dim(&self) -> usize {
        4
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let phases: [f64; 4] = x.try_into().map_err(|_| Error::ParameterLength {
            d: self.spec.d(),
            expected: 4,
            found: x.len(),
        })?;
        bell_value_unitaries(&self.state, &qft_settings(self.spec.d(), phases), &self.spec)
    }
}
