//! The four-term Bell function, its QFT-measurement baseline, and the
//! classical bound by exhaustive enumeration of deterministic strategies.
//!
//! A term `(X, Y)` of the layout contributes `c · Σ μ(o_X, o_Y) P(o_X, o_Y)`,
//! where `o_X` is the outcome of setting `X`. Settings are owned by parties:
//! `A1`, `A2` are measured on the first subsystem and `B1`, `B2` on the
//! second, whichever order they are listed in. Listing a `B` setting first,
//! as in `(B2, A1)`, exchanges the roles of the outcomes in `μ` (which is not
//! symmetric for `d > 2`). On exchange-symmetric states this coincides with
//! configuring the first tensor slot with `B2` and the second with `A1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{unitary_from_params, GeneratorSet};
use crate::correlation::{joint_probabilities_unitaries, BipartiteState, CorrelationMatrix, MeasurementConfig};
use crate::linalg::{CMatrix, RMatrix};
use crate::par::{map_indexed, Execution};
use crate::{Error, Result};

pub use crate::correlation::Setting;

/// The CGLMP-equivalent layout `E(A1,B1) + E(A2,B2) + E(B2,A1) - E(A2,B1)`.
pub const CGLMP_LAYOUT: [(Setting, Setting); 4] = [
    (Setting::A1, Setting::B1),
    (Setting::A2, Setting::B2),
    (Setting::B2, Setting::A1),
    (Setting::A2, Setting::B1),
];

pub const CGLMP_COEFFICIENTS: [f64; 4] = [1.0, 1.0, 1.0, -1.0];

/// Largest `d` accepted by [`lhv_max_bruteforce`] (`d⁴` strategies).
pub const LHV_ENUMERATION_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct BellSpec {
    d: usize,
    coefficients: Vec<f64>,
    layout: Vec<(Setting, Setting)>,
    mu: CorrelationMatrix,
}

impl BellSpec {
    pub fn cglmp(d: usize) -> Result<Self> {
        Self::new(d, CGLMP_COEFFICIENTS.to_vec(), CGLMP_LAYOUT.to_vec())
    }

    /// CGLMP layout with custom coefficients.
    pub fn with_coefficients(d: usize, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(d, coefficients, CGLMP_LAYOUT.to_vec())
    }

    pub fn new(d: usize, coefficients: Vec<f64>, layout: Vec<(Setting, Setting)>) -> Result<Self> {
        let mu = CorrelationMatrix::new(d)?;
        if coefficients.len() != layout.len() {
            return Err(Error::InvalidSpec(format!(
                "{} coefficients for {} terms",
                coefficients.len(),
                layout.len()
            )));
        }
        let sum: f64 = coefficients.iter().sum();
        if (sum - 2.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("coefficients sum to {sum}, expected 2")));
        }
        for &(x, y) in &layout {
            if x.is_first_party() == y.is_first_party() {
                return Err(Error::InvalidSpec(format!("term ({x:?}, {y:?}) must pair an A and a B setting")));
            }
        }
        Ok(Self {
            d,
            coefficients,
            layout,
            mu,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn layout(&self) -> &[(Setting, Setting)] {
        &self.layout
    }

    pub fn correlation_matrix(&self) -> &CorrelationMatrix {
        &self.mu
    }

    /// `Σ |c_i|`, the algebraic ceiling of the Bell function.
    pub fn algebraic_max(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    /// Contribution of one term given the joint distribution of
    /// (first-party outcome, second-party outcome).
    pub(crate) fn term_value(&self, term: usize, probabilities: &RMatrix) -> f64 {
        let (x, _) = self.layout[term];
        let mu = self.mu.mu();
        let d = self.d;
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                let w = if x.is_first_party() { mu[(a, b)] } else { mu[(b, a)] };
                acc += w * probabilities[(a, b)];
            }
        }
        self.coefficients[term] * acc
    }

    /// `(first-party setting, second-party setting)` measured by a term.
    pub(crate) fn term_settings(&self, term: usize) -> (Setting, Setting) {
        let (x, y) = self.layout[term];
        if x.is_first_party() {
            (x, y)
        } else {
            (y, x)
        }
    }

    fn check_state(&self, state: &BipartiteState) -> Result<()> {
        if state.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: state.d(),
            });
        }
        Ok(())
    }
}

/// Bell value for explicit local unitaries indexed by [`Setting::index`].
pub fn bell_value_unitaries(state: &BipartiteState, unitaries: &[CMatrix; 4], spec: &BellSpec) -> Result<f64> {
    spec.check_state(state)?;
    let mut total = 0.0;
    for term in 0..spec.layout.len() {
        let (a, b) = spec.term_settings(term);
        let probs = joint_probabilities_unitaries(state, &unitaries[a.index()], &unitaries[b.index()])?;
        total += spec.term_value(term, &probs);
    }
    Ok(total)
}

pub fn bell_value(state: &BipartiteState, config: &MeasurementConfig, spec: &BellSpec, gens: &GeneratorSet) -> Result<f64> {
    spec.check_state(state)?;
    if config.d() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: config.d(),
        });
    }
    let unitaries = [
        unitary_from_params(&config.a1, gens)?,
        unitary_from_params(&config.a2, gens)?,
        unitary_from_params(&config.b1, gens)?,
        unitary_from_params(&config.b2, gens)?,
    ];
    bell_value_unitaries(state, &unitaries, spec)
}

/// `U_jk = exp(i 2π j (k + φ)/d)/√d`, `j, k = 0..d-1`.
pub fn qft_unitary(d: usize, phi: f64) -> CMatrix {
    let scale = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, k| {
        Complex64::from_polar(scale, 2.0 * PI * j as f64 * (k as f64 + phi) / d as f64)
    })
}

/// Second-party QFT setting: the complex conjugate of [`qft_unitary`] at the
/// opposite phase, `exp(-i 2π j (k - φ)/d)/√d`. With this pairing the phases
/// `(0, 1/2, 1/4, -1/4)` on `Σ|jj>/√d` reach the closed-form maximum.
pub fn qft_unitary_second(d: usize, phi: f64) -> CMatrix {
    qft_unitary(d, -phi).conjugate()
}

/// The four QFT unitaries for phases `(φ_A1, φ_A2, φ_B1, φ_B2)`.
pub fn qft_settings(d: usize, phases: [f64; 4]) -> [CMatrix; 4] {
    [
        qft_unitary(d, phases[0]),
        qft_unitary(d, phases[1]),
        qft_unitary_second(d, phases[2]),
        qft_unitary_second(d, phases[3]),
    ]
}

pub fn bell_value_qft(state: &BipartiteState, phases: [f64; 4], spec: &BellSpec) -> Result<f64> {
    spec.check_state(state)?;
    bell_value_unitaries(state, &qft_settings(spec.d, phases), spec)
}

/// QFT phases maximizing the Bell function on the maximally entangled state.
pub const CGLMP_PHASES: [f64; 4] = [0.0, 0.5, 0.25, -0.25];

/// Closed-form Bell value of the maximally entangled state under the optimal
/// QFT settings:
/// `4d Σ_{l=0}^{d-1} (1 - 2l/(d-1)) / (2 d³ sin²(π(l + 1/4)/d))`.
pub fn cglmp_qft_max(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let df = d as f64;
    let sum: f64 = (0..d)
        .map(|l| {
            let l = l as f64;
            let s = (PI * (l + 0.25) / df).sin();
            (1.0 - 2.0 * l / (df - 1.0)) / (2.0 * df.powi(3) * s * s)
        })
        .sum();
    Ok(4.0 * df * sum)
}

/// Best deterministic local strategy: one outcome per setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhvOptimum {
    pub value: f64,
    /// 0-based outcomes indexed by [`Setting::index`].
    pub outcomes: [usize; 4],
}

/// Maximum of the Bell function over all `d⁴` deterministic local strategies.
pub fn lhv_max_bruteforce(spec: &BellSpec) -> Result<LhvOptimum> {
    lhv_max_bruteforce_with(spec, Execution::available())
}

pub fn lhv_max_bruteforce_with(spec: &BellSpec, exec: Execution) -> Result<LhvOptimum> {
    let d = spec.d;
    if d > LHV_ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            d,
            limit: LHV_ENUMERATION_LIMIT,
        });
    }
    let mu = spec.mu.mu();
    let strategy_value = |outcomes: &[usize; 4]| -> f64 {
        spec.layout
            .iter()
            .zip(&spec.coefficients)
            .map(|(&(x, y), c)| c * mu[(outcomes[x.index()], outcomes[y.index()])])
            .sum()
    };
    // partition on the A1 outcome, reduce in index order
    let partials = map_indexed(d, exec, |a1| {
        let mut best: Option<LhvOptimum> = None;
        for a2 in 0..d {
            for b1 in 0..d {
                for b2 in 0..d {
                    let outcomes = [a1, a2, b1, b2];
                    let value = strategy_value(&outcomes);
                    if best.is_none_or(|b| value > b.value) {
                        best = Some(LhvOptimum { value, outcomes });
                    }
                }
            }
        }
        best.expect("d >= 2")
    });
    Ok(partials
        .into_iter()
        .reduce(|best, next| if next.value > best.value { next } else { best })
        .expect("d >= 2"))
}
