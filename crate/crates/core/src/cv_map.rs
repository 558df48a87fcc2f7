//! Continuous-variable states folded onto qudits.
//!
//! The map sends Fock state `|dm + k>` to `|k>`: every block of `d`
//! consecutive photon numbers is read as one `d`-outcome measurement. It is a
//! block partial trace, hence linear, completely positive and trace
//! preserving. Truncations must be block-complete (`n_max` a multiple of `d`)
//! so that trace preservation holds exactly on the truncated space.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{BlochDecomposition, GeneratorSet};
use crate::correlation::BipartiteState;
use crate::linalg::{trace_of_product, CMatrix};
use crate::{Error, Result};

/// Squeezing parameter `r`, or the infinite-squeezing limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Squeezing {
    Finite(f64),
    Infinite,
}

impl Squeezing {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && r >= 0.0 {
            Ok(Squeezing::Finite(r))
        } else if r == f64::INFINITY {
            Ok(Squeezing::Infinite)
        } else {
            Err(Error::InvalidSqueezing(r))
        }
    }

    pub fn from_tanh(t: f64) -> Result<Self> {
        if t == 1.0 {
            Ok(Squeezing::Infinite)
        } else if (0.0..1.0).contains(&t) {
            Ok(Squeezing::Finite(t.atanh()))
        } else {
            Err(Error::InvalidSqueezing(t))
        }
    }

    pub fn tanh(self) -> f64 {
        match self {
            Squeezing::Finite(r) => r.tanh(),
            Squeezing::Infinite => 1.0,
        }
    }

    pub fn r(self) -> f64 {
        match self {
            Squeezing::Finite(r) => r,
            Squeezing::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Squeezing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Squeezing::Finite(r) => write!(f, "{r}"),
            Squeezing::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Squeezing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Squeezing::Infinite),
            other => {
                let r: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidState(format!("cannot parse squeezing '{other}'")))?;
                Squeezing::new(r)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CvRepr {
    /// Single-mode amplitude vector over `|0>..|n_max-1>`.
    SinglePure(DVector<Complex64>),
    /// Single-mode density operator.
    SingleDensity(CMatrix),
    /// Two-mode amplitudes `ψ_mn = <m, n|ψ>`.
    TwoModePure(CMatrix),
    /// Two-mode density operator, basis index `m·n_max + n`.
    TwoModeDensity(CMatrix),
}

/// A Fock-space state truncated below `n_max` photons per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CvState {
    n_max: usize,
    repr: CvRepr,
    squeezing: Option<f64>,
    truncation_deficit: f64,
}

impl CvState {
    /// Wrap a representation; `truncation_deficit` is recorded as
    /// `1 - norm` (or `1 - trace`), not corrected.
    pub fn new(repr: CvRepr) -> Result<Self> {
        let (n_max, weight) = match &repr {
            CvRepr::SinglePure(v) => (v.len(), v.norm_squared()),
            CvRepr::SingleDensity(m) => (m.nrows(), m.trace().re),
            CvRepr::TwoModePure(m) => {
                if m.nrows() != m.ncols() {
                    return Err(Error::InvalidState("two-mode amplitudes must be square".into()));
                }
                (m.nrows(), m.norm_squared())
            }
            CvRepr::TwoModeDensity(m) => {
                let n = (m.nrows() as f64).sqrt().round() as usize;
                if n * n != m.nrows() {
                    return Err(Error::InvalidState("two-mode density size is not a square".into()));
                }
                (n, m.trace().re)
            }
        };
        if n_max == 0 {
            return Err(Error::InvalidState("empty truncation".into()));
        }
        Ok(Self {
            n_max,
            repr,
            squeezing: None,
            truncation_deficit: 1.0 - weight,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        match self.repr {
            CvRepr::SinglePure(_) | CvRepr::SingleDensity(_) => 1,
            CvRepr::TwoModePure(_) | CvRepr::TwoModeDensity(_) => 2,
        }
    }

    pub fn repr(&self) -> &CvRepr {
        &self.repr
    }

    pub fn squeezing(&self) -> Option<f64> {
        self.squeezing
    }

    /// Probability weight lost to truncation, `1 - Σ|c|²`.
    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    /// Rescale to unit norm/trace; the deficit becomes zero.
    pub fn renormalized(&self) -> Self {
        let scale = 1.0 / (1.0 - self.truncation_deficit);
        let repr = match &self.repr {
            CvRepr::SinglePure(v) => CvRepr::SinglePure(v * Complex64::new(scale.sqrt(), 0.0)),
            CvRepr::SingleDensity(m) => CvRepr::SingleDensity(m * Complex64::new(scale, 0.0)),
            CvRepr::TwoModePure(m) => CvRepr::TwoModePure(m * Complex64::new(scale.sqrt(), 0.0)),
            CvRepr::TwoModeDensity(m) => CvRepr::TwoModeDensity(m * Complex64::new(scale, 0.0)),
        };
        Self {
            n_max: self.n_max,
            repr,
            squeezing: self.squeezing,
            truncation_deficit: 0.0,
        }
    }
}

/// Two-mode squeezed vacuum `Σ_n tanhⁿr / cosh r |n, n>`, truncated at `n_max`.
pub fn tmsv_state(r: f64, n_max: usize) -> Result<CvState> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidSqueezing(r));
    }
    if n_max == 0 {
        return Err(Error::InvalidState("n_max must be at least 1".into()));
    }
    let (t, sech) = (r.tanh(), 1.0 / r.cosh());
    let mut amp = CMatrix::zeros(n_max, n_max);
    let mut c = sech;
    for n in 0..n_max {
        amp[(n, n)] = Complex64::new(c, 0.0);
        c *= t;
    }
    let mut state = CvState::new(CvRepr::TwoModePure(amp))?;
    state.squeezing = Some(r);
    Ok(state)
}

/// Smallest block-complete truncation of at least
/// `max(40, 20·⌈10 tanh r⌉)` photons.
pub fn default_truncation(r: f64, d: usize) -> usize {
    let base = 40usize.max(20 * (10.0 * r.tanh()).ceil() as usize);
    base.div_ceil(d) * d
}

/// Image of the two-mode squeezed vacuum: `∝ Σ_{n<d} tanhⁿr |n, n>`.
pub fn tmsv_mapped_pure(squeezing: Squeezing, d: usize) -> Result<BipartiteState> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    match squeezing {
        Squeezing::Infinite => BipartiteState::maximally_entangled(d),
        Squeezing::Finite(r) => {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidSqueezing(r));
            }
            let t = r.tanh();
            let coefficients: Vec<f64> = (0..d as i32).map(|n| t.powi(n)).collect();
            BipartiteState::schmidt(&coefficients)
        }
    }
}

/// The modulo-`d` folding map on a block-complete truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChoiBlockMap {
    d: usize,
    n_max: usize,
}

impl ChoiBlockMap {
    pub fn new(d: usize, n_max: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if n_max == 0 || !n_max.is_multiple_of(d) {
            return Err(Error::TruncationNotBlockComplete { n_max, d });
        }
        Ok(Self { d, n_max })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn blocks(&self) -> usize {
        self.n_max / self.d
    }

    fn check_size(&self, found: usize, expected: usize) -> Result<()> {
        if found == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// `(ρ_d)_{kk'} = Σ_m ρ_{dm+k, dm+k'}`.
    pub fn apply_single(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.check_size(rho.nrows(), self.n_max)?;
        let d = self.d;
        let mut out = CMatrix::zeros(d, d);
        for k in 0..d {
            for kp in 0..d {
                out[(k, kp)] = (0..self.blocks()).map(|m| rho[(d * m + k, d * m + kp)]).sum();
            }
        }
        Ok(out)
    }

    /// `(ρ_12)_{(k,l),(k',l')} = Σ_{m,n} ρ_{(dm+k, dn+l),(dm+k', dn+l')}`.
    pub fn apply_two_mode_density(&self, rho: &CMatrix) -> Result<CMatrix> {
        let n = self.n_max;
        self.check_size(rho.nrows(), n * n)?;
        let d = self.d;
        let blocks = self.blocks();
        let mut out = CMatrix::zeros(d * d, d * d);
        for k in 0..d {
            for l in 0..d {
                for kp in 0..d {
                    for lp in 0..d {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for m in 0..blocks {
                            for q in 0..blocks {
                                let row = (d * m + k) * n + d * q + l;
                                let col = (d * m + kp) * n + d * q + lp;
                                acc += rho[(row, col)];
                            }
                        }
                        out[(k * d + l, kp * d + lp)] = acc;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Two-mode map applied to `|ψ><ψ|` without forming the `n_max²`-sized
    /// density operator.
    pub fn apply_two_mode_pure(&self, psi: &CMatrix) -> Result<CMatrix> {
        self.check_size(psi.nrows(), self.n_max)?;
        self.check_size(psi.ncols(), self.n_max)?;
        let d = self.d;
        let blocks = self.blocks();
        let mut out = CMatrix::zeros(d * d, d * d);
        for m in 0..blocks {
            for q in 0..blocks {
                // amplitudes of block (m, q) as a d² vector
                let v: Vec<Complex64> = (0..d * d).map(|kl| psi[(d * m + kl / d, d * q + kl % d)]).collect();
                for (r, vr) in v.iter().enumerate() {
                    if vr.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (c, vc) in v.iter().enumerate() {
                        out[(r, c)] += vr * vc.conj();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Apply to a CV state: single-mode states map to `d×d`, two-mode states
    /// to `d²×d²` density operators.
    pub fn apply(&self, state: &CvState) -> Result<CMatrix> {
        self.check_size(state.n_max, self.n_max)?;
        match &state.repr {
            CvRepr::SinglePure(v) => self.apply_single(&(v * v.adjoint())),
            CvRepr::SingleDensity(m) => self.apply_single(m),
            CvRepr::TwoModePure(psi) => self.apply_two_mode_pure(psi),
            CvRepr::TwoModeDensity(m) => self.apply_two_mode_density(m),
        }
    }

    /// `R = Σ_n Σ_kl |k><l| ⊗ |dn+k><dn+l|` on `K ⊗ H`, index `k·n_max + h`.
    pub fn choi_operator(&self) -> CMatrix {
        let (d, n) = (self.d, self.n_max);
        let mut r = CMatrix::zeros(d * n, d * n);
        for block in 0..self.blocks() {
            for k in 0..d {
                for l in 0..d {
                    r[(k * n + d * block + k, l * n + d * block + l)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        r
    }

    /// `ρ_d = Tr_H((1_K ⊗ ρᵀ) R)`, evaluated from the explicit Choi operator.
    pub fn apply_via_choi(&self, rho: &CMatrix) -> Result<CMatrix> {
        let (d, n) = (self.d, self.n_max);
        self.check_size(rho.nrows(), n)?;
        let r = self.choi_operator();
        let rho_t = rho.transpose();
        let mut out = CMatrix::zeros(d, d);
        for k in 0..d {
            for kp in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for h in 0..n {
                    for hp in 0..n {
                        acc += rho_t[(h, hp)] * r[(k * n + hp, kp * n + h)];
                    }
                }
                out[(k, kp)] = acc;
            }
        }
        Ok(out)
    }

    /// Block-diagonal lift `Â = Ω ⊕ Ω ⊕ …` onto the truncated Fock space.
    pub fn lift_observable(&self, omega: &CMatrix) -> Result<CMatrix> {
        self.check_size(omega.nrows(), self.d)?;
        let (d, n) = (self.d, self.n_max);
        let mut a = CMatrix::zeros(n, n);
        for m in 0..self.blocks() {
            for j in 0..d {
                for k in 0..d {
                    a[(d * m + j, d * m + k)] = omega[(j, k)];
                }
            }
        }
        Ok(a)
    }

    /// Dual map `Tr_K((Ω ⊗ 1_H) R^{T_H})` from the explicit Choi operator.
    pub fn dual_via_choi(&self, omega: &CMatrix) -> Result<CMatrix> {
        let (d, n) = (self.d, self.n_max);
        self.check_size(omega.nrows(), d)?;
        let r = self.choi_operator();
        let mut out = CMatrix::zeros(n, n);
        for h in 0..n {
            for hp in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    for kp in 0..d {
                        // partial transpose on H swaps h and hp
                        acc += omega[(k, kp)] * r[(kp * n + hp, k * n + h)];
                    }
                }
                out[(h, hp)] = acc;
            }
        }
        Ok(out)
    }
}

/// Single-mode map; `n_max` is taken from the size of `rho`.
pub fn cp_map_single(rho: &CMatrix, d: usize) -> Result<CMatrix> {
    ChoiBlockMap::new(d, rho.nrows())?.apply_single(rho)
}

/// Two-mode map on a density operator of size `n_max² × n_max²`.
pub fn cp_map_two_mode(rho: &CMatrix, d: usize) -> Result<CMatrix> {
    let n = (rho.nrows() as f64).sqrt().round() as usize;
    if n * n != rho.nrows() {
        return Err(Error::InvalidState("two-mode density size is not a square".into()));
    }
    ChoiBlockMap::new(d, n)?.apply_two_mode_density(rho)
}

/// `(Tr(Â ρ_cv), Tr(Ω ρ_d))` for the observable `Ω` with Bloch data `a`. On
/// two-mode states the observable acts on the first mode.
pub fn lifted_observable_check(a: &BlochDecomposition, rho_cv: &CvState, gens: &GeneratorSet) -> Result<(f64, f64)> {
    let d = gens.d();
    let map = ChoiBlockMap::new(d, rho_cv.n_max)?;
    let omega = a.reconstruct(gens);
    let lifted = map.lift_observable(&omega)?;
    let mapped = map.apply(rho_cv)?;
    let n = rho_cv.n_max;
    Ok(match &rho_cv.repr {
        CvRepr::SinglePure(v) => {
            let cv = (v.adjoint() * &lifted * v)[(0, 0)].re;
            (cv, trace_of_product(&omega, &mapped).re)
        }
        CvRepr::SingleDensity(rho) => (
            trace_of_product(&lifted, rho).re,
            trace_of_product(&omega, &mapped).re,
        ),
        CvRepr::TwoModePure(psi) => {
            let cv = (psi.adjoint() * &lifted * psi).trace().re;
            let omega_full = omega.kronecker(&CMatrix::identity(d, d));
            (cv, trace_of_product(&omega_full, &mapped).re)
        }
        CvRepr::TwoModeDensity(rho) => {
            let lifted_full = lifted.kronecker(&CMatrix::identity(n, n));
            let omega_full = omega.kronecker(&CMatrix::identity(d, d));
            (
                trace_of_product(&lifted_full, rho).re,
                trace_of_product(&omega_full, &mapped).re,
            )
        }
    })
}
