//! The classically correlated observable and the correlation functions it
//! induces on bipartite qudit states.
//!
//! Outcome indices are 1-based in the public math-facing API (`weight`,
//! `rational_weight`) and 0-based in matrix storage.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{unitary_from_params, GeneratorLabel, GeneratorSet, ParameterMode, ParameterVector};
use crate::linalg::{hermiticity_defect, kron, min_eigenvalue_hermitian, CMatrix, RMatrix};
use crate::{Error, Result};

const STATE_TOLERANCE: f64 = 1e-10;

/// `μ_ij = 1 - 2((i - j) mod d)/(d - 1)` and its W-basis transform `μ̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    d: usize,
    mu: RMatrix,
    mu_tilde: RMatrix,
}

pub fn correlation_matrix(d: usize) -> Result<CorrelationMatrix> {
    CorrelationMatrix::new(d)
}

impl CorrelationMatrix {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let mu = RMatrix::from_fn(d, d, |i, j| {
            let (num, den) = rational(d, i, j);
            num as f64 / den as f64
        });
        let g = crate::algebra::bloch_g;
        let mu_tilde = RMatrix::from_fn(d - 1, d - 1, |m0, n0| {
            let (m, n) = (m0 + 1, n0 + 1);
            let mut acc = 0.0;
            for i in 1..=m + 1 {
                for j in 1..=n + 1 {
                    acc += g(i, m + 1 - i) * g(j, n + 1 - j) * mu[(i - 1, j - 1)];
                }
            }
            acc
        });
        Ok(Self { d, mu, mu_tilde })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self) -> &RMatrix {
        &self.mu
    }

    /// `(d-1)×(d-1)` coefficients over `w_k ⊗ w_l`.
    pub fn mu_tilde(&self) -> &RMatrix {
        &self.mu_tilde
    }

    /// `μ_ij` for 1-based outcomes.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.mu[(i - 1, j - 1)]
    }

    /// `μ_ij` as an exact fraction `(numerator, d - 1)`, 1-based outcomes.
    pub fn rational_weight(&self, i: usize, j: usize) -> (i64, i64) {
        rational(self.d, i - 1, j - 1)
    }

    /// `μ̃` embedded in the full `(d²-1)×(d²-1)` generator index range
    /// (zero outside the W block).
    pub fn mu_tilde_padded(&self, gens: &GeneratorSet) -> RMatrix {
        let n = gens.len();
        let mut out = RMatrix::zeros(n, n);
        for k in 1..self.d {
            for l in 1..self.d {
                let a = gens.position(GeneratorLabel::Diag(k)).expect("W label");
                let b = gens.position(GeneratorLabel::Diag(l)).expect("W label");
                out[(a, b)] = self.mu_tilde[(k - 1, l - 1)];
            }
        }
        out
    }
}

fn rational(d: usize, i: usize, j: usize) -> (i64, i64) {
    let d = d as i64;
    let residue = (i as i64 - j as i64).rem_euclid(d);
    (d - 1 - 2 * residue, d - 1)
}

/// `Ê = Σ μ_ij |i><i| ⊗ |j><j|` on the `d²`-dimensional space, index `i·d + j`.
pub fn correlation_observable(mu: &CorrelationMatrix) -> CMatrix {
    let d = mu.d;
    let mut e = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            e[(i * d + j, i * d + j)] = Complex64::new(mu.mu[(i, j)], 0.0);
        }
    }
    e
}

/// `Ê = Σ_kl μ̃_kl w_k ⊗ w_l`.
pub fn correlation_observable_w_basis(mu: &CorrelationMatrix, gens: &GeneratorSet) -> Result<CMatrix> {
    check_dim(gens.d(), mu.d)?;
    let d = mu.d;
    let mut e = CMatrix::zeros(d * d, d * d);
    for k in 1..d {
        for l in 1..d {
            let wk = gens.generator(gens.position(GeneratorLabel::Diag(k)).expect("W label"));
            let wl = gens.generator(gens.position(GeneratorLabel::Diag(l)).expect("W label"));
            e += kron(wk, wl) * Complex64::new(mu.mu_tilde[(k - 1, l - 1)], 0.0);
        }
    }
    Ok(e)
}

/// A state of two qudits. Pure states keep the `d×d` amplitude matrix
/// `ψ_ij = <ij|ψ>`; mixed states keep the `d²×d²` density operator.
#[derive(Debug, Clone, PartialEq)]
pub enum BipartiteState {
    Pure { d: usize, amplitudes: CMatrix },
    Mixed { d: usize, rho: CMatrix },
}

impl BipartiteState {
    pub fn pure(amplitudes: CMatrix) -> Result<Self> {
        let d = amplitudes.nrows();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if amplitudes.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: amplitudes.ncols(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("amplitude norm {norm} is not 1")));
        }
        Ok(Self::Pure { d, amplitudes })
    }

    pub fn mixed(rho: CMatrix, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if rho.nrows() != d * d || rho.ncols() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: rho.nrows(),
            });
        }
        let herm = hermiticity_defect(&rho);
        if herm > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("density operator not Hermitian ({herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let lowest = min_eigenvalue_hermitian(&rho);
        if lowest < -STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {lowest:e}")));
        }
        Ok(Self::Mixed { d, rho })
    }

    /// Schmidt-diagonal `Σ_n c_n |nn>`, normalized.
    pub fn schmidt(coefficients: &[f64]) -> Result<Self> {
        let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("Schmidt coefficients must have positive finite norm".into()));
        }
        let d = coefficients.len();
        let mut amp = CMatrix::zeros(d, d);
        for (n, c) in coefficients.iter().enumerate() {
            amp[(n, n)] = Complex64::new(c / norm, 0.0);
        }
        Self::pure(amp)
    }

    /// `Σ_j |jj>/√d`.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Self::schmidt(&vec![1.0; d])
    }

    /// `cos φ |00> + sin φ |11>`.
    pub fn qubit_pair(phi: f64) -> Result<Self> {
        Self::schmidt(&[phi.cos(), phi.sin()])
    }

    /// `|a> ⊗ |b>`, each normalized.
    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let na = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Err(Error::InvalidState("zero vector in product state".into()));
        }
        let d = a.len();
        Self::pure(CMatrix::from_fn(d, d, |i, j| a[i] * b[j] / (na * nb)))
    }

    /// Computational basis product `|i>|j>` (0-based).
    pub fn basis(d: usize, i: usize, j: usize) -> Result<Self> {
        if i >= d || j >= d {
            return Err(Error::OutcomeOutOfRange { index: i.max(j) + 1, d });
        }
        let mut amp = CMatrix::zeros(d, d);
        amp[(i, j)] = Complex64::new(1.0, 0.0);
        Self::pure(amp)
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Pure { d, .. } | Self::Mixed { d, .. } => *d,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Self::Pure { .. })
    }

    /// Density operator on the `d²` space (pure states are promoted here).
    pub fn density(&self) -> CMatrix {
        match self {
            Self::Pure { d, amplitudes } => {
                let v = CMatrix::from_fn(d * d, 1, |r, _| amplitudes[(r / d, r % d)]);
                &v * v.adjoint()
            }
            Self::Mixed { rho, .. } => rho.clone(),
        }
    }

    /// The same state with the two subsystems exchanged.
    pub fn swapped(&self) -> Self {
        match self {
            Self::Pure { d, amplitudes } => Self::Pure {
                d: *d,
                amplitudes: amplitudes.transpose(),
            },
            Self::Mixed { d, rho } => {
                let d = *d;
                let swap = |r: usize| (r % d) * d + r / d;
                Self::Mixed {
                    d,
                    rho: CMatrix::from_fn(d * d, d * d, |r, c| rho[(swap(r), swap(c))]),
                }
            }
        }
    }
}

/// One of the four measurement settings of the Bell test. `A*` settings are
/// measured on the first subsystem, `B*` on the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    A1,
    A2,
    B1,
    B2,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::A1, Setting::A2, Setting::B1, Setting::B2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_first_party(self) -> bool {
        matches!(self, Setting::A1 | Setting::A2)
    }
}

/// Parameter vectors of the four settings; all share `d` and mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig {
    pub a1: ParameterVector,
    pub a2: ParameterVector,
    pub b1: ParameterVector,
    pub b2: ParameterVector,
}

impl MeasurementConfig {
    pub fn new(a1: ParameterVector, a2: ParameterVector, b1: ParameterVector, b2: ParameterVector) -> Result<Self> {
        for p in [&a2, &b1, &b2] {
            if p.d() != a1.d() {
                return Err(Error::DimensionMismatch {
                    expected: a1.d(),
                    found: p.d(),
                });
            }
            if p.mode() != a1.mode() {
                return Err(Error::InvalidSettings("settings mix full and reduced parameter modes".into()));
            }
        }
        Ok(Self { a1, a2, b1, b2 })
    }

    pub fn zeros(d: usize, mode: ParameterMode) -> Result<Self> {
        let z = ParameterVector::zeros(d, mode)?;
        Ok(Self {
            a1: z.clone(),
            a2: z.clone(),
            b1: z.clone(),
            b2: z,
        })
    }

    /// Split a flat search vector `(A1, A2, B1, B2)` into four settings.
    pub fn from_flat(d: usize, mode: ParameterMode, x: &[f64]) -> Result<Self> {
        let n = mode.len(d);
        if x.len() != 4 * n {
            return Err(Error::ParameterLength {
                d,
                expected: 4 * n,
                found: x.len(),
            });
        }
        let part = |s: usize| ParameterVector::new(d, mode, x[s * n..(s + 1) * n].to_vec());
        Self::new(part(0)?, part(1)?, part(2)?, part(3)?)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        Setting::ALL
            .iter()
            .flat_map(|&s| self.get(s).values().iter().copied())
            .collect()
    }

    pub fn d(&self) -> usize {
        self.a1.d()
    }

    pub fn mode(&self) -> ParameterMode {
        self.a1.mode()
    }

    pub fn get(&self, s: Setting) -> &ParameterVector {
        match s {
            Setting::A1 => &self.a1,
            Setting::A2 => &self.a2,
            Setting::B1 => &self.b1,
            Setting::B2 => &self.b2,
        }
    }
}

/// `P_ij = Tr(U_a|i><i|U_a† ⊗ U_b|j><j|U_b† ρ)` for explicit local unitaries
/// on the first (`ua`) and second (`ub`) subsystem.
pub fn joint_probabilities_unitaries(state: &BipartiteState, ua: &CMatrix, ub: &CMatrix) -> Result<RMatrix> {
    let d = state.d();
    check_dim(d, ua.nrows())?;
    check_dim(d, ub.nrows())?;
    Ok(match state {
        BipartiteState::Pure { amplitudes, .. } => {
            let m = ua.adjoint() * amplitudes * ub.conjugate();
            m.map(|z| z.norm_sqr())
        }
        BipartiteState::Mixed { rho, .. } => {
            let k = kron(ua, ub);
            let rotated = k.adjoint() * rho * &k;
            RMatrix::from_fn(d, d, |i, j| rotated[(i * d + j, i * d + j)].re)
        }
    })
}

/// Joint outcome probabilities with the first subsystem configured by `p` and
/// the second by `q`.
pub fn joint_probabilities(
    state: &BipartiteState,
    p: &ParameterVector,
    q: &ParameterVector,
    gens: &GeneratorSet,
) -> Result<RMatrix> {
    check_dim(state.d(), p.d())?;
    check_dim(state.d(), q.d())?;
    let ua = unitary_from_params(p, gens)?;
    let ub = unitary_from_params(q, gens)?;
    joint_probabilities_unitaries(state, &ua, &ub)
}

/// `Σ_ij μ_ij P_ij`.
pub fn weighted_sum(mu: &RMatrix, probabilities: &RMatrix) -> f64 {
    mu.iter().zip(probabilities.iter()).map(|(m, p)| m * p).sum()
}

/// `E(p, q) = Tr(Ê(p, q) ρ)` with `p` on the first tensor slot and `q` on the
/// second.
pub fn correlation_value(
    state: &BipartiteState,
    p: &ParameterVector,
    q: &ParameterVector,
    gens: &GeneratorSet,
    mu: &CorrelationMatrix,
) -> Result<f64> {
    check_dim(state.d(), mu.d())?;
    let probs = joint_probabilities(state, p, q, gens)?;
    Ok(weighted_sum(mu.mu(), &probs))
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn small_matrices() {
        let mu2 = CorrelationMatrix::new(2).unwrap();
        assert_eq!(mu2.mu(), &RMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let mu3 = CorrelationMatrix::new(3).unwrap();
        assert_eq!(
            mu3.mu(),
            &RMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0, -1.0, 0.0, 1.0])
        );
        assert_eq!(mu3.rational_weight(1, 2), (-2, 2));
        assert!(matches!(CorrelationMatrix::new(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn qubit_observable_is_zz() {
        let e = correlation_observable(&CorrelationMatrix::new(2).unwrap());
        let diag: Vec<f64> = (0..4).map(|i| e[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn diagonal_and_w_basis_forms_agree() {
        for d in 2..=6 {
            let g = GeneratorSet::new(d).unwrap();
            let mu = CorrelationMatrix::new(d).unwrap();
            let a = correlation_observable(&mu);
            let b = correlation_observable_w_basis(&mu, &g).unwrap();
            assert!(max_abs_diff(&a, &b) < 1e-10, "d={d}");
        }
    }

    #[test]
    fn state_validation() {
        let mut amp = CMatrix::zeros(2, 2);
        amp[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(matches!(BipartiteState::pure(amp), Err(Error::InvalidState(_))));

        let mut rho = CMatrix::zeros(4, 4);
        rho[(0, 0)] = Complex64::new(1.5, 0.0);
        rho[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(BipartiteState::mixed(rho, 2).is_err());

        let bell = BipartiteState::maximally_entangled(2).unwrap();
        let mixed = BipartiteState::mixed(bell.density(), 2).unwrap();
        assert!(!mixed.is_pure());
    }

    #[test]
    fn basis_state_probabilities() {
        let g = GeneratorSet::new(3).unwrap();
        let z = ParameterVector::zeros(3, ParameterMode::Full).unwrap();
        let s = BipartiteState::basis(3, 0, 0).unwrap();
        let p = joint_probabilities(&s, &z, &z, &g).unwrap();
        assert_eq!(p[(0, 0)], 1.0);
        assert_eq!(p.sum(), 1.0);

        let me = BipartiteState::maximally_entangled(3).unwrap();
        let p = joint_probabilities(&me, &z, &z, &g).unwrap();
        for j in 0..3 {
            assert!((p[(j, j)] - 1.0 / 3.0).abs() < 1e-15);
        }
        let mu = CorrelationMatrix::new(3).unwrap();
        assert!((correlation_value(&me, &z, &z, &g, &mu).unwrap() - 1.0).abs() < 1e-15);
        assert!((correlation_value(&s, &z, &z, &g, &mu).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qubit_born_probabilities_by_hand() {
        // first qubit rotated by exp(-i π/4 σx), which maps |0> to (|0> - i|1>)/√2
        let phi = 0.4f64;
        let g = GeneratorSet::new(2).unwrap();
        let state = BipartiteState::qubit_pair(phi).unwrap();
        let p = ParameterVector::new(2, ParameterMode::Full, vec![std::f64::consts::FRAC_PI_4, 0.0, 0.0]).unwrap();
        let q = ParameterVector::zeros(2, ParameterMode::Full).unwrap();
        let probs = joint_probabilities(&state, &p, &q, &g).unwrap();
        let (c2, s2) = (phi.cos().powi(2), phi.sin().powi(2));
        let expected = [[c2 / 2.0, s2 / 2.0], [c2 / 2.0, s2 / 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((probs[(i, j)] - expected[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pure_and_mixed_paths_agree() {
        let g = GeneratorSet::new(3).unwrap();
        let amp = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        let amp = &amp / Complex64::new(amp.norm(), 0.0);
        let pure = BipartiteState::pure(amp).unwrap();
        let mixed = BipartiteState::mixed(pure.density(), 3).unwrap();
        let p = ParameterVector::new(3, ParameterMode::Full, (0..8).map(|i| 0.3 * i as f64 - 1.0).collect()).unwrap();
        let q = ParameterVector::new(3, ParameterMode::Full, (0..8).map(|i| (i as f64).cos()).collect()).unwrap();
        let a = joint_probabilities(&pure, &p, &q, &g).unwrap();
        let b = joint_probabilities(&mixed, &p, &q, &g).unwrap();
        assert!(crate::linalg::max_abs_diff_real(&a, &b) < 1e-13);
    }

    #[test]
    fn flat_round_trip() {
        let x: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let c = MeasurementConfig::from_flat(3, ParameterMode::Reduced, &x).unwrap();
        assert_eq!(c.b1.values()[0], 12.0);
        assert_eq!(c.to_flat(), x);
        assert!(MeasurementConfig::from_flat(3, ParameterMode::Full, &x).is_err());
    }
}
