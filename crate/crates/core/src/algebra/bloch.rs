use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermiticity_defect, trace_of_product, CMatrix, RMatrix};
use crate::{Error, Result};

use super::{GeneratorLabel, GeneratorSet};

const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// `Ω = (a0/d) 1 + ½ Σ_j a_j s_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochDecomposition {
    pub a0: f64,
    pub a: Vec<f64>,
}

impl BlochDecomposition {
    pub fn reconstruct(&self, gens: &GeneratorSet) -> CMatrix {
        let d = gens.d();
        let mut m = gens.hermitian_combination(&self.a) * Complex64::new(0.5, 0.0);
        for i in 0..d {
            m[(i, i)] += self.a0 / d as f64;
        }
        m
    }

    /// Bloch vector of `U Ω U†` given `T` for `U`: `a'_k = Σ_j T_jk a_j`.
    pub fn rotated(&self, t: &RMatrix) -> Self {
        let n = self.a.len();
        let a = (0..n)
            .map(|k| (0..n).map(|j| t[(j, k)] * self.a[j]).sum())
            .collect();
        Self { a0: self.a0, a }
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// `a0 = Tr H`, `a_j = Tr(s_j H)`.
pub fn bloch_decompose(h: &CMatrix, gens: &GeneratorSet) -> Result<BlochDecomposition> {
    let d = gens.d();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.nrows(),
        });
    }
    let defect = hermiticity_defect(h);
    if defect > HERMITICITY_TOLERANCE {
        return Err(Error::NotHermitian { defect });
    }
    let a0 = h.trace().re;
    let a = gens
        .generators()
        .iter()
        .map(|s| trace_of_product(s, h).re)
        .collect();
    Ok(BlochDecomposition { a0, a })
}

/// `|j><j| = identity·1 - Σ (l, g) g·w_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalProjector {
    pub j: usize,
    pub identity: f64,
    /// `(l, g_k^j)` with `l = j - 1 + k`; the `w_0` slot never appears.
    pub w_terms: Vec<(usize, f64)>,
}

impl DiagonalProjector {
    pub fn assemble(&self, gens: &GeneratorSet) -> CMatrix {
        let d = gens.d();
        let mut m = CMatrix::identity(d, d) * Complex64::new(self.identity, 0.0);
        for &(l, g) in &self.w_terms {
            let idx = gens
                .position(GeneratorLabel::Diag(l))
                .expect("W label within range");
            m -= gens.generator(idx) * Complex64::new(g, 0.0);
        }
        m
    }
}

/// Expansion of the outcome projector `|j><j|` (1-based `j`) over the W block,
/// with `g_k^j = (1 - j δ_k0) / sqrt(2 (j+k)(j+k-1))`.
pub fn diagonal_projector_coeffs(j: usize, d: usize) -> Result<DiagonalProjector> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if j == 0 || j > d {
        return Err(Error::OutcomeOutOfRange { index: j, d });
    }
    let w_terms = (0..=d - j)
        .filter_map(|k| {
            let l = j - 1 + k;
            (l >= 1).then(|| (l, g_coefficient(j, k)))
        })
        .collect();
    Ok(DiagonalProjector {
        j,
        identity: 1.0 / d as f64,
        w_terms,
    })
}

/// `g_k^j`, defined as zero for the `j = 1, k = 0` slot (attached to the
/// nonexistent `w_0`).
pub(crate) fn g_coefficient(j: usize, k: usize) -> f64 {
    let s = j + k;
    if s < 2 {
        return 0.0;
    }
    let lead = if k == 0 { 1.0 - j as f64 } else { 1.0 };
    lead * (1.0 / (2.0 * (s * (s - 1)) as f64)).sqrt()
}
