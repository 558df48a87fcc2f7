use std::collections::HashMap;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, I};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subset {
    U,
    V,
    W,
}

/// Identifies a generator by its construction. Indices are 1-based, `j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorLabel {
    /// `u_jk = |j><k| + |k><j|`
    Sym { j: usize, k: usize },
    /// `v_jk = i(|j><k| - |k><j|)`
    Antisym { j: usize, k: usize },
    /// `w_l = -sqrt(2/(l(l+1))) (sum_{i<=l} |i><i| - l |l+1><l+1|)`
    Diag(usize),
}

impl GeneratorLabel {
    pub fn subset(self) -> Subset {
        match self {
            GeneratorLabel::Sym { .. } => Subset::U,
            GeneratorLabel::Antisym { .. } => Subset::V,
            GeneratorLabel::Diag(_) => Subset::W,
        }
    }
}

/// Diagonal entry `x_il = (w_l)_ii` of a W generator (1-based `i`, `l`).
pub fn w_diagonal(i: usize, l: usize) -> f64 {
    let norm = -(2.0 / (l * (l + 1)) as f64).sqrt();
    if i <= l {
        norm
    } else if i == l + 1 {
        -norm * l as f64
    } else {
        0.0
    }
}

/// The `d² - 1` traceless Hermitian generators of SU(d).
///
/// Immutable after construction; share freely between threads.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    d: usize,
    generators: Vec<CMatrix>,
    labels: Vec<GeneratorLabel>,
    index: HashMap<GeneratorLabel, usize>,
}

impl GeneratorSet {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let mut labels = Vec::with_capacity(d * d - 1);
        for j in 1..=d {
            for k in j + 1..=d {
                labels.push(GeneratorLabel::Sym { j, k });
            }
        }
        for j in 1..=d {
            for k in j + 1..=d {
                labels.push(GeneratorLabel::Antisym { j, k });
            }
        }
        for l in 1..d {
            labels.push(GeneratorLabel::Diag(l));
        }

        let generators = labels.iter().map(|&label| build(d, label)).collect();
        let index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Ok(Self {
            d,
            generators,
            labels,
            index,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of generators, `d² - 1`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &CMatrix {
        &self.generators[i]
    }

    pub fn labels(&self) -> &[GeneratorLabel] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> GeneratorLabel {
        self.labels[i]
    }

    pub fn subset(&self, i: usize) -> Subset {
        self.labels[i].subset()
    }

    pub fn position(&self, label: GeneratorLabel) -> Option<usize> {
        self.index.get(&label).copied()
    }

    /// Index range occupied by one subset.
    pub fn subset_range(&self, subset: Subset) -> Range<usize> {
        let pairs = self.d * (self.d - 1) / 2;
        match subset {
            Subset::U => 0..pairs,
            Subset::V => pairs..2 * pairs,
            Subset::W => 2 * pairs..self.len(),
        }
    }

    /// `p·s = Σ_i p_i s_i`, assembled entrywise in O(d²).
    pub fn hermitian_combination(&self, p: &[f64]) -> CMatrix {
        assert_eq!(p.len(), self.len(), "coefficient vector length");
        let d = self.d;
        let mut h = CMatrix::zeros(d, d);
        for (&c, &label) in p.iter().zip(&self.labels) {
            match label {
                GeneratorLabel::Sym { j, k } => {
                    h[(j - 1, k - 1)] += c;
                    h[(k - 1, j - 1)] += c;
                }
                GeneratorLabel::Antisym { j, k } => {
                    h[(j - 1, k - 1)] += I * c;
                    h[(k - 1, j - 1)] -= I * c;
                }
                GeneratorLabel::Diag(l) => {
                    for i in 1..=l + 1 {
                        h[(i - 1, i - 1)] += c * w_diagonal(i, l);
                    }
                }
            }
        }
        h
    }
}

fn build(d: usize, label: GeneratorLabel) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    match label {
        GeneratorLabel::Sym { j, k } => {
            m[(j - 1, k - 1)] = Complex64::new(1.0, 0.0);
            m[(k - 1, j - 1)] = Complex64::new(1.0, 0.0);
        }
        GeneratorLabel::Antisym { j, k } => {
            m[(j - 1, k - 1)] = I;
            m[(k - 1, j - 1)] = -I;
        }
        GeneratorLabel::Diag(l) => {
            for i in 1..=l + 1 {
                m[(i - 1, i - 1)] = Complex64::new(w_diagonal(i, l), 0.0);
            }
        }
    }
    m
}
