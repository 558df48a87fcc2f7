use std::collections::BTreeMap;

use crate::linalg::{trace_of_product, RMatrix, I};

use super::generators::{w_diagonal, GeneratorSet};

const DROP_TOLERANCE: f64 = 1e-12;

/// Structure constants `f_jkl` with `[s_j, s_k] = 2i Σ_l f_jkl s_l`.
///
/// Stored sparsely: only entries with `|f| ≥ 1e-12` are kept.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    d: usize,
    n: usize,
    entries: BTreeMap<(usize, usize, usize), f64>,
    max_imag_residue: f64,
    x: RMatrix,
}

impl StructureConstants {
    /// `f_jkl = Tr([s_j, s_k] s_l) / (4i)`.
    pub fn new(gens: &GeneratorSet) -> Self {
        let d = gens.d();
        let n = gens.len();
        let mut entries = BTreeMap::new();
        let mut max_imag_residue = 0.0f64;
        for j in 0..n {
            for k in j + 1..n {
                let sj = gens.generator(j);
                let sk = gens.generator(k);
                let comm = sj * sk - sk * sj;
                for l in 0..n {
                    let value = trace_of_product(&comm, gens.generator(l)) / (I * 4.0);
                    max_imag_residue = max_imag_residue.max(value.im.abs());
                    if value.re.abs() >= DROP_TOLERANCE {
                        entries.insert((j, k, l), value.re);
                        entries.insert((k, j, l), -value.re);
                    }
                }
            }
        }
        let x = RMatrix::from_fn(d, d - 1, |i, l| w_diagonal(i + 1, l + 1));
        Self {
            d,
            n,
            entries,
            max_imag_residue,
            x,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of generators the tensor is indexed over.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        self.entries.get(&(j, k, l)).copied().unwrap_or(0.0)
    }

    /// Nonzero entries `((j, k, l), f_jkl)` in lexicographic order.
    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&key, &v)| (key, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Largest imaginary part seen while evaluating the trace formula.
    pub fn max_imag_residue(&self) -> f64 {
        self.max_imag_residue
    }

    /// `x_il`, the diagonal entries of the W generators (0-based `i`, `l`).
    pub fn x(&self) -> &RMatrix {
        &self.x
    }

    /// `F_jl = Σ_k p_k f_kjl`, antisymmetric in `(j, l)`.
    pub fn rotation_generator(&self, p: &[f64]) -> RMatrix {
        assert_eq!(p.len(), self.n, "parameter length");
        let mut f = RMatrix::zeros(self.n, self.n);
        for (&(k, j, l), &v) in &self.entries {
            f[(j, l)] += p[k] * v;
        }
        f
    }
}
