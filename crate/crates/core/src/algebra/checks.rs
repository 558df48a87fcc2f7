//! Numerical self-checks of the algebra layer, reported per named check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{max_abs_diff, max_abs_diff_real, trace_of_product, CMatrix, I};
use crate::Result;

use super::{
    adjoint_matrix_direct, adjoint_matrix_exp, unitary_from_params, GeneratorSet, ParameterMode,
    ParameterVector, StructureConstants, Subset,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub d: usize,
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

/// Run every algebra check for one dimension. `samples` random parameter
/// vectors are drawn for the adjoint cross-check.
pub fn run_all(d: usize, samples: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let gens = GeneratorSet::new(d)?;
    let f = StructureConstants::new(&gens);
    let n = gens.len();

    let mut trace = 0.0f64;
    let mut ortho = 0.0f64;
    for i in 0..n {
        trace = trace.max(gens.generator(i).trace().norm());
        for j in 0..n {
            let expected = if i == j { 2.0 } else { 0.0 };
            ortho = ortho.max((trace_of_product(gens.generator(i), gens.generator(j)) - expected).norm());
        }
    }

    let mut comm = 0.0f64;
    for j in 0..n {
        for k in j + 1..n {
            let (sj, sk) = (gens.generator(j), gens.generator(k));
            let lhs = sj * sk - sk * sj;
            let mut rhs = CMatrix::zeros(d, d);
            for l in 0..n {
                let c = f.get(j, k, l);
                if c != 0.0 {
                    rhs += gens.generator(l) * (I * 2.0 * c);
                }
            }
            comm = comm.max(max_abs_diff(&lhs, &rhs));
        }
    }

    let mut w_comm = 0.0f64;
    for j in gens.subset_range(Subset::W) {
        for k in gens.subset_range(Subset::W) {
            let (sj, sk) = (gens.generator(j), gens.generator(k));
            w_comm = w_comm.max(max_abs_diff(&(sj * sk), &(sk * sj)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjoint = 0.0f64;
    let mut orthogonality = 0.0f64;
    for _ in 0..samples {
        let values = (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let p = ParameterVector::new(d, ParameterMode::Full, values)?;
        let direct = adjoint_matrix_direct(&unitary_from_params(&p, &gens)?, &gens)?;
        let exp = adjoint_matrix_exp(&p, &f)?;
        adjoint = adjoint.max(max_abs_diff_real(&direct, &exp));
        let gram = direct.transpose() * &direct;
        orthogonality = orthogonality.max(max_abs_diff_real(&gram, &crate::linalg::RMatrix::identity(n, n)));
    }

    Ok(vec![
        CheckOutcome { d, name: "traceless", worst: trace, tolerance: 1e-12 },
        CheckOutcome { d, name: "orthogonality", worst: ortho, tolerance: 1e-12 },
        CheckOutcome { d, name: "structure-imaginary-residue", worst: f.max_imag_residue(), tolerance: 1e-12 },
        CheckOutcome { d, name: "commutator", worst: comm, tolerance: 1e-10 },
        CheckOutcome { d, name: "w-commute", worst: w_comm, tolerance: 0.0 },
        CheckOutcome { d, name: "adjoint-cross-method", worst: adjoint, tolerance: 1e-8 },
        CheckOutcome { d, name: "adjoint-orthogonal", worst: orthogonality, tolerance: 1e-10 },
    ])
}
