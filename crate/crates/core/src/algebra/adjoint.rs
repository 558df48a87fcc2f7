use crate::linalg::{expm_minus_i_hermitian, expm_real, trace_of_product, unitarity_defect, CMatrix, RMatrix};
use crate::{Error, Result};

use super::{GeneratorSet, ParameterVector, StructureConstants};

const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Canonical unitary `U(p) = exp(-i p·s)`.
pub fn unitary_from_params(p: &ParameterVector, gens: &GeneratorSet) -> Result<CMatrix> {
    if p.d() != gens.d() {
        return Err(Error::DimensionMismatch {
            expected: gens.d(),
            found: p.d(),
        });
    }
    let h = gens.hermitian_combination(&p.full_values());
    Ok(expm_minus_i_hermitian(&h))
}

/// Adjoint matrix from the trace formula `T_jk = ½ Tr(U† s_j U s_k)`, so that
/// `U† s_j U = Σ_k T_jk s_k`.
pub fn adjoint_matrix_direct(u: &CMatrix, gens: &GeneratorSet) -> Result<RMatrix> {
    let d = gens.d();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.nrows(),
        });
    }
    let defect = unitarity_defect(u);
    if defect > UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary { defect });
    }
    let n = gens.len();
    let u_dag = u.adjoint();
    let rotated: Vec<CMatrix> = gens.generators().iter().map(|s| &u_dag * s * u).collect();
    Ok(RMatrix::from_fn(n, n, |j, k| {
        0.5 * trace_of_product(&rotated[j], gens.generator(k)).re
    }))
}

/// Adjoint matrix as the real exponential `T(p) = exp(-2 F(p))`.
pub fn adjoint_matrix_exp(p: &ParameterVector, f: &StructureConstants) -> Result<RMatrix> {
    if p.d() != f.d() {
        return Err(Error::DimensionMismatch {
            expected: f.d(),
            found: p.d(),
        });
    }
    let generator = f.rotation_generator(&p.full_values());
    Ok(expm_real(&(generator * -2.0)))
}
