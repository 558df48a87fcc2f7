//! Small dense linear-algebra helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest absolute entry of `U†U - 1`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest absolute entry of `H - H†`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `exp(-i H)` for Hermitian `H` through its unitary eigendecomposition.
pub fn expm_minus_i_hermitian(h: &CMatrix) -> CMatrix {
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda);
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Real matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm_real(a: &RMatrix) -> RMatrix {
    a.exp()
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue_hermitian(h: &CMatrix) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest entrywise modulus of `A - B`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &RMatrix, b: &RMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn real_to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}
