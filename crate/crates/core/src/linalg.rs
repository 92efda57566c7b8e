//! 4×4 and 2×2 Hermitian helpers on top of nalgebra.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

pub type Mat4 = Matrix4<Complex64>;
pub type Mat2 = Matrix2<Complex64>;

/// Eigenvalues below this are taken as exact zeros when forming square
/// roots and logarithms.
pub const ZERO_EIGENVALUE: f64 = 1e-15;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn eigh(m: &Mat4) -> (Vector4<f64>, Mat4) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn eigvalsh(m: &Mat4) -> Vector4<f64> {
    SymmetricEigen::new(hermitian_part(m)).eigenvalues
}

/// `U f(Λ) U†`.
pub(crate) fn apply_spectral(values: &Vector4<f64>, vectors: &Mat4, f: impl Fn(f64) -> f64) -> Mat4 {
    let mut scaled = *vectors;
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= c(f(values[j]));
    }
    scaled * vectors.adjoint()
}

/// Eigenvalues of a 2×2 Hermitian matrix in closed form.
pub(crate) fn eigvalsh2(m: &Mat2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + off.norm_sqr()).sqrt();
    [mean - half_gap, mean + half_gap]
}

/// Reduced state of the first tensor factor.
pub fn partial_trace_second(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|i, j| m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)])
}

/// Reduced state of the second tensor factor.
pub fn partial_trace_first(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|i, j| m[(i, j)] + m[(i + 2, j + 2)])
}

/// Shannon entropy in bits of a list of probabilities, ignoring numerical zeros.
pub(crate) fn entropy_bits(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .filter(|&x| x > ZERO_EIGENVALUE)
        .map(|x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_reconstruction() {
        let mut m = Mat4::zeros();
        m[(0, 0)] = c(0.4);
        m[(1, 1)] = c(0.3);
        m[(2, 2)] = c(0.2);
        m[(3, 3)] = c(0.1);
        m[(1, 2)] = Complex64::new(0.1, 0.05);
        m[(2, 1)] = Complex64::new(0.1, -0.05);
        let (w, v) = eigh(&m);
        let back = apply_spectral(&w, &v, |x| x);
        assert!((back - m).norm() < 1e-14);
        let root = apply_spectral(&w, &v, f64::sqrt);
        assert!((root * root - m).norm() < 1e-14);
    }

    #[test]
    fn partial_traces_of_product() {
        // |0⟩⟨0| ⊗ diag(0.25, 0.75)
        let mut m = Mat4::zeros();
        m[(0, 0)] = c(0.25);
        m[(1, 1)] = c(0.75);
        let first = partial_trace_second(&m);
        let second = partial_trace_first(&m);
        assert_eq!(first[(0, 0)], c(1.0));
        assert_eq!(first[(1, 1)], c(0.0));
        assert_eq!(second[(0, 0)], c(0.25));
        assert_eq!(second[(1, 1)], c(0.75));
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let m = Mat2::new(c(0.5), Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5), c(0.5));
        let [lo, hi] = eigvalsh2(&m);
        assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
    }
}
