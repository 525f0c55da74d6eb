//! Dense complex matrices with Hermiticity / unitarity contracts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U†U − 1|` entrywise.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Sweep budget for the iterative eigensolvers.
pub(crate) fn max_iterations(dim: usize) -> usize {
    10_000 + 100 * dim
}

/// Dense Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Accepts `m` if `max|m − m†| ≤ 1e−12 · max|m|`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Numerical(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("Hermitian matrix has non-finite entries".into()));
        }
        let scale = max_abs(&m);
        let defect = hermiticity_defect(&m);
        if defect > 1e-12 * scale {
            return Err(Error::Numerical(format!(
                "matrix is not Hermitian: defect {defect:e} at scale {scale:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// Real eigenvalues (ascending) and orthonormal eigenvectors.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        let n = self.dim();
        if n == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0, 0)));
        }
        // Symmetrize away rounding noise before the solver sees it.
        let sym = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, f64::EPSILON, max_iterations(n))
            .ok_or_else(|| Error::Numerical("Hermitian eigendecomposition did not converge".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok((values, vectors))
    }
}

/// Dense unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Numerical("unitary matrix must be square".into()));
        }
        let defect = unitarity_defect(&m);
        if !(defect <= Self::TOLERANCE) {
            return Err(Error::Numerical(format!(
                "matrix is not unitary: max|U†U − 1| = {defect:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// `self · rhs`, checked.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        UnitaryMatrix::new(&self.0 * &rhs.0)
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }
}

/// `exp(−i H t)` through the Hermitian eigendecomposition.
pub fn hermitian_expm(h: &HermitianMatrix, t: f64) -> Result<UnitaryMatrix> {
    let n = h.dim();
    if t == 0.0 {
        return Ok(UnitaryMatrix::identity(n));
    }
    let (values, vectors) = h.eigh()?;
    let mut scaled = vectors.clone();
    for (k, &e) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -e * t);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    UnitaryMatrix::new(scaled * vectors.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let u = hermitian_expm(&HermitianMatrix::zeros(5), 3.7).unwrap();
        assert!(max_abs(&(u.matrix() - CMatrix::identity(5, 5))) < 1e-15);
    }

    #[test]
    fn diagonal_hamiltonian_gives_phases() {
        let h = [0.3, -1.2, 4.0];
        let t = 0.7;
        let m = CMatrix::from_diagonal(&CVector::from_iterator(3, h.iter().map(|&x| c(x, 0.0))));
        let u = hermitian_expm(&HermitianMatrix::new(m).unwrap(), t).unwrap();
        for (k, &hk) in h.iter().enumerate() {
            let expected = Complex64::from_polar(1.0, -hk * t);
            assert!((u.matrix()[(k, k)] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn half_pi_rotation_about_x() {
        // exp(−iπσˣ/2) = −iσˣ
        let h = HermitianMatrix::new(pauli_x() * c(0.5, 0.0)).unwrap();
        let u = hermitian_expm(&h, PI).unwrap();
        let expected = pauli_x() * c(0.0, -1.0);
        assert!(max_abs(&(u.matrix() - expected)) < 1e-15 * 10.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn group_property() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.0), c(0.2, 0.5), c(-0.3, 0.1), c(0.2, -0.5), c(-2.0, 0.0), c(0.7, 0.0), c(-0.3, -0.1), c(0.7, 0.0), c(0.4, 0.0)],
        );
        let h = HermitianMatrix::new(m).unwrap();
        let a = hermitian_expm(&h, 0.37).unwrap();
        let b = hermitian_expm(&h, 1.91).unwrap();
        let ab = hermitian_expm(&h, 0.37 + 1.91).unwrap();
        assert!(max_abs(&(a.matrix() * b.matrix() - ab.matrix())) < 1e-10);
    }

    #[test]
    fn non_finite_hermitian_is_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 0)] = c(f64::INFINITY, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::Numerical(_))));
    }
}
