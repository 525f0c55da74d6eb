//! Eigendecomposition of unitaries, `U = V diag(e^{iφ}) V†`, for cheap
//! n-cycle powers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{max_abs, max_iterations, unitarity_defect, CMatrix, CVector, UnitaryMatrix};

#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    /// Eigenphases `φ_k ∈ (−π, π]`.
    pub eigenphases: Vec<f64>,
    /// Columns are the eigenvectors; the matrix is unitary.
    pub eigenvectors: CMatrix,
}

/// Modified Gram–Schmidt on the columns of `m`, two passes.
pub(crate) fn orthonormalize_columns(m: &mut CMatrix) {
    let n = m.ncols();
    for k in 0..n {
        for _ in 0..2 {
            for j in 0..k {
                let proj = m.column(j).dotc(&m.column(k));
                let qj = m.column(j).clone_owned();
                m.column_mut(k).axpy(-proj, &qj, Complex64::new(1.0, 0.0));
            }
        }
        let norm = m.column(k).norm();
        m.column_mut(k).unscale_mut(norm);
    }
}

pub fn spectral_propagator(u: &UnitaryMatrix) -> Result<SpectralPropagator> {
    let n = u.dim();
    let schur = nalgebra::linalg::Schur::try_new(u.matrix().clone(), f64::EPSILON, max_iterations(n))
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (mut q, t) = schur.unpack();

    if unitarity_defect(&q) > 1e-12 {
        orthonormalize_columns(&mut q);
    }
    let eigenphases: Vec<f64> = (0..n).map(|k| t[(k, k)].arg()).collect();
    let prop = SpectralPropagator {
        eigenphases,
        eigenvectors: q,
    };
    let residual = max_abs(&(prop.reconstruct() - u.matrix()));
    if residual > 1e-8 {
        return Err(Error::Numerical(format!(
            "spectral reconstruction residual {residual:e} exceeds 1e-8"
        )));
    }
    Ok(prop)
}

impl SpectralPropagator {
    pub fn dim(&self) -> usize {
        self.eigenphases.len()
    }

    /// `V diag(e^{iφ}) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        self.power_matrix(1)
    }

    /// `U^n` as a dense matrix.
    pub fn power_matrix(&self, n: u64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, &phi) in self.eigenphases.iter().enumerate() {
            let z = self.phase_power(phi, n);
            for x in scaled.column_mut(k).iter_mut() {
                *x *= z;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    fn phase_power(&self, phi: f64, n: u64) -> Complex64 {
        // Reduce n·φ before exponentiating to keep the argument small.
        let arg = (phi * n as f64).rem_euclid(std::f64::consts::TAU);
        Complex64::from_polar(1.0, arg)
    }

    /// Eigenbasis coefficients `V† ψ`.
    pub fn coefficients(&self, psi: &CVector) -> CVector {
        self.eigenvectors.adjoint() * psi
    }

    /// `U^n ψ` given precomputed `coeffs = V† ψ`.
    pub fn evolve_coefficients(&self, coeffs: &CVector, n: u64) -> CVector {
        let phased = CVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.eigenphases)
                .map(|(c, &phi)| c * self.phase_power(phi, n)),
        );
        &self.eigenvectors * phased
    }

    pub fn apply_power(&self, psi: &CVector, n: u64) -> CVector {
        self.evolve_coefficients(&self.coefficients(psi), n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{hermitian_expm, HermitianMatrix};
    use std::f64::consts::PI;

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianMatrix::new((&a + a.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
    }

    #[test]
    fn identity_has_zero_phases() {
        let p = spectral_propagator(&UnitaryMatrix::identity(6)).unwrap();
        assert!(p.eigenphases.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn diag_one_minus_one() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let p = spectral_propagator(&UnitaryMatrix::new(m).unwrap()).unwrap();
        let mut phases = p.eigenphases.clone();
        phases.sort_by(f64::total_cmp);
        assert!(phases[0].abs() < 1e-15);
        assert!((phases[1] - PI).abs() < 1e-15);
    }

    #[test]
    fn random_unitary_reconstruction() {
        let a = hermitian_expm(&random_hermitian(4, 1), 0.8).unwrap();
        let b = hermitian_expm(&random_hermitian(4, 2), 1.3).unwrap();
        let u = a.compose(&b).unwrap();
        let p = spectral_propagator(&u).unwrap();
        assert!(max_abs(&(p.reconstruct() - u.matrix())) < 1e-10);
        assert!(unitarity_defect(&p.eigenvectors) < 1e-12);
        let direct = u.matrix() * u.matrix() * u.matrix();
        assert!(max_abs(&(p.power_matrix(3) - direct)) < 1e-10);
    }

    #[test]
    fn degenerate_unitary() {
        // Pure π pulse: highly degenerate spectrum.
        let h = random_hermitian(6, 3);
        let (_, v) = h.eigh().unwrap();
        let d = CVector::from_vec(vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0].into_iter().map(|x| Complex64::new(x, 0.0)).collect());
        let u = UnitaryMatrix::new(&v * CMatrix::from_diagonal(&d) * v.adjoint()).unwrap();
        let p = spectral_propagator(&u).unwrap();
        assert!(unitarity_defect(&p.eigenvectors) < 1e-9);
        assert!(max_abs(&(p.reconstruct() - u.matrix())) < 1e-9);
    }
}
