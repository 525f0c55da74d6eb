#![allow(dead_code)]

use cspin_core::{CMatrix, CVector};
use num_complex::Complex64;
use rand::Rng;

/// Dicke state `|N/2, m⟩` on `N` qubits (bit 0 = up, qubit 0 most significant).
pub fn dicke_vector(n: usize, n_down: usize) -> CVector {
    let count = (0..1usize << n).filter(|s| s.count_ones() as usize == n_down).count();
    let amp = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
    CVector::from_fn(1 << n, |s, _| if s.count_ones() as usize == n_down { amp } else { Complex64::new(0.0, 0.0) })
}

/// Entropy of the first `N/2` qubits for a density matrix on the Dicke
/// levels (ordered by decreasing `m`), computed in the `2^N` product basis.
pub fn brute_force_dicke_entropy(rho: &CMatrix, n: usize) -> f64 {
    let d = CMatrix::from_columns(&(0..=n).map(|k| dicke_vector(n, k)).collect::<Vec<_>>());
    let full = &d * rho * d.adjoint();
    let half = n / 2;
    let db = 1usize << (n - half);
    let da = 1usize << half;
    let reduced = CMatrix::from_fn(da, da, |a, ap| (0..db).map(|b| full[(a * db + b, ap * db + b)]).sum());
    let herm = (&reduced + reduced.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(herm);
    eig.eigenvalues.iter().filter(|&&l| l > 1e-12).map(|&l| -l * l.ln()).sum()
}

pub fn random_density_matrix<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let rank = rng.random_range(1..=dim);
    let g = CMatrix::from_fn(dim, rank, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v.unscale(n)
}
