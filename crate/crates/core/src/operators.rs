//! Collective spin operators, the static Hamiltonian, and the kicked
//! Floquet operator within one symmetry sector.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::Result;
use crate::matrix::{hermitian_expm, CMatrix, HermitianMatrix, UnitaryMatrix};
use crate::params::ModelParams;
use crate::sector::{Label, SectorBasis, Sigma};

/// Ladder coefficient `√(j(j+1) − m(m ± 1))` from doubled quantum numbers.
/// Returns 0 at the edge of the multiplet.
pub fn ladder_coefficient(twice_j: i64, twice_m: i64, raise: bool) -> f64 {
    let shift = if raise { 2 } else { -2 };
    let quad = twice_j * (twice_j + 2) - twice_m * (twice_m + shift);
    if quad <= 0 {
        0.0
    } else {
        (quad as f64 / 4.0).sqrt()
    }
}

/// Spin operators of the satellites (collective `I_t`) and the central spin
/// `S_0` in the sector basis.
#[derive(Clone, Debug)]
pub struct CollectiveOps {
    pub it_z: CMatrix,
    pub it_plus: CMatrix,
    pub it_minus: CMatrix,
    pub it_x: CMatrix,
    pub s0_x: CMatrix,
    pub s0_z: CMatrix,
    pub s0_plus: CMatrix,
    pub s0_minus: CMatrix,
}

pub fn collective_ops(basis: &SectorBasis) -> CollectiveOps {
    let dim = basis.dim();
    let tj = basis.twice_j() as i64;
    let mut it_z = CMatrix::zeros(dim, dim);
    let mut it_plus = CMatrix::zeros(dim, dim);
    let mut s0_z = CMatrix::zeros(dim, dim);
    let mut s0_plus = CMatrix::zeros(dim, dim);

    for (col, label) in basis.labels().enumerate() {
        it_z[(col, col)] = Complex64::new(label.m(), 0.0);
        s0_z[(col, col)] = Complex64::new(label.sigma.sign() / 2.0, 0.0);
        if let Some(row) = basis.index_of(label.shifted(1, label.sigma)) {
            it_plus[(row, col)] = Complex64::new(ladder_coefficient(tj, label.twice_m, true), 0.0);
        }
        if label.sigma == Sigma::Down {
            let row = basis.index_of(Label::new(label.twice_m, Sigma::Up)).unwrap();
            s0_plus[(row, col)] = Complex64::new(1.0, 0.0);
        }
    }

    let half = Complex64::new(0.5, 0.0);
    let it_minus = it_plus.adjoint();
    let s0_minus = s0_plus.adjoint();
    let it_x = (&it_plus + &it_minus) * half;
    let s0_x = (&s0_plus + &s0_minus) * half;
    CollectiveOps {
        it_z,
        it_plus,
        it_minus,
        it_x,
        s0_x,
        s0_z,
        s0_plus,
        s0_minus,
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The flip-flop part `I⁺S⁻ + I⁻S⁺` (unit coupling).
pub fn flip_flop(ops: &CollectiveOps) -> CMatrix {
    &ops.it_plus * &ops.s0_minus + &ops.it_minus * &ops.s0_plus
}

/// `H0 = A_xy(I⁺S⁻ + I⁻S⁺) + A_z I^z S^z + B_z S^z + B^n_z I^z`.
pub fn build_h0(params: &ModelParams, basis: &SectorBasis) -> Result<HermitianMatrix> {
    params.validate()?;
    let ops = collective_ops(basis);
    let h = flip_flop(&ops) * real(params.a_xy)
        + &ops.it_z * &ops.s0_z * real(params.a_z)
        + &ops.s0_z * real(params.b_z)
        + &ops.it_z * real(params.b_nz);
    HermitianMatrix::new(h)
}

/// Kick generator `(π − θ_e) S^x_0 + (π − θ_n) I^x_t`.
pub fn pulse_generator(params: &ModelParams, basis: &SectorBasis) -> Result<HermitianMatrix> {
    let ops = collective_ops(basis);
    HermitianMatrix::new(
        &ops.s0_x * real(PI - params.theta_e) + &ops.it_x * real(PI - params.theta_n),
    )
}

/// The kick unitary `exp(−i[(π − θ_e) S^x_0 + (π − θ_n) I^x_t])`.
pub fn build_pulse(params: &ModelParams, basis: &SectorBasis) -> Result<UnitaryMatrix> {
    params.validate()?;
    hermitian_expm(&pulse_generator(params, basis)?, 1.0)
}

/// Global phase of the ideal π pulse, `(−i)^(2j+1)`.
pub fn pi_pulse_phase(twice_j: usize) -> Complex64 {
    Complex64::new(0.0, -1.0).powu((twice_j + 1) as u32)
}

/// One-period Floquet operator `U_F = U_pulse · exp(−i H0 T)`.
pub fn build_floquet(params: &ModelParams, basis: &SectorBasis) -> Result<UnitaryMatrix> {
    let h0 = build_h0(params, basis)?;
    let free = hermitian_expm(&h0, params.period())?;
    build_pulse(params, basis)?.compose(&free)
}
