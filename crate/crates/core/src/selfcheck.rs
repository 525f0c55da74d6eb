//! End-to-end agreement checks between the simulator and the closed-form
//! oracles, and between the collective and full-basis engines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::StateVector;
use crate::error::Result;
use crate::full_basis::{full_floquet, sector_embedding, FullBasisModel};
use crate::matrix::{max_abs, CVector, UnitaryMatrix};
use crate::operators::build_floquet;
use crate::oracles::{ising_exact, ising_first_order, xx_exact, xx_two_cycle_first_order};
use crate::params::ModelParams;
use crate::sector::{Label, SectorBasis, Sigma};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
        }
    }
}

const CHECKPOINTS: [u64; 7] = [1, 2, 3, 6, 10, 100, 1000];

fn deviation(b: &SectorBasis, v: &CVector, amps: &[(Label, Complex64)]) -> f64 {
    let mut expected = CVector::zeros(b.dim());
    for (l, a) in amps {
        if let Some(i) = b.index_of(*l) {
            expected[i] += *a;
        }
    }
    (v - expected).camax()
}

/// `(U^n ψ)` at each checkpoint, by repeated multiplication.
fn trajectory(u: &UnitaryMatrix, psi: &CVector, checkpoints: &[u64]) -> Vec<CVector> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut v = psi.clone();
    let mut n = 0;
    for &target in checkpoints {
        while n < target {
            v = u.apply(&v);
            n += 1;
        }
        out.push(v.clone());
    }
    out
}

pub fn check_ising_oracle() -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for (n_sat, a_z, b_z, omega) in [(5, 1.3, 100.0, 1.0), (8, 0.71, -2.2, 1.7)] {
        let b = SectorBasis::largest(n_sat)?;
        let p = ModelParams::ising(a_z, b_z, omega);
        let u = build_floquet(&p, &b)?;
        for start in b.labels() {
            let psi = StateVector::basis_state(&b, start)?;
            for (&n, v) in CHECKPOINTS.iter().zip(trajectory(&u, psi.amplitudes(), &CHECKPOINTS)) {
                let (l, a) = ising_exact(&b, start, n, &p)?;
                worst = worst.max(deviation(&b, &v, &[(l, a)]));
            }
        }
    }
    Ok(CheckReport::new("ising exact dynamics", worst, 1e-10))
}

pub fn check_xx_oracle() -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for (n_sat, a) in [(5, 0.37), (8, 1.9)] {
        let b = SectorBasis::largest(n_sat)?;
        let p = ModelParams::xx(a, 0.0, 1.0);
        let u = build_floquet(&p, &b)?;
        for tm in (-(n_sat as i64)..=n_sat as i64).step_by(2) {
            let psi = StateVector::basis_state(&b, Label::new(tm, Sigma::Up))?;
            for (&n, v) in CHECKPOINTS.iter().zip(trajectory(&u, psi.amplitudes(), &CHECKPOINTS)) {
                let r = xx_exact(&b, tm, n, &p)?;
                worst = worst.max(deviation(&b, &v, &[(r.labels[0], r.beta), (r.labels[1], r.gamma)]));
            }
        }
    }
    Ok(CheckReport::new("xx exact dynamics", worst, 1e-10))
}

/// Residual ratio when the pulse error is halved; first-order accuracy gives 4.
fn halving_ratio<F>(residual: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(residual(1e-2)? / residual(5e-3)?)
}

fn first_order_residual(b: &SectorBasis, p: &ModelParams, start: Label, cycles: u64, amps: &[(Label, Complex64)]) -> Result<f64> {
    let u = build_floquet(p, b)?;
    let psi = StateVector::basis_state(b, start)?;
    let v = trajectory(&u, psi.amplitudes(), &[cycles]).remove(0);
    let mut expected = CVector::zeros(b.dim());
    for (l, a) in amps {
        expected[b.index_of(*l).expect("oracle labels lie in the sector")] += *a;
    }
    Ok((v - expected).norm())
}

pub fn check_first_order_scaling() -> Result<CheckReport> {
    let b = SectorBasis::largest(5)?;
    let mut worst: f64 = 0.0;
    let ising = ModelParams::ising(1.3, 100.0, 1.0);
    let start = Label::new(1, Sigma::Up);
    let ratio = halving_ratio(|th| {
        let p = ising.with_theta(th);
        first_order_residual(&b, &p, start, 4, &ising_first_order(&b, start, 4, &p)?)
    })?;
    worst = worst.max((ratio - 4.0).abs());
    let xx = ModelParams::xx(0.7 / (2.0 * PI), 0.0, 1.0);
    let ratio = halving_ratio(|th| {
        let p = xx.with_theta(th);
        first_order_residual(&b, &p, Label::new(3, Sigma::Up), 2, &xx_two_cycle_first_order(&b, 3, &p)?)
    })?;
    worst = worst.max((ratio - 4.0).abs());
    Ok(CheckReport::new("first-order residual halving (|ratio - 4|)", worst, 0.5))
}

pub fn check_cross_engine(n_satellites: usize) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for base in [
        ModelParams::ising(1.3, 2.0, 1.0),
        ModelParams::xx(1.3, 0.7, 1.0),
        ModelParams::heisenberg(0.9, 3.0, 1.0),
        ModelParams::xxz(1.3, 0.4, 1.5, 1.0),
    ] {
        for theta in [0.0, 0.1 * PI] {
            let p = base.with_theta(theta);
            let u_full = full_floquet(&FullBasisModel::homogeneous(&p, n_satellites)?)?;
            let mut twice_j = n_satellites;
            loop {
                let b = SectorBasis::new(n_satellites, twice_j)?;
                let e = sector_embedding(&b)?;
                let u = build_floquet(&p, &b)?;
                worst = worst.max(max_abs(&(e.adjoint() * u_full.matrix() * &e - u.matrix())));
                let psi = StateVector::unit(b.dim(), 1);
                let coll = trajectory(&u, psi.amplitudes(), &[100]).remove(0);
                let full = trajectory(&u_full, &(&e * psi.amplitudes()), &[100]).remove(0);
                worst = worst.max(1.0 - (&e * coll).dotc(&full).norm_sqr());
                if twice_j < 2 {
                    break;
                }
                twice_j -= 2;
            }
        }
    }
    Ok(CheckReport::new(&format!("full basis vs collective, N={n_satellites}"), worst, 1e-10))
}

pub fn run_self_checks() -> Result<Vec<CheckReport>> {
    Ok(vec![
        check_ising_oracle()?,
        check_xx_oracle()?,
        check_first_order_scaling()?,
        check_cross_engine(5)?,
    ])
}
