//! Closed-form stroboscopic dynamics for the Ising and XX couplings, and
//! first-order pulse-error corrections.
//!
//! Amplitudes include the global phase `gⁿ` picked up from the π pulse, so
//! they compare directly with simulator amplitudes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::phase_sum;
use crate::error::{Error, Result};
use crate::operators::{ladder_coefficient, pi_pulse_phase};
use crate::params::ModelParams;
use crate::sector::{Label, SectorBasis, Sigma};

/// `α^±_m = √(j(j+1) − m(m ± 1))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderCoefficient {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl LadderCoefficient {
    pub fn new(twice_j: i64, twice_m: i64) -> Self {
        Self {
            alpha_plus: ladder_coefficient(twice_j, twice_m, true),
            alpha_minus: ladder_coefficient(twice_j, twice_m, false),
        }
    }
}

/// `α⁰_m`: the raising coefficient at `m` (0 outside the multiplet).
fn alpha0(twice_j: i64, twice_m: i64) -> f64 {
    if twice_m.abs() > twice_j {
        0.0
    } else {
        ladder_coefficient(twice_j, twice_m, true)
    }
}

/// `Σ_{r=1}^{count} e^{i r x}` plus one.
fn one_plus_sum(x: f64, count: u64) -> Complex64 {
    Complex64::new(1.0, 0.0) + phase_sum(x, count)
}

fn global_phase(basis: &SectorBasis, n: u64) -> Complex64 {
    pi_pulse_phase(basis.twice_j()).powu((n % 4) as u32)
}

fn require_largest(basis: &SectorBasis) -> Result<()> {
    if basis.is_fully_symmetric() {
        Ok(())
    } else {
        Err(Error::Unsupported("closed-form oracles cover the fully symmetric sector only".into()))
    }
}

fn require_ising(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.a_xy != 0.0 {
        return Err(Error::InvalidParameter(format!("Ising oracle needs a_xy = 0, got {}", params.a_xy)));
    }
    Ok(())
}

/// Exact `U_Fⁿ |m σ⟩` for the Ising coupling at zero pulse error.
pub fn ising_exact(basis: &SectorBasis, start: Label, n: u64, params: &ModelParams) -> Result<(Label, Complex64)> {
    require_ising(params)?;
    if params.theta_e != 0.0 || params.theta_n != 0.0 {
        return Err(Error::InvalidParameter("exact Ising oracle needs zero pulse error".into()));
    }
    if !basis.contains(start) {
        return Err(Error::InvalidState(format!("{start} is outside the sector")));
    }
    let t = params.period();
    let m = start.m();
    let s = start.sigma.sign();
    // Energy of |m σ⟩ under H0; the pulse maps it to |−m σ̄⟩.
    let energy = |m: f64, s: f64| 0.5 * params.a_z * m * s + 0.5 * params.b_z * s + params.b_nz * m;
    let p = n / 2;
    // Two cycles accumulate E(m, σ) + E(−m, σ̄) = A_z m σ.
    let pair = Complex64::from_polar(1.0, -(p as f64) * params.a_z * m * s * t);
    let g = global_phase(basis, n);
    if n % 2 == 0 {
        Ok((start, g * pair))
    } else {
        let phi = energy(m, s) * t;
        Ok((start.flipped(), g * pair * Complex64::from_polar(1.0, -phi)))
    }
}

/// Amplitudes of `U_F(θ)^{2p} |m ↑⟩` through first order in the pulse
/// errors, as `(label, amplitude)` pairs with the zeroth-order term first.
///
/// `θ_e` drives the `|m ↓⟩` term, `θ_n` the `|m ± 1 ↑⟩` terms.
pub fn ising_first_order(
    basis: &SectorBasis,
    start: Label,
    cycles: u64,
    params: &ModelParams,
) -> Result<Vec<(Label, Complex64)>> {
    require_ising(params)?;
    if start.sigma != Sigma::Up {
        return Err(Error::Unsupported("first-order Ising result covers σ = ↑ only".into()));
    }
    if cycles % 2 != 0 {
        return Err(Error::InvalidParameter("first-order Ising result needs an even cycle count".into()));
    }
    if params.b_nz != 0.0 {
        return Err(Error::InvalidParameter("first-order Ising result assumes b_nz = 0".into()));
    }
    if !basis.contains(start) {
        return Err(Error::InvalidState(format!("{start} is outside the sector")));
    }
    let zeroth_params = params.with_theta(0.0);
    let (_, zeroth) = ising_exact(basis, start, cycles, &zeroth_params)?;
    let mut out = vec![(start, zeroth)];
    if cycles == 0 {
        return Ok(out);
    }

    let p = cycles / 2;
    let t = params.period();
    let tj = basis.twice_j() as i64;
    let tm = start.twice_m;
    let a = params.a_z * start.m() * t;
    let g = global_phase(basis, cycles);
    let pre = g * Complex64::new(0.0, 0.5) * Complex64::from_polar(1.0, -(p as f64) * a);

    // Even r ≥ 2 and odd r contributions share the geometric factor in 2a.
    let even = one_plus_sum(2.0 * a, p - 1);
    let down = even * (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, a - params.b_z * t));
    out.push((Label::new(tm, Sigma::Down), pre * params.theta_e * down));

    let x = 0.5 * params.a_z * t;
    let up_label = Label::new(tm + 2, Sigma::Up);
    if basis.contains(up_label) {
        let c = alpha0(tj, tm) * one_plus_sum(-x, 2 * p - 1);
        out.push((up_label, pre * params.theta_n * c));
    }
    let low_label = Label::new(tm - 2, Sigma::Up);
    if basis.contains(low_label) {
        let c = alpha0(tj, tm - 2) * one_plus_sum(x, 2 * p - 1);
        out.push((low_label, pre * params.theta_n * c));
    }
    Ok(out)
}

/// Ising robustness: `A_z/ω` an odd integer to within 1e-9.
pub fn ising_robustness(a_z: f64, omega: f64) -> bool {
    if !(omega > 0.0) || !a_z.is_finite() {
        return false;
    }
    let r = a_z / omega;
    let k = r.round();
    (r - k).abs() <= 1e-9 && (k as i64).rem_euclid(2) == 1
}

/// Two-component XX state: `β` on the first label, `γ` on the second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XxAmplitudes {
    pub labels: [Label; 2],
    pub beta: Complex64,
    pub gamma: Complex64,
}

fn require_xx(basis: &SectorBasis, params: &ModelParams) -> Result<()> {
    params.validate()?;
    require_largest(basis)?;
    if params.a_z != 0.0 || params.b_z != 0.0 || params.b_nz != 0.0 {
        return Err(Error::InvalidParameter("XX oracle needs a_z = b_z = b_nz = 0".into()));
    }
    Ok(())
}

fn cos_sin(params: &ModelParams, twice_j: i64, twice_m: i64) -> (f64, f64) {
    let x = params.a_xy * params.period() * alpha0(twice_j, twice_m);
    (x.cos(), x.sin())
}

/// Exact `U_Fⁿ |m ↑⟩` for the XX coupling at zero pulse error.
///
/// Even `n`: `β|m↑⟩ + γ|m+1 ↓⟩`; odd `n`: `β|−m ↓⟩ + γ|−m−1 ↑⟩`.
pub fn xx_exact(basis: &SectorBasis, twice_m: i64, n: u64, params: &ModelParams) -> Result<XxAmplitudes> {
    require_xx(basis, params)?;
    if params.theta_e != 0.0 || params.theta_n != 0.0 {
        return Err(Error::InvalidParameter("exact XX oracle needs zero pulse error".into()));
    }
    let start = Label::new(twice_m, Sigma::Up);
    if !basis.contains(start) {
        return Err(Error::InvalidState(format!("{start} is outside the sector")));
    }
    let (c, s) = cos_sin(params, basis.twice_j() as i64, twice_m);
    let i = Complex64::new(0.0, 1.0);
    let (beta2, gamma2) = (Complex64::new(c * c - s * s, 0.0), -2.0 * i * s * c);
    let (mut beta, mut gamma) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    for _ in 0..n / 2 {
        (beta, gamma) = (beta * beta2 + gamma * gamma2, beta * gamma2 + gamma * beta2);
    }
    let labels = if n % 2 == 1 {
        (beta, gamma) = (beta * c - i * gamma * s, gamma * c - i * beta * s);
        [Label::new(-twice_m, Sigma::Down), Label::new(-twice_m - 2, Sigma::Up)]
    } else {
        [start, Label::new(twice_m + 2, Sigma::Down)]
    };
    let g = global_phase(basis, n);
    Ok(XxAmplitudes {
        labels,
        beta: g * beta,
        gamma: g * gamma,
    })
}

/// Amplitudes of `U_F(θ)² |m ↑⟩` for the XX coupling through first order in
/// a common pulse error `θ = θ_e = θ_n`, zeroth-order terms first.
pub fn xx_two_cycle_first_order(
    basis: &SectorBasis,
    twice_m: i64,
    params: &ModelParams,
) -> Result<Vec<(Label, Complex64)>> {
    require_xx(basis, params)?;
    if params.theta_e != params.theta_n {
        return Err(Error::InvalidParameter("two-cycle XX result needs θ_e = θ_n".into()));
    }
    let tj = basis.twice_j() as i64;
    let start = Label::new(twice_m, Sigma::Up);
    if !basis.contains(start) {
        return Err(Error::InvalidState(format!("{start} is outside the sector")));
    }
    let i = Complex64::new(0.0, 1.0);
    let (cm, sm) = cos_sin(params, tj, twice_m);
    let (cl, sl) = cos_sin(params, tj, twice_m - 2);
    let (cu, su) = cos_sin(params, tj, twice_m + 2);
    let a_m = alpha0(tj, twice_m);
    let a_l = alpha0(tj, twice_m - 2);
    let a_u = alpha0(tj, twice_m + 2);
    let d = cm * cm - sm * sm;

    let g_lower_up = cm * (a_l * cl - i * sl) - sm * sl * a_m + d * a_l;
    let g_down = cm * (cl - i * a_l * sl) - i * sm * a_m * cl + d - 2.0 * i * sm * cm * a_m;
    let g_upper_up = cm * cu * a_m - sm * su * a_u - i * sm * cu + d * a_m - 2.0 * i * sm * cm;
    let g_top_down = -i * cm * su * a_m - i * sm * cu * a_u - sm * su - 2.0 * i * sm * cm * a_u;

    let g = global_phase(basis, 2);
    let first = g * Complex64::new(0.0, 0.5 * params.theta_e);
    let candidates = [
        (start, g * d),
        (Label::new(twice_m + 2, Sigma::Down), g * (-2.0 * i * sm * cm)),
        (Label::new(twice_m - 2, Sigma::Up), first * g_lower_up),
        (Label::new(twice_m, Sigma::Down), first * g_down),
        (Label::new(twice_m + 2, Sigma::Up), first * g_upper_up),
        (Label::new(twice_m + 4, Sigma::Down), first * g_top_down),
    ];
    Ok(candidates.into_iter().filter(|(l, _)| basis.contains(*l)).collect())
}

/// Period of the drive for `ω`, for callers working with `A·T`.
pub fn period_of(omega: f64) -> f64 {
    2.0 * PI / omega
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: f64, count: u64) -> Complex64 {
        (0..=count).map(|r| Complex64::from_polar(1.0, r as f64 * x)).sum()
    }

    #[test]
    fn geometric_sums_match_direct_summation() {
        for &x in &[0.0, 0.3, -1.7, PI, 2.0 * PI, 5.1] {
            for count in [0, 1, 2, 7, 40] {
                assert!((one_plus_sum(x, count) - direct(x, count)).norm() < 1e-11, "x={x} count={count}");
            }
        }
    }

    #[test]
    fn odd_coupling_cancels_neighbour_sums() {
        for k in [-3.0, 1.0, 3.0, 5.0] {
            let x = 0.5 * k * period_of(1.0);
            for p in 1..6 {
                assert!(one_plus_sum(x, 2 * p - 1).norm() < 1e-12);
                assert!(one_plus_sum(-x, 2 * p - 1).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn robustness_condition() {
        assert!(ising_robustness(1.0, 1.0));
        assert!(ising_robustness(-3.0, 1.0));
        assert!(ising_robustness(6.0, 2.0));
        assert!(!ising_robustness(2.0, 1.0));
        assert!(!ising_robustness(0.0, 1.0));
        assert!(!ising_robustness(1.0 + 1e-6, 1.0));
        assert!(!ising_robustness(1.0, 0.0));
    }

    #[test]
    fn ladder_symmetries() {
        let tj = 9;
        for tm in (-tj..=tj).step_by(2) {
            let a = LadderCoefficient::new(tj, tm);
            assert!(a.alpha_plus >= 0.0 && a.alpha_minus >= 0.0);
            assert!((LadderCoefficient::new(tj, -tm).alpha_plus - ladder_coefficient(tj, tm - 2, true)).abs() < 1e-12 || tm - 2 < -tj);
            assert!((LadderCoefficient::new(tj, -tm).alpha_minus - a.alpha_plus).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_cases() {
        let b = SectorBasis::largest(5).unwrap();
        let p = ModelParams::ising(1.3, 100.0, 1.0);
        let l = Label::new(3, Sigma::Down);
        assert_eq!(ising_exact(&b, l, 0, &p).unwrap(), (l, Complex64::new(1.0, 0.0)));
        assert!(ising_exact(&b, l, 1, &ModelParams::xx(1.0, 0.0, 1.0)).is_err());
        assert!(ising_first_order(&b, l, 2, &p).is_err());

        let xx = ModelParams::xx(0.0, 0.0, 1.0);
        for n in [0, 2, 8] {
            let r = xx_exact(&b, 1, n, &xx).unwrap();
            assert!((r.beta * global_phase(&b, n).conj() - 1.0).norm() < 1e-15);
            assert_eq!(r.gamma.norm(), 0.0);
        }
        assert!(xx_exact(&b, 1, 2, &ModelParams::xx(1.0, 2.0, 1.0)).is_err());
        assert!(xx_exact(&SectorBasis::new(5, 3).unwrap(), 1, 2, &ModelParams::xx(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn first_order_corrections_vanish_at_zero_error() {
        let b = SectorBasis::largest(5).unwrap();
        let p = ModelParams::ising(1.3, 100.0, 1.0);
        let amps = ising_first_order(&b, Label::new(1, Sigma::Up), 6, &p).unwrap();
        assert!(amps[1..].iter().all(|(_, a)| a.norm() == 0.0));
        let xx = ModelParams::xx(0.4, 0.0, 1.0);
        let amps = xx_two_cycle_first_order(&b, 1, &xx).unwrap();
        assert!(amps[2..].iter().all(|(_, a)| a.norm() == 0.0));
    }

    #[test]
    fn two_cycle_zeroth_order_matches_exact() {
        let b = SectorBasis::largest(7).unwrap();
        let p = ModelParams::xx(0.37, 0.0, 1.0);
        for tm in [-7, -1, 3, 5] {
            let amps = xx_two_cycle_first_order(&b, tm, &p).unwrap();
            let exact = xx_exact(&b, tm, 2, &p).unwrap();
            assert!((amps[0].1 - exact.beta).norm() < 1e-14);
            let (c, s) = cos_sin(&p, 7, tm);
            assert!((amps[0].1 * global_phase(&b, 2).conj() - (c * c - s * s)).norm() < 1e-14);
        }
    }
}
