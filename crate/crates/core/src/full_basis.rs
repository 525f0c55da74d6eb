//! Unsymmetrized product-basis simulator with per-spin couplings.
//!
//! Basis index bits: the central spin is the most significant bit, satellite
//! `p` sits at bit `N−1−p`; a 0 bit is spin up.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{order_parameter_observable, StateVector};
use crate::error::{Error, Result};
use crate::matrix::{hermitian_expm, CMatrix, CVector, HermitianMatrix, UnitaryMatrix};
use crate::operators::ladder_coefficient;
use crate::params::ModelParams;
use crate::sector::{SectorBasis, Sigma};

pub const MAX_SATELLITES: usize = 14;

/// Generator behind `sample_couplings`, recorded in run manifests.
pub const RNG_IDENTITY: &str =
    "rand_chacha 0.9 ChaCha8Rng (seed_from_u64(seed), stream = realization index) + rand_distr 0.5 Normal";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullBasisModel {
    pub a_xy: Vec<f64>,
    pub a_z: Vec<f64>,
    pub b_z: f64,
    #[serde(default)]
    pub b_nz: f64,
    pub omega: f64,
    pub theta_e: f64,
    pub theta_n: f64,
}

impl FullBasisModel {
    pub fn new(a_xy: Vec<f64>, a_z: Vec<f64>, params: &ModelParams) -> Result<Self> {
        if a_xy.len() != a_z.len() {
            return Err(Error::InvalidParameter("per-spin coupling lists differ in length".into()));
        }
        check_size(a_xy.len())?;
        params.validate()?;
        if a_xy.iter().chain(&a_z).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        Ok(Self {
            a_xy,
            a_z,
            b_z: params.b_z,
            b_nz: params.b_nz,
            omega: params.omega,
            theta_e: params.theta_e,
            theta_n: params.theta_n,
        })
    }

    pub fn homogeneous(params: &ModelParams, n_satellites: usize) -> Result<Self> {
        Self::new(vec![params.a_xy; n_satellites], vec![params.a_z; n_satellites], params)
    }

    pub fn n_satellites(&self) -> usize {
        self.a_xy.len()
    }

    pub fn dim(&self) -> usize {
        1 << (self.n_satellites() + 1)
    }

    pub fn is_homogeneous(&self) -> bool {
        let same = |v: &[f64]| v.windows(2).all(|w| w[0] == w[1]);
        same(&self.a_xy) && same(&self.a_z)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Same model with the given in-plane couplings.
    pub fn with_a_xy(&self, a_xy: Vec<f64>) -> Result<Self> {
        let mut m = self.clone();
        if a_xy.len() != m.a_z.len() {
            return Err(Error::InvalidParameter("coupling list has the wrong length".into()));
        }
        m.a_xy = a_xy;
        Ok(m)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SATELLITES {
        return Err(Error::Unsupported(format!(
            "full-basis simulation supports 1..={MAX_SATELLITES} satellites, got {n}"
        )));
    }
    Ok(())
}

fn satellite_bit(n: usize, p: usize) -> usize {
    1 << (n - 1 - p)
}

fn central_bit(n: usize) -> usize {
    1 << n
}

fn spin_z(state: usize, bit: usize) -> f64 {
    if state & bit == 0 {
        0.5
    } else {
        -0.5
    }
}

pub fn build_full_hamiltonian(model: &FullBasisModel) -> Result<HermitianMatrix> {
    let n = model.n_satellites();
    check_size(n)?;
    let dim = model.dim();
    let c = central_bit(n);
    let mut h = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let sz = spin_z(s, c);
        let mut diag = model.b_z * sz;
        for p in 0..n {
            let bit = satellite_bit(n, p);
            let iz = spin_z(s, bit);
            diag += model.a_z[p] * iz * sz + model.b_nz * iz;
            // I_p⁺S⁻ + I_p⁻S⁺ swaps antiparallel central/satellite pairs.
            if (s & c == 0) != (s & bit == 0) {
                h[(s ^ c ^ bit, s)] += Complex64::new(model.a_xy[p], 0.0);
            }
        }
        h[(s, s)] = Complex64::new(diag, 0.0);
    }
    HermitianMatrix::new(h)
}

/// Left-multiply `m` by a single-spin gate acting on `bit`.
fn apply_single_spin(m: &mut CMatrix, bit: usize, gate: [[Complex64; 2]; 2]) {
    let dim = m.nrows();
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for col in 0..m.ncols() {
            let (a, b) = (m[(r0, col)], m[(r1, col)]);
            m[(r0, col)] = gate[0][0] * a + gate[0][1] * b;
            m[(r1, col)] = gate[1][0] * a + gate[1][1] * b;
        }
    }
}

/// `exp(−i φ σ^x / 2)`.
fn x_rotation(phi: f64) -> [[Complex64; 2]; 2] {
    let c = Complex64::new((0.5 * phi).cos(), 0.0);
    let s = Complex64::new(0.0, -(0.5 * phi).sin());
    [[c, s], [s, c]]
}

/// Product of per-spin pulses applied to `m`.
fn apply_pulse(model: &FullBasisModel, m: &mut CMatrix) {
    let n = model.n_satellites();
    apply_single_spin(m, central_bit(n), x_rotation(PI - model.theta_e));
    let sat = x_rotation(PI - model.theta_n);
    for p in 0..n {
        apply_single_spin(m, satellite_bit(n, p), sat);
    }
}

pub fn full_pulse(model: &FullBasisModel) -> Result<UnitaryMatrix> {
    check_size(model.n_satellites())?;
    let mut m = CMatrix::identity(model.dim(), model.dim());
    apply_pulse(model, &mut m);
    UnitaryMatrix::new(m)
}

/// `U_F = pulse · exp(−i H0 T)` on the full product basis.
pub fn full_floquet(model: &FullBasisModel) -> Result<UnitaryMatrix> {
    let h = build_full_hamiltonian(model)?;
    let mut m = hermitian_expm(&h, model.period())?.into_inner();
    apply_pulse(model, &mut m);
    UnitaryMatrix::new(m)
}

/// Collective satellite operators `(I_t^z, I_t^+)` on the full basis.
fn collective_satellite_ops(n: usize) -> (CMatrix, CMatrix) {
    let dim = 1 << (n + 1);
    let mut iz = CMatrix::zeros(dim, dim);
    let mut ip = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        for p in 0..n {
            let bit = satellite_bit(n, p);
            iz[(s, s)] += Complex64::new(spin_z(s, bit), 0.0);
            if s & bit != 0 {
                ip[(s ^ bit, s)] += Complex64::new(1.0, 0.0);
            }
        }
    }
    (iz, ip)
}

/// `I_t² = I⁻I⁺ + I^z(I^z + 1)` on the full basis.
pub fn total_satellite_casimir(n_satellites: usize) -> Result<CMatrix> {
    check_size(n_satellites)?;
    let (iz, ip) = collective_satellite_ops(n_satellites);
    let dim = iz.nrows();
    Ok(ip.adjoint() * &ip + &iz * (&iz + CMatrix::identity(dim, dim)))
}

/// Isometry from a collective sector into the full basis (columns are the
/// embedded sector basis states).
///
/// The highest-weight state pairs the first `N − 2j` satellites into
/// singlets and leaves the rest up; lower `m` follow from `I⁻`.
pub fn sector_embedding(basis: &SectorBasis) -> Result<CMatrix> {
    let n = basis.n_satellites();
    check_size(n)?;
    let tj = basis.twice_j() as i64;
    let pairs = (n - basis.twice_j()) / 2;
    let sat_dim = 1usize << n;

    // Satellite-only vectors (indexed by the low N bits).
    let mut top = CVector::zeros(sat_dim);
    top[0] = Complex64::new(1.0, 0.0);
    for k in 0..pairs {
        let (a, b) = (satellite_bit(n, 2 * k), satellite_bit(n, 2 * k + 1));
        let mut next = CVector::zeros(sat_dim);
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for s in 0..sat_dim {
            if top[s] == Complex64::new(0.0, 0.0) {
                continue;
            }
            // |↑↓⟩ − |↓↑⟩ on the pair.
            next[s | b] += w * top[s];
            next[s | a] -= w * top[s];
        }
        top = next;
    }
    let lower = |v: &CVector| {
        let mut out = CVector::zeros(sat_dim);
        for s in 0..sat_dim {
            if v[s] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for p in 0..n {
                let bit = satellite_bit(n, p);
                if s & bit == 0 {
                    out[s | bit] += v[s];
                }
            }
        }
        out
    };
    let mut levels = vec![top];
    for level in 1..=basis.twice_j() {
        let twice_m = tj - 2 * (level as i64 - 1);
        let alpha = ladder_coefficient(tj, twice_m, false);
        let next = lower(levels.last().unwrap()) / Complex64::new(alpha, 0.0);
        levels.push(next);
    }

    let c = central_bit(n);
    let mut e = CMatrix::zeros(2 * sat_dim, basis.dim());
    for (col, label) in basis.labels().enumerate() {
        let v = &levels[basis.level_index(label.twice_m).expect("label from basis")];
        let offset = if label.sigma == Sigma::Up { 0 } else { c };
        for s in 0..sat_dim {
            e[(s | offset, col)] = v[s];
        }
    }
    Ok(e)
}

/// Product state from a `u`/`d` string: satellites first, central spin last.
pub fn product_state(n_satellites: usize, spins: &str) -> Result<StateVector> {
    check_size(n_satellites)?;
    let chars: Vec<char> = spins.trim().chars().collect();
    if chars.len() != n_satellites + 1 {
        return Err(Error::InvalidState(format!(
            "product state '{spins}' needs {} spins (satellites then central)",
            n_satellites + 1
        )));
    }
    let mut index = 0;
    for (k, ch) in chars.iter().enumerate() {
        let bit = if k < n_satellites {
            satellite_bit(n_satellites, k)
        } else {
            central_bit(n_satellites)
        };
        match ch {
            'u' | 'U' => {}
            'd' | 'D' => index |= bit,
            _ => return Err(Error::InvalidState(format!("unexpected spin '{ch}' in '{spins}'"))),
        }
    }
    Ok(StateVector::unit(2 << n_satellites, index))
}

/// `I^z_t / N` on the full basis.
pub fn full_magnetization_weights(n_satellites: usize) -> Vec<f64> {
    let dim = 2usize << n_satellites;
    (0..dim)
        .map(|s| {
            (0..n_satellites)
                .map(|p| spin_z(s, satellite_bit(n_satellites, p)))
                .sum::<f64>()
                / n_satellites as f64
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub mean: f64,
    /// Standard deviation `δA_xy` of the per-spin couplings.
    pub std: f64,
    pub seed: u64,
    pub n_realizations: usize,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || !(self.std >= 0.0) || !self.std.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "disorder needs finite mean and std ≥ 0, got mean={} std={}",
                self.mean, self.std
            )));
        }
        Ok(())
    }
}

/// Couplings of realization `index`; depends only on `(seed, index)`.
pub fn sample_realization(spec: &DisorderSpec, n_satellites: usize, index: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let normal = Normal::new(spec.mean, spec.std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    Ok((0..n_satellites).map(|_| normal.sample(&mut rng)).collect())
}

pub fn sample_couplings(spec: &DisorderSpec, n_satellites: usize) -> Result<Vec<Vec<f64>>> {
    (0..spec.n_realizations as u64)
        .map(|k| sample_realization(spec, n_satellites, k))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSample {
    pub realization: usize,
    pub couplings: Vec<f64>,
    pub order_parameter: f64,
}

/// Order parameter for each disorder realization; the base model supplies
/// everything except the in-plane couplings.
pub fn disorder_order_parameter(
    spec: &DisorderSpec,
    base: &FullBasisModel,
    psi0: &StateVector,
    n_cycles: u64,
) -> Result<Vec<DisorderSample>> {
    spec.validate()?;
    let n = base.n_satellites();
    if psi0.dim() != base.dim() {
        return Err(Error::InvalidState("initial state does not match the full basis".into()));
    }
    let weights = full_magnetization_weights(n);
    (0..spec.n_realizations)
        .into_par_iter()
        .map(|k| {
            let couplings = sample_realization(spec, n, k as u64)?;
            let model = base.with_a_xy(couplings.clone())?;
            let u = full_floquet(&model)?;
            Ok(DisorderSample {
                realization: k,
                couplings,
                order_parameter: order_parameter_observable(&u, &weights, psi0, n_cycles)?,
            })
        })
        .collect()
}

/// Mean and sample standard deviation of the realization values.
pub fn aggregate(samples: &[DisorderSample]) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.order_parameter).sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|s| (s.order_parameter - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{commutator, max_abs};

    #[test]
    fn two_spin_exchange_matrix() {
        let a = 0.8;
        let mut p = ModelParams::heisenberg(a, 0.3, 1.0);
        p.b_nz = 0.0;
        let m = FullBasisModel::homogeneous(&p, 1).unwrap();
        let h = build_full_hamiltonian(&m).unwrap();
        // Index = 2·central + satellite, 0 = up.
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = Complex64::new(a / 4.0 + 0.15, 0.0);
        expected[(1, 1)] = Complex64::new(-a / 4.0 + 0.15, 0.0);
        expected[(2, 2)] = Complex64::new(-a / 4.0 - 0.15, 0.0);
        expected[(3, 3)] = Complex64::new(a / 4.0 - 0.15, 0.0);
        expected[(1, 2)] = Complex64::new(a, 0.0);
        expected[(2, 1)] = Complex64::new(a, 0.0);
        assert!(max_abs(&(h.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn zero_couplings_leave_central_zeeman() {
        let p = ModelParams::ising(0.0, 2.0, 1.0);
        let h = build_full_hamiltonian(&FullBasisModel::homogeneous(&p, 3).unwrap()).unwrap();
        for s in 0..16 {
            let expected = if s & 8 == 0 { 1.0 } else { -1.0 };
            assert_eq!(h.matrix()[(s, s)], Complex64::new(expected, 0.0));
        }
        assert_eq!(max_abs(&(h.matrix() - CMatrix::from_diagonal(&h.matrix().diagonal()))), 0.0);
    }

    #[test]
    fn size_limits() {
        let p = ModelParams::default();
        assert!(FullBasisModel::homogeneous(&p, 15).is_err());
        assert!(FullBasisModel::homogeneous(&p, 0).is_err());
        assert!(FullBasisModel::homogeneous(&p, 14).is_ok());
    }

    #[test]
    fn pure_pulse_is_period_two() {
        let m = FullBasisModel::homogeneous(&ModelParams::default(), 4).unwrap();
        let u = full_floquet(&m).unwrap();
        let u2 = u.matrix() * u.matrix();
        // Each spin picks up (−i)² = −1; five spins give −1.
        assert!(max_abs(&(u2 + CMatrix::identity(32, 32))) < 1e-12);
        let psi = product_state(4, "uuuuu").unwrap();
        let flipped = u.apply(psi.amplitudes());
        assert!((flipped[31].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_model_commutes_with_casimir() {
        let p = ModelParams::xxz(1.3, 0.4, 2.0, 1.0).with_theta(0.3);
        let m = FullBasisModel::homogeneous(&p, 4).unwrap();
        let c = total_satellite_casimir(4).unwrap();
        let h = build_full_hamiltonian(&m).unwrap();
        assert!(max_abs(&commutator(h.matrix(), &c)) < 1e-10);
        let u = full_floquet(&m).unwrap();
        assert!(max_abs(&commutator(u.matrix(), &c)) < 1e-10);
    }

    #[test]
    fn embedding_is_isometric() {
        for tj in [5, 3, 1] {
            let b = SectorBasis::new(5, tj).unwrap();
            let e = sector_embedding(&b).unwrap();
            let gram = e.adjoint() * &e;
            assert!(max_abs(&(gram - CMatrix::identity(b.dim(), b.dim()))) < 1e-12);
            let c = total_satellite_casimir(5).unwrap();
            let j = tj as f64 / 2.0;
            let ce = &c * &e - &e * Complex64::new(j * (j + 1.0), 0.0);
            assert!(max_abs(&ce) < 1e-12);
        }
    }

    #[test]
    fn product_state_parsing() {
        let psi = product_state(5, "uuuuud").unwrap();
        assert_eq!(psi.amplitudes()[32], Complex64::new(1.0, 0.0));
        let psi = product_state(2, "dud").unwrap();
        assert_eq!(psi.amplitudes()[0b110], Complex64::new(1.0, 0.0));
        assert!(product_state(5, "uuuu").is_err());
        assert!(product_state(2, "uxu").is_err());
    }

    #[test]
    fn zero_std_gives_mean() {
        let spec = DisorderSpec { mean: 5.7, std: 0.0, seed: 3, n_realizations: 4 };
        for r in sample_couplings(&spec, 5).unwrap() {
            assert!(r.iter().all(|&c| c == 5.7));
        }
    }

    #[test]
    fn sampling_is_reproducible_and_streams_differ() {
        let spec = DisorderSpec { mean: 1.0, std: 0.2, seed: 42, n_realizations: 3 };
        let a = sample_couplings(&spec, 6).unwrap();
        assert_eq!(a, sample_couplings(&spec, 6).unwrap());
        assert_ne!(a[0], a[1]);
        assert_eq!(a[2], sample_realization(&spec, 6, 2).unwrap());
        assert!(DisorderSpec { std: -1.0, ..spec }.validate().is_err());
    }

    #[test]
    fn sample_mean_converges() {
        let spec = DisorderSpec { mean: 5.7, std: 0.2, seed: 7, n_realizations: 1 };
        let draws = sample_realization(&spec, 10_000, 0).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 5.7).abs() < 3.0 * 0.2 / 100.0);
    }

    #[test]
    fn aggregate_statistics() {
        let s = |v| DisorderSample { realization: 0, couplings: vec![], order_parameter: v };
        assert_eq!(aggregate(&[]), None);
        assert_eq!(aggregate(&[s(0.5)]), Some((0.5, 0.0)));
        let (m, sd) = aggregate(&[s(1.0), s(3.0)]).unwrap();
        assert!((m - 2.0).abs() < 1e-15 && (sd - 2f64.sqrt()).abs() < 1e-15);
    }
}
